import json
import os

import pytest

from ergokit.catalog import CatalogError, build_observable, build_system, load_catalog
from ergokit.cli import main, parse_int_range, parse_scale, parse_scale_range


def run_cli(args, tmp_path, sub="run"):
    out = tmp_path / sub
    code = main(args + ["--out", str(out)])
    return code, out


def read_manifest(out):
    with open(out / "manifest.json") as fh:
        return json.load(fh)


def test_parse_dyadic_scales():
    assert parse_scale("2^-3") == 0.125
    assert parse_scale_range("2^-3..2^-5") == [0.125, 0.0625, 0.03125]
    assert parse_int_range("6..9") == [6, 7, 8, 9]
    assert parse_scale_range("0.5,0.25") == [0.5, 0.25]


def test_default_catalog_has_documented_kinds():
    cat = load_catalog()
    for name in ("translation_3_7", "shear_sin2", "doubling", "full_shift_2",
                 "golden_sft", "interval_shift"):
        cat.system(name)
    for name in ("cyl1", "embed3", "disp_shear", "cob_plus_half"):
        cat.observable(name)


def test_catalog_rejects_unknown_kind():
    with pytest.raises(CatalogError):
        build_system({"name": "x", "kind": "mystery", "params": {}})
    with pytest.raises(CatalogError):
        build_observable({"name": "y", "kind": "mystery", "params": {}}, {})


def test_catalog_file_roundtrip(tmp_path):
    from ergokit.catalog import DEFAULT_CATALOG

    path = tmp_path / "cat.json"
    path.write_text(json.dumps(DEFAULT_CATALOG))
    cat = load_catalog(str(path))
    assert cat.system("doubling").kind == "doubling"


def test_rotset_outputs_and_manifest(tmp_path):
    code, out = run_cli(["rotset", "--system", "translation_3_7", "--seeds", "8",
                         "--n", "1500"], tmp_path)
    assert code == 0
    manifest = read_manifest(out)
    assert manifest["status"] == "ok"
    assert "rotset.csv" in manifest["files"]
    assert "rotset.svg" in manifest["files"]
    header = (out / "rotset.csv").read_text().splitlines()[0]
    assert header == "tag,n,v1,v2"


def test_entropy_command_value(tmp_path):
    import math

    code, out = run_cli(["entropy", "--system", "full_shift_2", "--eps", "2^-3..2^-6",
                         "--n", "6..14", "--no-figures"], tmp_path)
    assert code == 0
    value = float(read_manifest(out)["params"]["h_top"])
    assert value == pytest.approx(math.log(2), rel=0.02)


def test_config_error_exit_code_and_manifest(tmp_path):
    code, out = run_cli(["rotset", "--system", "missing_system"], tmp_path)
    assert code == 2
    manifest = read_manifest(out)
    assert manifest["status"] == "config-error"
    assert "missing_system" in manifest["error"]


def test_unsupported_oracle_exit_code(tmp_path):
    code, out = run_cli(["shadow", "--system", "golden_rotation"], tmp_path)
    assert code == 3
    assert read_manifest(out)["status"] == "unsupported"


def test_glue_json_payload(tmp_path):
    code, out = run_cli(["glue", "--system", "full_shift_2", "--segments", "0,3;1,3",
                         "--eps", "2^-2", "--periodic"], tmp_path)
    assert code == 0
    payload = json.loads((out / "glue.json").read_text())
    assert payload["validated"] is True
    assert payload["period"] == sum(payload["lengths"]) + sum(payload["gaps"])
    assert set(payload) >= {"gaps", "period", "errors", "anchors", "point"}


def test_wild_command_artifacts(tmp_path):
    code, out = run_cli(["wild", "--system", "full_shift_2", "--obs", "cyl1",
                         "--delta", "0.1,0.9", "--depth", "2", "--horizon", "100000",
                         "--no-figures"], tmp_path)
    assert code == 0
    stream = (out / "wild_point.txt").read_text().replace("\n", "")
    assert set(stream) <= {"0", "1"}
    schedule = json.loads((out / "wild_schedule.json").read_text())
    assert schedule["total_length"] == len(stream)


def test_certify_failure_exit_code(tmp_path):
    # gamma so tiny the settle lengths blow past every bound check
    code, out = run_cli(["certify", "--system", "full_shift_2", "--obs", "cyl1",
                         "--t", "0.999", "--gamma", "0.0001", "--depth", "1"], tmp_path)
    assert code in (2, 4)  # config rejection or certificate failure, never success


def test_permeasure_command(tmp_path):
    code, out = run_cli(["permeasure", "--system", "full_shift_2",
                         "--target", "dirac:0,0.5;dirac:1,0.5", "--zeta", "0.05"],
                        tmp_path)
    assert code == 0
    payload = json.loads((out / "permeasure.json").read_text())
    assert payload["certified"] is True


def test_chainrec_command(tmp_path):
    code, out = run_cli(["chainrec", "--system", "circle_north_south", "--boxes", "128",
                         "--no-figures"], tmp_path)
    assert code == 0
    manifest = read_manifest(out)
    assert manifest["params"]["components"] == "2"


def test_determinism_same_seed_two_thread_counts(tmp_path):
    blobs = []
    for threads in (1, 2):
        code, out = run_cli(["rotset", "--system", "shear_sin2", "--seeds", "24",
                             "--n", "1500", "--seed", "9", "--threads", str(threads),
                             "--no-figures"], tmp_path, sub=f"t{threads}")
        assert code == 0
        blobs.append((out / "rotset.csv").read_bytes())
    assert blobs[0] == blobs[1]
