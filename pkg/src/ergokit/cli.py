"""Command-line surface.

Every command loads the system/observable catalog, runs one estimator or
construction, and emits CSV/JSON artifacts plus diagnostic figures into the
output directory, together with a manifest listing every file and
parameter.  Exit codes: 0 success, 2 configuration error, 3 unsupported
oracle for the system kind, 4 certificate failure.
"""

from __future__ import annotations

import argparse
import json
import math  # noqa: F401  (used by shadow's pseudo-orbit depth)
import os
import sys
from fractions import Fraction

import numpy as np

from .catalog import CatalogError, load_catalog
from .complexity import (
    BernoulliSampler,
    DiracWordSampler,
    entropy_estimate,
    katok_entropy,
    mdim_estimate,
    pressure_estimate,
)
from .gluing import (
    SegmentSpec,
    approximate_by_periodic_measure,
    build_periodic_net,
    glue,
    glue_periodic,
    gluing_from_shadowing,
    shadow,
)
from .historic import (
    CertificateFailed,
    build_fractal_family,
    build_schedule,
    construct_wild_point,
    entropy_lower_certificate,
    verify_fractal_is_historic,
    verify_oscillation,
)
from .observables import Displacement, accumulation_set
from .report import (
    chain_recurrence_figure,
    rotation_figure,
    scaling_figure,
    wild_figure,
    write_csv,
    write_json,
    write_manifest,
)
from .rotation import estimate_rotation_set, rotation_from_periodics, rotation_number
from .symbolic import SymbolPoint
from .systems import DoublingMap, ShiftSystem, TorusLift, UnsupportedOracle, chain_recurrence


class CertificateFailure(RuntimeError):
    pass


def parse_scale(text: str) -> float:
    """Parse one epsilon value; dyadic notation 2^-k is exact."""
    text = text.strip()
    if text.startswith("2^"):
        return float(2.0 ** float(text[2:]))
    return float(text)


def parse_scale_range(text: str):
    """'2^-3..2^-6' walks dyadic exponents; 'a,b,c' lists values."""
    if ".." in text:
        lo, hi = text.split("..")
        if lo.strip().startswith("2^") and hi.strip().startswith("2^"):
            e0 = int(lo.strip()[2:])
            e1 = int(hi.strip()[2:])
            step = 1 if e1 >= e0 else -1
            return [2.0**e for e in range(e0, e1 + step, step)]
        a, b = float(lo), float(hi)
        return list(np.linspace(a, b, 4))
    return [parse_scale(tok) for tok in text.split(",")]


def parse_int_range(text: str):
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",")]


def _parse_anchor(system, token: str):
    token = token.strip()
    if isinstance(system, ShiftSystem):
        return system.shift.point_from_word(tuple(int(c) for c in token))
    if "/" in token:
        return Fraction(token)
    vals = [float(v) for v in token.split(":")]
    return np.asarray(vals) if len(vals) > 1 else (vals[0] if isinstance(system, DoublingMap)
                                                   else np.asarray(vals))
def _parse_segments(system, text: str):
    segments = []
    for part in text.split(";"):
        anchor, n = part.rsplit(",", 1)
        segments.append((_parse_anchor(system, anchor), int(n)))
    return segments


def _point_payload(point):
    if isinstance(point, SymbolPoint):
        return {"pre": "".join(map(str, point.pre)), "cycle": "".join(map(str, point.cycle))}
    if isinstance(point, Fraction):
        return {"fraction": str(point)}
    return {"coords": [format(float(v), ".17g") for v in np.ravel(point)]}


def _orbit_payload(orbit, spec):
    payload = {
        "gaps": orbit.gaps,
        "gap_bound": orbit.gap_bound,
        "offsets": orbit.offsets,
        "period": orbit.period,
        "errors": orbit.errors,
        "eps": orbit.eps,
        "anchors": [_point_payload(a) for a, _ in spec.segments],
        "lengths": [n for _, n in spec.segments],
        "point": _point_payload(orbit.point),
    }
    return payload


# ---------------------------------------------------------------------------
# command handlers: each returns (files, manifest_extras)
# ---------------------------------------------------------------------------

def cmd_rotset(args, cat, out):
    system = cat.system(args.system)
    obs = cat.observable(args.obs) if args.obs else None
    est = estimate_rotation_set(system, seeds=args.seeds, n=args.n, seed=args.seed,
                                observable=obs, period_budget=args.period_budget,
                                threads=args.threads)
    rows = [(tag, args.n, *map(float, p)) for tag, p in zip(est.tags, est.points)]
    d = est.points.shape[1]
    files = [write_csv(os.path.join(out, "rotset.csv"),
                       ["tag", "n"] + [f"v{i+1}" for i in range(d)], rows)]
    if not args.no_figures and d <= 2:
        try:
            per = rotation_from_periodics(system, args.period_budget, observable=obs)
        except UnsupportedOracle:
            per = None
        files.append(rotation_figure(os.path.join(out, "rotset.svg"), est, per,
                                     title=f"rotation set: {args.system}"))
    hull = [[float(v) for v in vert] for vert in est.hull.vertices]
    return files, {"hull_vertices": json.dumps(hull)}


def cmd_rotnum(args, cat, out):
    system = cat.system(args.system)
    if not isinstance(system, TorusLift) or system.dim != 1:
        raise UnsupportedOracle("rotnum needs a circle lift")
    res = rotation_number(system, args.x, n=args.n)
    files = [write_csv(os.path.join(out, "rotnum.csv"),
                       ["x", "n", "value", "cauchy_gap", "locked"],
                       [(args.x, args.n, res.value, res.cauchy_gap,
                         str(res.locked) if res.locked is not None else "")])]
    return files, {"value": res.value, "locked": res.locked}


def cmd_pointwise(args, cat, out):
    system = cat.system(args.system)
    obs = cat.observable(args.obs) if args.obs else Displacement(system)
    x = _parse_anchor(system, args.x) if args.x else _default_point(system)
    cloud = accumulation_set(system, obs, x, args.horizon)
    rows = [(int(t), *map(float, v)) for t, v in zip(cloud.times, cloud.averages)]
    d = cloud.averages.shape[1]
    files = [write_csv(os.path.join(out, "pointwise.csv"),
                       ["time"] + [f"v{i+1}" for i in range(d)], rows)]
    if not args.no_figures:
        files.append(wild_figure(os.path.join(out, "pointwise.svg"), cloud.times,
                                 cloud.averages, title=f"averages: {args.system}"))
    return files, {"diameter": cloud.diameter, "clusters": cloud.n_clusters,
                   "trivial_at_0.05": cloud.is_trivial()}


def _default_point(system):
    if isinstance(system, ShiftSystem):
        return system.shift.point_from_word((0,))
    if isinstance(system, DoublingMap):
        return 0.3
    return np.full(system.dim, 0.37)


def _emit_pressure(est, out, stem, no_figures):
    rows = []
    for i, eps in enumerate(est.eps_grid):
        for j, n in enumerate(est.n_grid):
            rows.append((float(eps), int(n), float(est.table[i, j]), float(est.rates[i])))
    files = [write_csv(os.path.join(out, f"{stem}.csv"),
                       ["epsilon", "n", "log_sum", "fit_slope"], rows)]
    if not no_figures:
        files.append(scaling_figure(os.path.join(out, f"{stem}.svg"), est,
                                    title=stem))
    return files


def cmd_entropy(args, cat, out):
    system = cat.system(args.system)
    est = entropy_estimate(system, parse_scale_range(args.eps), parse_int_range(args.n))
    files = _emit_pressure(est, out, "entropy", args.no_figures)
    return files, {"h_top": est.value, "mdim_lower": est.mdim_lower,
                   "mdim_upper": est.mdim_upper}


def cmd_pressure(args, cat, out):
    system = cat.system(args.system)
    psi = cat.observable(args.psi) if args.psi else None
    est = pressure_estimate(system, psi, parse_scale_range(args.eps), parse_int_range(args.n))
    files = _emit_pressure(est, out, "pressure", args.no_figures)
    return files, {"P_top": est.value}


def cmd_mdim(args, cat, out):
    system = cat.system(args.system)
    lo, hi, est = mdim_estimate(system, parse_scale_range(args.eps), parse_int_range(args.n))
    files = _emit_pressure(est, out, "mdim", args.no_figures)
    files.append(write_csv(os.path.join(out, "mdim_rates.csv"), ["epsilon", "rate"],
                           [(float(e), float(r)) for e, r in zip(est.eps_grid, est.rates)]))
    return files, {"mdim_lower": lo, "mdim_upper": hi, "slope": est.mdim_slope}


def cmd_katok(args, cat, out):
    system = cat.system(args.system)
    psi = cat.observable(args.psi) if args.psi else None
    sampler = BernoulliSampler(args.bernoulli) if args.bernoulli is not None \
        else DiracWordSampler(tuple(int(c) for c in args.dirac))
    value, table, saturated = katok_entropy(
        system, sampler, psi, args.gamma, parse_scale_range(args.eps),
        parse_int_range(args.n), samples=args.samples, seed=args.seed)
    eps_grid = parse_scale_range(args.eps)
    n_grid = parse_int_range(args.n)
    rows = []
    for i, eps in enumerate(sorted(eps_grid, reverse=True)):
        for j, n in enumerate(sorted(n_grid)):
            rows.append((float(eps), int(n), float(table[i, j]), int(saturated[i, j])))
    files = [write_csv(os.path.join(out, "katok.csv"),
                       ["epsilon", "n", "log_span_weight", "saturated"], rows)]
    return files, {"estimate": value}


def cmd_chainrec(args, cat, out):
    system = cat.system(args.system)
    grid = chain_recurrence(system, args.boxes)
    rows = []
    for ci, comp in enumerate(grid.components):
        for box in sorted(comp):
            idx = (box,) if grid.dim == 1 else box
            rows.append((*idx, ci, int(grid.isolated[ci])))
    header = (["box"] if grid.dim == 1 else ["box_x", "box_y"]) + ["component", "isolated"]
    files = [write_csv(os.path.join(out, "chainrec.csv"), header, rows)]
    if not args.no_figures:
        files.append(chain_recurrence_figure(os.path.join(out, "chainrec.svg"), grid,
                                             title=f"chain recurrence: {args.system}"))
    return files, {"components": len(grid.components),
                   "isolated": sum(map(bool, grid.isolated)), "note": grid.note}


def cmd_glue(args, cat, out):
    system = cat.system(args.system)
    spec = SegmentSpec(_parse_segments(system, args.segments), parse_scale(args.eps))
    orbit = glue_periodic(system, spec) if args.periodic else glue(system, spec)
    ok = orbit.validate(system, spec)
    files = [write_json(os.path.join(out, "glue.json"),
                        {**_orbit_payload(orbit, spec), "validated": ok})]
    return files, {"validated": ok, "gaps": json.dumps(orbit.gaps)}


def cmd_shadow(args, cat, out):
    system = cat.system(args.system)
    rng = np.random.default_rng(args.seed)
    delta = parse_scale(args.delta)
    if isinstance(system, DoublingMap):
        cur = rng.random()
        pseudo = []
        for _ in range(args.length):
            pseudo.append(cur)
            cur = (2 * cur + rng.uniform(-delta, delta) / 2) % 1.0
    elif isinstance(system, ShiftSystem):
        pseudo = []
        word = [int(rng.integers(system.shift.alphabet_size))]
        depth = max(2, int(-math.log2(delta)) + 2)
        for _ in range(args.length + depth):
            word.append(int(rng.choice(np.nonzero(system.shift.transition[word[-1]])[0])))
        base = system.shift.point_from_word(tuple(word))
        cur = base
        for _ in range(args.length):
            pseudo.append(cur)
            cur = cur.shift()
    else:
        raise UnsupportedOracle("no shadowing oracle for this system kind")
    point, achieved = shadow(system, pseudo, delta)
    files = [write_json(os.path.join(out, "shadow.json"),
                        {"delta": delta, "length": args.length,
                         "achieved": achieved, "point": _point_payload(point)})]
    return files, {"achieved": achieved, "bound": 2 * delta}


def cmd_net(args, cat, out):
    system = cat.system(args.system)
    net = build_periodic_net(system, parse_scale(args.delta), budget=args.budget)
    payload = {
        "delta": net.delta,
        "K": net.K,
        "points": [_point_payload(p) for p in net.points],
        "periods": net.periods,
        "connections": {f"{i}->{j}": len(path) - 1 for (i, j), path in net.connections.items()},
    }
    files = [write_json(os.path.join(out, "net.json"), payload)]
    return files, {"size": len(net.points), "K": net.K}


def cmd_permeasure(args, cat, out):
    system = cat.system(args.system)
    target = []
    for part in args.target.split(";"):
        kind, rest = part.split(":")
        spec, weight = rest.rsplit(",", 1)
        if kind == "dirac":
            target.append((DiracWordSampler(tuple(int(c) for c in spec)), float(weight)))
        elif kind == "bernoulli":
            target.append((BernoulliSampler(float(spec)), float(weight)))
        else:
            raise CatalogError(f"unknown measure kind {kind!r}")
    res = approximate_by_periodic_measure(system, target, zeta=args.zeta,
                                          basis_depth=args.depth, seed=args.seed)
    rows = [(name, mine, want, gap) for name, mine, want, gap in res.per_basis]
    files = [
        write_csv(os.path.join(out, "permeasure.csv"),
                  ["basis", "orbit_average", "target_average", "gap"], rows),
        write_json(os.path.join(out, "permeasure.json"),
                   {"point": _point_payload(res.point), "bound": res.bound,
                    "zeta": res.zeta, "certified": res.certified,
                    "segment_lengths": res.segment_lengths}),
    ]
    return files, {"bound": res.bound, "certified": res.certified}


def _write_symbol_stream(path, point: SymbolPoint, total: int, width: int = 120):
    from .symbolic import symbol_array

    symbols = symbol_array(point, total)
    with open(path, "w") as fh:
        for i in range(0, len(symbols), width):
            fh.write("".join(map(str, symbols[i: i + width])) + "\n")
    return path


def cmd_wild(args, cat, out):
    system = cat.system(args.system)
    obs = cat.observable(args.obs)
    targets = [[float(v) for v in tok.split(":")] for tok in args.delta.split(",")]
    schedule = build_schedule(system, obs, targets, depth=args.depth, horizon=args.horizon)
    x, log = construct_wild_point(system, obs, schedule)
    report = verify_oscillation(system, obs, x, schedule)
    rows = [(r.level, r.index, r.checkpoint, *map(float, np.ravel(r.target)),
             r.measured, r.budget, int(r.passed)) for r in report.rows]
    d = len(np.ravel(report.rows[0].target))
    files = [
        write_csv(os.path.join(out, "wild_oscillation.csv"),
                  ["level", "index", "checkpoint"] + [f"target{i+1}" for i in range(d)]
                  + ["measured", "budget", "passed"], rows),
        _write_symbol_stream(os.path.join(out, "wild_point.txt"), x, log.total),
        write_json(os.path.join(out, "wild_schedule.json"), {
            "a_counts": schedule.a_counts, "m_levels": schedule.m_levels,
            "theta_length_form": schedule.theta_length,
            "theta_count_form": schedule.theta_count,
            "cap_limited": schedule.cap_limited,
            "total_length": schedule.total_length,
            "invariants": {k: str(v) for k, v in schedule.invariant_report.items()},
        }),
    ]
    if not args.no_figures:
        times = [r.checkpoint for r in report.rows]
        from .observables import running_averages

        avgs = running_averages(system, obs, x, times)
        files.append(wild_figure(os.path.join(out, "wild.svg"), times, avgs,
                                 targets=(times, [float(np.ravel(r.target)[0])
                                                  for r in report.rows]),
                                 title="wild point running averages"))
    if not report.passed:
        raise CertificateFailure("oscillation checkpoints exceeded their budgets")
    return files, {"passed": report.passed, "total_length": log.total}


def cmd_fractal(args, cat, out):
    system = cat.system(args.system)
    phi = cat.observable(args.obs)
    psi = cat.observable(args.psi) if args.psi else None
    fam = build_fractal_family(system, phi, psi, eps=parse_scale(args.eps),
                               gamma=args.gamma, t=args.t, depth=args.depth,
                               seed=args.seed)
    cert = entropy_lower_certificate(fam)
    hist = verify_fractal_is_historic(system, phi, fam, seed=args.seed)
    files = [write_json(os.path.join(out, "fractal.json"), {
        "counting_table": fam.counting_table(),
        "pressure_at_eps": fam.pressure_at_eps,
        "certificate": {"rate": cert.rate, "threshold": cert.threshold,
                        "passed": cert.passed},
        "historic": {"passed": hist.passed, "gap": hist.alternation_gap,
                     "required": hist.required_gap,
                     "rows": [(r.k, r.time, r.deviation, r.budget) for r in hist.rows]},
    })]
    return files, {"rate": cert.rate, "threshold": cert.threshold,
                   "certificate": cert.passed, "historic": hist.passed}


def cmd_certify(args, cat, out):
    files, extras = cmd_fractal(args, cat, out)
    if not extras["certificate"]:
        raise CertificateFailure(
            f"rate {extras['rate']:.4f} below threshold {extras['threshold']:.4f}")
    return files, extras


def cmd_accept(args, cat, out):
    from . import acceptance

    results = acceptance.run_all(echo=print)
    files = [write_json(os.path.join(out, "acceptance.json"),
                        [{"criterion": r.number, "name": r.name, "passed": r.passed,
                          "detail": r.detail, "seconds": round(r.seconds, 2)}
                         for r in results])]
    if not all(r.passed for r in results):
        raise CertificateFailure("acceptance suite has failing criteria")
    return files, {"passed": all(r.passed for r in results)}


# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--catalog", default=os.environ.get("ERGOKIT_CATALOG"),
                   help="catalog JSON path (default: built-in catalog)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-figures", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="ergokit",
                                     description="computational ergodic theory toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rotset", help="estimate the rotation set of a system")
    p.add_argument("--system", required=True)
    p.add_argument("--obs", default=None)
    p.add_argument("--seeds", type=int, default=64)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--period-budget", type=int, default=6)
    _add_common(p)
    p.set_defaults(handler=cmd_rotset)

    p = sub.add_parser("rotnum", help="rotation number of a circle lift")
    p.add_argument("--system", required=True)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--n", type=int, default=100_000)
    _add_common(p)
    p.set_defaults(handler=cmd_rotnum)

    p = sub.add_parser("pointwise", help="accumulation set of one orbit's averages")
    p.add_argument("--system", required=True)
    p.add_argument("--obs", default=None)
    p.add_argument("--x", default=None)
    p.add_argument("--horizon", type=int, default=50_000)
    _add_common(p)
    p.set_defaults(handler=cmd_pointwise)

    for name, handler in (("entropy", cmd_entropy), ("mdim", cmd_mdim)):
        p = sub.add_parser(name)
        p.add_argument("--system", required=True)
        p.add_argument("--eps", default="2^-3..2^-6")
        p.add_argument("--n", default="6..14")
        _add_common(p)
        p.set_defaults(handler=handler)

    p = sub.add_parser("pressure")
    p.add_argument("--system", required=True)
    p.add_argument("--psi", default=None)
    p.add_argument("--eps", default="2^-3..2^-6")
    p.add_argument("--n", default="6..14")
    _add_common(p)
    p.set_defaults(handler=cmd_pressure)

    p = sub.add_parser("katok", help="Katok span formula for a sampled measure")
    p.add_argument("--system", required=True)
    p.add_argument("--bernoulli", type=float, default=None)
    p.add_argument("--dirac", default="0")
    p.add_argument("--psi", default=None)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--eps", default="2^-1,2^-2")
    p.add_argument("--n", default="4..15")
    p.add_argument("--samples", type=int, default=100_000)
    _add_common(p)
    p.set_defaults(handler=cmd_katok)

    p = sub.add_parser("chainrec", help="grid chain-recurrence decomposition")
    p.add_argument("--system", required=True)
    p.add_argument("--boxes", type=int, default=256)
    _add_common(p)
    p.set_defaults(handler=cmd_chainrec)

    p = sub.add_parser("glue", help="glue orbit segments into one orbit")
    p.add_argument("--system", required=True)
    p.add_argument("--segments", required=True,
                   help="semicolon list 'anchor,n'; shift anchors are words")
    p.add_argument("--eps", default="2^-2")
    p.add_argument("--periodic", action="store_true")
    _add_common(p)
    p.set_defaults(handler=cmd_glue)

    p = sub.add_parser("shadow", help="shadow a sampled delta-pseudo-orbit")
    p.add_argument("--system", required=True)
    p.add_argument("--delta", default="2^-10")
    p.add_argument("--length", type=int, default=100)
    _add_common(p)
    p.set_defaults(handler=cmd_shadow)

    p = sub.add_parser("net", help="maximal delta-separated periodic net")
    p.add_argument("--system", required=True)
    p.add_argument("--delta", default="2^-2")
    p.add_argument("--budget", type=int, default=8)
    _add_common(p)
    p.set_defaults(handler=cmd_net)

    p = sub.add_parser("permeasure", help="periodic approximation of a measure")
    p.add_argument("--system", required=True)
    p.add_argument("--target", default="dirac:0,0.5;dirac:1,0.5",
                   help="semicolon list kind:spec,weight")
    p.add_argument("--zeta", type=float, default=0.05)
    p.add_argument("--depth", type=int, default=3)
    _add_common(p)
    p.set_defaults(handler=cmd_permeasure)

    p = sub.add_parser("wild", help="construct and verify a wild orbit")
    p.add_argument("--system", required=True)
    p.add_argument("--obs", required=True)
    p.add_argument("--delta", default="0.1,0.9",
                   help="comma list of target vectors; coordinates ':'-separated")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--horizon", type=int, default=10**6)
    _add_common(p)
    p.set_defaults(handler=cmd_wild)

    for name, handler in (("fractal", cmd_fractal), ("certify", cmd_certify)):
        p = sub.add_parser(name)
        p.add_argument("--system", required=True)
        p.add_argument("--obs", required=True)
        p.add_argument("--psi", default=None)
        p.add_argument("--eps", default="2^-3")
        p.add_argument("--gamma", type=float, default=0.01)
        p.add_argument("--t", type=float, default=0.9)
        p.add_argument("--depth", type=int, default=2)
        _add_common(p)
        p.set_defaults(handler=handler)

    p = sub.add_parser("accept", help="run the acceptance suite")
    _add_common(p)
    p.set_defaults(handler=cmd_accept)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    out = os.path.abspath(args.out)
    os.makedirs(out, exist_ok=True)
    params = {k: v for k, v in vars(args).items() if k != "handler"}
    cat = None
    try:
        cat = load_catalog(args.catalog)
        files, extras = args.handler(args, cat, out)
        params.update(extras)
        files.append(write_manifest(out, args.command, params, files))
        return 0
    except (CatalogError, ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        write_manifest(out, args.command, params, [], status="config-error", error=exc)
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except UnsupportedOracle as exc:
        write_manifest(out, args.command, params, [], status="unsupported", error=exc)
        print(f"unsupported oracle: {exc}", file=sys.stderr)
        return 3
    except (CertificateFailure, CertificateFailed) as exc:
        write_manifest(out, args.command, params, [], status="certificate-failed", error=exc)
        print(f"certificate failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
