import math

import numpy as np
import pytest

from ergokit.historic import (
    _binary_band_log_weight,
    build_fractal_family,
    build_schedule,
    construct_wild_point,
    entropy_lower_certificate,
    materialize_fractal_representative,
    sample_P_set,
    verify_fractal_is_historic,
    verify_oscillation,
)
from ergokit.observables import CylinderIndicator, SymbolEmbedding, orbit_values
from ergokit.symbolic import SymbolPoint, separation_depth
from ergokit.systems import UnsupportedOracle, full_shift, golden_mean_sft

from oracles import binomial_band_count

FS = full_shift(2)
CYL1 = CylinderIndicator((1,))


# -- P-sets ------------------------------------------------------------------

def test_p_set_zero_target():
    pts = sample_P_set(FS, CYL1, 0.0, 0.05, 50)
    assert pts[0] == SymbolPoint((), (0,))


def test_p_set_exact_frequency():
    pts = sample_P_set(FS, CYL1, 0.37, 0.01, 100)
    word = pts[0].prefix(100)
    assert sum(word) == 37


def test_p_set_vector_target():
    fs3 = full_shift(3)
    emb = SymbolEmbedding({0: (0, 0), 1: (1, 0), 2: (0, 1)})
    pts = sample_P_set(fs3, emb, (1 / 3, 1 / 3), 0.02, 99)
    word = pts[0].prefix(99)
    assert word.count(1) == 33 and word.count(2) == 33


def test_p_set_sft_search():
    gm = golden_mean_sft()
    pts = sample_P_set(gm, CYL1, 0.3, 0.05, 60, seed=3)
    avg = orbit_values(gm, CYL1, pts[0], 60).mean()
    assert abs(avg - 0.3) < 0.05


def test_p_set_unreachable_target():
    with pytest.raises(RuntimeError):
        sample_P_set(FS, CYL1, 0.37, 1e-9, 10)


# -- schedules ---------------------------------------------------------------

def test_schedule_invariants_checked():
    sched = build_schedule(FS, CYL1, [[0.1], [0.9]], depth=3, horizon=10**5)
    rep = sched.invariant_report
    assert rep["max_gap_times_k"] < 1.0
    deltas = [b.delta for b in sched.blocks]
    assert all(a > b for a, b in zip(deltas, deltas[1:]))
    ns = [b.n for b in sched.blocks]
    assert all(a < b for a, b in zip(ns, ns[1:]))
    for b in sched.blocks:
        avg = orbit_values(FS, CYL1, b.witnesses[0], b.n).mean(axis=0)
        assert np.linalg.norm(avg - b.target) < max(b.delta, 1e-15)


def test_schedule_degenerate_target():
    sched = build_schedule(FS, CYL1, [[0.5]], depth=2, horizon=10**5)
    assert all(b.target[0] == pytest.approx(0.5, abs=0.01) for b in sched.blocks)
    x, log = construct_wild_point(FS, CYL1, sched)
    rep = verify_oscillation(FS, CYL1, x, sched)
    assert rep.passed


def test_schedule_depth_cap():
    with pytest.raises(ValueError):
        build_schedule(FS, CYL1, [[0.1], [0.9]], depth=9)


def test_wild_point_passes_and_controls_fail():
    sched = build_schedule(FS, CYL1, [[0.1], [0.9]], depth=2, horizon=2 * 10**5)
    x, log = construct_wild_point(FS, CYL1, sched)
    assert verify_oscillation(FS, CYL1, x, sched).passed
    # base-point anchoring
    assert x.prefix(sched.base_prefix) == (0,) * sched.base_prefix
    fixed = verify_oscillation(FS, CYL1, SymbolPoint((), (1,)), sched)
    assert not fixed.passed
    rng = np.random.default_rng(5)
    bern = SymbolPoint((), tuple(int(s) for s in rng.integers(0, 2, 4001)))
    assert not verify_oscillation(FS, CYL1, bern, sched).passed


def test_wild_point_spread_monotone_in_depth():
    spreads = []
    for depth in (2, 3, 4):
        sched = build_schedule(FS, CYL1, [[0.1], [0.9]], depth=depth, horizon=10**6)
        x, log = construct_wild_point(FS, CYL1, sched)
        vals = orbit_values(FS, CYL1, x, log.total).ravel()
        avgs = np.cumsum(vals) / np.arange(1, log.total + 1)
        spreads.append(float(avgs[100:].max() - avgs[100:].min()))
    assert spreads[0] <= spreads[1] + 1e-12 <= spreads[2] + 2e-12


def test_wild_word_matches_itinerary():
    sched = build_schedule(FS, CYL1, [[0.2], [0.8]], depth=2, horizon=10**5)
    x, log = construct_wild_point(FS, CYL1, sched)
    assert log.total == sched.total_length
    for entry, block in zip(log.entries, sched.blocks):
        assert entry["checkpoint"] == block.checkpoint


# -- fractal family ----------------------------------------------------------

def test_band_dp_matches_brute_force():
    for n, ones, band in [(10, 5, 2.0), (12, 4, 3.0), (14, 7, 2.5)]:
        got = math.exp(_binary_band_log_weight(n, ones, band, 0.0, 0.0))
        want = binomial_band_count(n, ones, band)
        assert got == pytest.approx(want, rel=1e-9)


def test_band_dp_weighted_matches_brute_force():
    # weight e^(beta * ones) is constant over the family, so the weighted DP
    # must equal count * exp(beta * ones)
    n, ones, band, beta = 12, 6, 3.0, 0.7
    got = math.exp(_binary_band_log_weight(n, ones, band, 0.0, beta))
    want = binomial_band_count(n, ones, band) * math.exp(beta * ones)
    assert got == pytest.approx(want, rel=1e-9)


def test_fractal_counting_certificate():
    fam = build_fractal_family(FS, CYL1, None, eps=2.0**-3, gamma=0.01, t=0.9, depth=2)
    cert = entropy_lower_certificate(fam)
    assert cert.passed
    assert cert.rate >= 0.9 * math.log(2) - 0.09
    # cardinality bound per level (the cardsk inequality with this run's rate)
    for lv in fam.levels:
        assert lv.log_weight >= lv.n * (0.9 * fam.pressure_at_eps - 0.06) - 1e-9
    # gap vectors are constant (the pigeonhole table has one entry)
    for lv in fam.levels:
        assert len(set(lv.gap_vector)) <= 1


def test_certificate_resummation_exact():
    fam = build_fractal_family(FS, CYL1, None, eps=2.0**-3, gamma=0.01, t=0.9, depth=2)
    cert = entropy_lower_certificate(fam)
    cum = 0.0
    pads = 0
    rates = []
    for lv in fam.levels:
        cum += lv.reps * lv.log_weight_padded
        pads += lv.splice_pad
        rates.append(cum / lv.t_length)
    assert min(rates) == pytest.approx(cert.rate, abs=1e-12)


def test_fractal_separation_revalidated_on_samples():
    # small family so a thousand representative pairs stay cheap
    fam = build_fractal_family(FS, CYL1, None, eps=2.0**-3, gamma=0.01, t=0.9,
                               depth=2, horizon=4 * 10**4)
    rng = np.random.default_rng(0)
    m2 = separation_depth(2 * fam.eps)
    separated = 0
    for _ in range(1000):
        a = materialize_fractal_representative(fam, seed=int(rng.integers(1 << 30)))
        b = materialize_fractal_representative(fam, seed=int(rng.integers(1 << 30)))
        diff = np.nonzero(a != b)[0]
        if not len(diff):
            continue  # same branch drawn; separation claims nothing
        # distinct members must be (t_k, 2 eps)-separated: the Bowen distance
        # 2^-k exceeds 2 eps exactly when the first disagreement sits inside
        # the window [0, t_k + m - 1)
        assert int(diff[0]) < fam.levels[-1].t_length + m2 - 1
        separated += 1
    assert separated > 900


def test_fractal_historic_and_controls():
    fam = build_fractal_family(FS, CYL1, None, eps=2.0**-3, gamma=0.01, t=0.9, depth=2)
    rep = verify_fractal_is_historic(FS, CYL1, fam)
    assert rep.passed
    assert rep.alternation_gap >= (1 - 0.9) * 0.5 / 2
    ctrl = np.ones(fam.levels[-1].t_length, dtype=np.uint8)
    assert not verify_fractal_is_historic(FS, CYL1, fam, representative=ctrl).passed


def test_fractal_degenerate_mixing():
    fam = build_fractal_family(FS, CYL1, None, eps=2.0**-3, gamma=0.01, t=0.9,
                               depth=2, nu_cycle=(0, 1))
    rep = verify_fractal_is_historic(FS, CYL1, fam)
    assert not rep.alternates


def test_fractal_psi_certificate_uses_own_pressure():
    psi = CylinderIndicator((1,))
    fam = build_fractal_family(FS, CYL1, psi, eps=2.0**-3, gamma=0.01, t=0.9, depth=2)
    cert = entropy_lower_certificate(fam)
    assert cert.passed
    assert cert.threshold == pytest.approx(0.9 * fam.pressure_at_eps - 0.09, abs=1e-12)


def test_fractal_needs_full_shift():
    with pytest.raises(UnsupportedOracle):
        build_fractal_family(golden_mean_sft(), CYL1, None, depth=2)


def test_fractal_half_t_certificate():
    fam = build_fractal_family(FS, CYL1, None, eps=2.0**-3, gamma=0.01, t=0.5,
                               depth=2, horizon=2 * 10**5)
    cert = entropy_lower_certificate(fam)
    assert cert.passed
    assert cert.rate >= 0.5 * math.log(2) - 9 * 0.01


def test_fractal_impossible_bound_is_certificate_failure():
    from ergokit.historic import CertificateFailed

    with pytest.raises(CertificateFailed):
        # t ~ 1 with a tiny gamma leaves no slack for the finite-scale
        # corrections, so the cardinality bound must fail loudly
        build_fractal_family(FS, CYL1, None, eps=2.0**-3, gamma=1e-4, t=0.999, depth=1)


def test_fractal_family_brackets_relative_pressure():
    from ergokit.complexity import relative_pressure_upper

    fam = build_fractal_family(FS, CYL1, None, eps=2.0**-3, gamma=0.01, t=0.9,
                               depth=2, horizon=4 * 10**4)
    cert = entropy_lower_certificate(fam)
    res = relative_pressure_upper(FS, fam, None, fam.eps, depth=4000)
    assert cert.rate >= 0.9 * math.log(2) - 9 * 0.01
    assert res.upper >= cert.rate  # a valid bracket: upper above the lower bound
    assert res.upper <= math.log(2) + 1e-9
    assert not res.bracket(cert.rate)["inconclusive"]


def test_fractal_depth_three_nested_times():
    fam = build_fractal_family(FS, CYL1, None, eps=2.0**-3, gamma=0.01, t=0.9,
                               depth=3, horizon=10**6)
    times = [lv.t_length for lv in fam.levels]
    assert times[0] < times[1] < times[2]
    word = materialize_fractal_representative(fam, seed=1)
    assert len(word) == times[-1]
    rep = verify_fractal_is_historic(FS, CYL1, fam, representative=word)
    assert rep.passed
