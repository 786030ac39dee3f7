import math

import numpy as np
import pytest

from ergokit.complexity import (
    BernoulliSampler,
    DiracWordSampler,
    IntervalAlphabetShift,
    entropy_estimate,
    katok_entropy,
    log_separated_weight,
    max_separated,
    mdim_estimate,
    pressure_estimate,
    relative_pressure_upper,
)
from ergokit.observables import CylinderIndicator
from ergokit.symbolic import BudgetExceeded, separation_depth
from ergokit.systems import TranslationLift, full_shift, golden_mean_sft

from oracles import (
    bernoulli_entropy,
    brute_force_max_separated,
    full_shift_pressure_sum,
    interval_shift_log_count,
    transfer_matrix_word_count,
)

FS = full_shift(2)
GM = golden_mean_sft()
GOLDEN_T = [[1, 1], [1, 0]]
FULL_T = [[1, 1], [1, 1]]


def test_separated_counts_match_spec_examples():
    assert max_separated(FS, 4, 2.0**-3).cardinality == 64
    assert max_separated(GM, 4, 2.0**-1).cardinality == 8


@pytest.mark.parametrize("n,m", [(2, 1), (3, 2), (4, 3), (2, 4), (5, 2)])
def test_separated_oracle_equivalence(n, m):
    eps = 2.0**-m
    word_len = n + m - 1
    got_fs = max_separated(FS, n, eps).cardinality
    assert got_fs == brute_force_max_separated(FULL_T, n, eps, word_len)
    got_gm = max_separated(GM, n, eps).cardinality
    assert got_gm == brute_force_max_separated(GOLDEN_T, n, eps, word_len)
    assert got_gm == transfer_matrix_word_count(GOLDEN_T, word_len)


def test_separated_revalidates():
    sep = max_separated(GM, 5, 2.0**-2)
    assert sep.revalidate(GM)
    assert sep.exact


def test_separated_single_point_at_diameter():
    tr = TranslationLift([0.3, 0.7])
    sep = max_separated(tr, 1, 1.1)
    assert sep.cardinality == 1


def test_separated_budget_guard():
    with pytest.raises(BudgetExceeded):
        max_separated(FS, 30, 2.0**-6)


def test_separated_numeric_maximal_within_pool():
    from ergokit.systems import bowen_distance

    tr = TranslationLift([0.3, 0.7])
    eps = 2.0**-2
    sep = max_separated(tr, 3, eps)
    assert sep.revalidate(tr)
    # every pool point must be within eps of an accepted point
    rng = np.random.default_rng(2)
    mesh = math.ceil(4.0 / eps)
    for _ in range(100):
        idx = rng.integers(0, mesh, 2)
        cand = idx / mesh
        assert min(bowen_distance(tr, cand, p, 3) for p in sep.points) <= eps + 1e-12


def test_separated_monotonicity():
    for system in (FS, GM):
        cards_n = [max_separated(system, n, 2.0**-2).cardinality for n in (1, 2, 4, 6)]
        assert all(a <= b for a, b in zip(cards_n, cards_n[1:]))
        cards_eps = [max_separated(system, 4, eps).cardinality
                     for eps in (2.0**-1, 2.0**-2, 2.0**-3)]
        assert all(a <= b for a, b in zip(cards_eps, cards_eps[1:]))


def test_log_weight_matches_cylinder_sum_oracle():
    psi = CylinderIndicator((1,), scale=1.0)
    for n in (3, 5, 8):
        for m in (1, 2, 3):
            got = log_separated_weight(FS, psi, n, 2.0**-m)
            want = math.log(full_shift_pressure_sum(n, m, 1.0))
            assert got == pytest.approx(want, rel=1e-12)


def test_entropy_full_and_golden():
    eps = [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6]
    est = entropy_estimate(FS, eps, range(6, 15))
    assert est.value == pytest.approx(math.log(2), rel=1e-9)
    phi = (1 + math.sqrt(5)) / 2
    est_gm = entropy_estimate(GM, eps, range(6, 15))
    assert est_gm.value == pytest.approx(math.log(phi), rel=0.03)


def test_pressure_zero_potential_equals_entropy_bitwise():
    eps = [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6]
    a = entropy_estimate(FS, eps, range(6, 12))
    b = pressure_estimate(FS, None, eps, range(6, 12))
    assert np.array_equal(a.table, b.table)
    assert a.value == b.value


def test_pressure_oracle_value():
    psi = CylinderIndicator((1,), scale=1.0)
    est = pressure_estimate(FS, psi, [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6], range(6, 15))
    assert est.value == pytest.approx(math.log(1 + math.e), rel=0.02)


def test_rigid_rotation_entropy_zero():
    tr = TranslationLift([math.sqrt(2) % 1, math.sqrt(3) % 1])
    est = entropy_estimate(tr, [2.0**-1, 2.0**-1.5, 2.0**-2, 2.0**-2.5], range(2, 7))
    assert abs(est.value) <= 0.02


def test_mdim_finite_alphabet_zero():
    lo, hi, _ = mdim_estimate(FS, [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6], range(6, 15))
    assert -0.05 <= lo <= hi <= 0.05


def test_mdim_interval_shift_one():
    ia = IntervalAlphabetShift()
    for n in (4, 7):
        for m in (3, 5):
            got = ia.log_separated_count(n, 2.0**-m)
            assert got == pytest.approx(interval_shift_log_count(n, 2.0**-m), rel=1e-12)
    lo, hi, _ = mdim_estimate(ia, [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6], range(6, 15))
    assert 0.85 <= lo <= hi <= 1.15


def test_katok_bernoulli_closed_form():
    val, _, _ = katok_entropy(FS, BernoulliSampler(0.3), None, 0.1,
                              [2.0**-1, 2.0**-2], range(4, 16), samples=60_000, seed=2)
    assert val == pytest.approx(bernoulli_entropy(0.3), rel=0.05)


def test_katok_dirac_zero():
    val, _, _ = katok_entropy(FS, DiracWordSampler((0,)), None, 0.1,
                              [2.0**-1, 2.0**-2], range(4, 16), samples=20_000)
    assert abs(val) <= 0.02


def test_katok_variational_direction():
    est = entropy_estimate(FS, [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6], range(6, 13))
    for p in (0.1, 0.3, 0.5, 0.7, 0.9):
        val, _, _ = katok_entropy(FS, BernoulliSampler(p), None, 0.1,
                                  [2.0**-1, 2.0**-2], range(4, 15),
                                  samples=40_000, seed=3)
        assert val <= est.value + 0.03


def test_relative_pressure_single_orbit():
    p = FS.shift.point_from_word((0, 1, 1))
    res = relative_pressure_upper(FS, [(p, 300)], None, 2.0**-3, depth=60)
    assert abs(res.upper) <= 0.05


def test_relative_pressure_whole_shift_matches_entropy():
    res = relative_pressure_upper(FS, "all", None, 2.0**-3, depth=64)
    assert res.upper == pytest.approx(math.log(2), abs=0.05)
    est = entropy_estimate(FS, [2.0**-2, 2.0**-3, 2.0**-4, 2.0**-5], range(6, 13))
    assert abs(res.upper - est.rate_at(2.0**-3)) <= 0.05


def test_relative_pressure_bracket_flag():
    p = FS.shift.point_from_word((0,))
    res = relative_pressure_upper(FS, [(p, 200)], None, 2.0**-3, depth=50)
    bracket = res.bracket(lower=-0.01)
    assert not bracket["inconclusive"]
    wide = res.bracket(lower=-0.5)
    assert wide["inconclusive"]


def test_h_eps_nonincreasing_in_eps_flagged():
    est = entropy_estimate(FS, [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6], range(6, 12))
    assert est.reliable.all()
    diffs = np.diff(est.rates)
    assert (diffs >= -0.02).all()
