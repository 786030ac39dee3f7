import math
from fractions import Fraction

import numpy as np
import pytest

from ergokit.complexity import BernoulliSampler, DiracWordSampler
from ergokit.gluing import (
    PeriodicNet,
    SegmentSpec,
    approximate_by_periodic_measure,
    build_periodic_net,
    cylinder_basis,
    exact_cycle_average,
    gap_bound,
    glue,
    glue_periodic,
    gluing_from_shadowing,
    shadow,
    shadow_bound,
)
from ergokit.observables import CylinderIndicator
from ergokit.symbolic import SymbolPoint, symbol_distance
from ergokit.systems import (
    CircleSineLift,
    DoublingMap,
    TranslationLift,
    UnsupportedOracle,
    full_shift,
    golden_mean_sft,
)

from oracles import circle_first_entry

FS = full_shift(2)
GM = golden_mean_sft()
DB = DoublingMap()
GOLDEN = (math.sqrt(5) - 1) / 2


# -- shadowing ---------------------------------------------------------------

def test_shadow_exact_orbit_is_identity():
    base = FS.shift.point_from_word((0, 1, 1, 0, 1))
    orbit = [base]
    for _ in range(6):
        orbit.append(orbit[-1].shift())
    y, achieved = shadow(FS, orbit, 1e-9)
    assert y == base and achieved == 0.0


def test_shadow_doubling_perturbed_orbit():
    rng = np.random.default_rng(0)
    for delta in (1e-3, 1e-4):
        worst = 0.0
        for _ in range(100):
            cur = rng.random()
            pseudo = []
            for _ in range(100):
                pseudo.append(cur)
                cur = (2 * cur + rng.uniform(-delta, delta) / 2) % 1.0
            y, achieved = shadow(DB, pseudo, delta)
            worst = max(worst, achieved)
            assert isinstance(y, Fraction)
        assert worst <= shadow_bound(DB, delta)


def test_shadow_splice_symbol_agreement():
    rng = np.random.default_rng(4)
    delta = 2.0**-5
    word = tuple(int(s) for s in rng.integers(0, 2, 60))
    base = FS.shift.point_from_word(word)
    pseudo = [base]
    for _ in range(20):
        nxt = pseudo[-1].shift()
        # hop to another point agreeing on 6 symbols (jump < 2^-5)
        tail = tuple(int(s) for s in rng.integers(0, 2, 20))
        pseudo.append(SymbolPoint(nxt.prefix(6) + tail, (0,)))
    y, achieved = shadow(FS, pseudo, delta)
    cur = y
    for x in pseudo:
        assert cur.prefix(5) == x.prefix(5)  # agrees on >= 5 symbols
        cur = cur.shift()
    assert achieved <= 2.0**-4


def test_shadow_unsupported_for_rotations():
    with pytest.raises(UnsupportedOracle):
        shadow(TranslationLift([GOLDEN]), [np.array([0.0])], 0.1)


def test_periodic_shadow_doubling_exact_periodicity():
    pseudo = [Fraction(1, 10), Fraction(1, 5), Fraction(2, 5), Fraction(4, 5), Fraction(3, 5)]
    y, achieved = shadow(DB, pseudo, 0.3, periodic=True)
    cur = y
    for _ in range(len(pseudo)):
        cur = DB.step(cur)
    assert cur == y
    assert achieved <= 0.6


# -- gluing ------------------------------------------------------------------

def test_glue_full_shift_spec_example():
    zero = SymbolPoint((), (0,))
    one = SymbolPoint((), (1,))
    spec = SegmentSpec([(zero, 3), (one, 3)], 2.0**-2)
    orbit = glue(FS, spec)
    m_eps = 2  # separation depth of 2^-2
    assert orbit.gaps == [m_eps - 1]
    assert orbit.point.prefix(4) == (0, 0, 0, 0)
    assert all(e <= 2.0**-2 for e in orbit.errors)
    assert orbit.validate(FS, spec)


def test_glue_single_segment_is_anchor():
    x = FS.shift.point_from_word((0, 1, 1))
    spec = SegmentSpec([(x, 4)], 2.0**-3)
    orbit = glue(FS, spec)
    assert orbit.gaps == []
    assert symbol_distance(orbit.point, x) <= 2.0**-6


def test_glue_periodic_period_formula():
    spec = SegmentSpec([(SymbolPoint((), (0,)), 3), (SymbolPoint((), (1,)), 3)], 2.0**-2)
    orbit = glue_periodic(FS, spec)
    assert orbit.period == sum(n + p for (_, n), p in zip(spec.segments, orbit.gaps))
    assert orbit.validate(FS, spec)


def test_glue_sft_connectors_respect_transitions():
    a = GM.shift.point_from_word((1,))
    spec = SegmentSpec([(a, 2), (a, 2)], 2.0**-3)
    orbit = glue_periodic(GM, spec)
    assert GM.shift.contains(orbit.point)
    assert orbit.validate(GM, spec)
    assert all(g <= gap_bound(GM, spec.eps) for g in orbit.gaps)


def test_glue_translation_first_entry_oracle():
    tr = TranslationLift([GOLDEN])
    spec = SegmentSpec([(np.array([0.0]), 100), (np.array([0.5]), 100)], 0.01)
    orbit = glue(tr, spec)
    # brute-force the first entry of the endpoint orbit into the target ball
    start = (0.0 + 100 * GOLDEN) % 1.0
    want = circle_first_entry(GOLDEN, start, 0.5, 0.01)
    assert orbit.gaps == [want]
    assert orbit.validate(tr, spec)


def test_glue_translation_rejects_rational():
    with pytest.raises(UnsupportedOracle):
        glue(TranslationLift([0.5]), SegmentSpec([(np.array([0.0]), 3)], 0.1))


def test_glue_doubling_via_shadow():
    spec = SegmentSpec([(Fraction(1, 7), 5), (Fraction(1, 3), 5)], 0.25)
    orbit = glue_periodic(DB, spec)
    assert orbit.validate(DB, spec)
    cur = orbit.point
    for _ in range(orbit.period):
        cur = DB.step(cur)
    assert cur == orbit.point


# -- periodic nets -----------------------------------------------------------

def test_net_full_shift_words_of_length_two():
    net = build_periodic_net(FS, 2.0**-2)
    assert len(net.points) == 4
    assert net.K == 4 * 2
    prefixes = sorted(p.prefix(2) for p in net.points)
    assert prefixes == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_net_doubling_covers_at_delta():
    net = build_periodic_net(DB, 1 / 8, budget=4)
    assert all(isinstance(p, Fraction) for p in net.points)
    for i, a in enumerate(net.points):
        for b in net.points[i + 1:]:
            d = abs(float(a - b)) % 1.0
            assert min(d, 1 - d) > 1 / 8


def test_net_fixed_point_class():
    system = CircleSineLift(0.0, 0.05)
    from ergokit.systems import chain_recurrence

    grid = chain_recurrence(system, 128)
    comp = next(c for c in grid.components if 0 in c or 127 in c)
    net = build_periodic_net(system, 0.05, component=(comp, 128))
    assert len(net.points) == 1
    assert net.K == 1


def test_gluing_from_shadowing_doubling_pipeline():
    net = build_periodic_net(DB, 1 / 8, budget=4)
    spec = SegmentSpec([(Fraction(1, 7), 5), (Fraction(1, 3), 5)], 1 / 2)
    orbit = gluing_from_shadowing(DB, net, spec)
    assert all(g <= net.K for g in orbit.gaps)
    assert all(e <= 2 * net.delta for e in orbit.errors)
    assert orbit.validate(DB, spec)


def test_gluing_from_shadowing_single_net_point():
    net = build_periodic_net(FS, 2.0**-2)
    theta = net.points[0]
    orbit = gluing_from_shadowing(FS, net, SegmentSpec([(theta, 2)], 1 / 2))
    assert orbit.point == theta


def test_cross_validation_direct_vs_net_gluing():
    spec = SegmentSpec([(SymbolPoint((), (0,)), 4), (SymbolPoint((), (1,)), 4)], 1 / 2)
    direct = glue_periodic(FS, SegmentSpec(spec.segments, 2.0**-2))
    net = build_periodic_net(FS, 2.0**-3)
    via_net = gluing_from_shadowing(FS, net, spec)
    assert direct.validate(FS, SegmentSpec(spec.segments, 2.0**-2))
    assert via_net.validate(FS, spec)
    assert direct.gap_bound == gap_bound(FS, 2.0**-2)
    assert via_net.gap_bound == net.K


def test_net_connections_are_valid_pseudo_orbits():
    net = build_periodic_net(FS, 2.0**-2)
    assert net.connections
    for (i, j), path in net.connections.items():
        assert path[0] == net.points[i] and path[-1] == net.points[j]
        assert len(path) - 1 <= net.K + 1
        for k in range(len(path) - 1):
            assert symbol_distance(path[k].shift(), path[k + 1]) <= net.delta


# -- periodic measures -------------------------------------------------------

def test_permeasure_dirac_fixed_point():
    res = approximate_by_periodic_measure(FS, [(DiracWordSampler((0,)), 1.0)], 0.1, 3)
    assert res.point == SymbolPoint((), (0,))
    exact_part = sum(gap for _, _, _, gap in res.per_basis)
    assert exact_part == 0.0
    assert res.bound <= 2.0**-14 + 1e-15


def test_permeasure_half_half_certificate():
    target = [(DiracWordSampler((0,)), 0.5), (DiracWordSampler((1,)), 0.5)]
    res = approximate_by_periodic_measure(FS, target, 0.05, 3)
    assert res.certified and res.bound <= 0.05
    # independent exact recomputation from the returned word
    total = Fraction(0)
    for b, obs in enumerate(cylinder_basis(2, 3), start=1):
        mine = exact_cycle_average(res.point, obs)
        want = Fraction(1, 2) if len(set(obs.word)) == 1 else Fraction(0)
        total += Fraction(1, 2**b) * abs(mine - want)
    recomputed = float(total) + 2.0**-14
    assert recomputed == pytest.approx(res.bound, abs=1e-12)


def test_permeasure_bernoulli_target():
    res = approximate_by_periodic_measure(FS, [(BernoulliSampler(0.3), 1.0)], 0.1, 3, seed=9)
    assert res.certified
    mean = exact_cycle_average(res.point, CylinderIndicator((1,)))
    assert float(mean) == pytest.approx(0.3, abs=0.05)


def test_permeasure_proportion_constraints():
    target = [(DiracWordSampler((0,)), 0.25), (DiracWordSampler((1,)), 0.75)]
    res = approximate_by_periodic_measure(FS, target, 0.05, 2)
    total = sum(res.segment_lengths)
    for (weight, n) in zip((0.25, 0.75), res.segment_lengths):
        assert abs(n / total - weight) < 0.05 / (10 * 2)
