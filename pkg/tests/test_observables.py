import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergokit.observables import (
    CoboundaryPlusConstant,
    Constant,
    CylinderIndicator,
    Displacement,
    SymbolEmbedding,
    TrigObservable,
    accumulation_set,
    birkhoff_average,
    cohomology_test,
    geometric_checkpoints,
    modulus_of_continuity,
    orbit_values,
    variation_bound,
)
from ergokit.symbolic import SymbolPoint
from ergokit.systems import (
    SIN_SQUARED,
    CircleSineLift,
    DoublingMap,
    ShearLift,
    TranslationLift,
    TrigPoly,
    full_shift,
    iterate,
)

FS = full_shift(2)
CYL1 = CylinderIndicator((1,))


def test_birkhoff_translation_cocycle_exact():
    tr = TranslationLift([0.3, 0.7])
    phi = Displacement(tr)
    avg = birkhoff_average(tr, phi, np.array([0.11, 0.42]), 1000)
    assert np.allclose(avg, [0.3, 0.7], atol=1e-12)


def test_birkhoff_periodic_frequency():
    x = SymbolPoint((), (0, 1))
    assert birkhoff_average(FS, CYL1, x, 10)[0] == pytest.approx(0.5)


def test_birkhoff_block_word():
    x = SymbolPoint((0,) * 5 + (1,) * 5, (0,))
    assert birkhoff_average(FS, CYL1, x, 10)[0] == pytest.approx(0.5)


def test_telescoping_identity():
    # (1/n) sum phi_F(f^j pi(z)) equals (F^n(z) - z)/n along the lifted orbit
    for lift, n in ((ShearLift(SIN_SQUARED), 100_000), (TranslationLift([0.3, 0.7]), 10_000)):
        phi = Displacement(lift)
        z = np.array([0.21, 0.67])
        orbit = iterate(lift, z, n)
        lhs = phi.values_on_points(np.asarray(orbit.points[:-1])).mean(axis=0)
        rhs = (orbit.lifted[-1] - orbit.lifted[0]) / n
        assert np.abs(lhs - rhs).max() <= 1e-9


def test_displacement_well_defined_on_fibers():
    sh = ShearLift(SIN_SQUARED)
    phi = Displacement(sh)
    z = np.array([0.3, 0.8])
    for m in ([1.0, 0.0], [0.0, -1.0], [2.0, 3.0]):
        assert np.abs(phi.value(z + np.array(m)) - phi.value(z)).max() <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=5, max_size=40), st.integers(1, 30))
def test_average_inside_coordinatewise_hull(word, n):
    x = FS.shift.point_from_word(tuple(word) + (0,))
    vals = orbit_values(FS, CYL1, x, n)
    avg = vals.mean(axis=0)
    assert vals.min(axis=0)[0] - 1e-12 <= avg[0] <= vals.max(axis=0)[0] + 1e-12


def test_accumulation_translation_single_cluster():
    tr = TranslationLift([0.3, 0.7])
    cloud = accumulation_set(tr, Displacement(tr), np.array([0.0, 0.0]), 5000)
    assert cloud.n_clusters == 1
    assert cloud.diameter <= 1e-9


def test_accumulation_shear_invariant_circle():
    sh = ShearLift(SIN_SQUARED)
    y0 = 0.3
    cloud = accumulation_set(sh, Displacement(sh), np.array([0.2, y0]), 5000)
    assert cloud.n_clusters == 1
    target = float(SIN_SQUARED(y0))
    assert np.allclose(cloud.averages[-1], [target, 0.0], atol=1e-9)


def test_accumulation_diameter_shrinks_with_horizon():
    db = DoublingMap()
    obs = TrigObservable(SIN_SQUARED)
    diam = []
    for horizon in (4000, 8000, 16000):
        cloud = accumulation_set(db, obs, 0.2, horizon)
        last = cloud.averages[cloud.times > horizon // 4]
        diam.append(np.ptp(last))
    assert diam[2] <= diam[0]


def test_checkpoints_require_enough_entries():
    with pytest.raises(ValueError):
        geometric_checkpoints(100)


def test_modulus_constant_zero():
    est = modulus_of_continuity(FS, Constant([3.0]), [0.5, 0.25], pair_samples=500, seed=1)
    assert est.values.max() == 0.0


def test_modulus_cylinder_vanishes_below_one():
    est = modulus_of_continuity(FS, CYL1, [2.0**-1], pair_samples=2000, seed=1)
    assert est.value_at(2.0**-1) == 0.0


def test_modulus_sine_matches_lipschitz():
    circle = CircleSineLift(0.0, 0.05)
    obs = TrigObservable(TrigPoly(sin_coeffs=(1.0,)))
    est = modulus_of_continuity(circle, obs, [0.01], pair_samples=20_000, seed=2)
    target = 2 * math.pi * 0.01
    assert est.value_at(0.01) == pytest.approx(target, rel=0.10)


def test_modulus_monotone_in_eps():
    circle = CircleSineLift(0.0, 0.05)
    obs = TrigObservable(TrigPoly(sin_coeffs=(1.0,)))
    est = modulus_of_continuity(circle, obs, [0.2, 0.1, 0.05, 0.01], pair_samples=4000, seed=3)
    assert (np.diff(est.values) <= 1e-15).all()


def test_variation_bound_shift_depths():
    assert variation_bound(FS, CYL1, 2.0**-1) == 0.0
    deep = CylinderIndicator((1, 0, 1))
    assert variation_bound(FS, deep, 2.0**-1) > 0.0
    assert variation_bound(FS, deep, 2.0**-4) == 0.0


def test_cohomology_witnesses_on_full_shift():
    verdict = cohomology_test(FS, CYL1, witness_budget=2)
    assert verdict.kind == "distinct-witnesses"
    assert verdict.spread == pytest.approx(1.0)


def test_cohomology_constant_observable():
    verdict = cohomology_test(FS, Constant([2.0]), witness_budget=3)
    assert verdict.kind == "constant-averages"


def test_cohomology_coboundary_telescopes_exactly():
    g = CylinderIndicator((0, 1))
    phi = CoboundaryPlusConstant(FS, g, [0.5])
    verdict = cohomology_test(FS, phi, witness_budget=5, tolerance=1e-9)
    assert verdict.kind == "constant-averages"
    assert verdict.spread <= 1e-12
    # periodic averages are exactly the constant
    p = SymbolPoint((), (0, 1, 1))
    assert birkhoff_average(FS, phi, p, 3)[0] == pytest.approx(0.5, abs=1e-15)


def test_cohomology_on_doubling_periodics():
    db = DoublingMap()
    obs = TrigObservable(SIN_SQUARED)
    verdict = cohomology_test(db, obs, witness_budget=3)
    assert verdict.kind == "distinct-witnesses"


def test_uniform_convergence_deviation_report():
    from ergokit.observables import uniform_convergence_deviation

    # coboundary-plus-constant averages converge uniformly: tiny deviation
    g = CylinderIndicator((0, 1))
    phi = CoboundaryPlusConstant(FS, g, [0.5])
    pts = [FS.shift.point_from_word(w) for w in [(0, 1), (1, 0, 0), (1, 1)]]
    small = uniform_convergence_deviation(FS, phi, pts, 200)
    assert small <= 2 * phi.sup_norm() / 200 + 1e-12
    # the bare cylinder indicator oscillates: visible deviation on (01)* at odd scales
    big = uniform_convergence_deviation(FS, CYL1, [SymbolPoint((), (0, 1))], 5)
    assert big > 0.01


def test_sup_norm_bounds_hold_on_samples():
    rng = np.random.default_rng(5)
    sh = ShearLift(SIN_SQUARED)
    phi = Displacement(sh)
    pts = rng.random((200, 2))
    norms = np.linalg.norm(phi.values_on_points(pts), axis=1)
    assert norms.max() <= phi.sup_norm() + 1e-12
