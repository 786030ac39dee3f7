"""Continuous vector-valued observables and their Birkhoff statistics.

The displacement cocycle of a torus lift lives here, together with the
empirical modulus of continuity var(phi, eps) and the periodic-witness test
deciding whether all enumerated periodic orbits share one average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import systems as sysmod
from .symbolic import SymbolPoint, symbol_array
from .systems import DomainMismatch, TorusLift, TrigPoly, UnsupportedOracle

COHOMOLOGY_TOL = 1e-6  # separates genuine periodic-average differences from rounding


class Observable:
    """Deterministic map from a system's space to R^dim with a sup-norm bound."""

    dim = 1
    name = "observable"
    symbol_depth = None  # number of symbols read, for shift-space observables

    def sup_norm(self) -> float:
        raise NotImplementedError

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def values_on_points(self, points: np.ndarray) -> np.ndarray:
        return np.stack([self.value(p) for p in points])

    def symbol_values(self, windows: np.ndarray) -> np.ndarray:
        """Vectorized evaluation from (N, symbol_depth) symbol windows."""
        raise NotImplementedError

    def exact_value(self, x):
        """Fraction-valued evaluation when the observable is rational; else None."""
        return None


class Constant(Observable):
    name = "constant"
    symbol_depth = 1

    def __init__(self, vector):
        self.vector = np.atleast_1d(np.asarray(vector, dtype=float))
        self.dim = self.vector.shape[0]

    def sup_norm(self):
        return float(np.linalg.norm(self.vector))

    def value(self, x):
        return self.vector.copy()

    def values_on_points(self, points):
        return np.tile(self.vector, (len(points), 1))

    def symbol_values(self, windows):
        return np.tile(self.vector, (len(windows), 1))


class Displacement(Observable):
    """phi_F(x) = F(z) - z for any z over x; constant on fibers by equivariance."""

    def __init__(self, lift: TorusLift):
        if not isinstance(lift, TorusLift):
            raise DomainMismatch("displacement cocycle needs a torus lift")
        self.lift = lift
        self.dim = lift.dim
        self.name = f"displacement({lift.name})"

    def sup_norm(self):
        if isinstance(self.lift, sysmod.TranslationLift):
            return float(np.linalg.norm(self.lift.vector))
        if isinstance(self.lift, sysmod.ShearLift):
            lo, hi = self.lift.shear_poly.bounds()
            return max(abs(lo), abs(hi))
        if isinstance(self.lift, sysmod.CircleSineLift):
            return abs(self.lift.a) + abs(self.lift.b)
        grid = np.stack(
            np.meshgrid(*[np.arange(64) / 64] * self.dim, indexing="ij"), axis=-1
        ).reshape(-1, self.dim)
        return float(np.linalg.norm(self.lift.displacement(grid), axis=-1).max()) * 1.5

    def value(self, x):
        return np.atleast_1d(self.lift.displacement(np.asarray(x, dtype=float)))

    def values_on_points(self, points):
        return np.atleast_2d(self.lift.displacement(np.asarray(points, dtype=float)))


class CylinderIndicator(Observable):
    """Indicator of the cylinder [word] on a one-sided shift."""

    def __init__(self, word, scale: float = 1.0):
        self.word = tuple(int(s) for s in word)
        self.scale = float(scale)
        self.symbol_depth = len(self.word)
        self.name = f"{scale}*1_[{''.join(map(str, self.word))}]"

    def sup_norm(self):
        return abs(self.scale)

    def value(self, x: SymbolPoint):
        return np.array([self.scale if x.prefix(len(self.word)) == self.word else 0.0])

    def symbol_values(self, windows):
        hit = np.all(windows[:, : self.symbol_depth] == np.asarray(self.word), axis=1)
        return (self.scale * hit.astype(float))[:, None]

    def exact_value(self, x: SymbolPoint):
        s = Fraction(self.scale).limit_denominator(10**9)
        if abs(float(s) - self.scale) > 0:
            return None
        return (s,) if x.prefix(len(self.word)) == self.word else (Fraction(0),)


class SymbolEmbedding(Observable):
    """Each symbol mapped to a point of [0,1]^dim; reads one coordinate."""

    symbol_depth = 1

    def __init__(self, mapping: dict):
        self.mapping = {int(k): np.atleast_1d(np.asarray(v, dtype=float)) for k, v in mapping.items()}
        dims = {v.shape[0] for v in self.mapping.values()}
        if len(dims) != 1:
            raise ValueError("embedding vectors must share a dimension")
        self.dim = dims.pop()
        self.table = np.stack([self.mapping[k] for k in sorted(self.mapping)])
        self.name = f"embedding({self.dim}d)"

    def sup_norm(self):
        return float(np.linalg.norm(self.table, axis=1).max())

    def value(self, x: SymbolPoint):
        return self.table[x.symbol(0)].copy()

    def symbol_values(self, windows):
        return self.table[windows[:, 0]]

    def exact_value(self, x: SymbolPoint):
        vec = self.table[x.symbol(0)]
        fracs = tuple(Fraction(v).limit_denominator(10**9) for v in vec)
        if all(abs(float(f) - v) == 0 for f, v in zip(fracs, vec)):
            return fracs
        return None


class TrigObservable(Observable):
    """Scalar trigonometric polynomial on the circle or a torus coordinate."""

    def __init__(self, poly: TrigPoly, coordinate: int = 0):
        self.poly = poly
        self.coordinate = int(coordinate)
        self.name = "trig_poly"

    def sup_norm(self):
        lo, hi = self.poly.bounds()
        return max(abs(lo), abs(hi))

    def value(self, x):
        t = np.atleast_1d(np.asarray(x, dtype=float))[self.coordinate]
        return np.array([float(self.poly(t))])

    def values_on_points(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.poly(pts[:, self.coordinate])[:, None]


class CoboundaryPlusConstant(Observable):
    """g - g o f + v; every periodic-orbit average telescopes to exactly v."""

    def __init__(self, system, transfer: Observable, vector):
        self.system = system
        self.transfer = transfer
        self.vector = np.atleast_1d(np.asarray(vector, dtype=float))
        self.dim = self.vector.shape[0]
        if transfer.dim != self.dim:
            raise ValueError("transfer function dimension mismatch")
        self.name = f"coboundary+{tuple(self.vector)}"
        if transfer.symbol_depth is not None:
            self.symbol_depth = transfer.symbol_depth + 1

    def sup_norm(self):
        return 2 * self.transfer.sup_norm() + float(np.linalg.norm(self.vector))

    def value(self, x):
        return (
            np.atleast_1d(self.transfer.value(x))
            - np.atleast_1d(self.transfer.value(self.system.step(x)))
            + self.vector
        )

    def symbol_values(self, windows):
        g0 = self.transfer.symbol_values(windows[:, :-1])
        g1 = self.transfer.symbol_values(windows[:, 1:])
        return g0 - g1 + self.vector


# ---------------------------------------------------------------------------
# orbit evaluation and Birkhoff averages
# ---------------------------------------------------------------------------

def orbit_values(system, obs: Observable, x, n: int) -> np.ndarray:
    """(n, dim) array of phi(f^j x), j < n, choosing the fastest valid path."""
    system.check_point(x)
    if getattr(system, "space", None) == "shift" and obs.symbol_depth is not None:
        depth = obs.symbol_depth
        symbols = symbol_array(x, n + depth - 1)
        if depth == 1:
            windows = symbols[:, None]
        else:
            windows = np.lib.stride_tricks.sliding_window_view(symbols, depth)
        return np.atleast_2d(obs.symbol_values(np.ascontiguousarray(windows[:n])))
    if isinstance(system, TorusLift):
        orbit = sysmod.iterate(system, x, n - 1)
        return np.atleast_2d(obs.values_on_points(np.asarray(orbit.points)))
    pts = [x]
    for _ in range(n - 1):
        pts.append(system.step(pts[-1]))
    if getattr(system, "space", None) == "circle":
        pts = np.asarray([float(p) for p in pts])[:, None]
        return np.atleast_2d(obs.values_on_points(pts))
    return np.stack([np.atleast_1d(obs.value(p)) for p in pts])


def birkhoff_sum(system, obs: Observable, x, n: int) -> np.ndarray:
    return orbit_values(system, obs, x, n).sum(axis=0)


def birkhoff_average(system, obs: Observable, x, n: int) -> np.ndarray:
    """(1/n) sum_{j<n} phi(f^j x); norm bounded by the sup norm of phi."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return birkhoff_sum(system, obs, x, n) / n


def running_averages(system, obs: Observable, x, times) -> np.ndarray:
    """Birkhoff averages at the given increasing times, from one orbit pass."""
    times = np.asarray(sorted(times), dtype=int)
    horizon = int(times[-1])
    vals = orbit_values(system, obs, x, horizon)
    csum = np.cumsum(vals, axis=0)
    return csum[times - 1] / times[:, None]


# ---------------------------------------------------------------------------
# accumulation sets (finite-scale pointwise rotation sets)
# ---------------------------------------------------------------------------

CHECKPOINT_GROWTH = 1.25
CLUSTER_RADIUS = 0.01
NONTRIVIAL_DIAMETER = 0.05


def geometric_checkpoints(horizon: int, first: int = 32, growth: float = CHECKPOINT_GROWTH):
    """Geometrically spaced times n_j = ceil(first * growth^j) up to the horizon."""
    out = []
    t = float(first)
    while round(t) <= horizon:
        n = int(math.ceil(t))
        if not out or n > out[-1]:
            out.append(n)
        t *= growth
    if len(out) < 16:
        raise ValueError("horizon too small for requested checkpoints")
    return out


@dataclass
class AccumulationCloud:
    """Averages at checkpoint times with single-linkage clusters at a fixed radius."""

    times: np.ndarray
    averages: np.ndarray
    cluster_labels: np.ndarray
    cluster_radius: float
    diameter: float

    @property
    def n_clusters(self) -> int:
        return int(self.cluster_labels.max()) + 1 if len(self.cluster_labels) else 0

    def is_trivial(self, eta: float = NONTRIVIAL_DIAMETER) -> bool:
        return self.diameter <= eta

    def hull_interval(self):
        """Coordinatewise min/max of the cloud."""
        return self.averages.min(axis=0), self.averages.max(axis=0)


def _single_linkage(points: np.ndarray, radius: float) -> np.ndarray:
    n = len(points)
    labels = -np.ones(n, dtype=int)
    current = 0
    for i in range(n):
        if labels[i] >= 0:
            continue
        labels[i] = current
        frontier = [i]
        while frontier:
            j = frontier.pop()
            d = np.linalg.norm(points - points[j], axis=1)
            near = np.nonzero((d <= radius) & (labels < 0))[0]
            labels[near] = current
            frontier.extend(near.tolist())
        current += 1
    return labels


def accumulation_set(
    system,
    obs: Observable,
    x,
    horizon: int,
    checkpoints=None,
    cluster_radius: float = CLUSTER_RADIUS,
) -> AccumulationCloud:
    """Finite-scale stand-in for the accumulation set of Birkhoff averages.

    Averages are taken at geometrically spaced checkpoint times so every
    oscillation scale of a block-structured orbit is seen by some checkpoint.
    """
    if checkpoints is None:
        checkpoints = geometric_checkpoints(horizon)
    else:
        checkpoints = sorted(int(c) for c in checkpoints)
        if len(checkpoints) < 16:
            raise ValueError("need at least 16 checkpoints")
        if checkpoints[-1] > horizon:
            raise ValueError("horizon too small for requested checkpoints")
    averages = running_averages(system, obs, x, checkpoints)
    labels = _single_linkage(averages, cluster_radius)
    diam = 0.0
    if len(averages) > 1:
        diff = averages[:, None, :] - averages[None, :, :]
        diam = float(np.sqrt((diff * diff).sum(axis=-1)).max())
    return AccumulationCloud(np.asarray(checkpoints), averages, labels, cluster_radius, diam)


# ---------------------------------------------------------------------------
# empirical modulus of continuity
# ---------------------------------------------------------------------------

@dataclass
class ModulusEstimate:
    """Empirical sup of |phi(x) - phi(y)| over sampled pairs with d(x, y) < eps."""

    eps_grid: np.ndarray
    values: np.ndarray
    missing: np.ndarray

    def value_at(self, eps: float) -> float:
        idx = int(np.argmin(np.abs(self.eps_grid - eps)))
        if self.missing[idx]:
            raise KeyError(f"no sampled pair within eps={eps}")
        return float(self.values[idx])


def modulus_of_continuity(system, obs, eps_grid, pair_samples=10_000, seed=0) -> ModulusEstimate:
    """Empirical var(phi, eps) for each eps; deterministic for a fixed seed."""
    eps_grid = np.asarray(sorted(eps_grid, reverse=True), dtype=float)
    if np.any(np.diff(eps_grid) >= 0):
        raise ValueError("eps grid must be strictly decreasing")
    rng = np.random.default_rng(seed)
    values = np.zeros(len(eps_grid))
    missing = np.zeros(len(eps_grid), dtype=bool)
    space = getattr(system, "space", None)
    for i, eps in enumerate(eps_grid):
        if space == "shift":
            if obs.symbol_depth is None:
                raise DomainMismatch("observable does not read symbols")
            shift = system.shift
            depth = int(obs.symbol_depth)
            agree = 0
            while 2.0 ** (-agree) >= eps:
                agree += 1
            L = agree + depth + 2
            words = rng.integers(0, shift.alphabet_size, size=(pair_samples, L))
            if not shift.full:
                words = _admissible_rows(shift, words, rng)
            other = words.copy()
            # resample the tail after the forced agreement prefix
            tail = rng.integers(0, shift.alphabet_size, size=(pair_samples, L - agree))
            other[:, agree:] = tail
            if not shift.full:
                other = _admissible_rows(shift, other, rng, frozen=agree)
            va = obs.symbol_values(words[:, :depth].astype(np.uint8))
            vb = obs.symbol_values(other[:, :depth].astype(np.uint8))
            diff = np.linalg.norm(np.atleast_2d(va) - np.atleast_2d(vb), axis=-1)
            values[i] = float(diff.max()) if len(diff) else 0.0
            missing[i] = len(diff) == 0
        else:
            d = getattr(system, "dim", 1)
            xs = rng.random((pair_samples, d))
            radii = eps * (0.5 + 0.5 * rng.random(pair_samples))  # bias toward the shell
            direction = rng.normal(size=(pair_samples, d))
            direction /= np.linalg.norm(direction, axis=1, keepdims=True)
            ys = (xs + direction * radii[:, None] * 0.999) % 1.0
            keep = sysmod.torus_distance(xs, ys) < eps
            if not keep.any():
                missing[i] = True
                continue
            va = np.atleast_2d(obs.values_on_points(xs[keep]))
            vb = np.atleast_2d(obs.values_on_points(ys[keep]))
            values[i] = float(np.linalg.norm(va - vb, axis=-1).max())
    # var(phi, eps) is nonincreasing as eps shrinks; clamp sampling wobble
    for i in range(1, len(values)):
        if not missing[i] and not missing[i - 1]:
            values[i] = min(values[i], values[i - 1])
    return ModulusEstimate(eps_grid, values, missing)


def _admissible_rows(shift, words, rng, frozen=0):
    """Repair rows left-to-right so each row is an admissible word (keeps frozen prefix)."""
    words = words.copy()
    for r in range(words.shape[0]):
        for c in range(max(1, frozen), words.shape[1]):
            if not shift.transition[words[r, c - 1], words[r, c]]:
                choices = np.nonzero(shift.transition[words[r, c - 1]])[0]
                words[r, c] = rng.choice(choices)
    return words


def variation_bound(system, obs: Observable, eps: float) -> float:
    """Upper bound for var(phi, eps), analytic for catalog observables.

    Shift observables reading c symbols are constant on balls of radius
    below 2^(-c), so their variation vanishes there; smooth observables get
    a Lipschitz bound.  Falls back to the empirical modulus.
    """
    if getattr(system, "space", None) == "shift" and obs.symbol_depth is not None:
        agree = 0
        while 2.0 ** (-agree) >= eps:
            agree += 1
        # d(x, y) < eps forces agreement on the first `agree` symbols
        if obs.symbol_depth <= agree:
            return 0.0
        return 2 * obs.sup_norm()
    if isinstance(obs, Constant):
        return 0.0
    if isinstance(obs, TrigObservable):
        return min(2 * obs.sup_norm(), obs.poly.lipschitz() * eps)
    if isinstance(obs, Displacement):
        lift = obs.lift
        if isinstance(lift, sysmod.TranslationLift):
            return 0.0
        if isinstance(lift, sysmod.ShearLift):
            return min(2 * obs.sup_norm(), lift.shear_poly.lipschitz() * eps)
        if isinstance(lift, sysmod.CircleSineLift):
            return min(2 * obs.sup_norm(), 2 * math.pi * abs(lift.b) * eps)
    est = modulus_of_continuity(system, obs, [eps], pair_samples=2000, seed=11)
    return float(est.values[0]) if not est.missing[0] else 2 * obs.sup_norm()


# ---------------------------------------------------------------------------
# cohomology-to-a-vector dichotomy
# ---------------------------------------------------------------------------

@dataclass
class CohomologyVerdict:
    constant: bool
    witnesses: tuple | None
    spread: float
    tolerance: float
    n_orbits: int
    note: str = ""

    @property
    def kind(self) -> str:
        return "constant-averages" if self.constant else "distinct-witnesses"


def periodic_orbit_average(system, obs: Observable, point, period: int) -> np.ndarray:
    if getattr(system, "space", None) == "shift":
        return birkhoff_average(system, obs, point, period)
    if isinstance(point, Fraction):
        orbit = [point]
        for _ in range(period - 1):
            orbit.append(system.step(orbit[-1]))
        pts = np.asarray([float(p) for p in orbit])[:, None]
        return np.atleast_2d(obs.values_on_points(pts)).mean(axis=0)
    return birkhoff_average(system, obs, point, period)


def enumerate_periodic(system, budget: int):
    """(point, period) pairs for catalog systems; raises when unsupported."""
    if hasattr(system, "periodic_points"):
        pts = system.periodic_points(budget)
        if not pts:
            raise UnsupportedOracle("no periodic point found within the budget")
        return pts
    if isinstance(system, sysmod.TranslationLift):
        fracs = [Fraction(v).limit_denominator(10**6) for v in system.vector]
        if all(abs(float(f) - v) < 1e-12 for f, v in zip(fracs, system.vector)):
            q = math.lcm(*[f.denominator for f in fracs])
            return [(np.zeros(system.dim), q)]
        raise UnsupportedOracle("irrational translation has no periodic points")
    if isinstance(system, sysmod.CircleSineLift):
        fixed = system.fixed_points()
        if fixed:
            return [(np.array([p]), 1) for p in fixed]
        raise UnsupportedOracle("no analytic periodic family for this circle map")
    raise UnsupportedOracle(f"periodic enumeration unsupported for {getattr(system, 'kind', '?')}")


def uniform_convergence_deviation(system, obs: Observable, points, n: int) -> float:
    """Sampled sup of |avg_n(x) - avg_2n(x)| over the given points.

    A finite-scale report on the uniform-convergence side of the
    cohomology dichotomy; no finite computation certifies uniformity, so
    this is diagnostic only.
    """
    worst = 0.0
    for x in points:
        a = birkhoff_average(system, obs, x, n)
        b = birkhoff_average(system, obs, x, 2 * n)
        worst = max(worst, float(np.linalg.norm(a - b)))
    return worst


def cohomology_test(system, obs: Observable, witness_budget: int = 6,
                    tolerance: float = COHOMOLOGY_TOL) -> CohomologyVerdict:
    """Search enumerated periodic orbits for two distinct phi-averages.

    Distinct averages witness that phi is not cohomologous to a vector; if
    all enumerated averages agree within the tolerance the result is only
    inconclusive toward emptiness of the historic set.
    """
    orbits = enumerate_periodic(system, witness_budget)
    averages = [
        (pt, period, periodic_orbit_average(system, obs, pt, period)) for pt, period in orbits
    ]
    best = None
    for i in range(len(averages)):
        for j in range(i + 1, len(averages)):
            gap = float(np.linalg.norm(np.ravel(averages[i][2]) - np.ravel(averages[j][2])))
            if best is None or gap > best[0]:
                best = (gap, averages[i], averages[j])
    if best is None:
        return CohomologyVerdict(True, None, 0.0, tolerance, len(averages),
                                 note="single periodic orbit enumerated")
    spread, a, b = best
    if spread > tolerance:
        return CohomologyVerdict(False, (a, b), spread, tolerance, len(averages))
    return CohomologyVerdict(True, None, spread, tolerance, len(averages))
