"""Rotation sets of torus lifts and generalized rotation sets of observables.

Four finite-scale estimates mirror the inclusion lattice

    erg (periodic/measure averages)  <=  pointwise  <=  orbitwise  <=  invariant proxy,

where the invariant-measure set is never optimized over directly: its proxy
is the convex hull of periodic rotation vectors, which is exactly what the
density of periodic measures buys on gluing systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .observables import (
    CylinderIndicator,
    Displacement,
    Observable,
    SymbolEmbedding,
    accumulation_set,
    birkhoff_average,
)
from .symbolic import SymbolPoint
from .systems import TorusLift, UnsupportedOracle

_EMBEDDING_KINDS = (SymbolEmbedding, CylinderIndicator)

ORIENT_TOL = 1e-12


# ---------------------------------------------------------------------------
# convex hulls
# ---------------------------------------------------------------------------

def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(points, exact: bool):
    """Andrew's monotone chain, counterclockwise vertex order.

    With Fraction inputs the orientation predicate is exact; with floats a
    1e-12 tolerance treats near-collinear triples as collinear so hull
    vertices stay extreme points.
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    tol = 0 if exact else ORIENT_TOL

    def build(seq):
        chain = []
        for p in seq:
            while len(chain) > 1 and _cross(chain[-2], chain[-1], p) <= tol:
                chain.pop()
            chain.append(p)
        return chain

    lower = build(pts)
    upper = build(reversed(pts))
    return lower[:-1] + upper[:-1]


@dataclass
class ConvexPolytope:
    """Hull of a finite point set; vertices are extreme points.

    Dimensions 1 and 2 are computed exactly (rational arithmetic when the
    inputs are rational); dimension 3 uses the qhull wrapper; higher
    dimensions fall back to sampled support functions, which make distance
    queries lower bounds.
    """

    dim: int
    vertices: np.ndarray
    exact_vertices: list | None = None
    support_directions: np.ndarray | None = None
    support_values: np.ndarray | None = None

    def distance(self, point) -> float:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        v = self.vertices
        if len(v) == 0:
            return math.inf
        if self.dim == 1:
            lo, hi = v.min(), v.max()
            return float(max(0.0, lo - p[0], p[0] - hi))
        if self.dim == 2:
            return self._distance_2d(p)
        if self.support_directions is not None:
            margins = self.support_directions @ p - self.support_values
            return float(max(0.0, margins.max()))
        return self._distance_nd(p)

    def contains(self, point, tol: float = 1e-9) -> bool:
        return self.distance(point) <= tol

    def _distance_2d(self, p):
        v = self.vertices
        if len(v) == 1:
            return float(np.linalg.norm(p - v[0]))
        if len(v) == 2:
            return _point_segment_distance(p, v[0], v[1])
        inside = True
        best = math.inf
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            if _cross(a, b, p) < -ORIENT_TOL:
                inside = False
            best = min(best, _point_segment_distance(p, a, b))
        return 0.0 if inside else float(best)

    def _distance_nd(self, p):
        v = self.vertices
        if len(v) == 1:
            return float(np.linalg.norm(p - v[0]))
        # exact membership first (linear feasibility), then Frank-Wolfe with
        # exact line search for the distance of exterior points
        from scipy.optimize import linprog

        res = linprog(np.zeros(len(v)), A_eq=np.vstack([v.T, np.ones(len(v))]),
                      b_eq=np.concatenate([p, [1.0]]), bounds=(0, None), method="highs")
        if res.status == 0:
            return 0.0
        w = np.full(len(v), 1.0 / len(v))
        x = w @ v
        for _ in range(2000):
            grad = x - p
            k = int(np.argmin(v @ grad))
            direction = v[k] - x
            denom = float(direction @ direction)
            if denom == 0:
                break
            step = float(np.clip(-(grad @ direction) / denom, 0.0, 1.0))
            if step <= 1e-16:
                break
            x = x + step * direction
        return float(np.linalg.norm(x - p))

    def support(self, direction) -> float:
        return float((self.vertices @ np.asarray(direction, dtype=float)).max())


def _point_segment_distance(p, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def convex_hull(points, dim=None) -> ConvexPolytope:
    """Hull of a finite point family; accepts Fractions for exact 2-d hulls."""
    pts = [tuple(p) for p in points]
    if not pts:
        raise ValueError("empty point set has no hull")
    if dim is None:
        dim = len(pts[0])
    exact = all(isinstance(c, (Fraction, int)) for p in pts for c in p)
    if dim == 1:
        vals = sorted(set(pts))
        verts = [vals[0]] if len(vals) == 1 else [vals[0], vals[-1]]
        arr = np.asarray(verts, dtype=float)
        return ConvexPolytope(1, arr, exact_vertices=verts if exact else None)
    if dim == 2:
        verts = _monotone_chain(pts, exact)
        arr = np.asarray(verts, dtype=float)
        return ConvexPolytope(2, arr, exact_vertices=verts if exact else None)
    if dim == 3:
        from scipy.spatial import ConvexHull as QHull

        arr = np.unique(np.asarray(pts, dtype=float), axis=0)
        if len(arr) <= 3 or np.linalg.matrix_rank(arr - arr[0]) < 3:
            return ConvexPolytope(3, arr)
        hull = QHull(arr)
        return ConvexPolytope(3, arr[hull.vertices])
    arr = np.asarray(pts, dtype=float)
    rng = np.random.default_rng(7)
    dirs = rng.normal(size=(max(256, 32 * dim), dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    vals = (dirs @ arr.T).max(axis=1)
    return ConvexPolytope(dim, arr, support_directions=dirs, support_values=vals)


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between finite point sets (exact)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def hausdorff_polytopes(p: ConvexPolytope, q: ConvexPolytope) -> float:
    """Hausdorff distance between convex polytopes.

    dist(., K) is convex, so its sup over a polytope is attained at a vertex;
    both directed distances reduce to vertex queries.
    """
    d1 = max(q.distance(v) for v in p.vertices)
    d2 = max(p.distance(v) for v in q.vertices)
    return float(max(d1, d2))


# ---------------------------------------------------------------------------
# rotation estimates
# ---------------------------------------------------------------------------

@dataclass
class RotationSetEstimate:
    dim: int
    points: np.ndarray
    tags: list
    hull: ConvexPolytope
    resolution: dict = field(default_factory=dict)
    exact_points: list | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))


def _make_estimate(points, tags, dim, resolution, exact_points=None):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    hull_input = exact_points if exact_points else [tuple(p) for p in pts]
    hull = convex_hull(hull_input, dim)
    return RotationSetEstimate(dim, pts, list(tags), hull, resolution, exact_points)


@dataclass
class RotationNumberResult:
    value: float
    cauchy_gap: float
    locked: Fraction | None = None

    def __float__(self):
        return self.value


def rotation_number(lift: TorusLift, x: float = 0.0, n: int = 100_000,
                    lock_tol: float = 1e-9, lock_max_period: int = 64) -> RotationNumberResult:
    """(F^n(x) - x)/n mod 1 for a degree-one circle lift, with diagnostics.

    The Cauchy gap compares the estimates at n and 2n; rational mode locking
    is detected from eventual periodicity of the projected orbit.
    """
    if lift.dim != 1:
        raise ValueError("rotation_number needs a circle lift")
    if n < 1000:
        raise ValueError("n must be at least 10^3")
    orbit = np.empty(2 * n + 1)
    orbit[0] = float(x)
    z = np.array([float(x)])
    for j in range(2 * n):
        z = lift.lift(z)
        orbit[j + 1] = z[0]
    rho_n = (orbit[n] - orbit[0]) / n
    rho_2n = (orbit[2 * n] - orbit[0]) / (2 * n)
    locked = None
    tail = n
    for q in range(1, lock_max_period + 1):
        if abs((orbit[tail + q] - orbit[tail]) % 1.0) < lock_tol or \
           abs(1.0 - (orbit[tail + q] - orbit[tail]) % 1.0) < lock_tol:
            p = round(orbit[tail + q] - orbit[tail])
            g = math.gcd(int(p), q)
            locked = Fraction(int(p) // g, q // g)
            break
    return RotationNumberResult(rho_n % 1.0, abs(rho_2n - rho_n), locked)


def kronecker_lattice(count: int, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy seeds z_i = offset + i*g (mod 1)."""
    # generalized golden ratios give a badly-approximable direction per axis
    g = np.array([((1 + math.sqrt(p)) / 2) % 1.0 for p in [5, 2, 3, 7, 11, 13][:dim]])
    offset = (seed * 0.6180339887498949) % 1.0
    idx = np.arange(count)[:, None]
    return (offset + idx * g[None, :]) % 1.0


def _iterate_lift_chunk(system, chunk, n):
    z = chunk.copy()
    for _ in range(n):
        z = system.lift(z)
    return z


def estimate_rotation_set(system, seeds: int = 64, n: int = 10_000, seed: int = 0,
                          observable: Observable | None = None,
                          period_budget: int = 6, threads: int = 1) -> RotationSetEstimate:
    """Cloud of long-run average displacement vectors over many seed points.

    Torus lifts average the displacement cocycle, which telescopes to
    (F^n(z) - z)/n; other systems average the supplied observable.  Catalog
    periodic vectors are appended so the hull sees extremal data.  Seed
    chunks may run on several threads; results merge in seed order, so the
    output is independent of the partitioning.
    """
    if seeds < 1 or n < 1000:
        raise ValueError("need seeds >= 1 and n >= 10^3")
    resolution = {"seeds": seeds, "n": n, "seed": seed}
    if isinstance(system, TorusLift):
        z0 = kronecker_lattice(seeds, system.dim, seed)
        if threads > 1 and seeds >= threads:
            from concurrent.futures import ThreadPoolExecutor

            chunks = np.array_split(z0, threads)
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda c: _iterate_lift_chunk(system, c, n), chunks))
            z = np.vstack(parts)
        else:
            z = _iterate_lift_chunk(system, z0, n)
        vectors = (z - z0) / n
        tags = [f"orbitwise(n={n})"] * seeds
        per = rotation_from_periodics(system, period_budget=period_budget, observable=observable)
        pts = np.vstack([vectors, per.points]) if len(per.points) else vectors
        tags += per.tags
        return _make_estimate(pts, tags, system.dim, resolution)
    if observable is None:
        raise ValueError("non-lift systems need an explicit observable")
    rng = np.random.default_rng(seed)
    vectors = []
    tags = []
    if getattr(system, "space", None) == "shift":
        shift = system.shift
        for _ in range(seeds):
            word = [int(rng.integers(shift.alphabet_size))]
            for _ in range(n):
                word.append(int(rng.choice(np.nonzero(shift.transition[word[-1]])[0])))
            x = shift.point_from_word(tuple(word))
            vectors.append(birkhoff_average(system, observable, x, n))
            tags.append(f"orbitwise(n={n})")
    else:
        for x0 in kronecker_lattice(seeds, 1, seed)[:, 0]:
            vectors.append(birkhoff_average(system, observable, float(x0), n))
            tags.append(f"orbitwise(n={n})")
    per = rotation_from_periodics(system, period_budget=period_budget, observable=observable)
    pts = np.vstack([np.atleast_2d(vectors), per.points]) if len(per.points) else np.atleast_2d(vectors)
    return _make_estimate(pts, tags + per.tags, pts.shape[1], resolution)


def pointwise_rotation_set(system, x, horizon: int = 50_000, checkpoints=None,
                           observable: Observable | None = None) -> RotationSetEstimate:
    """Accumulation cloud of one orbit's averages, tagged pointwise-limit."""
    obs = observable
    if obs is None:
        if not isinstance(system, TorusLift):
            raise ValueError("non-lift systems need an explicit observable")
        obs = Displacement(system)
    cloud = accumulation_set(system, obs, x, horizon, checkpoints)
    tags = [f"pointwise-limit(t={t})" for t in cloud.times]
    est = _make_estimate(cloud.averages, tags, cloud.averages.shape[1],
                         {"horizon": horizon, "checkpoints": len(cloud.times)})
    est.resolution["diameter"] = cloud.diameter
    est.resolution["n_clusters"] = cloud.n_clusters
    return est


def rotation_from_periodics(system, period_budget: int = 6,
                            observable: Observable | None = None) -> RotationSetEstimate:
    """Exact rotation vectors of enumerated periodic orbits / analytic families."""
    resolution = {"period_budget": period_budget}
    if isinstance(system, TorusLift):
        vectors = system.analytic_rotation_vectors(period_budget)
        if vectors is None:
            raise UnsupportedOracle(f"no analytic periodic family for {system.name}")
        pts = np.atleast_2d(np.asarray(vectors, dtype=float))
        tags = ["periodic(analytic)"] * len(pts)
        return _make_estimate(pts, tags, system.dim, resolution)
    if observable is None:
        raise ValueError("non-lift systems need an explicit observable")
    pairs = system.periodic_points(period_budget)
    if not pairs:
        raise UnsupportedOracle("periodic enumeration budget exhausted")
    vectors = []
    exact = []
    tags = []
    for point, period in pairs:
        if (
            isinstance(point, SymbolPoint)
            and getattr(system, "space", None) == "shift"
            and isinstance(observable, _EMBEDDING_KINDS)
            and observable.symbol_depth == 1
        ):
            vals = {s: observable.symbol_values(np.array([[s]], dtype=np.uint8))[0]
                    for s in range(system.shift.alphabet_size)}
            avg = system.shift.orbit_average(
                point, {k: tuple(Fraction(float(c)) for c in v) for k, v in vals.items()}
            )
            exact.append(tuple(avg))
            vectors.append([float(a) for a in avg])
        else:
            vectors.append(np.ravel(birkhoff_average(system, observable, point, period)))
        tags.append(f"periodic(period={period})")
    est = _make_estimate(np.atleast_2d(vectors), tags, len(vectors[0]), resolution,
                         exact_points=exact if len(exact) == len(vectors) else None)
    return est


# ---------------------------------------------------------------------------
# the inclusion chain
# ---------------------------------------------------------------------------

@dataclass
class InclusionReport:
    stages: list
    defects: list
    eta: float

    @property
    def passed(self) -> bool:
        return all(d <= self.eta for d in self.defects)


def check_inclusion_chain(est_erg, est_p, est_full, est_inv, eta: float = 0.02) -> InclusionReport:
    """Finite-scale form of erg <= pointwise <= orbitwise <= invariant.

    Each stage reports the max distance from one cloud's points to the hull
    of the next; the chain passes when every defect is at most eta.
    """
    chain = [("erg->pointwise", est_erg, est_p),
             ("pointwise->orbit", est_p, est_full),
             ("orbit->invariant", est_full, est_inv)]
    stages, defects = [], []
    for name, inner, outer in chain:
        worst = max(outer.hull.distance(pt) for pt in inner.points)
        stages.append(name)
        defects.append(float(worst))
    return InclusionReport(stages, defects, eta)
