"""Dynamical systems the toolkit operates on.

Torus maps are specified through lifts F: R^d -> R^d that commute with
integer translations (the homotopic-to-identity condition); circle
endomorphisms and symbolic shifts are separate kinds.  All systems are
immutable after construction and every operation here is pure.

The torus metric is the quotient metric d(x, y) = min over integer shifts
of the Euclidean distance; shift spaces use d(x, y) = 2^(-k) with k the
first disagreeing coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .intervals import Interval, cos_2pi, sin_2pi
from .symbolic import ShiftSpace, SymbolPoint, symbol_distance


class DomainMismatch(TypeError):
    """Point variant does not belong to the system's space."""


class UnsupportedOracle(RuntimeError):
    """The requested orbit-reconstruction oracle does not exist for this system kind."""


# ---------------------------------------------------------------------------
# metrics and point helpers
# ---------------------------------------------------------------------------

def wrap_torus(z):
    """Project R^d coordinates to [0, 1)^d."""
    return np.asarray(z, dtype=float) % 1.0


def torus_distance(x, y):
    """Quotient metric on T^d; broadcasts over leading axes."""
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) % 1.0
    d = np.minimum(d, 1.0 - d)
    if d.ndim == 0:
        return float(d)
    return np.sqrt((d * d).sum(axis=-1)) if d.shape[-1] > 1 else np.abs(d[..., 0])


def circle_distance(x, y):
    d = abs(float(x) - float(y)) % 1.0
    return min(d, 1.0 - d)


# ---------------------------------------------------------------------------
# trigonometric polynomials (the expression grammar for catalog maps)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrigPoly:
    """c + sum_j a_j sin(2 pi j t) + b_j cos(2 pi j t), coefficients indexed from j=1."""

    const: float = 0.0
    sin_coeffs: tuple = ()
    cos_coeffs: tuple = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.const)
        for j, a in enumerate(self.sin_coeffs, start=1):
            if a:
                out = out + a * np.sin(2 * np.pi * j * t)
        for j, b in enumerate(self.cos_coeffs, start=1):
            if b:
                out = out + b * np.cos(2 * np.pi * j * t)
        return out

    def range_on(self, iv: Interval) -> Interval:
        out = Interval(self.const, self.const)
        for j, a in enumerate(self.sin_coeffs, start=1):
            if a:
                out = out + sin_2pi(iv, j).scale(a)
        for j, b in enumerate(self.cos_coeffs, start=1):
            if b:
                out = out + cos_2pi(iv, j).scale(b)
        return out

    def lipschitz(self) -> float:
        return 2 * math.pi * (
            sum(j * abs(a) for j, a in enumerate(self.sin_coeffs, start=1))
            + sum(j * abs(b) for j, b in enumerate(self.cos_coeffs, start=1))
        )

    def bounds(self, samples: int = 4096):
        """Certified [min, max] over the circle: grid values +/- Lipschitz slack."""
        grid = np.arange(samples) / samples
        vals = self(grid)
        slack = self.lipschitz() / (2 * samples)
        return float(vals.min() - slack), float(vals.max() + slack)


SIN_SQUARED = TrigPoly(const=0.5, cos_coeffs=(-0.5,))  # sin^2(pi t)


# ---------------------------------------------------------------------------
# torus lifts
# ---------------------------------------------------------------------------

class TorusLift:
    """Base for maps of T^d given by an equivariant lift F(x + m) = F(x) + m."""

    space = "torus"
    kind = "lift"

    def __init__(self, dim, name="", claims_volume_preserving=False):
        self.dim = int(dim)
        self.name = name or self.kind
        self.claims_volume_preserving = bool(claims_volume_preserving)

    # lift acts on arrays of shape (..., dim)
    def lift(self, z):
        raise NotImplementedError

    def inverse_lift(self, z):
        raise UnsupportedOracle(f"{self.name} has no inverse rule")

    @property
    def has_inverse(self) -> bool:
        try:
            self.inverse_lift(np.zeros(self.dim))
            return True
        except UnsupportedOracle:
            return False

    def step(self, x):
        return wrap_torus(self.lift(np.asarray(x, dtype=float)))

    def inverse_step(self, x):
        return wrap_torus(self.inverse_lift(np.asarray(x, dtype=float)))

    def displacement(self, x):
        z = np.asarray(x, dtype=float)
        return self.lift(z) - z

    def box_image(self, box):
        """Outer interval enclosure of F(box); box is a tuple of Intervals."""
        raise NotImplementedError

    def analytic_rotation_vectors(self, budget: int = 8):
        """Exact rotation vectors realized by invariant/periodic families, or None."""
        return None

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return x.shape == (self.dim,)

    def check_point(self, x):
        if isinstance(x, SymbolPoint) or not self.contains(x):
            raise DomainMismatch(f"{self.name} expects a point of T^{self.dim}")


class TranslationLift(TorusLift):
    kind = "translation"

    def __init__(self, vector, name="", **kw):
        vector = np.atleast_1d(np.asarray(vector, dtype=float))
        label = "translation(" + ", ".join(format(v, "g") for v in vector) + ")"
        super().__init__(vector.shape[0], name or label, **kw)
        self.vector = vector

    def lift(self, z):
        return np.asarray(z, dtype=float) + self.vector

    def inverse_lift(self, z):
        return np.asarray(z, dtype=float) - self.vector

    def box_image(self, box):
        return tuple(iv + float(v) for iv, v in zip(box, self.vector))

    def analytic_rotation_vectors(self, budget: int = 8):
        return [tuple(self.vector)]

    def periodic_representatives(self, budget: int = 8):
        return [np.zeros(self.dim)]

    def is_minimal(self) -> bool:
        """Minimal iff 1, v_1, ..., v_d are rationally independent (checked to denominator 10^6)."""

        def looks_rational(t):
            f = Fraction(t).limit_denominator(10**6)
            return abs(t - float(f)) < 1e-12

        return not any(looks_rational(v) for v in self.vector)


class ShearLift(TorusLift):
    """F(x, y) = (x + s(y), y) with s a trigonometric polynomial."""

    kind = "shear"

    def __init__(self, shear_poly: TrigPoly, name="", **kw):
        super().__init__(2, name or "shear", **kw)
        self.shear_poly = shear_poly

    def lift(self, z):
        z = np.asarray(z, dtype=float)
        out = z.copy()
        out[..., 0] += self.shear_poly(z[..., 1])
        return out

    def inverse_lift(self, z):
        z = np.asarray(z, dtype=float)
        out = z.copy()
        out[..., 0] -= self.shear_poly(z[..., 1])
        return out

    def box_image(self, box):
        ix, iy = box
        return (ix + self.shear_poly.range_on(iy), iy)

    def analytic_rotation_vectors(self, budget: int = 8):
        # every horizontal circle is invariant with rotation vector (s(y), 0);
        # the periodic circles are those with s(y) rational
        lo, hi = self.shear_poly.bounds()
        vectors = []
        for q in range(1, budget + 1):
            for p in range(math.floor(lo * q), math.ceil(hi * q) + 1):
                if math.gcd(abs(p), q) == 1 and lo - 1e-12 <= p / q <= hi + 1e-12:
                    vectors.append((p / q, 0.0))
        return sorted(set(vectors))

    def periodic_representatives(self, budget: int = 8):
        """One point on each rational invariant circle, solved by bisection."""
        reps = []
        grid = np.arange(0, 1, 1 / 512)
        vals = self.shear_poly(grid)
        for r, _ in self.analytic_rotation_vectors(budget):
            diff = vals - r
            hit = None
            idx = np.nonzero(np.abs(diff) < 1e-12)[0]
            if len(idx):
                hit = grid[idx[0]]
            else:
                sign = np.sign(diff)
                cross = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
                if len(cross):
                    a, b = grid[cross[0]], grid[cross[0]] + 1 / 512
                    for _ in range(60):
                        mid = 0.5 * (a + b)
                        if (self.shear_poly(a) - r) * (self.shear_poly(mid) - r) <= 0:
                            b = mid
                        else:
                            a = mid
                    hit = 0.5 * (a + b)
            if hit is not None:
                reps.append(np.array([0.0, float(hit)]))
        return reps


class CircleSineLift(TorusLift):
    """Degree-one circle lift F(x) = x + a + b sin(2 pi x)."""

    kind = "circle_sine"

    def __init__(self, a, b, name="", **kw):
        super().__init__(1, name or f"circle_sine(a={a},b={b})", **kw)
        self.a = float(a)
        self.b = float(b)
        if abs(2 * math.pi * self.b) >= 1.0:
            raise ValueError("need |2 pi b| < 1 so the lift is an increasing homeomorphism")

    def lift(self, z):
        z = np.asarray(z, dtype=float)
        return z + self.a + self.b * np.sin(2 * np.pi * z)

    def inverse_lift(self, z):
        z = np.asarray(z, dtype=float)
        # F is increasing with F' >= 1 - |2 pi b| > 0; invert by bisection
        lo = z - self.a - abs(self.b)
        hi = z - self.a + abs(self.b)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            too_low = self.lift(mid) < z
            lo = np.where(too_low, mid, lo)
            hi = np.where(too_low, hi, mid)
        return 0.5 * (lo + hi)

    def box_image(self, box):
        (ix,) = box
        return (ix + self.a + sin_2pi(ix).scale(self.b),)

    def analytic_rotation_vectors(self, budget: int = 8):
        if abs(self.a) <= abs(self.b):
            return [(0.0,)]  # fixed points where a + b sin(2 pi x) = 0
        return None

    def fixed_points(self):
        if abs(self.a) > abs(self.b) or self.b == 0:
            return []
        t = math.asin(-self.a / self.b) / (2 * math.pi)
        return sorted({t % 1.0, (0.5 - t) % 1.0})

    def periodic_representatives(self, budget: int = 8):
        return [np.array([p]) for p in self.fixed_points()]


class CompositionLift(TorusLift):
    kind = "composition"

    def __init__(self, lifts, name="", **kw):
        dims = {f.dim for f in lifts}
        if len(dims) != 1:
            raise ValueError("composed lifts must share a dimension")
        super().__init__(dims.pop(), name or "composition", **kw)
        self.lifts = list(lifts)

    def lift(self, z):
        for f in self.lifts:
            z = f.lift(z)
        return z

    def inverse_lift(self, z):
        for f in reversed(self.lifts):
            z = f.inverse_lift(z)
        return z

    def box_image(self, box):
        for f in self.lifts:
            box = f.box_image(box)
        return box


# ---------------------------------------------------------------------------
# expanding circle endomorphism
# ---------------------------------------------------------------------------

class DoublingMap:
    """x -> 2x (mod 1); degree two, so not a TorusLift.

    Orbit reconstruction uses exact dyadic arithmetic (Fractions): forward
    float iteration of an expanding map loses one bit per step, which would
    defeat the re-validation of shadowing bounds.
    """

    space = "circle"
    kind = "doubling"
    dim = 1
    expansion = 2.0

    def __init__(self, name="doubling"):
        self.name = name

    def step(self, x):
        if isinstance(x, Fraction):
            return (2 * x) % 1
        return (2.0 * np.asarray(x, dtype=float)) % 1.0

    def box_image(self, box):
        (ix,) = box
        return (Interval(2 * ix.lo, 2 * ix.hi),)

    def preimages(self, x):
        if isinstance(x, Fraction):
            half = x / 2
            return [half, half + Fraction(1, 2)]
        x = float(x)
        return [x / 2.0, x / 2.0 + 0.5]

    def periodic_points(self, max_period: int):
        """Rationals with odd denominator; period of k/q is the order of 2 mod q."""
        out = []
        seen = set()
        for q in range(1, 2**max_period):
            if q % 2 == 0:
                continue
            period = 1
            r = 2 % q
            while r != 1 and period <= max_period:
                r = (2 * r) % q
                period += 1
            if period > max_period and q > 1:
                continue
            for k in range(q):
                if math.gcd(k, q) == 1 or q == 1:
                    p = Fraction(k, q)
                    if p not in seen:
                        seen.add(p)
                        out.append((p, period if q > 1 else 1))
        return out

    def check_point(self, x):
        if isinstance(x, SymbolPoint):
            raise DomainMismatch("doubling map expects a circle point")


# ---------------------------------------------------------------------------
# shift systems
# ---------------------------------------------------------------------------

class ShiftSystem:
    """Wraps a ShiftSpace with the common system interface."""

    space = "shift"

    def __init__(self, shift: ShiftSpace, name=""):
        self.shift = shift
        self.name = name or shift.name
        self.kind = "full_shift" if shift.full else "sft"
        self.dim = None

    def step(self, x: SymbolPoint) -> SymbolPoint:
        return x.shift()

    def distance(self, x, y):
        return symbol_distance(x, y)

    def periodic_points(self, max_period: int):
        return [(p, p.period) for p in self.shift.periodic_orbits(max_period)]

    def check_point(self, x):
        if not isinstance(x, SymbolPoint):
            raise DomainMismatch(f"{self.name} expects a SymbolPoint")


def full_shift(alphabet_size: int, embedding=None, name="") -> ShiftSystem:
    return ShiftSystem(ShiftSpace(alphabet_size, embedding=embedding, name=name))


def golden_mean_sft(name="golden_sft") -> ShiftSystem:
    return ShiftSystem(ShiftSpace(2, transition=[[True, True], [True, False]], name=name))


# ---------------------------------------------------------------------------
# iteration, Bowen distance, C0 distance
# ---------------------------------------------------------------------------

@dataclass
class OrbitSegment:
    """Finite orbit (x, f(x), ..., f^n(x)); lifts also carry the lifted orbit."""

    system: object
    points: list
    lifted: np.ndarray | None = None

    def __len__(self):
        return len(self.points)


def iterate(system, x, n: int) -> OrbitSegment:
    """Forward orbit with n steps (n + 1 points)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    system.check_point(x)
    if isinstance(system, TorusLift):
        z = np.atleast_1d(np.asarray(x, dtype=float))
        lifted = np.empty((n + 1, system.dim))
        lifted[0] = z
        for j in range(n):
            lifted[j + 1] = system.lift(lifted[j])
        return OrbitSegment(system, [wrap_torus(z) for z in lifted], lifted)
    pts = [x]
    for _ in range(n):
        pts.append(system.step(pts[-1]))
    return OrbitSegment(system, pts)


def system_distance(system, x, y) -> float:
    if getattr(system, "space", None) == "shift":
        return symbol_distance(x, y)
    if getattr(system, "space", None) == "circle" or getattr(system, "dim", 0) == 1:
        return circle_distance(float(np.ravel(x)[0]), float(np.ravel(y)[0]))
    return torus_distance(x, y)


def bowen_distance(system, x, y, n: int, window: int = 64) -> float:
    """d_n(x, y) = max over 0 <= j < n of d(f^j x, f^j y).

    Shift points take a vectorized path: with D the first index where the
    symbol arrays differ, d_n = 2^-(max(0, D - n + 1)); no disagreement
    within n + window symbols is reported as 2^-window.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    system.check_point(x)
    system.check_point(y)
    if isinstance(x, SymbolPoint) and isinstance(y, SymbolPoint):
        from .symbolic import symbol_array

        a = symbol_array(x, n + window)
        b = symbol_array(y, n + window)
        diff = np.nonzero(a != b)[0]
        if not len(diff):
            return 0.0 if x == y else 2.0 ** (-window)
        return 2.0 ** (-max(0, int(diff[0]) - n + 1))
    best = 0.0
    cx, cy = x, y
    for j in range(n):
        best = max(best, system_distance(system, cx, cy))
        if j + 1 < n:
            cx, cy = system.step(cx), system.step(cy)
    return best


def c0_distance(f, g, grid: int = 64, two_sided: bool = True) -> float:
    """Grid lower bound for the C0 distance max(sup d(f, g), sup d(f^-1, g^-1))."""
    if getattr(f, "space", None) != getattr(g, "space", None) or f.dim != g.dim:
        raise DomainMismatch("systems act on different spaces")
    d = f.dim
    axes = [np.arange(grid) / grid] * d
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    fx = np.asarray([f.step(p) for p in mesh])
    gx = np.asarray([g.step(p) for p in mesh])
    best = float(np.max(torus_distance(fx, gx)))
    if two_sided:
        if not (getattr(f, "has_inverse", False) and getattr(g, "has_inverse", False)):
            raise UnsupportedOracle("two-sided C0 distance needs both inverses")
        fi = np.asarray([f.inverse_step(p) for p in mesh])
        gi = np.asarray([g.inverse_step(p) for p in mesh])
        best = max(best, float(np.max(torus_distance(fi, gi))))
    return best


def equivariance_defect(lift: TorusLift, grid: int = 10) -> float:
    """max |F(x + m) - F(x) - m| over a sample grid and m in {-1, 0, 1}^d."""
    d = lift.dim
    axes = [np.arange(grid) / grid] * d
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    base = lift.lift(mesh)
    worst = 0.0
    shifts = np.stack(np.meshgrid(*[[-1.0, 0.0, 1.0]] * d, indexing="ij"), axis=-1).reshape(-1, d)
    for m in shifts:
        defect = np.abs(lift.lift(mesh + m) - base - m)
        worst = max(worst, float(defect.max()))
    return worst


# ---------------------------------------------------------------------------
# grid chain recurrence
# ---------------------------------------------------------------------------

@dataclass
class GridGraph:
    """Box graph of a torus/circle map with its recurrent structure.

    Recurrent boxes are those lying on a cycle of the box graph (computed by
    strongly connected components); recurrent components are the connected
    clusters of recurrent boxes.  The union of recurrent boxes is an outer
    approximation of the chain recurrent set at resolution 1/boxes.
    """

    boxes: int
    dim: int
    edges: dict
    recurrent: set
    components: list
    isolated: list
    gaps: np.ndarray
    note: str = ""

    def component_of(self, box) -> int:
        for i, comp in enumerate(self.components):
            if box in comp:
                return i
        return -1


def _tarjan_scc(edges: dict) -> list:
    """Iterative Tarjan; edges maps node -> iterable of nodes."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = [0]
    for root in edges:
        if root in index:
            continue
        work = [(root, iter(edges.get(root, ())))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(edges.get(succ, ()))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    v = stack.pop()
                    on_stack.discard(v)
                    comp.append(v)
                    if v == node:
                        break
                sccs.append(comp)
    return sccs


def _box_intervals(idx, boxes, dim):
    if dim == 1:
        i = idx if np.isscalar(idx) else idx[0]
        return (Interval(i / boxes, (i + 1) / boxes),)
    return tuple(Interval(i / boxes, (i + 1) / boxes) for i in idx)


def _covered_indices(iv: Interval, boxes: int):
    lo = math.floor(iv.lo * boxes)
    hi = math.floor(iv.hi * boxes)
    if hi - lo >= boxes:
        return list(range(boxes))
    return [j % boxes for j in range(lo, hi + 1)]


def _axis_gap(i, j, boxes):
    """Distance between circle boxes i and j in box units (0 when touching)."""
    d = abs(i - j) % boxes
    d = min(d, boxes - d)
    return max(0, d - 1)


def chain_recurrence(system, boxes: int) -> GridGraph:
    """Outer approximation of the chain recurrent set on a box grid.

    Box images are interval enclosures of the map expression (outward
    rounded), so no edge of the true box-transition relation is missed.
    """
    if boxes < 8:
        raise ValueError("need at least 8 boxes per axis")
    if getattr(system, "space", None) == "shift":
        raise DomainMismatch("chain recurrence runs on torus/circle systems")
    dim = system.dim
    if dim == 1:
        nodes = list(range(boxes))
    else:
        nodes = [(i, j) for i in range(boxes) for j in range(boxes)]

    edges = {}
    for node in nodes:
        image = system.box_image(_box_intervals(node, boxes, dim))
        ranges = [_covered_indices(iv, boxes) for iv in image]
        if dim == 1:
            edges[node] = ranges[0]
        else:
            edges[node] = [(a, b) for a in ranges[0] for b in ranges[1]]

    sccs = _tarjan_scc(edges)
    recurrent = set()
    for comp in sccs:
        if len(comp) > 1:
            recurrent.update(comp)
        else:
            v = comp[0]
            if v in edges and v in edges[v]:
                recurrent.add(v)

    # cluster recurrent boxes that touch (wrap-around, diagonal included)
    components = []
    unassigned = set(recurrent)
    while unassigned:
        seed = unassigned.pop()
        comp = {seed}
        frontier = [seed]
        while frontier:
            cur = frontier.pop()
            if dim == 1:
                neigh = [(cur + 1) % boxes, (cur - 1) % boxes]
            else:
                neigh = [
                    ((cur[0] + di) % boxes, (cur[1] + dj) % boxes)
                    for di in (-1, 0, 1)
                    for dj in (-1, 0, 1)
                    if (di, dj) != (0, 0)
                ]
            for v in neigh:
                if v in unassigned:
                    unassigned.discard(v)
                    comp.add(v)
                    frontier.append(v)
        components.append(comp)
    components.sort(key=lambda c: (len(c), sorted(c)[0]), reverse=True)

    n_comp = len(components)
    gaps = np.zeros((n_comp, n_comp))
    for i in range(n_comp):
        for j in range(i + 1, n_comp):
            best = math.inf
            for a in components[i]:
                for b in components[j]:
                    if dim == 1:
                        g = _axis_gap(a, b, boxes) / boxes
                    else:
                        g = math.hypot(
                            _axis_gap(a[0], b[0], boxes) / boxes,
                            _axis_gap(a[1], b[1], boxes) / boxes,
                        )
                    best = min(best, g)
            gaps[i, j] = gaps[j, i] = best

    diameter = math.sqrt(dim) / boxes
    isolated = []
    for i in range(n_comp):
        others = [gaps[i, j] for j in range(n_comp) if j != i]
        isolated.append(bool(others) and min(others) > diameter)

    note = ""
    if n_comp == 1:
        note = "single recurrent component at this resolution; no separation visible"
    return GridGraph(boxes, dim, edges, recurrent, components, isolated, gaps, note)
