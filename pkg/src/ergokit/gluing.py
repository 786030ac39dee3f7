"""Orbit reconstruction: shadowing, gluing orbits, periodic nets, and
periodic approximation of invariant measures.

Every constructed orbit re-validates its own shadowing errors and gap
bounds by direct iteration; nothing trusts the constructor.  Shift
constructions are exact symbol manipulations; doubling-map constructions
run in exact rational arithmetic, since float iteration of an expanding
map loses a bit per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .complexity import BernoulliSampler, DiracWordSampler
from .observables import CylinderIndicator
from .symbolic import SymbolPoint, separation_depth, splice_shadow, symbol_array, symbol_distance
from .systems import (
    DoublingMap,
    ShiftSystem,
    TranslationLift,
    UnsupportedOracle,
    circle_distance,
    system_distance,
    torus_distance,
)


@dataclass
class SegmentSpec:
    """Orbit segments (anchor, length) to be shadowed within eps by one orbit."""

    segments: list
    eps: float

    def __post_init__(self):
        if not self.segments:
            raise ValueError("need at least one segment")
        if any(n < 0 for _, n in self.segments):
            raise ValueError("segment lengths must be nonnegative")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


@dataclass
class GluedOrbit:
    """A single orbit that eps-shadows every requested segment.

    offsets[i] is the time at which segment i starts; gaps[i] is the extra
    time inserted after segment i, each at most the reported gap bound.
    """

    point: object
    offsets: list
    gaps: list
    gap_bound: int
    eps: float
    errors: list = field(default_factory=list)
    period: int | None = None

    def validate(self, system, spec: SegmentSpec) -> bool:
        """Re-check segment errors, gap bounds, and periodicity by iteration."""
        ok = all(0 <= g <= self.gap_bound for g in self.gaps)
        self.errors = []
        if isinstance(self.point, SymbolPoint):
            for (anchor, n), e in zip(spec.segments, self.offsets):
                self.errors.append(_shift_segment_error(self.point, anchor, e, n))
            ok &= all(err <= self.eps + 1e-15 for err in self.errors)
            if self.period is not None:
                shifted = self.point
                for _ in range(self.period):
                    shifted = shifted.shift()
                ok &= shifted == self.point
            return ok
        horizon = self.offsets[-1] + max(1, spec.segments[-1][1])
        if self.period is not None:
            horizon = max(horizon, self.period)
        orbit = [self.point]
        for _ in range(horizon + 1):
            orbit.append(system.step(orbit[-1]))
        for (anchor, n), e in zip(spec.segments, self.offsets):
            worst = 0.0
            ref = anchor
            for j in range(n):
                worst = max(worst, system_distance(system, orbit[e + j], ref))
                ref = system.step(ref)
            self.errors.append(worst)
        ok &= all(err <= self.eps + 1e-12 for err in self.errors)
        if self.period is not None:
            if isinstance(self.point, Fraction):
                ok &= orbit[self.period] == self.point
            else:
                ok &= system_distance(system, orbit[self.period], self.point) <= 1e-9
        return ok


def _shift_segment_error(y: SymbolPoint, anchor: SymbolPoint, offset: int, n: int,
                         window: int = 64) -> float:
    """max_{j<n} d(shift^(offset+j) y, shift^j anchor), vectorized on symbols."""
    if n == 0:
        return 0.0
    ya = symbol_array(y, offset + n + window)
    xa = symbol_array(anchor, n + window)
    worst = 0.0
    for j in range(n):
        mism = np.nonzero(ya[offset + j: offset + j + window] != xa[j: j + window])[0]
        fd = int(mism[0]) if len(mism) else window
        worst = max(worst, 2.0 ** (-fd))
    return worst


# ---------------------------------------------------------------------------
# shadowing oracles
# ---------------------------------------------------------------------------

def shadow(system, pseudo_orbit, delta: float, periodic: bool = False):
    """True orbit tracing a delta-pseudo-orbit; returns (point, achieved eps).

    Shifts splice first symbols (achieved error <= 2 delta); the doubling
    map runs backward through the inverse branch nearest each pseudo-orbit
    point (error <= delta * lambda/(lambda-1) = 2 delta).  Minimal
    translations do not shadow and report unsupported.
    """
    if len(pseudo_orbit) < 1:
        raise ValueError("empty pseudo-orbit")
    if isinstance(system, ShiftSystem):
        return _shadow_shift(system, pseudo_orbit, delta, periodic)
    if isinstance(system, DoublingMap):
        return _shadow_doubling(system, pseudo_orbit, delta, periodic)
    raise UnsupportedOracle(
        f"no shadowing oracle for {getattr(system, 'kind', '?')} "
        "(minimal translations fail shadowing)"
    )


def shadow_bound(system, delta: float) -> float:
    """The eps(delta) guarantee of the system's shadowing oracle."""
    if isinstance(system, ShiftSystem):
        return 2 * delta
    if isinstance(system, DoublingMap):
        lam = system.expansion
        return delta * lam / (lam - 1.0)
    raise UnsupportedOracle("no shadowing oracle for this system kind")


def _check_jumps(system, pts, delta, periodic):
    seq = list(pts) + ([pts[0]] if periodic else [])
    for k in range(len(seq) - 1):
        jump = system_distance(system, system.step(seq[k]), seq[k + 1])
        if jump > delta * (1 + 1e-12):
            raise ValueError(f"pseudo-orbit jump {jump:.3g} at step {k} exceeds delta={delta:.3g}")


def _shadow_shift(system, pseudo_orbit, delta, periodic):
    _check_jumps(system, pseudo_orbit, delta, periodic)
    if periodic:
        word = tuple(x.symbol(0) for x in pseudo_orbit)
        y = SymbolPoint((), word)
        if not system.shift.contains(y):
            raise ValueError("periodic splice is not admissible")
    else:
        y = splice_shadow(system.shift, pseudo_orbit, delta)
    achieved = 0.0
    cur = y
    for x in pseudo_orbit:
        achieved = max(achieved, symbol_distance(cur, x))
        cur = cur.shift()
    return y, achieved


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x % 1
    return Fraction(float(np.ravel(x)[0])).limit_denominator(10**12) % 1


def _shadow_doubling(system, pseudo_orbit, delta, periodic):
    _check_jumps(system, pseudo_orbit, delta, periodic)
    xs = [_as_fraction(x) for x in pseudo_orbit]
    if periodic:
        T = len(xs)
        # two float passes around the cycle settle the inverse-branch choices
        branches = [0] * T
        y = float(xs[0])
        for _ in range(2):
            for k in range(T - 1, -1, -1):
                half = (y % 1.0) / 2.0
                cands = (half, half + 0.5)
                b = 0 if circle_distance(cands[0], float(xs[k])) <= \
                    circle_distance(cands[1], float(xs[k])) else 1
                branches[k] = b
                y = cands[b]
        # the backward pass is affine with slope 2^-T; its fixed point is exact
        c = Fraction(0)
        for k in range(T - 1, -1, -1):
            c = (c + branches[k]) / 2
        y0 = (c * 2**T / (2**T - 1)) % 1
        achieved = 0.0
        cur = y0
        for x in xs:
            achieved = max(achieved, circle_distance(float(cur), float(x)))
            cur = (2 * cur) % 1
        return y0, achieved
    y = xs[-1]
    for k in range(len(xs) - 2, -1, -1):
        half = y / 2
        cands = (half, half + Fraction(1, 2))
        y = min(cands, key=lambda cand: circle_distance(float(cand), float(xs[k])))
    achieved = 0.0
    cur = y
    for x in xs:
        achieved = max(achieved, circle_distance(float(cur), float(x)))
        cur = (2 * cur) % 1
    return y, achieved


# ---------------------------------------------------------------------------
# gluing oracles
# ---------------------------------------------------------------------------

def gap_bound(system, eps: float) -> int:
    """The uniform gap constant m(eps) of the system's gluing oracle."""
    if isinstance(system, ShiftSystem):
        if not system.shift.mixing:
            raise UnsupportedOracle("gluing needs a primitive transition matrix")
        return system.shift.primitivity_exponent + separation_depth(eps)
    if isinstance(system, DoublingMap):
        return _doubling_connector_length(eps / 2.0) + 1
    if isinstance(system, TranslationLift):
        if not system.is_minimal():
            raise UnsupportedOracle("translation gluing needs a minimal (irrational) vector")
        return _translation_gap_table(system, eps)
    raise UnsupportedOracle(f"no gluing oracle for {getattr(system, 'kind', '?')}")


def glue(system, spec: SegmentSpec) -> GluedOrbit:
    """One orbit eps-shadowing all segments with bounded gaps in between."""
    return _glue(system, spec, periodic=False)


def glue_periodic(system, spec: SegmentSpec) -> GluedOrbit:
    """Periodic variant: the glued orbit has period sum(n_i + p_i)."""
    return _glue(system, spec, periodic=True)


def _glue(system, spec, periodic):
    if isinstance(system, ShiftSystem):
        return _glue_shift(system, spec, periodic)
    if isinstance(system, DoublingMap):
        return _glue_doubling(system, spec, periodic)
    if isinstance(system, TranslationLift):
        if periodic:
            raise UnsupportedOracle("minimal translations have no periodic orbits to glue")
        return _glue_translation(system, spec)
    raise UnsupportedOracle(f"no gluing oracle for {getattr(system, 'kind', '?')}")


def _glue_shift(system, spec, periodic):
    """Concatenate n_i + m - 1 symbols per anchor plus admissible connectors.

    The copied window makes d_{n_i} <= 2^-m <= eps by cylinder containment;
    on the full shift connectors are empty, so every gap is exactly m - 1.
    """
    shift = system.shift
    bound = gap_bound(system, spec.eps)
    m = separation_depth(spec.eps)
    word: list[int] = []
    offsets = []
    gaps = []
    for i, (anchor, n) in enumerate(spec.segments):
        if not isinstance(anchor, SymbolPoint):
            raise UnsupportedOracle("shift gluing needs SymbolPoint anchors")
        offsets.append(len(word))
        copy = max(n + m - 1, 1)
        block = list(symbol_array(anchor, copy))
        if word and not shift.transition[word[-1], block[0]]:
            conn = shift.connector(word[-1], block[0])
            word.extend(conn)
            offsets[-1] += len(conn)
            gaps[-1] += len(conn)
        word.extend(block)
        last = i == len(spec.segments) - 1
        if not last or periodic:
            gaps.append(copy - n)
    if periodic:
        first = word[0]
        if not shift.transition[word[-1], first]:
            conn = shift.connector(word[-1], first)
            word.extend(conn)
            gaps[-1] += len(conn)
        point = SymbolPoint((), tuple(word))
        period = len(word)
    else:
        point = shift.point_from_word(tuple(word))
        period = None
    orbit = GluedOrbit(point, offsets, gaps, bound, spec.eps, period=period)
    if not orbit.validate(system, spec):
        raise RuntimeError("glued shift orbit failed its own validation")
    return orbit


def _doubling_connector_length(delta: float) -> int:
    """Steps t with preimage spacing 2^-t fine enough that one jump of size
    at most 2^-(t+1) < delta reaches an exact t-step preimage of any target."""
    t = 1
    while 2.0 ** (-(t + 1)) >= delta:
        t += 1
    return t


def _doubling_connect(a: Fraction, b: Fraction, delta: float):
    """Pseudo-orbit [a, w, f(w), ..., f^{t-1}(w) = ...] landing exactly on b."""
    t = _doubling_connector_length(delta)
    fa = (2 * a) % 1
    # preimages of b under f^t are spaced 2^-t; take the one nearest f(a)
    base = b / (2**t)
    offset = float(fa - base)
    k = round(offset * 2**t)
    w = (base + Fraction(k, 2**t)) % 1
    path = [w]
    for _ in range(t - 1):
        path.append((2 * path[-1]) % 1)
    assert (2 * path[-1]) % 1 == b % 1
    return path


def _glue_doubling(system, spec, periodic):
    delta = spec.eps / 2.0
    bound = gap_bound(system, spec.eps)
    anchors = [_as_fraction(a) for a, _ in spec.segments]
    pseudo = []
    offsets = []
    gaps = []
    for i, ((_, n), a) in enumerate(zip(spec.segments, anchors)):
        offsets.append(len(pseudo))
        cur = a
        for _ in range(max(n, 1)):
            pseudo.append(cur)
            cur = (2 * cur) % 1
        last = i == len(spec.segments) - 1
        if not last or periodic:
            target = anchors[(i + 1) % len(anchors)]
            connector = _doubling_connect(pseudo[-1], target, delta)
            gaps.append(len(connector) + max(n, 1) - n)
            pseudo.extend(connector)
    if periodic:
        point, achieved = shadow(system, pseudo, delta, periodic=True)
        period = len(pseudo)
    else:
        point, achieved = shadow(system, pseudo, delta, periodic=False)
        period = None
    orbit = GluedOrbit(point, offsets, gaps, bound, spec.eps, period=period)
    if not orbit.validate(system, spec):
        raise RuntimeError("glued doubling orbit failed its own validation")
    return orbit


_TRANSLATION_TABLES: dict = {}


def _translation_gap_table(system: TranslationLift, eps: float) -> int:
    """m(eps) = max first-entry time of u + p*v into B(0, eps/2) over an eps/2-net."""
    key = (id(system), round(eps, 12))
    if key in _TRANSLATION_TABLES:
        return _TRANSLATION_TABLES[key]
    d = system.dim
    mesh = max(3, math.ceil(2.0 / eps))
    if mesh**d > 1 << 20:
        raise UnsupportedOracle("translation gap table too large at this eps")
    axes = [np.arange(mesh) / mesh] * d
    net = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    remaining = np.ones(len(net), dtype=bool)
    pos = net.copy()
    worst = 0
    p = 0
    cap = 64 * mesh**d
    while remaining.any():
        dist = torus_distance(pos[remaining], np.zeros(d))
        hit = dist < eps / 2.0
        if hit.any():
            idx = np.nonzero(remaining)[0][hit]
            remaining[idx] = False
            worst = p
        pos[remaining] += system.vector
        pos %= 1.0
        p += 1
        if p > cap:
            raise UnsupportedOracle("first-entry times did not close; vector may be rational")
    _TRANSLATION_TABLES[key] = worst
    return worst


def _glue_translation(system, spec):
    """Wait until the current orbit position enters the eps-ball of each anchor."""
    bound = _translation_gap_table(system, spec.eps)
    v = system.vector
    anchors = [np.atleast_1d(np.asarray(a, dtype=float)) for a, _ in spec.segments]
    y = anchors[0]
    offsets = [0]
    gaps = []
    t = spec.segments[0][1]
    for i in range(1, len(spec.segments)):
        target = anchors[i]
        found = None
        for attempt in (bound, 2 * bound):  # enlarge once, then fail
            for p in range(attempt + 1):
                pos = (y + (t + p) * v) % 1.0
                if torus_distance(pos, target) < spec.eps:
                    found = p
                    break
            if found is not None:
                break
        if found is None:
            raise RuntimeError("waiting-time bound exceeded; net too coarse")
        gaps.append(found)
        offsets.append(t + found)
        t = t + found + spec.segments[i][1]
    orbit = GluedOrbit(y, offsets, gaps, bound, spec.eps)
    if not orbit.validate(system, spec):
        raise RuntimeError("glued translation orbit failed its own validation")
    return orbit


# ---------------------------------------------------------------------------
# periodic nets (periodic shadowing => periodic gluing)
# ---------------------------------------------------------------------------

@dataclass
class PeriodicNet:
    """Maximal delta-separated periodic family with stored connecting pseudo-orbits.

    K = (net size) * (max period) bounds every connection length, which is
    the gap constant periodic gluing inherits from periodic shadowing.
    """

    delta: float
    points: list
    periods: list
    connections: dict
    K: int

    def connect(self, system, a, b):
        """delta-pseudo-orbit [a, ..., b]; jumps re-checked by the caller."""
        if isinstance(system, ShiftSystem):
            return _shift_connect(system, a, b, self.delta)
        if isinstance(system, DoublingMap):
            af = _as_fraction(a)
            bf = _as_fraction(b)
            path = _doubling_connect(af, bf, self.delta)
            return [af] + path + [bf]
        raise UnsupportedOracle("no connection oracle for this system kind")


def _shift_connect(system, a: SymbolPoint, b: SymbolPoint, delta: float):
    """Pseudo-orbit from a to b: follow a point copying a's prefix, then b."""
    s = separation_depth(delta)
    prefix = tuple(symbol_array(a, s + 2))
    conn = ()
    if not system.shift.transition[prefix[-1], b.symbol(0)]:
        conn = system.shift.connector(prefix[-1], b.symbol(0))
    z = SymbolPoint(prefix + conn + b.pre, b.cycle)
    path = [a]
    cur = z.shift()
    for _ in range(len(prefix) + len(conn) - 1):
        path.append(cur)
        cur = cur.shift()
    path.append(b)
    return path


def build_periodic_net(system, delta: float, component=None, budget: int = 12) -> PeriodicNet:
    """Maximal delta-separated periodic family covering the space (or component).

    Candidates are scanned in order of period, so the selected net is the
    deterministic greedy one; the connection table realizes one
    delta-pseudo-orbit per ordered pair.
    """
    if isinstance(system, ShiftSystem):
        shift = system.shift
        s = separation_depth(delta)
        words = shift.enumerate_words(s)
        points = []
        for w in words:
            w = tuple(int(c) for c in w)
            conn = () if shift.transition[w[-1], w[0]] else shift.connector(w[-1], w[0])
            points.append(SymbolPoint((), w + conn))
        periods = [p.period for p in points]
    elif isinstance(system, DoublingMap):
        cands = system.periodic_points(budget)
        points = []
        periods = []
        for p, period in cands:
            if component is not None and not _in_component(float(p), component):
                continue
            if all(circle_distance(float(p), float(q)) > delta for q in points):
                points.append(p)
                periods.append(period)
        _verify_covering_circle(points, delta, component)
    elif hasattr(system, "fixed_points"):
        fixed = [np.array([t]) for t in system.fixed_points()]
        if component is not None:
            fixed = [p for p in fixed if _in_component(float(p[0]), component)]
        if not fixed:
            raise UnsupportedOracle("no periodic point found within delta of the class")
        points = []
        for p in fixed:
            if all(torus_distance(p, q) > delta for q in points):
                points.append(p)
        periods = [1] * len(points)
    else:
        raise UnsupportedOracle("periodic enumeration unavailable for this system kind")
    if not points:
        raise UnsupportedOracle("no periodic point found within delta of the class")
    K = len(points) * max(periods)
    net = PeriodicNet(delta, points, periods, {}, K)
    fill = len(points) <= (8 if isinstance(system, ShiftSystem) else 24)
    if fill:
        for i in range(len(points)):
            for j in range(len(points)):
                if i != j:
                    path = net.connect(system, points[i], points[j])
                    _check_jumps(system, path, delta, periodic=False)
                    if len(path) > K + 1:
                        raise RuntimeError("stored connection exceeds the net constant K")
                    net.connections[(i, j)] = path
    return net


def _in_component(x: float, component) -> bool:
    boxes, n = component  # (set of box indices, subdivision count)
    return math.floor((x % 1.0) * n) % n in boxes


def _verify_covering_circle(points, delta, component):
    grid = np.arange(0, 1, delta / 4)
    if component is not None:
        grid = np.array([g for g in grid if _in_component(float(g), component)])
    for g in grid:
        if not any(circle_distance(float(g), float(p)) <= delta for p in points):
            raise UnsupportedOracle(
                f"no periodic point within delta of {g:.4f}; enlarge the period budget"
            )


def gluing_from_shadowing(system, net: PeriodicNet, spec: SegmentSpec) -> GluedOrbit:
    """Periodic gluing assembled from periodic shadowing and the net.

    The pseudo-orbit lists each segment's true orbit and the net's
    connecting pseudo-orbits, closes up, and is handed to the periodic
    shadowing oracle; realized gaps are the connection lengths, bounded by
    the net constant K instead of the generic m(eps).
    """
    delta = net.delta
    eps = shadow_bound(system, delta)
    if spec.eps < eps:
        raise ValueError(f"net delta only certifies eps = {eps:.3g}")
    pseudo = []
    offsets = []
    gaps = []
    k = len(spec.segments)
    for i, (anchor, n) in enumerate(spec.segments):
        offsets.append(len(pseudo))
        cur = anchor if not isinstance(system, DoublingMap) else _as_fraction(anchor)
        steps = max(n, 1)
        for _ in range(steps):
            pseudo.append(cur)
            cur = system.step(cur)
        nxt = spec.segments[(i + 1) % k][0]
        if isinstance(system, DoublingMap):
            nxt = _as_fraction(nxt)
        leg = net.connect(system, pseudo[-1], nxt)
        # leg = [segment end, interior..., next anchor]; keep the interior
        interior = leg[1:-1]
        gaps.append(len(interior) + (steps - n))
        pseudo.extend(interior)
    point, achieved = shadow(system, pseudo, delta, periodic=True)
    orbit = GluedOrbit(point, offsets, gaps, net.K, spec.eps, period=len(pseudo))
    if not orbit.validate(system, spec):
        raise RuntimeError("net-glued orbit failed its own validation")
    return orbit


# ---------------------------------------------------------------------------
# periodic approximation of invariant measures
# ---------------------------------------------------------------------------

def cylinder_basis(alphabet: int, max_depth: int):
    """Cylinder indicators ordered by (depth, lexicographic word)."""
    basis = []
    words = [()]
    for _ in range(max_depth):
        words = [w + (s,) for w in words for s in range(alphabet)]
        basis.extend(CylinderIndicator(w) for w in sorted(words))
        words = sorted(words)
    return basis


def _target_integral(measure, obs: CylinderIndicator) -> float:
    word = obs.word
    if isinstance(measure, DiracWordSampler):
        cyc = measure.cycle
        hits = 0
        for r in range(len(cyc)):
            if all(cyc[(r + i) % len(cyc)] == c for i, c in enumerate(word)):
                hits += 1
        return hits / len(cyc)
    if isinstance(measure, BernoulliSampler):
        out = 1.0
        for c in word:
            out *= measure.probs[c]
        return out
    raise TypeError("unsupported measure kind")


def _typical_point(system, measure, length: int, seed: int) -> SymbolPoint:
    if isinstance(measure, DiracWordSampler):
        return SymbolPoint((), measure.cycle)
    rng = np.random.default_rng(seed)
    word = tuple(int(s) for s in measure.sample_words(1, length, rng)[0])
    return SymbolPoint((), word)


def exact_cycle_average(point: SymbolPoint, obs: CylinderIndicator) -> Fraction:
    """Exact frequency of the cylinder word along a periodic orbit."""
    cyc = point.cycle
    word = obs.word
    hits = 0
    for r in range(len(cyc)):
        if all(cyc[(r + i) % len(cyc)] == c for i, c in enumerate(word)):
            hits += 1
    return Fraction(hits, len(cyc))


@dataclass
class PeriodicMeasureResult:
    point: SymbolPoint
    bound: float
    zeta: float
    basis_depth: int
    per_basis: list
    segment_lengths: list

    @property
    def certified(self) -> bool:
        return self.bound <= self.zeta


def approximate_by_periodic_measure(system, target, zeta: float, basis_depth: int = 3,
                                    seed: int = 0) -> PeriodicMeasureResult:
    """Periodic orbit whose empirical measure is weak*-close to the target.

    target is a list of (measure, weight) with weights summing to one.  The
    segment lengths follow the density-of-periodic-measures construction:
    n_i proportional to the weights within zeta/(10k) and total length
    soaking up (k+1) m(eps) gap time within zeta/10.  The returned bound is
    recomputed exactly from the glued word on the truncated metric
    sum_b 2^-b |delta integral of psi_b| + 2^-B.
    """
    if not isinstance(system, ShiftSystem):
        raise UnsupportedOracle("periodic measure approximation implemented on shifts")
    weights = [w for _, w in target]
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("weights must sum to one")
    k = len(target)
    eps = 2.0 ** (-(basis_depth + 1))  # cylinder potentials are constant at this scale
    m_eps = gap_bound(system, eps)
    total = max(math.ceil(10 * (k + 1) * m_eps / zeta), 400 * k)
    lengths = [max(1, round(w * total)) for w in weights]
    for i, w in enumerate(weights):
        if abs(lengths[i] / sum(lengths) - w) >= zeta / (10 * k):
            raise RuntimeError("length quota cannot match the weights at this zeta")
    anchors = [_typical_point(system, meas, lengths[i], seed + i)
               for i, (meas, _) in enumerate(target)]
    spec = SegmentSpec(list(zip(anchors, lengths)), eps)
    orbit = glue_periodic(system, spec)
    basis = cylinder_basis(system.shift.alphabet_size, basis_depth)
    per_basis = []
    bound = Fraction(0)
    for b, obs in enumerate(basis, start=1):
        mine = exact_cycle_average(orbit.point, obs)
        want = sum(w * _target_integral(meas, obs) for meas, w in target)
        gap = abs(float(mine) - want)
        per_basis.append((obs.name, float(mine), want, gap))
        bound += Fraction(1, 2**b) * Fraction(gap)
    bound = float(bound) + 2.0 ** (-len(basis))
    return PeriodicMeasureResult(orbit.point, bound, zeta, basis_depth, per_basis, lengths)
