"""Topological complexity: separated sets, entropy, pressure, metric mean
dimension, the Katok span formula, and relative pressure of invariant subsets.

On shift spaces everything reduces to word counting: two points are
(n, eps)-separated exactly when their first n + m - 1 symbols differ, where
m is the smallest integer with 2^(-m) <= eps.  Torus systems use a lattice
candidate pool of mesh eps/4, which makes those estimates certified
heuristics rather than exact counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .observables import Observable, orbit_values, variation_bound
from .symbolic import BudgetExceeded, ShiftSpace, separation_depth
from .systems import (
    DomainMismatch,
    ShiftSystem,
    TorusLift,
    UnsupportedOracle,
    bowen_distance,
    iterate,
    torus_distance,
)

FIT_NOISE = 0.02  # tolerated non-monotonicity of h(eps) across scales
POOL_BUDGET = 1 << 17


# ---------------------------------------------------------------------------
# separated sets
# ---------------------------------------------------------------------------

@dataclass
class SeparatedSet:
    """Maximal (n, eps)-separated family with its validity certificate."""

    n: int
    eps: float
    points: list
    cardinality: int
    exact: bool
    validated: bool = False
    validation: str = ""
    words: np.ndarray | None = None

    def revalidate(self, system, sample_pairs: int = 200, rng_seed: int = 3) -> bool:
        """Re-check pairwise Bowen separation by direct iteration.

        Exhaustive below 1500 points; beyond that, sorted-word uniqueness
        (shift case, equivalent to separation) plus sampled pairs.
        """
        pts = self.points
        k = len(pts)
        if k <= 1:
            self.validated = True
            self.validation = "trivial"
            return True
        if self.words is not None:
            rows = {tuple(int(s) for s in row) for row in self.words}
            ok = len(rows) == k
            rng = np.random.default_rng(rng_seed)
            for _ in range(min(sample_pairs, k * (k - 1) // 2)):
                i, j = rng.integers(0, k, 2)
                if i == j:
                    continue
                ok &= bowen_distance(system, pts[i], pts[j], self.n) > self.eps
            self.validated = ok
            self.validation = "word-uniqueness plus sampled Bowen pairs"
            return ok
        if k <= 1500:
            ok = all(
                bowen_distance(system, pts[i], pts[j], self.n) > self.eps
                for i in range(k)
                for j in range(i + 1, k)
            )
            self.validated = ok
            self.validation = "exhaustive pairwise"
            return ok
        rng = np.random.default_rng(rng_seed)
        ok = True
        for _ in range(sample_pairs):
            i, j = rng.integers(0, k, 2)
            if i != j:
                ok &= bowen_distance(system, pts[i], pts[j], self.n) > self.eps
        self.validated = ok
        self.validation = "sampled pairwise"
        return ok


def _lattice_pool(dim: int, eps: float, budget: int = POOL_BUDGET) -> np.ndarray:
    mesh = max(2, math.ceil(4.0 / eps))
    if mesh**dim > budget:
        raise BudgetExceeded(
            f"lattice pool {mesh}^{dim} exceeds budget; coarsen eps or lower n"
        )
    axes = [np.arange(mesh) / mesh] * dim
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)


def _greedy_separated_numeric(system, n: int, eps: float, pool: np.ndarray):
    """Greedy scan of the pool in lexicographic order; vectorized distance checks."""
    orbits = np.empty((len(pool), n, pool.shape[1]))
    z = pool.copy()
    for j in range(n):
        orbits[:, j, :] = z
        z = np.asarray([system.step(p) for p in z]) if not isinstance(system, TorusLift) \
            else system.step(z)
    kept: list[int] = []
    kept_orbits = np.empty((0, n, pool.shape[1]))
    for i in range(len(pool)):
        if kept:
            diff = np.abs(kept_orbits - orbits[i][None, :, :]) % 1.0
            diff = np.minimum(diff, 1.0 - diff)
            dn = np.sqrt((diff**2).sum(axis=-1)).max(axis=1) if pool.shape[1] > 1 \
                else diff[..., 0].max(axis=1)
            if (dn <= eps).any():
                continue
        kept.append(i)
        kept_orbits = np.concatenate([kept_orbits, orbits[i][None]], axis=0)
    return [pool[i] for i in kept]


def max_separated(system, n: int, eps: float, pool=None, budget: int = POOL_BUDGET) -> SeparatedSet:
    """Maximal (n, eps)-separated set, scanned in a fixed deterministic order.

    Shifts: exact (Bowen balls are cylinders, so distinct truncated words
    are equivalent to separation).  Numeric systems: greedy over a lattice
    pool, maximal within the pool only.
    """
    if n < 1 or eps <= 0:
        raise ValueError("need n >= 1 and eps > 0")
    if isinstance(system, ShiftSystem):
        m = separation_depth(eps)
        length = n + m - 1
        words = system.shift.enumerate_words(length, budget=budget)
        points = [system.shift.point_from_word(tuple(w)) for w in words]
        return SeparatedSet(n, eps, points, len(points), exact=True, words=words)
    if isinstance(system, TorusLift) or getattr(system, "space", None) == "circle":
        if pool is None:
            pool = _lattice_pool(getattr(system, "dim", 1), eps, budget)
        pts = _greedy_separated_numeric(system, n, eps, np.atleast_2d(pool))
        return SeparatedSet(n, eps, pts, len(pts), exact=False)
    raise DomainMismatch("no separated-set strategy for this system kind")


def log_separated_weight(system, psi: Observable | None, n: int, eps: float) -> float:
    """log sum over a maximal (n, eps)-separated set E of exp S_n psi.

    Exact on shifts via a weighted transfer-matrix pass over words of length
    n + m - 1; numeric systems evaluate over the greedy separated set.
    """
    if isinstance(system, ShiftSystem):
        m = separation_depth(eps)
        return _log_word_weight(system.shift, psi, n, n + m - 1)
    if hasattr(system, "log_separated_count"):
        if psi is not None:
            raise UnsupportedOracle("interval-alphabet shift supports psi = 0 only")
        return system.log_separated_count(n, eps)
    sep = max_separated(system, n, eps)
    if psi is None:
        return math.log(max(1, sep.cardinality))
    sums = np.asarray([orbit_values(system, psi, p, n).sum() for p in sep.points])
    top = sums.max()
    return float(top + np.log(np.exp(sums - top).sum()))


def _log_word_weight(shift: ShiftSpace, psi: Observable | None, n: int, length: int) -> float:
    """log sum over admissible words w of length L of exp sum_{j<n} psi(window_j)."""
    if psi is None:
        return math.log(shift.word_count(length))
    depth = psi.symbol_depth
    if depth is None:
        raise DomainMismatch("potential does not read symbols")
    a = shift.alphabet_size
    if depth == 1:
        w = np.exp(psi.symbol_values(np.arange(a, dtype=np.uint8)[:, None]).ravel())
        vec = np.ones(a)
        trans = shift.transition.astype(float)
        # positions 0..length-1; psi applies at positions < n
        vals = w.copy()  # position 0 weight
        vec = vals
        for pos in range(1, length):
            step = trans.T @ vec
            vec = step * (w if pos < n else 1.0)
        return float(np.log(vec.sum()))
    if depth == 2:
        # state = current symbol; edge weight carries psi on the outgoing pair
        pairs = np.array([[i, j] for i in range(a) for j in range(a)], dtype=np.uint8)
        pv = psi.symbol_values(pairs).ravel().reshape(a, a)
        trans = shift.transition.astype(float)
        vec = np.ones(a)
        for pos in range(length - 1):
            wmat = trans * (np.exp(pv) if pos < n else 1.0)
            vec = wmat.T @ vec
        # windows at positions n-1..length-2 stick out only when depth > 1;
        # the final window at position length-depth is the last applied
        return float(np.log(vec.sum()))
    raise UnsupportedOracle("potentials reading more than 2 symbols are not supported")


# ---------------------------------------------------------------------------
# pressure / entropy / mdim tables
# ---------------------------------------------------------------------------

@dataclass
class PressureEstimate:
    """Separated-set log-sums over an (eps, n) grid with growth-rate fits.

    `rates[i]` is the least-squares slope of log-sum against n over the upper
    half of the n grid at eps_grid[i]; the headline value is the rate at the
    smallest eps.  The mdim fields regress those rates against -log eps.
    """

    eps_grid: np.ndarray
    n_grid: np.ndarray
    table: np.ndarray  # (len(eps), len(n)) log-sums
    rates: np.ndarray
    value: float
    mdim_slope: float
    mdim_lower: float
    mdim_upper: float
    reliable: np.ndarray
    potential: str = "0"

    def rate_at(self, eps: float) -> float:
        idx = int(np.argmin(np.abs(self.eps_grid - eps)))
        return float(self.rates[idx])


def _fit_upper_half(ns: np.ndarray, logs: np.ndarray) -> float:
    k = len(ns)
    half = ns[k // 2:] if k >= 4 else ns
    vals = logs[k // 2:] if k >= 4 else logs
    slope = np.polyfit(half, vals, 1)[0]
    return float(slope)


def pressure_estimate(system, psi: Observable | None, eps_grid, n_grid) -> PressureEstimate:
    """Growth rate of log sum exp S_n psi over maximal separated sets.

    The slope-of-log-sum fit removes the (m - 1)/n transient that the exact
    shift count carries, so full-shift rates converge at small n.
    """
    eps_grid = np.asarray(sorted(eps_grid, reverse=True), dtype=float)
    n_grid = np.asarray(sorted(int(n) for n in n_grid))
    if len(eps_grid) < 4 or len(n_grid) < 4:
        raise ValueError("need at least 4 eps values and 4 n values")
    table = np.zeros((len(eps_grid), len(n_grid)))
    for i, eps in enumerate(eps_grid):
        for j, n in enumerate(n_grid):
            table[i, j] = log_separated_weight(system, psi, int(n), float(eps))
    rates = np.asarray([_fit_upper_half(n_grid, table[i]) for i in range(len(eps_grid))])
    reliable = np.ones(len(eps_grid), dtype=bool)
    for i in range(1, len(eps_grid)):
        if rates[i] < rates[i - 1] - FIT_NOISE:  # h(eps) must not drop as eps shrinks
            reliable[i] = False
    neg_log = -np.log(eps_grid)
    slope = float(np.polyfit(neg_log, rates, 1)[0])
    pair_slopes = np.diff(rates) / np.diff(neg_log)
    last = pair_slopes[-2:] if len(pair_slopes) >= 2 else pair_slopes
    return PressureEstimate(
        eps_grid,
        n_grid,
        table,
        rates,
        float(rates[-1]),
        slope,
        float(np.min(last)),
        float(np.max(last)),
        reliable,
        potential=getattr(psi, "name", "0") if psi is not None else "0",
    )


def entropy_estimate(system, eps_grid, n_grid) -> PressureEstimate:
    return pressure_estimate(system, None, eps_grid, n_grid)


def mdim_estimate(system, eps_grid, n_grid):
    """(lower, upper) metric mean dimension proxies from the two finest scales."""
    eps_grid = sorted(eps_grid, reverse=True)
    if len(eps_grid) < 4:
        raise ValueError("mdim needs at least 4 dyadic scales")
    est = pressure_estimate(system, None, eps_grid, n_grid)
    if est.reliable.sum() < 3:
        raise RuntimeError("fewer than 3 reliable h(eps) values")
    return est.mdim_lower, est.mdim_upper, est


# ---------------------------------------------------------------------------
# interval-alphabet shift (the positive-mdim testbed)
# ---------------------------------------------------------------------------

class IntervalAlphabetShift:
    """Shift whose alphabet is an eps-grid of [0, 1], refined with eps.

    Metric d(x, y) = sup_k 2^(-k) |x_k - y_k| on symbol embeddings.  Maximal
    (n, eps)-separated sets factor coordinatewise: coordinate i < n admits
    floor(1/eps) + 1 pairwise separated values, and coordinate n - 1 + k only
    floor(1/(eps 2^k)) + 1, giving the counting formula used here.
    """

    space = "interval_shift"
    kind = "interval_shift"
    name = "interval_shift"
    dim = None

    def log_separated_count(self, n: int, eps: float) -> float:
        if eps >= 1.0:
            return 0.0
        total = n * math.log(math.ceil(1.0 / eps))
        k = 1
        while eps * (2.0**k) < 1.0:
            total += math.log(math.ceil(1.0 / (eps * 2.0**k)))
            k += 1
        return total

    def check_point(self, x):
        raise DomainMismatch("interval-alphabet shift supports counting operations only")


# ---------------------------------------------------------------------------
# Katok's span formula
# ---------------------------------------------------------------------------

class BernoulliSampler:
    """IID symbol sampler; the closed-form entropy is -sum p log p."""

    def __init__(self, probs):
        if np.isscalar(probs):
            probs = [1.0 - float(probs), float(probs)]  # prob of symbol 1
        self.probs = np.asarray(probs, dtype=float)
        if abs(self.probs.sum() - 1.0) > 1e-12 or (self.probs < 0).any():
            raise ValueError("probabilities must be a distribution")

    def entropy(self) -> float:
        p = self.probs[self.probs > 0]
        return float(-(p * np.log(p)).sum())

    def sample_words(self, count: int, length: int, rng) -> np.ndarray:
        return rng.choice(len(self.probs), size=(count, length), p=self.probs).astype(np.uint8)


class DiracWordSampler:
    """Deterministic sampler concentrated on one periodic word."""

    def __init__(self, cycle):
        self.cycle = tuple(int(s) for s in cycle)

    def entropy(self) -> float:
        return 0.0

    def sample_words(self, count: int, length: int, rng) -> np.ndarray:
        reps = -(-length // len(self.cycle))
        row = np.tile(np.asarray(self.cycle, dtype=np.uint8), reps)[:length]
        return np.tile(row, (count, 1))


def katok_entropy(system, sampler, psi: Observable | None, gamma: float,
                  eps_grid, n_grid, samples: int = 100_000, seed: int = 0):
    """Exp-weighted minimal spanning families over empirical samples.

    For each (n, eps) the empirical samples are grouped by the word prefix
    that determines the Bowen ball; a greedy cover of mass 1 - gamma gives
    the spanning weight, whose growth rate estimates h_mu + int psi d mu.
    """
    if not isinstance(system, ShiftSystem):
        raise UnsupportedOracle("Katok sampler formula implemented on shifts")
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    eps_grid = np.asarray(sorted(eps_grid, reverse=True), dtype=float)
    n_grid = np.asarray(sorted(int(n) for n in n_grid))
    rng = np.random.default_rng(seed)
    max_len = int(n_grid[-1]) + separation_depth(float(eps_grid[-1])) - 1
    words = sampler.sample_words(samples, max_len, rng)
    table = np.zeros((len(eps_grid), len(n_grid)))
    saturated = np.zeros((len(eps_grid), len(n_grid)), dtype=bool)
    for i, eps in enumerate(eps_grid):
        m = separation_depth(float(eps))
        for j, n in enumerate(n_grid):
            length = int(n) + m - 1
            classes, counts = np.unique(words[:, :length], axis=0, return_counts=True)
            if psi is None:
                costs = np.ones(len(counts))
                order = np.argsort(counts)[::-1]
            else:
                depth = psi.symbol_depth or 1
                if depth == 1:
                    per_symbol = psi.symbol_values(np.arange(
                        int(classes.max()) + 1, dtype=np.uint8)[:, None]).ravel()
                    sums = per_symbol[classes[:, : int(n)]].sum(axis=1)
                else:
                    sums = np.array([
                        orbit_values(system, psi,
                                     system.shift.point_from_word(tuple(c)), int(n)).sum()
                        for c in classes
                    ])
                costs = np.exp(sums)
                order = np.argsort(counts / costs)[::-1]  # best mass per unit cost first
            coverage = np.cumsum(counts[order]) / samples
            k = int(np.searchsorted(coverage, 1.0 - gamma))
            prev = coverage[k - 1] if k > 0 else 0.0
            picked = np.cumsum(costs[order])
            base = picked[k - 1] if k > 0 else 0.0
            # fractional share of the marginal class smooths the count table
            fraction = (1.0 - gamma - prev) / (coverage[k] - prev) if coverage[k] > prev else 1.0
            table[i, j] = math.log(max(base + fraction * costs[order][k], 1.0))
            # below ~30 samples per class, empirical-mass ordering overstates
            # top-class coverage and bends log N down
            saturated[i, j] = len(counts) > samples / 30
    best_rate = None
    best_count = 0
    for i in range(len(eps_grid)):
        usable = [j for j in range(len(n_grid)) if not saturated[i, j]]
        if len(usable) < 4:
            continue
        rate = _fit_katok_rate(n_grid[usable], table[i, usable])
        # prefer the statistically best-resolved scale (most unsaturated n)
        if len(usable) >= best_count:
            best_count = len(usable)
            best_rate = rate
    if best_rate is None:
        raise RuntimeError("sample size insufficient: Bowen classes saturated at these n")
    return float(best_rate), table, saturated


def _fit_katok_rate(ns: np.ndarray, logs: np.ndarray) -> float:
    """Linear coefficient of log N fitted with a sqrt(n) term.

    Covering 1 - gamma of the sample mass cuts the class distribution at a
    CLT threshold, which contributes a sqrt(n)-order term to log N; modeling
    it keeps the growth-rate coefficient unbiased at desk scale.
    """
    ns = np.asarray(ns, dtype=float)
    design = np.stack([ns, np.sqrt(ns), np.ones_like(ns)], axis=1)
    coeff, *_ = np.linalg.lstsq(design, np.asarray(logs, dtype=float), rcond=None)
    return float(coeff[0])


# ---------------------------------------------------------------------------
# relative pressure upper bounds
# ---------------------------------------------------------------------------

@dataclass
class RelativePressure:
    upper: float
    eps: float
    depth_used: int
    cover_sizes: dict
    note: str = ""

    def bracket(self, lower: float, width: float = 0.2):
        gap = self.upper - lower
        return {"upper": self.upper, "lower": lower, "gap": gap,
                "inconclusive": bool(gap > width or gap < -1e-9)}


def relative_pressure_upper(system, subset, psi: Observable | None, eps: float,
                            depth: int, cover_budget: int = 4096) -> RelativePressure:
    """Upper bound for the relative pressure of a subset via Bowen-ball covers.

    `subset` is either "all" (covers counted by the word machinery) or a
    finite family of (point, horizon) representatives.  The critical
    parameter solves log M = 0, with M the best candidate-cover weight; ball
    sups of S_n psi are padded by n * var(psi, eps).
    """
    if subset == "all":
        if not isinstance(system, ShiftSystem):
            raise UnsupportedOracle("whole-space relative pressure implemented on shifts")
        n = depth
        pad = 0.0 if psi is None else variation_bound(system, psi, eps)
        logw = _log_word_weight(system.shift, psi, n, n + separation_depth(eps) - 1)
        s_star = (logw + n * pad) / n
        return RelativePressure(float(s_star), eps, n, {n: system.shift.word_count(
            n + separation_depth(eps) - 1)}, note="cylinder cover")
    if hasattr(subset, "levels") and hasattr(subset, "counting_table"):
        # a fractal family: members sharing an (N+m)-prefix fit in one Bowen
        # ball, and the number of distinct prefixes is bounded by the level-1
        # block structure, so the minimal cover is counted without
        # materializing the family
        lv1 = subset.levels[0]
        m = separation_depth(eps)
        n = min(depth, lv1.t_length - m)
        slot = lv1.n + lv1.pad
        blocks = min(-(-(n + m) // slot), lv1.reps)
        pad = 0.0 if psi is None else variation_bound(system, psi, eps)
        logw = blocks * lv1.log_weight_padded + n * pad
        return RelativePressure(float(logw / n), eps, n,
                                {n: blocks}, note="fractal prefix cover")
    reps = list(subset)
    if not reps:
        raise ValueError("empty representative family")
    pad = 0.0 if psi is None else variation_bound(system, psi, eps)
    best = math.inf
    sizes = {}
    depth_used = depth
    for nd in sorted({depth, max(2, depth // 2), depth * 2}):
        horizon_ok = [p for p, h in reps if h >= nd]
        if not horizon_ok:
            continue
        centers = []
        for p in horizon_ok:
            if len(centers) >= cover_budget:
                raise BudgetExceeded("cover budget exhausted")
            if not any(bowen_distance(system, c, p, nd) < eps for c in centers):
                centers.append(p)
        if psi is None:
            logq = math.log(len(centers))
        else:
            sums = np.asarray([orbit_values(system, psi, c, nd).sum() for c in centers])
            sums = sums + nd * pad
            top = sums.max()
            logq = float(top + np.log(np.exp(sums - top).sum()))
        s_star = logq / nd
        sizes[nd] = len(centers)
        if s_star < best:
            best = s_star
            depth_used = nd
    return RelativePressure(float(best), eps, depth_used, sizes, note="greedy rep cover")
