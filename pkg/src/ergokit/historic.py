"""Construction of orbits with prescribed average oscillation.

Two builders live here.  The wild-point schedule drives one orbit's Birkhoff
averages along a chain of targets that sweeps a connected set, each level
dominating the history before it; the finite-scale certificate is the
measured checkpoint deviation against the theoretical budget.  The fractal
builder glues exponentially many frequency-pinned words into nested
separated families whose counting table certifies a pressure lower bound
for the set of points oscillating between two measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .complexity import pressure_estimate
from .gluing import gap_bound
from .observables import Observable, variation_bound
from .symbolic import SymbolPoint, separation_depth, symbol_array
from .systems import ShiftSystem, UnsupportedOracle

WILD_EPS = 2.0**-6
LENGTH_CAP = 10**7


class CertificateFailed(RuntimeError):
    """A counting bound or oscillation budget failed at build or verify time."""


# ---------------------------------------------------------------------------
# P-sets: words with prescribed Birkhoff averages
# ---------------------------------------------------------------------------

def _symbol_values(system, obs: Observable) -> np.ndarray:
    if obs.symbol_depth != 1:
        raise UnsupportedOracle("P-set construction reads one symbol per step")
    a = system.shift.alphabet_size
    return np.atleast_2d(obs.symbol_values(np.arange(a, dtype=np.uint8)[:, None]))


def _symbol_weights(values: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Convex symbol weights lambda with sum_s lambda_s values_s = w (least squares)."""
    a = values.shape[0]
    design = np.vstack([values.T, np.ones(a)])
    rhs = np.concatenate([np.asarray(w, dtype=float), [1.0]])
    lam, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    lam = np.clip(lam, 0.0, None)
    return lam / lam.sum()


def _rationalize_weights(lam: np.ndarray, max_denominator: int = 64, cap: int = 512):
    """(numerators, q) with lam ~= numerators / q, or None when q would blow up."""
    fracs = [Fraction(float(x)).limit_denominator(max_denominator) for x in lam]
    q = 1
    for f in fracs:
        q = q * f.denominator // math.gcd(q, f.denominator)
        if q > cap:
            return None
    nums = [int(f * q) for f in fracs]
    drift = q - sum(nums)
    nums[int(np.argmax(lam))] += drift  # absorb rounding into the heaviest symbol
    if any(c < 0 for c in nums):
        return None
    return nums, q


def _counts_for_target(values: np.ndarray, w: np.ndarray, n: int):
    """Symbol counts c with sum n and (1/n) sum c_s values_s as close to w as possible."""
    lam = _symbol_weights(values, w)
    raw = lam * n
    counts = np.floor(raw).astype(int)
    remainder = raw - counts
    for _ in range(n - counts.sum()):
        j = int(np.argmax(remainder))
        counts[j] += 1
        remainder[j] = -1.0
    return counts


def _balanced_word(counts) -> tuple:
    """Deterministic low-discrepancy arrangement of a symbol multiset."""
    counts = [int(c) for c in counts]
    n = sum(counts)
    remaining = list(counts)
    quota = [0.0] * len(counts)
    word = []
    for _ in range(n):
        for s in range(len(counts)):
            quota[s] += counts[s] / n
        s = max(range(len(counts)), key=lambda t: quota[t] if remaining[t] > 0 else -math.inf)
        quota[s] -= 1.0
        remaining[s] -= 1
        word.append(s)
    return tuple(word)


def sample_P_set(system, obs: Observable, w, delta: float, n: int,
                 count: int = 1, budget: int = 2000, seed: int = 0):
    """Points x with |S_n phi(x)/n - w| < delta, as periodized words.

    Full shifts get an exact frequency construction (counts realize the
    target up to rounding); shifts of finite type fall back to a seeded
    search over admissible words and may exhaust the budget.
    """
    if not isinstance(system, ShiftSystem):
        raise UnsupportedOracle("P-sets are implemented on shift systems")
    w = np.atleast_1d(np.asarray(w, dtype=float))
    values = _symbol_values(system, obs)
    out = []
    if system.shift.full:
        counts = _counts_for_target(values, w, n)
        base = _balanced_word(counts)
        achieved = values.T @ (counts / n)
        if np.linalg.norm(achieved - w) >= delta:
            raise RuntimeError(
                f"target {w} not realizable within delta={delta:.3g} at n={n}; "
                "the schedule must pick larger n or delta"
            )
        rotations = [base[r:] + base[:r] for r in range(len(base))]
        for word in rotations:
            if len(out) >= count:
                break
            if word not in out:
                out.append(word)
        return [SymbolPoint((), word) for word in out[:count]]
    rng = np.random.default_rng(seed)
    trans = system.shift.transition
    for _ in range(budget):
        word = [int(rng.integers(system.shift.alphabet_size))]
        for _ in range(n - 1):
            word.append(int(rng.choice(np.nonzero(trans[word[-1]])[0])))
        if not trans[word[-1], word[0]]:
            continue
        point = SymbolPoint((), tuple(word))
        avg = values[np.asarray(word)].mean(axis=0)
        if np.linalg.norm(avg - w) < delta:
            out.append(point)
            if len(out) >= count:
                return out
    if out:
        return out
    raise RuntimeError("P-set search budget exhausted; enlarge n or delta")


# ---------------------------------------------------------------------------
# target chains along a polyline
# ---------------------------------------------------------------------------

def _polyline_chain(vertices: np.ndarray, spacing: float, reverse: bool) -> np.ndarray:
    """Points along the polyline with consecutive gaps at most `spacing`."""
    verts = vertices[::-1] if reverse else vertices
    if len(verts) == 1:
        return verts.copy()
    seg_len = np.linalg.norm(np.diff(verts, axis=0), axis=1)
    total = float(seg_len.sum())
    count = max(2, int(math.ceil(total / spacing)) + 1)
    stations = np.linspace(0.0, total, count)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    pts = []
    for s in stations:
        j = min(int(np.searchsorted(cum, s, side="right")) - 1, len(seg_len) - 1)
        frac = (s - cum[j]) / seg_len[j] if seg_len[j] > 0 else 0.0
        pts.append(verts[j] + frac * (verts[j + 1] - verts[j]))
    return np.asarray(pts)


# ---------------------------------------------------------------------------
# the wild-point schedule
# ---------------------------------------------------------------------------

@dataclass
class ScheduleBlock:
    level: int
    index: int
    target: np.ndarray
    delta: float
    n: int
    reps: int
    tol: float
    pad: int
    witnesses: list
    start: int = 0
    checkpoint: int = 0
    gap_in: int = 0


@dataclass
class GluingSchedule:
    system: object
    obs: Observable
    vertices: np.ndarray
    eps: float
    depth: int
    a_counts: list
    b_counts: list
    m_levels: list
    blocks: list
    total_length: int
    base_prefix: int
    theta_length: list
    theta_count: list
    cap_limited: bool
    invariant_report: dict = field(default_factory=dict)

    def checkpoints(self):
        return [(b.level, b.index, b.checkpoint, b.target) for b in self.blocks]


def _check_schedule_invariants(schedule: GluingSchedule):
    """Machine checks; the build fails loudly when any of these is violated."""
    blocks = schedule.blocks
    report = {}
    # target chain gaps under 1/k, including the level crossings
    worst = 0.0
    for i in range(1, len(blocks)):
        gap = float(np.linalg.norm(blocks[i].target - blocks[i - 1].target))
        k = blocks[i - 1].level
        worst = max(worst, gap * k)
        if gap >= 1.0 / k:
            raise RuntimeError(
                f"dense-chain gap {gap:.4f} at level {k} breaks the 1/k requirement"
            )
    report["max_gap_times_k"] = worst
    deltas = [b.delta for b in blocks]
    if any(d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
        raise RuntimeError("delta sequence is not strictly decreasing")
    ns = [b.n for b in blocks]
    if any(n2 <= n1 for n1, n2 in zip(ns, ns[1:])):
        raise RuntimeError("segment lengths are not strictly increasing")
    for b in blocks:
        if not b.witnesses:
            raise RuntimeError(f"P-set empty at level ({b.level},{b.index})")
    report["theta_length"] = schedule.theta_length
    report["theta_count"] = schedule.theta_count
    report["cap_limited"] = schedule.cap_limited
    schedule.invariant_report = report


def build_schedule(system, obs: Observable, delta_set, depth: int,
                   eps: float = WILD_EPS, horizon: int = 10**6,
                   base_length: int = 2500, boost: float = 150.0,
                   witnesses_per_block: int = 1) -> GluingSchedule:
    """Concrete schedule constants for the wild-point construction.

    The target chain snakes along the polyline (so consecutive levels join
    with zero gap); targets are snapped to averages realizable at each
    block length, which keeps every P-set nonempty at arbitrarily small
    delta.  Length allocation pins the extreme targets at level 1 (one
    dominating block) and spreads the remaining budget geometrically, so
    the ratio margins are reported rather than imposed: the limit-style
    repetition conditions are unattainable under a finite length cap.
    """
    if not isinstance(system, ShiftSystem):
        raise UnsupportedOracle("the wild-point schedule is implemented on shift systems")
    if depth < 1 or depth > 6:
        raise ValueError("depth must lie in 1..6")
    if horizon > LENGTH_CAP:
        raise ValueError(f"horizon exceeds the length cap {LENGTH_CAP}")
    vertices = np.atleast_2d(np.asarray(delta_set, dtype=float))
    dim = vertices.shape[1]
    degenerate = len(vertices) == 1 or np.allclose(vertices, vertices[0])

    # per-level target chains (snaking), tolerance bookkeeping
    closed = len(vertices) > 2 and np.allclose(vertices[0], vertices[-1])
    chains = []
    for k in range(1, depth + 1):
        if degenerate:
            chains.append(vertices[:1].copy())
        else:
            # snake open polylines so consecutive levels join with zero gap;
            # closed loops join at the shared endpoint in either direction
            reverse = (k % 2 == 0) and not closed
            chains.append(_polyline_chain(vertices, spacing=0.9 / k, reverse=reverse))
    a_counts = [len(c) for c in chains]
    b_counts = np.concatenate([[0], np.cumsum(a_counts)]).tolist()
    m_levels = [gap_bound(system, eps / 2 ** b_counts[k]) for k in range(1, depth + 1)]

    values = _symbol_values(system, obs)
    blocks = []
    prev_n = 0
    for k in range(1, depth + 1):
        for i, target in enumerate(chains[k - 1], start=1):
            delta = 2.0 ** -(b_counts[k - 1] + i + 2)
            floor_n = max(k * 2**k * m_levels[k - 1], prev_n + 1)
            # n is the smallest multiple of the witness word's period above
            # the floor, so the rationalized target is hit exactly
            lam = _symbol_weights(values, target)
            rat = _rationalize_weights(lam)
            if rat is not None:
                _, q = rat
                n = ((floor_n + q - 1) // q) * q
            else:
                n = floor_n
            tol = eps / 2 ** (b_counts[k - 1] + i)
            pad = separation_depth(tol) - 1
            counts = _counts_for_target(values, target, n)
            snapped = values.T @ (counts / n)
            blocks.append(ScheduleBlock(k, i, snapped, delta, n, 0, tol, pad, []))
            prev_n = n

    # Length allocation is depth-independent so that a depth-(K+1) schedule
    # extends the depth-K one block for block: level 1 pins the extreme
    # targets (its last block dominates all history by `boost`), and each
    # deeper level draws a fixed share, growing geometrically, of the
    # remaining budget.
    lengths = np.zeros(len(blocks))
    lengths[0] = max(base_length, 3 * (blocks[0].n + blocks[0].pad))
    cum = lengths[0]
    level1 = [j for j, b in enumerate(blocks) if b.level == 1]
    for j in level1[1:-1]:
        lengths[j] = 2.0 * cum
        cum += lengths[j]
    if len(level1) > 1:
        j = level1[-1]
        lengths[j] = min(boost, max(10.0, 0.35 * horizon / cum)) * cum
        cum += lengths[j]
    max_depth = 6
    shares = {k: 4.0**k for k in range(2, max_depth + 1)}
    norm = sum(shares.values())
    rest_budget = 0.88 * horizon - cum
    if rest_budget < 0 and depth > 1:
        raise RuntimeError("ratio margins unachievable within the length cap; reduce depth")
    spent = 0.0
    for k in range(2, depth + 1):
        idx = [j for j, b in enumerate(blocks) if b.level == k]
        min_needed = sum(blocks[j].n + blocks[j].pad for j in idx)
        # the floor depends only on this level's own blocks, so deeper
        # schedules still extend shallower ones block for block
        level_budget = max(rest_budget * shares[k] / norm, 1.5 * min_needed)
        spent += level_budget
        if spent > rest_budget:
            raise RuntimeError("ratio margins unachievable within the length cap; reduce depth")
        for j in idx:
            lengths[j] = level_budget / len(idx)
            cum += lengths[j]

    # realize repetition counts, offsets, checkpoints
    prefix = separation_depth(eps / 2) + 1  # anchor the base point within eps/2
    pos = prefix
    for j, b in enumerate(blocks):
        b.reps = max(1, int(round(lengths[j] / b.n)))
        cost = b.reps * b.n + b.pad
        if pos + cost > horizon:
            b.reps = max(1, (horizon - pos - b.pad) // b.n)
            cost = b.reps * b.n + b.pad
        b.gap_in = b.pad  # realized idle time: the single trailing pad
        b.start = pos
        b.checkpoint = pos + b.reps * b.n
        pos += cost
    total = pos

    # witnesses: snapped targets are exactly realizable, so the P-sets are
    # nonempty at every delta
    for b in blocks:
        b.witnesses = sample_P_set(system, obs, b.target, max(b.delta, 1e-15), b.n,
                                   count=witnesses_per_block)

    # reported ratio margins, in length form and in the count form
    theta_len, theta_cnt = [], []
    cap_limited = False
    for k in range(1, depth + 1):
        worst_len = 0.0
        worst_cnt = 0.0
        for j, b in enumerate(blocks):
            if b.level != k or j == 0:
                continue
            prev_total = blocks[j - 1].checkpoint
            worst_len = max(worst_len, prev_total / (b.reps * b.n))
            worst_cnt = max(worst_cnt, prev_total / b.reps)
            if j + 1 < len(blocks):
                nxt = blocks[j + 1]
                worst_len = max(worst_len, (nxt.n + m_levels[k - 1]) / (b.reps * b.n))
                worst_cnt = max(worst_cnt, (nxt.n + m_levels[k - 1]) / b.reps)
        theta_len.append(worst_len)
        theta_cnt.append(worst_cnt)
        if worst_len > 1.0 / k:
            cap_limited = True

    schedule = GluingSchedule(system, obs, vertices, eps, depth, a_counts, b_counts,
                              m_levels, blocks, total, prefix, theta_len, theta_cnt,
                              cap_limited)
    _check_schedule_invariants(schedule)
    return schedule


# ---------------------------------------------------------------------------
# wild point construction and verification
# ---------------------------------------------------------------------------

@dataclass
class ItineraryLog:
    entries: list
    prefix: int
    total: int


def construct_wild_point(system, obs: Observable, schedule: GluingSchedule,
                         base_point: SymbolPoint | None = None):
    """One member of the schedule's orbit family, with its itinerary log.

    Single-branch descent: each block repeats its stored witnesses
    cyclically; consecutive repetitions of one witness concatenate with no
    gap (the periodized word shadows itself), and each block ends with the
    pad completing its last shadowing window.
    """
    shift = system.shift
    if base_point is None:
        base_point = SymbolPoint((), (0,))
    word = list(symbol_array(base_point, schedule.base_prefix))
    entries = []
    for b in schedule.blocks:
        if word and not shift.transition[word[-1], b.witnesses[0].symbol(0)]:
            conn = shift.connector(word[-1], b.witnesses[0].symbol(0))
            word.extend(conn)
        # distinct witnesses need a pad after every repetition so each
        # shadowing window stays inside its own witness's periodization
        pad_between = b.pad if len(b.witnesses) > 1 else 0
        if len(word) != b.start or pad_between:
            b.start = len(word)
            b.checkpoint = b.start + b.reps * b.n + (b.reps - 1) * pad_between
            b.gap_in = b.pad + (b.reps - 1) * pad_between
        offsets = []
        for r in range(b.reps):
            wit = b.witnesses[r % len(b.witnesses)]
            offsets.append(len(word))
            word.extend(wit.cycle * (b.n // len(wit.cycle)))
            word.extend(wit.cycle[: b.n % len(wit.cycle)])
            if pad_between and r < b.reps - 1:
                word.extend(symbol_array(wit, b.pad)[:pad_between])
        pad_source = b.witnesses[(b.reps - 1) % len(b.witnesses)]
        word.extend(symbol_array(pad_source, b.pad))
        entries.append({
            "level": b.level, "index": b.index, "offsets_first": offsets[0],
            "reps": b.reps, "n": b.n, "pad": b.pad, "tol": b.tol,
            "checkpoint": b.checkpoint,
        })
    schedule.total_length = len(word)
    # the tail keeps cycling the final witness, so averages beyond the
    # constructed horizon drift toward the last target instead of leaving
    # the target set
    tail = schedule.blocks[-1].witnesses[(schedule.blocks[-1].reps - 1)
                                         % len(schedule.blocks[-1].witnesses)]
    point = SymbolPoint(tuple(word), tail.cycle)
    return point, ItineraryLog(entries, schedule.base_prefix, len(word))


@dataclass
class OscillationRow:
    level: int
    index: int
    checkpoint: int
    target: np.ndarray
    measured: float
    budget: float

    @property
    def passed(self) -> bool:
        return self.measured <= self.budget


@dataclass
class OscillationReport:
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def worst_margin(self) -> float:
        return max((r.measured - r.budget for r in self.rows), default=-math.inf)


def oscillation_budget(system, obs: Observable, schedule: GluingSchedule,
                       block: ScheduleBlock, prev_checkpoint: int) -> float:
    """Theoretical deviation budget at a checkpoint.

    The telescoped estimate instantiated with this schedule's numbers:
    all history before the block and the realized idle time cost the sup
    norm, the block itself its variation at the shadowing scale plus the
    target tolerance delta.  Realized gaps (not the worst-case m(eps)
    bound) enter, so the budget is sharp enough at level one to reject
    orbits pinned at a single average.
    """
    sup = obs.sup_norm()
    n_block = block.reps * block.n
    ell = block.checkpoint
    var_fine = variation_bound(system, obs, min(1.0, block.tol * 4))
    remainder = (
        2.0 * (prev_checkpoint + block.gap_in) * sup
        + 2.0 * n_block * (var_fine + block.delta)
    )
    return var_fine + remainder / ell


def verify_oscillation(system, obs: Observable, x, schedule: GluingSchedule) -> OscillationReport:
    """Measured checkpoint deviations against the schedule's budgets."""
    from .observables import running_averages

    times = [b.checkpoint for b in schedule.blocks]
    avgs = running_averages(system, obs, x, times)
    order = np.argsort(times)
    rows = []
    prev = schedule.base_prefix
    for rank, j in enumerate(order):
        b = schedule.blocks[j]
        measured = float(np.linalg.norm(avgs[rank] - b.target))
        budget = oscillation_budget(system, obs, schedule, b, prev)
        rows.append(OscillationRow(b.level, b.index, b.checkpoint, b.target, measured, budget))
        prev = b.checkpoint
    return OscillationReport(rows)


# ---------------------------------------------------------------------------
# the fractal family
# ---------------------------------------------------------------------------

@dataclass
class FractalLevel:
    k: int
    kind: str            # "typical" (odd) or "mixed" (even)
    n: int
    pad: int
    reps: int            # N_k
    log_cardinality: float
    log_weight: float        # log M_k: sum over S_k of exp S_{n_k} psi
    log_weight_padded: float  # same including the pad extension
    counts: np.ndarray
    band: float
    zeta: float
    block_length: int    # c_k
    t_length: int        # t_k
    splice_pad: int
    gap_vector: tuple


@dataclass
class FractalSchedule:
    system: object
    phi: Observable
    psi: Observable | None
    eps: float
    gamma: float
    t: float
    depth: int
    mu1_probs: np.ndarray
    nu_cycle: tuple
    phi_mu1: np.ndarray
    phi_nu: np.ndarray
    pressure_at_eps: float
    levels: list
    r_k: int
    s_k: int
    seed: int = 0

    def counting_table(self):
        return [
            {"k": lv.k, "kind": lv.kind, "n": lv.n, "N": lv.reps,
             "log_M": lv.log_weight, "log_M_padded": lv.log_weight_padded,
             "c_k": lv.block_length, "t_k": lv.t_length, "zeta": lv.zeta,
             "gap_vector": lv.gap_vector}
            for lv in self.levels
        ]


def _hoeffding_settle_length(zeta: float, gamma: float, dims: int) -> int:
    """Smallest n with a union-of-tails bound below gamma for deviation zeta."""
    rate = 2.0 * zeta * zeta
    n = 8
    while 2 * dims * math.exp(-rate * n) / max(1e-300, 1.0 - math.exp(-rate)) > gamma:
        n += 1
        if n > 10**7:
            raise RuntimeError("settling length diverged; zeta too small")
    return n


def _binary_band_log_weight(n: int, ones: int, band: float, psi0: float, psi1: float,
                            multiplicity=None):
    """log sum over binary words with `ones` ones and a prefix-count band.

    A word w weighs exp(sum_r multiplicity[r] * psi(w_r)); multiplicity
    defaults to all ones and carries the extra traversals of prefix symbols
    when the word is extended by its own prefix (gap pads).
    """
    p = ones / n
    neg_inf = -math.inf
    mult = np.ones(n) if multiplicity is None else np.asarray(multiplicity, dtype=float)
    cur = np.full(ones + 1, neg_inf)
    cur[0] = 0.0
    for r in range(n):
        w0 = psi0 * mult[r]
        w1 = psi1 * mult[r]
        nxt = np.full(ones + 1, neg_inf)
        lo = max(0, math.ceil((r + 1) * p - band))
        hi = min(ones, math.floor((r + 1) * p + band), r + 1)
        js = np.arange(lo, hi + 1)
        with np.errstate(invalid="ignore"):
            stay = cur[js] + w0
            step = np.where(js >= 1, cur[js - 1] + w1, neg_inf)
        nxt[js] = np.logaddexp(stay, step)
        cur = nxt
    return float(cur[ones])


def _pad_multiplicity(n: int, pads) -> np.ndarray:
    """1 everywhere plus one extra traversal of [0, p) for each pad length p."""
    mult = np.ones(n)
    for p in pads:
        mult[: min(p, n)] += 1.0
    return mult


def _sample_band_word(rng, n: int, ones: int, band: float, tries: int = 400) -> tuple:
    p = ones / n
    base = np.array([1] * ones + [0] * (n - ones), dtype=np.uint8)
    for _ in range(tries):
        rng.shuffle(base)
        walk = np.cumsum(base) - p * np.arange(1, n + 1)
        if np.abs(walk).max() <= band:
            return tuple(int(s) for s in base)
    raise RuntimeError("band sampling failed; the band is too narrow")


def build_fractal_family(system, phi: Observable, psi: Observable | None,
                         eps: float = 2.0**-3, gamma: float = 0.01, t: float = 0.9,
                         depth: int = 2, nu_cycle=None, seed: int = 0,
                         horizon: int = 10**6) -> FractalSchedule:
    """Nested separated families whose members oscillate between two measures.

    Level k glues N_k frequency-pinned words (odd levels: typical for the
    high-pressure Bernoulli measure; even levels: mixed blocks combining
    r copies with s copies of the second measure's orbit in proportion
    t : 1-t).  On the full shift every realized gap vector is constant, so
    the pigeonhole selection over gap vectors is the trivial one-entry
    table, and all counting is exact.
    """
    if not isinstance(system, ShiftSystem) or not system.shift.full:
        raise UnsupportedOracle("the fractal builder needs a full shift")
    if depth < 1 or depth > 3:
        raise ValueError("depth must lie in 1..3")
    if not 0 < t < 1 or not 0 < gamma < 1:
        raise ValueError("t and gamma must lie in (0,1)")
    if system.shift.alphabet_size != 2:
        raise UnsupportedOracle("exact band counting is implemented for 2 symbols")
    if phi.symbol_depth != 1 or (psi is not None and psi.symbol_depth != 1):
        raise UnsupportedOracle("observables must read one symbol")
    rng = np.random.default_rng(seed)

    # mu1: the (exact) equilibrium distribution of psi on the full 2-shift
    if psi is None:
        probs = np.array([0.5, 0.5])
    else:
        pv = psi.symbol_values(np.arange(2, dtype=np.uint8)[:, None]).ravel()
        e = np.exp(pv - pv.max())
        probs = e / e.sum()
    phi_vals = _symbol_values(system, phi)
    phi_mu1 = phi_vals.T @ probs
    if nu_cycle is None:
        gaps = [np.linalg.norm(phi_vals[s] - phi_mu1) for s in range(2)]
        nu_cycle = (int(np.argmax(gaps)),)
    nu_point = SymbolPoint((), tuple(nu_cycle))
    phi_nu = phi_vals[np.asarray(nu_cycle)].mean(axis=0)
    separated = float(np.linalg.norm(phi_mu1 - phi_nu))
    # separated == 0 is the degenerate-mixing case: the build still goes
    # through (mixed blocks reduce to glued typical blocks) and the historic
    # verification will report no alternation

    pressure = pressure_estimate(
        system, psi, [eps * 2, eps, eps / 2, eps / 4], range(6, 14)
    ).rate_at(eps)
    frac_t = Fraction(t).limit_denominator(50)
    r_k, s_k = frac_t.numerator, frac_t.denominator - frac_t.numerator

    m_eps = separation_depth(eps)
    gap = m_eps - 1  # constant full-shift gap: the pigeonhole table is one entry
    var_phi_eps = variation_bound(system, phi, eps)
    psi_vals = (np.zeros(2) if psi is None
                else psi.symbol_values(np.arange(2, dtype=np.uint8)[:, None]).ravel())

    levels = []
    prev_n = 0
    t_len = 0
    for k in range(1, depth + 1):
        zeta = max(separated / 2**k, variation_bound(system, phi, eps / 2**k))
        if zeta <= 0:
            zeta = 2.0**-k  # degenerate mixing: any settling tolerance works
        n1 = max(_hoeffding_settle_length(zeta, gamma, phi_vals.shape[1]), 100, prev_n + 1)
        ones = int(round(probs[1] * n1))
        band = max(zeta * n1 / 2.0, 2.0)
        pad_k = separation_depth(eps / 2**k) - 1
        log_count = _binary_band_log_weight(n1, ones, band, 0.0, 0.0)
        base_weight = ones * psi_vals[1] + (n1 - ones) * psi_vals[0]
        log_m1 = base_weight + log_count
        if k % 2 == 1:
            # the level's own pad is traversed once more when blocks concatenate
            log_m1_padded = _binary_band_log_weight(
                n1, ones, band, psi_vals[0], psi_vals[1], _pad_multiplicity(n1, [pad_k])
            )
            n_k, log_m, log_m_pad = n1, log_m1, log_m1_padded
            kind = "typical"
            gap_vec = ()
        else:
            # mixed block: r typical pieces (each with its gap pad), then s
            # copies of nu's orbit; the final gap pad doubles as the block pad
            n_tilde = n1
            nu_word = symbol_array(nu_point, n_tilde)
            nu_psi = float(psi_vals[nu_word].sum())
            nu_gap_psi = float(psi_vals[symbol_array(nu_point, gap)].sum()) if gap else 0.0
            pieces = r_k + s_k
            n_k = r_k * (n1 + gap) + s_k * (n_tilde + gap) - gap
            w_gap = _binary_band_log_weight(
                n1, ones, band, psi_vals[0], psi_vals[1], _pad_multiplicity(n1, [gap])
            )
            # the member-level pad re-traverses the first typical piece's prefix
            w_first_padded = _binary_band_log_weight(
                n1, ones, band, psi_vals[0], psi_vals[1], _pad_multiplicity(n1, [gap, pad_k])
            )
            log_m = r_k * w_gap + s_k * nu_psi + (s_k - 1) * nu_gap_psi
            log_m_pad = w_first_padded + (r_k - 1) * w_gap + s_k * nu_psi \
                + (s_k - 1) * nu_gap_psi
            kind = "mixed"
            gap_vec = (gap,) * (pieces - 1)
        counts = np.array([n1 - ones, ones])
        # verify the cardinality lower bound with this run's own pressure rate
        need = n_k * (t * pressure - (0.0 if psi is None else variation_bound(system, psi, eps))
                      - 6 * gamma)
        if log_m < need - 1e-9:
            raise CertificateFailed(
                f"level {k}: log M = {log_m:.2f} below the certified bound {need:.2f}"
            )
        levels.append(FractalLevel(k, kind, n_k, pad_k, 0, log_count, log_m, log_m_pad,
                                   counts, band, zeta, 0, 0,
                                   0 if k == 1 else separation_depth(eps / 2**k) - 1,
                                   gap_vec))
        prev_n = n_k

    # repetition counts: geometric fill of the horizon
    budget = 0.95 * horizon
    weights = np.array([4.0**lv.k for lv in levels])
    weights /= weights.sum()
    for lv, share in zip(levels, weights):
        per = lv.n + lv.pad
        lv.reps = max(2, int(share * budget // per))
        lv.block_length = lv.reps * per
        t_len += lv.splice_pad + lv.block_length
        lv.t_length = t_len
    return FractalSchedule(system, phi, psi, eps, gamma, t, depth, probs,
                           tuple(nu_cycle), np.atleast_1d(phi_mu1), np.atleast_1d(phi_nu),
                           pressure, levels, r_k, s_k, seed)


def _materialize_level_member(family: FractalSchedule, lv: FractalLevel, rng) -> np.ndarray:
    """One S_k member as a symbol array of length n + pad."""
    if lv.kind == "typical":
        ones = int(lv.counts[1])
        word = np.asarray(
            _sample_band_word(rng, int(lv.counts.sum()), ones, lv.band), dtype=np.uint8
        )
        return np.concatenate([word, word[: lv.pad]])
    n1 = int(lv.counts.sum())
    ones = int(lv.counts[1])
    gap = separation_depth(family.eps) - 1
    parts = []
    for i in range(family.r_k):
        w = np.asarray(_sample_band_word(rng, n1, ones, lv.band), dtype=np.uint8)
        parts.append(np.concatenate([w, w[:gap]]))
    nu_word = symbol_array(SymbolPoint((), family.nu_cycle), n1)
    for j in range(family.s_k):
        parts.append(np.concatenate([nu_word, nu_word[:gap]]))
    word = np.concatenate(parts)[: lv.n]  # the final gap stays outside n_k
    return np.concatenate([word, word[: lv.pad]])


def materialize_fractal_representative(family: FractalSchedule, seed: int = 0) -> np.ndarray:
    """One member of the deepest nested family T_depth, as a symbol array."""
    rng = np.random.default_rng(seed)
    parts = []
    for lv in family.levels:
        if parts and lv.splice_pad:
            prev = np.concatenate(parts)
            parts.append(prev[: lv.splice_pad])
        blocks = [_materialize_level_member(family, lv, rng) for _ in range(lv.reps)]
        parts.append(np.concatenate(blocks))
    return np.concatenate(parts)


@dataclass
class CertificateResult:
    rate: float
    threshold: float
    per_level: list
    table: list

    @property
    def passed(self) -> bool:
        return self.rate >= self.threshold


def entropy_lower_certificate(family: FractalSchedule, psi: Observable | None = None) -> CertificateResult:
    """Distribution-principle lower bound from the counting table.

    rate = min_k (1/t_k) log sum over T_k of exp S_{t_k} psi, where the sum
    factorizes over the level blocks (pad-extended weights are exact on the
    full shift; splice pads are bounded below by the minimal psi value).
    The certificate asserts rate >= t * P(eps) - var(psi, eps) - 9 gamma
    with this run's own pressure estimate.
    """
    psi = psi if psi is not None else family.psi
    system = family.system
    psi_min = 0.0
    if psi is not None:
        pv = psi.symbol_values(np.arange(2, dtype=np.uint8)[:, None]).ravel()
        psi_min = float(pv.min())
    rate = math.inf
    per_level = []
    log_weight_cum = 0.0
    pad_cum = 0
    for lv in family.levels:
        log_weight_cum += lv.reps * lv.log_weight_padded
        pad_cum += lv.splice_pad
        level_rate = (log_weight_cum + pad_cum * psi_min) / lv.t_length
        per_level.append((lv.k, level_rate))
        rate = min(rate, level_rate)
    var_psi = 0.0 if psi is None else variation_bound(system, psi, family.eps)
    threshold = family.t * family.pressure_at_eps - var_psi - 9 * family.gamma
    return CertificateResult(float(rate), float(threshold), per_level,
                             family.counting_table())


@dataclass
class HistoricRow:
    k: int
    time: int
    target: np.ndarray
    measured: np.ndarray
    deviation: float
    budget: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.budget


@dataclass
class HistoricReport:
    rows: list
    alternation_gap: float
    required_gap: float
    alternates: bool

    @property
    def passed(self) -> bool:
        return self.alternates and all(r.passed for r in self.rows)


def verify_fractal_is_historic(system, phi: Observable, family: FractalSchedule,
                               representative: np.ndarray | None = None,
                               seed: int = 0) -> HistoricReport:
    """Averages at the nesting times alternate between the two measures.

    Odd levels must sit near the phi-average of the high-pressure measure,
    even levels near the mixture's; the report also checks the two visited
    clusters are separated by (1 - t) * |gap of the measure averages| / 2.
    """
    if representative is None:
        representative = materialize_fractal_representative(family, seed)
    vals = phi.symbol_values(representative[:, None].astype(np.uint8))
    csum = np.cumsum(np.atleast_2d(vals), axis=0)
    sup = phi.sup_norm()
    rows = []
    mixed_avg = family.t * family.phi_mu1 + (1 - family.t) * family.phi_nu
    odd_vals, even_vals = [], []
    for lv in family.levels:
        tk = lv.t_length
        avg = csum[tk - 1] / tk
        target = family.phi_mu1 if lv.k % 2 == 1 else mixed_avg
        var_k = variation_bound(system, phi, family.eps / 2**lv.k)
        n_total = lv.reps * lv.n
        budget = (
            n_total / lv.block_length * (var_k + lv.zeta)
            + 2.0 * (lv.block_length - n_total) / lv.block_length * sup
            + 2.0 * (tk - lv.block_length) / tk * sup
            + variation_bound(system, phi, family.eps * 2.0 ** (1 - lv.k))
        )
        dev = float(np.linalg.norm(avg - target))
        rows.append(HistoricRow(lv.k, tk, np.atleast_1d(target), avg, dev, budget))
        (odd_vals if lv.k % 2 == 1 else even_vals).append(avg)
    required = (1 - family.t) * float(np.linalg.norm(family.phi_mu1 - family.phi_nu)) / 2
    if odd_vals and even_vals:
        gaps = [float(np.linalg.norm(a - b)) for a in odd_vals for b in even_vals]
        gap = min(gaps)
    else:
        gap = 0.0
    alternates = bool(even_vals) and required > 0 and gap >= required
    return HistoricReport(rows, gap, required, alternates)
