"""One-sided symbolic dynamics over a finite alphabet.

Points are finite words with a designated periodic tail, so equality and
first-disagreement indices are decidable.  The metric is d(x, y) = 2^(-k)
where k is the first index at which the sequences differ.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np


class BudgetExceeded(RuntimeError):
    """Candidate pool or enumeration grew beyond the configured guard."""


def _primitive_cycle(cycle: tuple) -> tuple:
    """Reduce a cycle to its shortest period."""
    n = len(cycle)
    for p in range(1, n + 1):
        if n % p == 0 and cycle == cycle[p:] + cycle[:p]:
            return cycle[:p]
    return cycle


class SymbolPoint:
    """Eventually periodic symbol sequence: preperiod followed by a cycle.

    The canonical form has a primitive cycle and a preperiod that cannot be
    absorbed into a rotation of the cycle, so two points are equal iff their
    canonical fields coincide.
    """

    __slots__ = ("pre", "cycle")

    def __init__(self, pre, cycle):
        pre = tuple(int(s) for s in pre)
        cycle = _primitive_cycle(tuple(int(s) for s in cycle))
        if not cycle:
            raise ValueError("cycle must be nonempty")
        # absorb preperiod symbols that merely rotate the cycle
        while pre and pre[-1] == cycle[-1]:
            pre = pre[:-1]
            cycle = cycle[-1:] + cycle[:-1]
        self.pre = pre
        self.cycle = cycle

    def symbol(self, i: int) -> int:
        if i < len(self.pre):
            return self.pre[i]
        return self.cycle[(i - len(self.pre)) % len(self.cycle)]

    def prefix(self, n: int) -> tuple:
        return tuple(self.symbol(i) for i in range(n))

    def shift(self) -> "SymbolPoint":
        if self.pre:
            return SymbolPoint(self.pre[1:], self.cycle)
        return SymbolPoint((), self.cycle[1:] + self.cycle[:1])

    def is_periodic(self) -> bool:
        return not self.pre

    @property
    def period(self) -> int:
        """Prime period; only meaningful for periodic points."""
        return len(self.cycle)

    def __eq__(self, other):
        return (
            isinstance(other, SymbolPoint)
            and self.pre == other.pre
            and self.cycle == other.cycle
        )

    def __hash__(self):
        return hash((self.pre, self.cycle))

    def __repr__(self):
        pre = "".join(map(str, self.pre))
        cyc = "".join(map(str, self.cycle))
        return f"SymbolPoint({pre!r}+({cyc!r})*)"


def first_disagreement(x: SymbolPoint, y: SymbolPoint):
    """Index of the first differing symbol, or None when the points are equal.

    Two distinct eventually periodic sequences must disagree before
    max(preperiods) + lcm(periods), so the scan terminates.
    """
    bound = max(len(x.pre), len(y.pre)) + math.lcm(len(x.cycle), len(y.cycle))
    for i in range(bound):
        if x.symbol(i) != y.symbol(i):
            return i
    return None


def symbol_distance(x: SymbolPoint, y: SymbolPoint) -> float:
    k = first_disagreement(x, y)
    return 0.0 if k is None else 2.0 ** (-k)


def symbol_array(x: SymbolPoint, n: int) -> np.ndarray:
    """First n symbols of x as a uint8 array (cheap: tiles the cycle)."""
    pre = np.asarray(x.pre, dtype=np.uint8)
    if n <= len(pre):
        return pre[:n]
    cyc = np.asarray(x.cycle, dtype=np.uint8)
    reps = -(-(n - len(pre)) // len(cyc))
    return np.concatenate([pre, np.tile(cyc, reps)])[:n]


def separation_depth(eps: float) -> int:
    """Smallest m with 2^(-m) <= eps.

    d_n(x, y) > eps holds iff the points differ within their first
    n + m - 1 symbols, which reduces separated-set questions to word counts.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = 0
    while 2.0 ** (-m) > eps:
        m += 1
    return m


class ShiftSpace:
    """One-sided shift over alphabet {0..A-1}, full or of finite type.

    A transition matrix row s lists the admissible successors of s; the
    matrix must have no all-zero row or column.  When the matrix is
    primitive the exponent D (smallest power that is entrywise positive)
    is stored; it bounds connector-word lengths in gluing constructions.
    """

    def __init__(self, alphabet_size: int, transition=None, embedding=None, name=""):
        if alphabet_size < 2:
            raise ValueError("alphabet must have at least 2 symbols")
        self.alphabet_size = int(alphabet_size)
        if transition is None:
            self.transition = np.ones((alphabet_size, alphabet_size), dtype=bool)
            self.full = True
        else:
            self.transition = np.asarray(transition, dtype=bool)
            if self.transition.shape != (alphabet_size, alphabet_size):
                raise ValueError("transition matrix shape mismatch")
            self.full = bool(self.transition.all())
        if not self.transition.any(axis=1).all() or not self.transition.any(axis=0).all():
            raise ValueError("transition matrix has an all-zero row or column")
        self.primitivity_exponent = self._primitivity_exponent()
        self.mixing = self.primitivity_exponent is not None
        self.embedding = None
        if embedding is not None:
            emb = {int(k): np.atleast_1d(np.asarray(v, dtype=float)) for k, v in embedding.items()}
            dims = {v.shape for v in emb.values()}
            if len(dims) != 1:
                raise ValueError("embedding vectors must share a dimension")
            self.embedding = emb
        self.name = name or ("full_shift_%d" % alphabet_size if self.full else "sft")

    # -- structure ---------------------------------------------------------

    def _primitivity_exponent(self):
        m = self.transition.astype(np.int64)
        power = m.copy()
        for d in range(1, 2 * self.alphabet_size * self.alphabet_size + 1):
            if (power > 0).all():
                return d
            power = np.minimum(power @ m, 1)
        return None

    def is_admissible(self, word) -> bool:
        w = list(word)
        return all(self.transition[w[i], w[i + 1]] for i in range(len(w) - 1))

    def contains(self, x: SymbolPoint) -> bool:
        n = len(x.pre) + len(x.cycle) + 1
        return self.is_admissible(x.prefix(n))

    @lru_cache(maxsize=None)
    def _return_cycle(self, symbol: int) -> tuple:
        """Shortest admissible cycle that a word ending in `symbol` can fall into."""
        if self.transition[symbol, symbol]:
            return (symbol,)
        prev = {}
        frontier = []
        for s in np.nonzero(self.transition[symbol])[0]:
            prev[int(s)] = None
            frontier.append(int(s))
        while frontier:
            nxt = []
            for s in frontier:
                if self.transition[s, symbol]:
                    path = [s]
                    while prev[path[-1]] is not None:
                        path.append(prev[path[-1]])
                    return tuple(reversed(path)) + (symbol,)
                for t in np.nonzero(self.transition[s])[0]:
                    t = int(t)
                    if t not in prev:
                        prev[t] = s
                        nxt.append(t)
            frontier = nxt
        raise ValueError("symbol has no return path; matrix not irreducible")

    def point_from_word(self, word) -> SymbolPoint:
        """Extend an admissible word to an eventually periodic point of the shift."""
        w = tuple(int(s) for s in word)
        if not self.is_admissible(w):
            raise ValueError("word is not admissible")
        cyc = self._return_cycle(w[-1])
        return SymbolPoint(w, cyc)

    def connector(self, a: int, b: int) -> tuple:
        """Shortest admissible word c with a -> c -> b transitions; may be empty."""
        if self.transition[a, b]:
            return ()
        # BFS over symbols reachable from a
        prev = {}
        frontier = [int(s) for s in np.nonzero(self.transition[a])[0]]
        for s in frontier:
            prev[s] = None
        while frontier:
            nxt = []
            for s in frontier:
                if self.transition[s, b]:
                    path = [s]
                    while prev[path[-1]] is not None:
                        path.append(prev[path[-1]])
                    return tuple(reversed(path))
                for t in np.nonzero(self.transition[s])[0]:
                    t = int(t)
                    if t not in prev:
                        prev[t] = s
                        nxt.append(t)
            frontier = nxt
        raise ValueError("no connector word; matrix not irreducible")

    # -- counting ----------------------------------------------------------

    def word_count(self, length: int) -> int:
        """Number of admissible words, computed exactly with integer arithmetic."""
        if length <= 0:
            return 1
        a = self.alphabet_size
        counts = [1] * a
        m = [[int(self.transition[i, j]) for j in range(a)] for i in range(a)]
        for _ in range(length - 1):
            counts = [sum(m[i][j] * counts[j] for j in range(a)) for i in range(a)]
        return sum(counts)

    def enumerate_words(self, length: int, budget: int = 2**22) -> np.ndarray:
        """All admissible words of the given length as an (N, length) uint8 array."""
        total = self.word_count(length)
        if total > budget:
            raise BudgetExceeded(
                f"{total} admissible words of length {length} exceeds budget {budget}"
            )
        words = np.zeros((total, length), dtype=np.uint8)
        if self.full:
            # mixed-radix enumeration
            idx = np.arange(total)
            for j in range(length - 1, -1, -1):
                words[:, j] = idx % self.alphabet_size
                idx //= self.alphabet_size
            return words
        rows = [[s] for s in range(self.alphabet_size)]
        for _ in range(length - 1):
            rows = [r + [int(t)] for r in rows for t in np.nonzero(self.transition[r[-1]])[0]]
        return np.array(rows, dtype=np.uint8)

    def periodic_orbits(self, max_period: int):
        """One representative SymbolPoint per periodic orbit of period <= max_period."""
        seen = set()
        out = []
        for length in range(1, max_period + 1):
            stack = [(s,) for s in range(self.alphabet_size)]
            while stack:
                w = stack.pop()
                if len(w) == length:
                    if self.transition[w[-1], w[0]] and len(_primitive_cycle(w)) == length:
                        canon = min(w[i:] + w[:i] for i in range(length))
                        if canon not in seen:
                            seen.add(canon)
                            out.append(SymbolPoint((), canon))
                    continue
                for t in np.nonzero(self.transition[w[-1]])[0]:
                    stack.append(w + (int(t),))
        return out

    def orbit_average(self, point: SymbolPoint, values: dict) -> tuple:
        """Exact rational average of per-symbol vectors along a periodic orbit."""
        if not point.is_periodic():
            raise ValueError("orbit_average requires a periodic point")
        dim = len(next(iter(values.values())))
        sums = [Fraction(0)] * dim
        for s in point.cycle:
            for i in range(dim):
                sums[i] += Fraction(values[s][i])
        return tuple(s / len(point.cycle) for s in sums)


def splice_shadow(space: ShiftSpace, pseudo_orbit, delta: float) -> SymbolPoint:
    """Shadow a pseudo-orbit of SymbolPoints by splicing first symbols.

    Requires jump errors d(shift(x_k), x_{k+1}) < delta < 1/2.  The spliced
    point agrees with each x_k on at least s+1 symbols where 2^(-s) <= delta,
    hence shadows within 2^(-(s+1)) <= delta <= 2*delta.
    """
    if delta >= 0.5:
        raise ValueError("symbol splice needs delta < 1/2")
    word = tuple(x.symbol(0) for x in pseudo_orbit[:-1])
    last = pseudo_orbit[-1]
    point = SymbolPoint(word + last.pre, last.cycle)
    if not space.contains(point):
        raise ValueError("spliced point not admissible; pseudo-orbit jumps too large")
    return point
