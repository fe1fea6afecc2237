"""Conjunctions over {-1,+1}^n under the uniform distribution.

A conjunction is a pair of bitmasks: bit j-1 of ``pos`` holds literal j and
bit j-1 of ``neg`` holds literal -j.  x_j counts as true when coordinate j
is +1.  The empty conjunction is always true.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .distributions import DistributionSpec, sample_hypercube_bits
from .engine import ConfigurationError, NeighborSet

MAX_N = 62


class DriftRefused(ConfigurationError):
    """A drift step cannot stay within the requested Delta."""


@dataclass(frozen=True, order=True)
class Conjunction:
    pos: int = 0
    neg: int = 0

    def __post_init__(self):
        if self.pos < 0 or self.neg < 0:
            raise ConfigurationError("bitmasks must be non-negative")
        if self.pos & self.neg:
            raise ConfigurationError("a conjunction cannot hold both j and -j")
        if (self.pos | self.neg) >> MAX_N:
            raise ConfigurationError(f"variables beyond {MAX_N} are not supported")

    @classmethod
    def from_literals(cls, literals):
        pos = neg = 0
        for lit in literals:
            lit = int(lit)
            if lit == 0:
                raise ConfigurationError("literal 0 is not a variable")
            bit = 1 << (abs(lit) - 1)
            if lit > 0:
                pos |= bit
            else:
                neg |= bit
        return cls(pos, neg)

    @classmethod
    def parse(cls, text):
        """Read the ``"1,-3,7"`` encoding; an empty string is the empty conjunction."""
        text = text.strip()
        if not text:
            return cls()
        try:
            return cls.from_literals(int(tok) for tok in text.split(","))
        except ValueError as exc:
            raise ConfigurationError(f"bad conjunction {text!r}: {exc}") from None

    @property
    def literals(self):
        out = []
        occupied = self.pos | self.neg
        j = 0
        while occupied >> j:
            if (self.pos >> j) & 1:
                out.append(j + 1)
            elif (self.neg >> j) & 1:
                out.append(-(j + 1))
            j += 1
        return tuple(out)

    @property
    def variables(self):
        return self.pos | self.neg

    @property
    def max_index(self):
        return (self.pos | self.neg).bit_length()

    def encode(self):
        return ",".join(str(lit) for lit in self.literals)

    def __len__(self):
        return (self.pos | self.neg).bit_count()

    def is_monotone(self):
        return self.neg == 0

    def values(self, X):
        """+-1 value at each row of a +-1 array ``X``."""
        X = np.asarray(X)
        self._check_dim(X.shape[-1])
        lits = np.array(self.literals, dtype=np.int64)
        if len(lits) == 0:
            return np.ones(X.shape[0])
        cols = X[:, np.abs(lits) - 1]
        ok = np.all(cols * np.sign(lits) > 0, axis=1)
        return np.where(ok, 1.0, -1.0)

    def _check_dim(self, n):
        if self.max_index > n:
            raise ConfigurationError(f"literal {self.max_index} out of range for n={n}")

    def __str__(self):
        return "{" + self.encode() + "}"


def evaluate(c, x):
    """+1 iff every literal of ``c`` is satisfied by the +-1 point ``x``."""
    return int(c.values(np.asarray(x, dtype=np.float64)[None, :])[0])


class ConjunctionBatch:
    """A neighbor list stored as two int64 bitmask arrays."""

    __slots__ = ("pos", "neg")

    def __init__(self, pos, neg=None):
        self.pos = np.asarray(pos, dtype=np.int64)
        self.neg = np.zeros_like(self.pos) if neg is None else np.asarray(neg, dtype=np.int64)

    @classmethod
    def of(cls, conjunctions):
        conjunctions = list(conjunctions)
        return cls([c.pos for c in conjunctions], [c.neg for c in conjunctions])

    def __len__(self):
        return len(self.pos)

    def __getitem__(self, i):
        return Conjunction(int(self.pos[i]), int(self.neg[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def as_batch(members):
    if isinstance(members, ConjunctionBatch):
        return members
    return ConjunctionBatch.of(members)


# --------------------------------------------------------------------------
# exact performance
# --------------------------------------------------------------------------

def _clash(f, r):
    return bool((r.neg & f.pos) | (r.pos & f.neg))


def exact_performance(f, r):
    """Perf_f(r) under the uniform distribution as an exact Fraction."""
    lf, lr = len(f), len(r)
    base = 1 - Fraction(2, 2 ** lf) - Fraction(2, 2 ** lr)
    if _clash(f, r):
        # f and r are never true together
        return base
    mutual = (f.pos & r.pos).bit_count() + (f.neg & r.neg).bit_count()
    return base + Fraction(4, 2 ** (lf + lr - mutual))


def brute_force_performance(f, r, n):
    """Perf_f(r) by enumerating all 2^n points (exact Fraction)."""
    xs = np.arange(1 << n, dtype=np.int64)
    fv = ((xs & f.pos) == f.pos) & ((xs & f.neg) == 0)
    rv = ((xs & r.pos) == r.pos) & ((xs & r.neg) == 0)
    disagree = int(np.count_nonzero(fv != rv))
    return 1 - Fraction(2 * disagree, 1 << n)


def exact_error(f, r):
    return (1 - exact_performance(f, r)) / 2


class ConjunctionOracle:
    """Exact and sampled performance under the uniform distribution on {-1,1}^n."""

    def __init__(self, n):
        if not 1 <= n <= MAX_N:
            raise ConfigurationError(f"n must lie in [1, {MAX_N}]")
        self.n = n
        self.dist = DistributionSpec("uniform-hypercube", n)

    def exact(self, target, members):
        b = as_batch(members)
        return kernels.conj_perf_batch(target.pos, target.neg, b.pos, b.neg)

    def exact_one(self, target, rep):
        return float(exact_performance(target, rep))

    def draw(self, s, rng):
        return sample_hypercube_bits(self.n, s, rng)

    def empirical(self, target, members, xbits):
        b = as_batch(members)
        return kernels.conj_agreement(target.pos, target.neg, b.pos, b.neg, xbits)


# --------------------------------------------------------------------------
# neighborhoods
# --------------------------------------------------------------------------

def max_length(epsilon):
    """q = ceil(log2(3/epsilon))."""
    if not 0 < epsilon < 1:
        raise ConfigurationError("epsilon must lie in (0, 1)")
    return math.ceil(math.log2(3.0 / epsilon) - 1e-12)


def monotone_size_bound(n):
    return 1 + n + n * n / 4


def general_size_bound(n, epsilon):
    return 1 + 2 * n + n * n + 6 / epsilon


def _check_rep(r, n, q):
    if r.max_index > n:
        raise ConfigurationError(f"literal {r.max_index} out of range for n={n}")
    if len(r) > q:
        raise ConfigurationError(f"|r| = {len(r)} exceeds q = {q}")


def neighborhood_monotone(r, epsilon, n):
    """Add, remove or swap one variable; r itself comes first."""
    q = max_length(epsilon)
    if not r.is_monotone():
        raise ConfigurationError("monotone neighborhood needs a monotone conjunction")
    _check_rep(r, n, q)
    pos = kernels.monotone_neighbors(r.pos, n, q)
    return NeighborSet(ConjunctionBatch(pos), None, epsilon, monotone_size_bound(n))


def neighborhood_general(r, epsilon, n):
    """Signed add/remove/swap plus every nonempty set of sign flips."""
    q = max_length(epsilon)
    _check_rep(r, n, q)
    pos, neg = kernels.general_neighbors(r.pos, r.neg, n, q)
    return NeighborSet(ConjunctionBatch(pos, neg), None, epsilon, general_size_bound(n, epsilon))


class _ConjunctionAlgorithm:
    monotone = True
    min_share = None

    def __init__(self, n, epsilon):
        if not 1 <= n <= MAX_N:
            raise ConfigurationError(f"n must lie in [1, {MAX_N}]")
        self.n = n
        self.epsilon = epsilon
        self.q = max_length(epsilon)
        self.benefit = 9.0 / epsilon ** 2
        self.t = 1.0 / (2.0 * self.benefit)

    def tolerance(self, rep):
        return self.t

    def encode(self, rep):
        return rep.encode()

    def decode(self, text):
        c = Conjunction.parse(text)
        if self.monotone and not c.is_monotone():
            raise ConfigurationError(f"{text!r} is not monotone")
        return c


class MonotoneConjunctions(_ConjunctionAlgorithm):
    """Evolution over monotone conjunctions of length at most q."""

    @property
    def size_bound(self):
        return monotone_size_bound(self.n)

    def neighborhood(self, rep, rng=None):
        return neighborhood_monotone(rep, self.epsilon, self.n)


class GeneralConjunctions(_ConjunctionAlgorithm):
    """Evolution over conjunctions with negated literals."""

    monotone = False

    @property
    def size_bound(self):
        return general_size_bound(self.n, self.epsilon)

    def neighborhood(self, rep, rng=None):
        return neighborhood_general(rep, self.epsilon, self.n)


# --------------------------------------------------------------------------
# random instances and drift
# --------------------------------------------------------------------------

def random_conjunction(n, length, rng, monotone=True):
    if length > n:
        raise ConfigurationError(f"cannot pick {length} of {n} variables")
    chosen = rng.choice(n, size=length, replace=False)
    if monotone:
        signs = np.ones(length, dtype=np.int64)
    else:
        signs = np.where(rng.random(length) < 0.5, -1, 1)
    return Conjunction.from_literals((chosen + 1) * signs)


def min_drift_length(delta):
    """Smallest |f| whose one-literal edits stay within ``delta``."""
    if delta <= 0:
        return math.inf
    return max(0, math.ceil(-math.log2(delta) - 1e-12))


def _random_bit(mask, rng):
    bits = [j for j in range(mask.bit_length()) if (mask >> j) & 1]
    return bits[int(rng.integers(len(bits)))]


def _free_bit(f, n, rng):
    free = [j for j in range(n) if not (f.variables >> j) & 1]
    if not free:
        raise DriftRefused("no fresh variable left to drift into")
    return free[int(rng.integers(len(free)))]


def drift_step_conjunction(f, delta, policy, rng, n):
    """One Delta-bounded edit of the target.  Every step is checked exactly."""
    if policy == "constant":
        return f
    if policy not in ("long-swap", "long-shrink-grow"):
        raise ConfigurationError(f"unknown conjunction drift policy {policy!r}")
    if delta <= 0 or Fraction(1, 2 ** len(f)) > Fraction(delta):
        raise DriftRefused(
            f"|f| = {len(f)} is too short to drift within Delta = {delta:g}; "
            f"need |f| >= {min_drift_length(delta)}"
        )
    if policy == "long-swap":
        old = 1 << _random_bit(f.variables, rng)
        new = 1 << _free_bit(f, n, rng)
        if f.pos & old:
            g = Conjunction((f.pos & ~old) | new, f.neg)
        else:
            g = Conjunction(f.pos, (f.neg & ~old) | new)
    else:
        can_shrink = Fraction(1, 2 ** (len(f) - 1)) <= Fraction(delta) and len(f) > 0
        can_grow = len(f) < n
        if not (can_shrink or can_grow):
            raise DriftRefused("target can neither grow nor shrink within Delta")
        grow = can_grow and (not can_shrink or rng.random() < 0.5)
        if grow:
            new = 1 << _free_bit(f, n, rng)
            g = Conjunction(f.pos | new, f.neg) if f.is_monotone() or rng.random() < 0.5 \
                else Conjunction(f.pos, f.neg | new)
        else:
            old = 1 << _random_bit(f.variables, rng)
            g = Conjunction(f.pos & ~old, f.neg & ~old)
    if exact_error(f, g) > Fraction(delta):
        raise DriftRefused(f"step {f} -> {g} exceeds Delta")  # pragma: no cover
    return g
