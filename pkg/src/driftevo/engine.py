"""Generic evolution machinery: neighbor sets, the mutator's selection rule,
performance estimation, parameter derivation and trajectory analysis.

Nothing here knows about a particular concept class.  Families plug in
through three small duck-typed roles:

algorithm
    ``neighborhood(rep, rng) -> NeighborSet``, ``tolerance(rep) -> float``
    and an optional ``min_share`` (drop members whose weight share inside the
    chosen pool is below it).
schedule
    ``initial()`` returning f_0 and ``next_target()`` returning f_1, f_2, ...
oracle
    ``exact(target, members)``, ``exact_one(target, rep)``,
    ``draw(s, rng)`` and ``empirical(target, members, X)``.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

MODES = ("oracle", "noisy-uniform", "noisy-adversarial", "sampling")


class ConfigurationError(ValueError):
    """Raised for invalid parameters or inputs that violate a precondition."""


# --------------------------------------------------------------------------
# neighbor sets and selection
# --------------------------------------------------------------------------

class NeighborSet:
    """Weighted candidate mutations.  ``members[0]`` is the current rep.

    ``members`` only needs ``len`` and integer indexing, so a batch object
    (an array of unit normals, a pair of bitmask arrays) can be used as is.
    """

    __slots__ = ("members", "weights", "epsilon", "size_bound")

    def __init__(self, members, weights=None, epsilon=None, size_bound=None):
        count = len(members)
        if count == 0:
            raise ConfigurationError("a neighbor set needs at least the current representation")
        if weights is None:
            weights = np.ones(count)
        else:
            weights = np.asarray(weights, dtype=np.float64)
            if weights.shape != (count,):
                raise ConfigurationError("one weight per member is required")
            if np.any(weights <= 0):
                raise ConfigurationError("weights must be positive")
        if size_bound is not None:
            if count > size_bound:
                raise ConfigurationError(f"{count} members exceed the declared bound {size_bound}")
            share = weights / weights.sum()
            if share.min() < (1.0 / size_bound) * (1.0 - 1e-9):
                raise ConfigurationError("a relative weight is below 1/p")
        self.members = members
        self.weights = weights
        self.epsilon = epsilon
        self.size_bound = size_bound

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i):
        return self.members[i]

    @property
    def current(self):
        return self.members[0]

    def shares(self):
        return self.weights / self.weights.sum()


@dataclass(frozen=True)
class Selection:
    index: int
    member: Any
    kind: str  # "beneficial" | "neutral"


def _estimate_vector(neighbors, estimates):
    if isinstance(estimates, Mapping):
        out = np.empty(len(neighbors))
        for i in range(len(neighbors)):
            key = neighbors[i]
            try:
                out[i] = estimates[key]
            except (KeyError, TypeError):
                raise ConfigurationError(f"no estimate for neighbor {key!r}") from None
        return out
    v = np.asarray(estimates, dtype=np.float64)
    if v.shape != (len(neighbors),):
        raise ConfigurationError(
            f"expected {len(neighbors)} estimates, got shape {v.shape}"
        )
    return v


def _weighted_index(weights, rng):
    cum = np.cumsum(weights)
    k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(k, len(weights) - 1)


def classify(estimates, tolerance):
    """Boolean masks (bene, neut) relative to ``estimates[0]``."""
    v = np.asarray(estimates, dtype=np.float64)
    v0 = v[0]
    return v >= v0 + tolerance, np.abs(v - v0) < tolerance


def select_mutation(neighbors, estimates, tolerance, rng, min_share=None):
    """One round of selection.

    Pick from Bene = {v >= v0 + t} if it is nonempty, else from
    Neut = {|v - v0| < t}, proportionally to the member weights.  With
    ``min_share`` set, pool members whose weight share within the pool is
    below it are skipped, as long as something remains.
    """
    if tolerance <= 0:
        raise ConfigurationError("tolerance must be positive")
    v = _estimate_vector(neighbors, estimates)
    v0 = v[0]
    mask = v >= v0 + tolerance
    kind = "beneficial"
    if not mask.any():
        mask = np.abs(v - v0) < tolerance
        kind = "neutral"
    w = np.where(mask, neighbors.weights, 0.0)
    if min_share is not None:
        keep = w >= min_share * w.sum()
        if keep.any():
            w = np.where(keep, w, 0.0)
    # zero-weight entries can never be the first index whose running sum
    # exceeds the uniform draw
    idx = _weighted_index(w, rng)
    return Selection(idx, neighbors[idx], kind)


# --------------------------------------------------------------------------
# estimation and parameters
# --------------------------------------------------------------------------

def representation_values(rep, X):
    """Expected value of ``rep`` at each row of ``X``."""
    if hasattr(rep, "values"):
        return np.asarray(rep.values(X), dtype=np.float64)
    v = np.asarray(rep, dtype=np.float64)
    return np.where(np.asarray(X) @ v >= 0.0, 1.0, -1.0)


def empirical_performance(rep, target, dist, s, rng):
    """(1/s) * sum f(x) r(x) over a fresh sample of size ``s`` from ``dist``."""
    if s < 1:
        raise ConfigurationError("sample size must be at least 1")
    X = dist.sample(s, rng)
    return float(np.mean(representation_values(target, X) * representation_values(rep, X)))


def hoeffding_sample_size(Z, delta, N):
    """Smallest s with 2 N exp(-s Z^2 / 2) <= delta."""
    if not 0 < Z <= 2:
        raise ConfigurationError("Z must lie in (0, 2]")
    if not 0 < delta < 1:
        raise ConfigurationError("delta must lie in (0, 1)")
    if N < 1:
        raise ConfigurationError("N must be at least 1")
    return max(1, math.ceil(2.0 * math.log(2.0 * N / delta) / Z ** 2))


def guarded_ceil(x, rel=1e-9):
    """Ceiling that ignores floating-point fuzz just above an integer."""
    return math.ceil(x - rel * max(1.0, abs(x)))


@dataclass(frozen=True)
class Theorem8Parameters:
    t: float
    g: float
    s: int
    delta: float

    @property
    def generations(self):
        """g rounded up to a whole number of rounds."""
        return guarded_ceil(self.g)


def theorem8_parameters(b, p, epsilon, drifting=True):
    """Tolerance, horizon, sample size and drift bound for benefit ``b``."""
    if not 0 < epsilon < 1:
        raise ConfigurationError("epsilon must lie in (0, 1)")
    if p < 1:
        raise ConfigurationError("p must be at least 1")
    if b < (2.0 / epsilon) * (1.0 - 1e-12):
        raise ConfigurationError(f"benefit {b} is below 2/epsilon = {2.0 / epsilon}")
    t = 1.0 / (2.0 * b)
    g = (16.0 if drifting else 8.0) * b
    s = math.ceil(128.0 * b * b * math.log(2.0 * p * g / epsilon))
    delta = 1.0 / (16.0 * b) if drifting else 0.0
    return Theorem8Parameters(t=t, g=g, s=s, delta=delta)


# --------------------------------------------------------------------------
# the generation loop
# --------------------------------------------------------------------------

@dataclass
class EngineConfig:
    horizon: int
    epsilon: float
    mode: str = "oracle"
    rng_seed: int = 0
    noise: Optional[float] = None  # Z for the noisy modes
    sample_size: Optional[int] = None  # s for sampling mode
    suppress_rare: bool = False  # honour the algorithm's min_share
    keep_estimates: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.horizon) < 1:
            raise ConfigurationError("horizon must be at least 1")
        if not 0 < self.epsilon < 1:
            raise ConfigurationError("epsilon must lie in (0, 1)")
        if self.mode.startswith("noisy") and not (self.noise is not None and self.noise >= 0):
            raise ConfigurationError("noisy modes need a noise bound Z >= 0")
        if self.mode == "sampling" and not (self.sample_size and self.sample_size >= 1):
            raise ConfigurationError("sampling mode needs sample_size >= 1")
        if not 0 <= int(self.rng_seed) < 2 ** 64:
            raise ConfigurationError("rng_seed must fit in 64 bits")


@dataclass
class TrajectoryRecord:
    targets: list
    reps: list
    perf: np.ndarray  # perf[i] = Perf_{f_i}(r_i)
    kinds: list  # kinds[i-1] is the selection class of round i
    estimates: list = field(default_factory=list)
    encode: Optional[Callable[[Any], str]] = None

    def __len__(self):
        return len(self.perf)

    def target_id(self, i):
        return self.encode(self.targets[i]) if self.encode else str(i)

    def rep_id(self, i):
        return self.encode(self.reps[i]) if self.encode else str(i)

    def selection_class(self, i):
        return "initial" if i == 0 else self.kinds[i - 1]


def _estimates(neighbors, target, oracle, config, rng):
    members = neighbors.members
    if config.mode == "sampling":
        X = oracle.draw(config.sample_size, rng)
        return oracle.empirical(target, members, X)
    exact = oracle.exact(target, members)
    if config.mode == "oracle":
        return exact
    Z = config.noise
    if config.mode == "noisy-uniform":
        return exact + rng.uniform(-Z, Z, size=exact.shape)
    # worst case within Z: every candidate is pushed towards the current
    # value, which stays exact
    v = exact - Z * np.sign(exact - exact[0])
    v[0] = exact[0]
    return v


def run_evolution(algorithm, schedule, oracle, config, r0, rng=None, encode=None):
    """Run ``config.horizon`` rounds from ``r0`` and return the trajectory.

    Round i builds the neighborhood of r_{i-1}, estimates it against
    f_{i-1}, selects r_i, then advances the target to f_i.  The logged
    performance is Perf_{f_i}(r_i).
    """
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    horizon = int(config.horizon)
    min_share = getattr(algorithm, "min_share", None) if config.suppress_rare else None
    target = schedule.initial()
    rep = r0
    targets, reps, kinds, ests = [target], [rep], [], []
    perf = np.empty(horizon + 1)
    perf[0] = oracle.exact_one(target, rep)
    for i in range(1, horizon + 1):
        neighbors = algorithm.neighborhood(rep, rng)
        v = _estimates(neighbors, target, oracle, config, rng)
        sel = select_mutation(neighbors, v, algorithm.tolerance(rep), rng, min_share)
        rep = sel.member
        target = schedule.next_target()
        perf[i] = oracle.exact_one(target, rep)
        targets.append(target)
        reps.append(rep)
        kinds.append(sel.kind)
        if config.keep_estimates:
            ests.append(np.asarray(v))
    return TrajectoryRecord(targets, reps, perf, kinds, ests, encode)


# --------------------------------------------------------------------------
# analysis
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrajectoryAnalysis:
    monotone: bool
    quasi_monotone: bool
    strict_until_eps: bool
    perpetual_accuracy: float


def analyze_trajectory(perf, epsilon, g=0, m=None):
    """Monotonicity flags and the fraction of rounds i >= g at 1 - epsilon.

    ``perf`` is a trajectory record or a plain sequence of exact
    performances.  ``m`` is the per-step gain denominator for the strict
    check; without it the strict flag only asks for a positive gain.
    """
    p = np.asarray(getattr(perf, "perf", perf), dtype=np.float64)
    monotone = bool(np.all(p >= p[0]))
    quasi = bool(np.all(p >= p[0] - epsilon))
    step = 0.0 if m is None else 1.0 / m
    prev, cur = p[:-1], p[1:]
    ok = (prev >= 1 - epsilon) | (cur >= prev + step if m is not None else cur > prev)
    tail = p[int(g):]
    frac = float(np.mean(tail >= 1 - epsilon)) if len(tail) else float("nan")
    return TrajectoryAnalysis(monotone, quasi, bool(np.all(ok)), frac)
