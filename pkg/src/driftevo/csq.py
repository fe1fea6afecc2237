"""Compiling a thresholded correlational-query learner into an evolution
algorithm that keeps tracking a slowly moving target.

Representations
    ``Simulating(h, z)``  -- (1 - eps/2) h + (eps/2) Phi_z with |z| < q, where
    Phi_z = (1/q) sum_j [z_j = 1] phi_{z^{j-1}} replays the recorded answers.
    ``Backslide(h, z, k)`` -- the same function with |z| = q, scaled by
    (1 - k tu/2).  k = 0 is the finished simulation, k = K is the zero
    function.

Randomised representations are evaluated through their expectation, so
every representation here is a real-valued function into [-1, 1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Hashable

import numpy as np

from .conjunctions import Conjunction, exact_performance
from .distributions import DistributionSpec
from .engine import ConfigurationError, NeighborSet, guarded_ceil


class _Zero:
    """The constant-zero hypothesis (a fair coin as a Boolean function)."""

    def __repr__(self):
        return "ZERO"

    def __reduce__(self):
        return (_zero, ())


def _zero():
    return ZERO


ZERO = _Zero()


@dataclass(frozen=True)
class Query:
    phi: Callable[[np.ndarray], np.ndarray]
    theta: float
    key: Hashable = None


def answer_is_valid(bit, correlation, theta, tau):
    """Whether ``bit`` is a legal oracle reply for a query with this
    correlation: 1 is ruled out at or below theta - tau, 0 at or above
    theta + tau."""
    if bit == 1:
        return correlation > theta - tau
    return correlation < theta + tau


class ToyConjunctionLearner:
    """Non-adaptive learner for short monotone conjunctions, uniform on {-1,1}^n.

    Query j asks whether phi_j(x) = (x_j - mean(x)) / 2 correlates with the
    target.  For a target with k variables that correlation is
    2^-k (1 - k/n) when x_j is in the target and -k 2^-k / n otherwise, so
    a single threshold splits the two cases for every 1 <= k <= kmax.
    theta = tau is chosen with room on both sides: members of f clear
    theta + tau and the reduction's benefit bar, non-members sit far enough
    below zero to be deleterious.  The output is the conjunction of the
    variables answered 1.
    """

    def __init__(self, n, kmax=2):
        if n < 2 or n > 20:
            raise ConfigurationError("toy learner supports 2 <= n <= 20")
        if not 1 <= kmax < n:
            raise ConfigurationError("kmax must lie in [1, n)")
        self.n = n
        self.kmax = kmax
        self.q = n
        margin = min(
            min(self.inside_correlation(k) / 2.0, 4.0 * abs(self.outside_correlation(k)))
            for k in range(1, kmax + 1)
        )
        self.theta = 0.75 * margin
        self.tau = self.theta
        self.dist = DistributionSpec("uniform-hypercube", n)

    def inside_correlation(self, k):
        return 2.0 ** -k * (1.0 - k / self.n)

    def outside_correlation(self, k):
        return -k * 2.0 ** -k / self.n

    def thresholds(self):
        return [self.theta]

    def query(self, z):
        j = len(z)
        if j >= self.q:
            raise ConfigurationError("all queries have been asked")

        def phi(X, j=j):
            X = np.asarray(X, dtype=np.float64)
            return (X[:, j] - X.mean(axis=1)) / 2.0

        return Query(phi, self.theta, j)

    def correlation(self, query, target):
        """Exact E[phi f] for a monotone conjunction target."""
        k = len(target)
        if k == 0:
            return 0.0
        inside = (target.pos >> query.key) & 1
        return self.inside_correlation(k) if inside else self.outside_correlation(k)

    def hypothesis(self, z):
        pos = 0
        for j, bit in enumerate(z):
            if bit == "1":
                pos |= 1 << j
        return Conjunction(pos)

    def hypothesis_performance(self, h, target):
        return float(exact_performance(target, h))

    def hypothesis_values(self, h, X):
        return h.values(X)

    def target_values(self, target, X):
        return target.values(X)

    def encode_hypothesis(self, h):
        return h.encode()

    def random_target(self, rng):
        k = int(rng.integers(1, self.kmax + 1))
        chosen = rng.choice(self.n, size=k, replace=False)
        return Conjunction.from_literals(chosen + 1)

    def random_hypothesis(self, rng):
        return Conjunction(int(rng.integers(0, 1 << self.n)))


# --------------------------------------------------------------------------
# representations and parameters
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Simulating:
    h: Any
    z: str = ""


@dataclass(frozen=True)
class Backslide:
    h: Any
    z: str
    k: int = 0


@dataclass(frozen=True)
class ReductionParameters:
    epsilon: float
    q: int
    tau: float
    tu: float
    K: int
    eta: float
    tau_prime: float
    s: int
    delta: float
    g: int


def reduction_parameters(epsilon, q, tau, theta_max, tu=None):
    """Derived constants.  K is 2/tu rounded up.  ``tu`` defaults to the
    largest per-state tolerance and may only be raised above it."""
    if not 0 < epsilon < 1:
        raise ConfigurationError("epsilon must lie in (0, 1)")
    if q < 1 or tau <= 0 or theta_max < tau:
        raise ConfigurationError("need q >= 1, tau > 0 and theta_max >= tau")
    floor = epsilon * theta_max / (8.0 * q)
    if tu is None:
        tu = floor
    elif tu < floor:
        raise ConfigurationError("tu must bound every per-state tolerance")
    K = guarded_ceil(2.0 / tu)
    eta = epsilon / (4 * q + 2 * K)
    tau_prime = min(epsilon * tau / (2 * q), tu / 8.0)
    s = math.ceil(math.log((6 * q + 3 * K) / epsilon) / (2.0 * tau_prime ** 2))
    delta = epsilon * tau / (4 * q + 2 * K + 2)
    return ReductionParameters(
        epsilon=epsilon, q=q, tau=tau, tu=tu, K=K, eta=eta,
        tau_prime=tau_prime, s=s, delta=delta, g=2 * q + K + 1,
    )


def drift_query_margin(tau, delta):
    """Rounds over which a tau/2-accurate answer stays tau-accurate."""
    if delta < 0:
        raise ConfigurationError("Delta must be non-negative")
    if delta == 0:
        return math.inf
    return max(1, math.floor(tau / (2.0 * delta) + 1e-9))


def check_consistency(z, target, algo):
    """Every recorded bit is a legal reply against the exact correlation."""
    for i, bit in enumerate(z):
        query = algo.query(z[:i])
        c = algo.correlation(query, target)
        if not answer_is_valid(int(bit), c, query.theta, algo.tau):
            return False
    return True


class Reduction:
    """The compiled evolution algorithm."""

    def __init__(self, algo, epsilon, quasi_monotonic=False, tu=None):
        for theta in algo.thresholds():
            if theta < algo.tau:
                raise ConfigurationError(f"threshold {theta} is below tau = {algo.tau}")
        theta_max = max(algo.thresholds())
        self.algo = algo
        self.epsilon = epsilon
        self.quasi_monotonic = quasi_monotonic
        self.q = algo.q
        self.params = reduction_parameters(epsilon, algo.q, algo.tau, theta_max, tu)
        p = self.params
        self.tu = p.tu
        self.K = p.K
        self.eta = p.eta
        self.min_share = 2.0 * p.eta
        self.size_bound = 1.0 / p.eta ** 2
        self._phi_cache = {}

    # -- structure ---------------------------------------------------------

    def start(self, h=ZERO, z=""):
        return self._make(h, z, 0)

    def _make(self, h, z, k=0):
        if len(z) > self.q:
            raise ConfigurationError("z is longer than q")
        return Backslide(h, z, k) if len(z) == self.q else Simulating(h, z)

    def scale(self, rep):
        if isinstance(rep, Simulating) or rep.k == 0:
            return 1.0
        if rep.k >= self.K:
            return 0.0
        return 1.0 - rep.k * self.tu / 2.0

    def neighborhood(self, rep, rng=None):
        eta = self.eta
        if isinstance(rep, Simulating):
            members = [rep, self._make(rep.h, rep.z + "0"), self._make(rep.h, rep.z + "1")]
            weights = [eta, (1 - eta) / 2, (1 - eta) / 2]
        elif rep.k >= self.K:
            members = [rep, Simulating(ZERO, "")]
            weights = [eta, 1 - eta]
        else:
            nxt = Backslide(rep.h, rep.z, rep.k + 1)
            restart = Simulating(self.algo.hypothesis(rep.z), "")
            if self.quasi_monotonic:
                half = (eta - eta ** 2) / 2
                members = [rep, nxt, restart, Simulating(rep.h, "")]
                weights = [eta ** 2, half, half, 1 - eta]
            else:
                members = [rep, nxt, restart]
                weights = [eta ** 2, eta - eta ** 2, 1 - eta]
        members, weights = _merge(members, weights)
        return NeighborSet(members, weights, self.epsilon, self.size_bound)

    def tolerance(self, rep):
        if isinstance(rep, Simulating):
            theta = self.algo.query(rep.z).theta
            return self.epsilon * theta / (8.0 * self.q)
        return self.tu

    # -- evaluation --------------------------------------------------------

    def _phi_correlation(self, z, target):
        key = (z, target)
        hit = self._phi_cache.get(key)
        if hit is None:
            total = 0.0
            for j, bit in enumerate(z):
                if bit == "1":
                    total += self.algo.correlation(self.algo.query(z[:j]), target)
            hit = total / self.q
            if len(self._phi_cache) > 100_000:
                self._phi_cache.clear()
            self._phi_cache[key] = hit
        return hit

    def hypothesis_performance(self, h, target):
        if h is ZERO:
            return 0.0
        return self.algo.hypothesis_performance(h, target)

    def performance(self, rep, target):
        scale = self.scale(rep)
        if scale == 0.0:
            return 0.0
        eps = self.epsilon
        base = (1 - eps / 2) * self.hypothesis_performance(rep.h, target)
        return scale * (base + (eps / 2) * self._phi_correlation(rep.z, target))

    def evaluate(self, rep, X):
        """Expected value of ``rep`` at each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        scale = self.scale(rep)
        if scale == 0.0:
            return np.zeros(X.shape[0])
        eps = self.epsilon
        hv = np.zeros(X.shape[0]) if rep.h is ZERO else self.algo.hypothesis_values(rep.h, X)
        phi = np.zeros(X.shape[0])
        for j, bit in enumerate(rep.z):
            if bit == "1":
                phi += self.algo.query(rep.z[:j]).phi(X)
        return scale * ((1 - eps / 2) * hv + (eps / 2) * phi / self.q)

    def encode(self, rep):
        if not isinstance(rep, (Simulating, Backslide)):
            # targets are plain concepts of the learner
            return self.algo.encode_hypothesis(rep)
        h = "0" if rep.h is ZERO else self.algo.encode_hypothesis(rep.h)
        if isinstance(rep, Simulating):
            return f"sim|{h}|{rep.z}"
        return f"back|{h}|{rep.z}|{rep.k}"

    def preconditions(self):
        """Drift requirements of the simulation and restart phases."""
        p = self.params
        return {
            "simulation": p.delta <= p.tau / (2 * p.q),
            "backslide": p.delta <= p.tu / 4,
        }


def _merge(members, weights):
    out_m, out_w = [], []
    for m, w in zip(members, weights):
        for i, seen in enumerate(out_m):
            if seen == m:
                out_w[i] += w
                break
        else:
            out_m.append(m)
            out_w.append(w)
    return out_m, np.array(out_w)


class ReductionOracle:
    """Exact and sampled performance of reduction representations."""

    def __init__(self, reduction):
        self.reduction = reduction
        self.algo = reduction.algo
        self.dist = self.algo.dist

    def exact(self, target, members):
        return np.array([self.reduction.performance(m, target) for m in members])

    def exact_one(self, target, rep):
        if isinstance(rep, (Simulating, Backslide)):
            return self.reduction.performance(rep, target)
        # target-vs-target comparisons for drift checks
        return self.algo.hypothesis_performance(rep, target)

    def draw(self, s, rng):
        return self.dist.sample(s, rng)

    def empirical(self, target, members, X):
        fv = self.algo.target_values(target, X)
        return np.array([np.mean(fv * self.reduction.evaluate(m, X)) for m in members])
