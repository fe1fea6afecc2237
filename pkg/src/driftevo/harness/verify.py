"""Randomised sweeps of the per-step benefit guarantee.

For each random (target, representation) pair whose exact performance is
below 1 - eps/2, the best neighbor must gain at least 1/b.  Violations are
counted, and separately those that occur below 1 - eps.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .. import conjunctions as cj
from .. import hyperplanes as hp
from ..distributions import DistributionSpec
from ..engine import ConfigurationError

REL_SLACK = 1e-9

DEFAULT_GRID = {
    "monotone-conj": {"epsilons": [0.1, 0.3], "ns": [8, 16], "cases": 1000},
    "general-conj": {"epsilons": [0.1, 0.3], "ns": [8, 16], "cases": 1000},
    "hyperplane-rotation": {"epsilons": [0.1, 0.4], "ns": [3, 10], "cases": 1000},
    "hyperplane-componentwise": {"epsilons": [0.5], "ns": [4], "cases": 200},
}


@dataclass
class SweepResult:
    family: str
    n: int
    epsilon: float
    cases: int
    bound: float
    considered: int = 0
    violations: int = 0
    violations_below_eps: int = 0
    min_gain: float = math.inf
    min_margin: float = math.inf
    contradictory: int = 0

    @property
    def ok(self):
        return self.violations == 0

    def as_dict(self):
        d = asdict(self)
        for key in ("min_gain", "min_margin"):
            if math.isinf(d[key]):
                d[key] = None
        return d


def default_sigma(n, k):
    return np.array([n ** (-k * i / (n - 1)) for i in range(n)]) if n > 1 else np.ones(1)


def _record(res, perf, best):
    if perf >= 1 - res.epsilon / 2:
        return
    gain = best - perf
    res.considered += 1
    res.min_gain = min(res.min_gain, gain)
    res.min_margin = min(res.min_margin, gain - res.bound)
    if gain < res.bound * (1 - REL_SLACK):
        res.violations += 1
        if perf < 1 - res.epsilon:
            res.violations_below_eps += 1


def _contradicting_rep(f, n, q, rng):
    """A random r holding the negation of some literal of f."""
    lits = f.literals
    clash = -lits[int(rng.integers(len(lits)))]
    others = [v for v in range(1, n + 1) if v != abs(clash)]
    extra = int(rng.integers(0, min(q, n)))
    chosen = rng.choice(others, size=extra, replace=False)
    signs = np.where(rng.random(extra) < 0.5, -1, 1)
    return cj.Conjunction.from_literals([clash, *(chosen * signs)])


def sweep_conjunctions(n, epsilon, cases, rng, monotone=True, contradictory_share=0.4):
    fam = "monotone-conj" if monotone else "general-conj"
    q = cj.max_length(epsilon)
    res = SweepResult(fam, n, epsilon, cases, epsilon ** 2 / 9.0)
    oracle = cj.ConjunctionOracle(n)
    neigh = cj.neighborhood_monotone if monotone else cj.neighborhood_general
    for _ in range(cases):
        f = cj.random_conjunction(n, int(rng.integers(0, n + 1)), rng, monotone)
        if not monotone and len(f) > 0 and rng.random() < contradictory_share:
            r = _contradicting_rep(f, n, q, rng)
        else:
            r = cj.random_conjunction(n, int(rng.integers(0, min(q, n) + 1)), rng, monotone)
        if not monotone and cj._clash(f, r):
            res.contradictory += 1
        vals = oracle.exact(f, neigh(r, epsilon, n).members)
        _record(res, float(vals[0]), float(vals.max()))
    return res


def _rotated_pair(n, rng):
    """Random f and an r at a uniformly random angle from it, so that
    performance is spread evenly over [-1, 1]."""
    f = hp.random_unit(n, rng)
    r = hp.rotate(f, hp.random_tangent(f, rng), rng.uniform(0.0, math.pi))
    return f, r


def sweep_rotation(n, epsilon, cases, rng):
    res = SweepResult("hyperplane-rotation", n, epsilon, cases,
                      2.0 * epsilon / (math.pi ** 3 * n))
    oracle = hp.HyperplaneOracle(DistributionSpec("unit-sphere", n))
    for _ in range(cases):
        f, r = _rotated_pair(n, rng)
        vals = oracle.exact(f, hp.neighborhood_rotation(r, epsilon, rng).members)
        _record(res, float(vals[0]), float(vals.max()))
    return res


def sweep_componentwise(n, epsilon, cases, rng, k=1, sigma=None):
    sigma = default_sigma(n, k) if sigma is None else np.asarray(sigma, dtype=np.float64)
    dist = DistributionSpec("product-normal", n, tuple(sigma), k)
    res = SweepResult("hyperplane-componentwise", n, epsilon, cases, epsilon ** 6 / (144.0 * n))
    oracle = hp.HyperplaneOracle(dist)
    for _ in range(cases):
        # spread the angle between the sigma-images, which is what
        # product-normal performance depends on
        u, w = _rotated_pair(n, rng)
        f, r = hp.unit(u / sigma), hp.unit(w / sigma)
        vals = oracle.exact(f, hp.neighborhood_componentwise(r, epsilon, k).members)
        _record(res, float(vals[0]), float(vals.max()))
    return res


def sweep(family, n, epsilon, cases, rng, k=1, sigma=None):
    if family == "monotone-conj":
        return sweep_conjunctions(n, epsilon, cases, rng, monotone=True)
    if family == "general-conj":
        return sweep_conjunctions(n, epsilon, cases, rng, monotone=False)
    if family == "hyperplane-rotation":
        return sweep_rotation(n, epsilon, cases, rng)
    if family == "hyperplane-componentwise":
        return sweep_componentwise(n, epsilon, cases, rng, k, sigma)
    raise ConfigurationError(f"no benefit sweep for family {family!r}")


def verify_grid(spec, seed):
    """Run every (family, n, epsilon) cell of ``spec``.

    ``spec`` maps family -> {"epsilons", "ns", "cases", optional "k", "sigma"}.
    Each cell gets its own stream derived from (seed, cell index).
    """
    out = []
    cell = 0
    for family in sorted(spec):
        grid = {**DEFAULT_GRID.get(family, {}), **spec[family]}
        for n in grid["ns"]:
            for eps in grid["epsilons"]:
                rng = np.random.default_rng([int(seed), cell])
                cell += 1
                out.append(sweep(family, int(n), float(eps), int(grid["cases"]), rng,
                                 grid.get("k", 1), grid.get("sigma")))
    return out
