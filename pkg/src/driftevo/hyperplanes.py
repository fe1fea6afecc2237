"""Homogeneous halfspaces x -> sign(v . x) with unit normals v.

Normals are plain float64 arrays; every constructor renormalises.
Performance under a spherically symmetric distribution depends only on the
angle between normals, and a centred product normal reduces to that case
after scaling each coordinate by its sigma.
"""
from __future__ import annotations

import math

import numpy as np

from . import kernels
from .engine import ConfigurationError, NeighborSet

NORM_TOL = 1e-10


def unit(v):
    v = np.asarray(v, dtype=np.float64)
    nrm = float(np.sqrt(v @ v))
    if nrm == 0.0 or not math.isfinite(nrm):
        raise ConfigurationError("cannot normalise a zero or non-finite vector")
    return v / nrm


def parse_vector(text, n=None):
    """Read comma-separated decimals and normalise."""
    try:
        v = np.array([float(tok) for tok in text.split(",") if tok.strip()])
    except ValueError as exc:
        raise ConfigurationError(f"bad vector {text!r}: {exc}") from None
    if n is not None and len(v) != n:
        raise ConfigurationError(f"expected {n} components, got {len(v)}")
    return unit(v)


def encode_vector(v):
    # repr round-trips float64 exactly
    return ",".join(repr(float(c)) for c in v)


def random_unit(n, rng):
    while True:
        g = rng.standard_normal(n)
        nrm = float(np.sqrt(g @ g))
        if nrm > 0.0:
            return g / nrm


def evaluate(v, x):
    v = np.asarray(v)
    x = np.asarray(x)
    if v.shape != x.shape:
        raise ConfigurationError(f"dimension mismatch: {v.shape} vs {x.shape}")
    return 1 if float(v @ x) >= 0.0 else -1


def exact_performance_spherical(f, r):
    return float(kernels.spherical_perf_batch(f, np.asarray(r)[None, :])[0])


def sigma_transform(v, sigma):
    """lambda(v) = sigma * v, renormalised (rows or a single vector)."""
    w = np.asarray(v, dtype=np.float64) * np.asarray(sigma, dtype=np.float64)
    nrm = np.sqrt(np.sum(w * w, axis=-1, keepdims=True))
    if np.any(nrm == 0.0):
        raise ConfigurationError("sigma transform produced a zero vector")
    return w / nrm


def exact_performance_product_normal(f, r, sigma):
    return exact_performance_spherical(sigma_transform(f, sigma), sigma_transform(r, sigma))


class HyperplaneOracle:
    """Exact (angle based) and sampled performance for halfspaces."""

    def __init__(self, dist):
        if dist.kind == "uniform-hypercube":
            raise ConfigurationError("halfspace oracle needs a sphere or product-normal distribution")
        self.dist = dist
        self.n = dist.n
        self.sigma = dist.sigma_array

    def _image(self, v):
        return v if self.sigma is None else sigma_transform(v, self.sigma)

    def exact(self, target, members):
        R = np.asarray(members)
        return kernels.spherical_perf_batch(self._image(target), self._image(R))

    def exact_one(self, target, rep):
        return float(self.exact(target, np.asarray(rep)[None, :])[0])

    def draw(self, s, rng):
        return self.dist.sample(s, rng)

    def empirical(self, target, members, X):
        return kernels.halfspace_agreement(target, np.asarray(members), X)


# --------------------------------------------------------------------------
# neighborhoods
# --------------------------------------------------------------------------

def rotation_angle(epsilon, n):
    return epsilon / (math.pi * math.sqrt(n))


def neighborhood_rotation(r, epsilon, rng):
    """r and its rotations by a fixed small angle towards +-u^i for a random
    orthonormal completion u^2..u^n of r."""
    r = np.asarray(r, dtype=np.float64)
    n = r.shape[0]
    while True:
        gauss = rng.standard_normal((n - 1, n))
        members = kernels.rotation_neighbors(r, gauss, rotation_angle(epsilon, n))
        if len(members):  # empty means a draw was nearly dependent on r
            break
    return NeighborSet(members, None, epsilon, 2 * n - 1)


def componentwise_step(epsilon, n, k):
    return epsilon ** 2 / (12.0 * n ** k * math.sqrt(n))


def componentwise_size_bound(n, k):
    return 8 * n ** (2 * k + 1) + 2 * n


def neighborhood_componentwise(r, epsilon, k):
    """Sign flips of single components plus small shifts of one component
    along a grid of 4 n^k steps in each direction, renormalised."""
    if k < 0 or int(k) != k:
        raise ConfigurationError("k must be a non-negative integer")
    r = np.asarray(r, dtype=np.float64)
    n = r.shape[0]
    members = kernels.componentwise_neighbors(r, componentwise_step(epsilon, n, k), 4 * n ** int(k))
    return NeighborSet(members, None, epsilon, componentwise_size_bound(n, int(k)))


class _HyperplaneAlgorithm:
    min_share = None

    def tolerance(self, rep):
        return self.t

    def encode(self, rep):
        return encode_vector(rep)

    def decode(self, text):
        return parse_vector(text, self.n)


class RotationHyperplanes(_HyperplaneAlgorithm):
    """Rotation neighborhood for spherically symmetric distributions."""

    def __init__(self, n, epsilon):
        if n < 2:
            raise ConfigurationError("rotation neighborhood needs n >= 2")
        self.n = n
        self.epsilon = epsilon
        self.benefit = math.pi ** 3 * n / (2.0 * epsilon)
        self.t = 1.0 / (2.0 * self.benefit)
        self.size_bound = 2 * n - 1

    def neighborhood(self, rep, rng):
        return neighborhood_rotation(rep, self.epsilon, rng)


class ComponentwiseHyperplanes(_HyperplaneAlgorithm):
    """Component-wise neighborhood for centred product normals."""

    def __init__(self, n, epsilon, k):
        self.n = n
        self.epsilon = epsilon
        self.k = int(k)
        self.benefit = 144.0 * n / epsilon ** 6
        self.t = 1.0 / (2.0 * self.benefit)
        self.size_bound = componentwise_size_bound(n, self.k)

    def neighborhood(self, rep, rng=None):
        return neighborhood_componentwise(rep, self.epsilon, self.k)


# --------------------------------------------------------------------------
# drift
# --------------------------------------------------------------------------

def random_tangent(f, rng):
    """Random unit vector orthogonal to ``f``."""
    f = np.asarray(f, dtype=np.float64)
    while True:
        g = rng.standard_normal(f.shape[0])
        for _ in range(2):
            g = g - (g @ f) * f
        nrm = float(np.sqrt(g @ g))
        if nrm > 1e-8:
            return g / nrm


def rotate(f, direction, angle):
    """Rotate ``f`` by ``angle`` in the plane spanned by f and ``direction``."""
    d = np.asarray(direction, dtype=np.float64)
    d = d - (d @ f) * f
    d = unit(d)
    return unit(math.cos(angle) * f + math.sin(angle) * d)


def drift_step_rotation(f, delta, policy, rng, direction=None):
    """Move ``f`` by angle pi*delta (error exactly delta on the sphere)."""
    if delta < 0 or delta > 1:
        raise ConfigurationError("delta must lie in [0, 1]")
    if policy == "constant" or delta == 0:
        return np.asarray(f, dtype=np.float64)
    if policy == "random-walk":
        direction = random_tangent(f, rng)
    elif policy == "steady-rotation":
        if direction is None:
            raise ConfigurationError("steady rotation needs a direction")
    else:
        raise ConfigurationError(f"unknown hyperplane drift policy {policy!r}")
    return rotate(np.asarray(f, dtype=np.float64), direction, math.pi * delta)
