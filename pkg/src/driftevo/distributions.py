"""Example distributions: uniform hypercube, uniform unit sphere and
centred product normal."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import ConfigurationError

KINDS = ("uniform-hypercube", "unit-sphere", "product-normal")


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    n: int
    sigma: Optional[tuple] = None
    k: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown distribution {self.kind!r}")
        if self.n < 1:
            raise ConfigurationError("dimension must be positive")
        if self.kind == "product-normal":
            if self.sigma is None:
                raise ConfigurationError("product-normal needs sigma")
            sigma = np.asarray(self.sigma, dtype=np.float64)
            if sigma.shape != (self.n,):
                raise ConfigurationError("sigma must have one entry per dimension")
            lo = (1.0 / self.n) ** self.k if self.k is not None else 0.0
            if np.any(sigma > 1.0) or np.any(sigma < lo) or np.any(sigma <= 0):
                raise ConfigurationError(
                    f"sigma must lie in [(1/n)^k, 1] = [{lo:g}, 1]"
                )
            object.__setattr__(self, "sigma", tuple(float(s) for s in sigma))

    @property
    def sigma_array(self):
        return None if self.sigma is None else np.asarray(self.sigma)

    def sample(self, size, rng):
        """``size`` points as a (size, n) float array."""
        n = self.n
        if self.kind == "uniform-hypercube":
            return np.where(rng.random((size, n)) < 0.5, -1.0, 1.0)
        if self.kind == "unit-sphere":
            g = rng.standard_normal((size, n))
            norms = np.linalg.norm(g, axis=1)
            bad = norms == 0.0
            while bad.any():  # zero draw: resample those rows
                g[bad] = rng.standard_normal((int(bad.sum()), n))
                norms = np.linalg.norm(g, axis=1)
                bad = norms == 0.0
            return g / norms[:, None]
        return rng.standard_normal((size, n)) * self.sigma_array


def sample(spec, rng):
    """A single example point."""
    return spec.sample(1, rng)[0]


def whiten(spec, X):
    """Map product-normal points to N[0, I] by dividing out sigma."""
    return np.asarray(X) / spec.sigma_array


def pack_hypercube(X):
    """Encode +-1 rows as int64 bitmasks (coordinate j+1 = +1 <=> bit j)."""
    X = np.asarray(X)
    if X.shape[1] > 62:
        raise ConfigurationError("bit packing supports n <= 62")
    weights = np.int64(1) << np.arange(X.shape[1], dtype=np.int64)
    return ((X > 0).astype(np.int64) * weights).sum(axis=1)


def sample_hypercube_bits(n, size, rng):
    """Uniform hypercube points drawn directly as bitmasks."""
    return rng.integers(0, 1 << n, size=size, dtype=np.int64)
