"""Delta-drifting target schedules.

A schedule hands out f_0 via ``initial()`` and then f_1, f_2, ... via
``next_target()``.  When it is given an exact oracle it checks every
consecutive pair against Delta as it goes, so a bad step fails loudly
instead of silently invalidating a run.
"""
from __future__ import annotations

import math

import numpy as np

from . import conjunctions as cj
from . import hyperplanes as hp
from .engine import ConfigurationError

STEP_SLACK = 1e-12


class DriftViolation(ConfigurationError):
    """A consecutive pair of targets is further apart than Delta."""


def step_error(oracle, a, b):
    return (1.0 - oracle.exact_one(a, b)) / 2.0


def verify_drift_sequence(targets, oracle, delta):
    """(ok, max_err) over consecutive pairs, err taken from the exact oracle."""
    targets = list(targets)
    if len(targets) < 2:
        raise ConfigurationError("need at least two targets")
    worst = 0.0
    for a, b in zip(targets, targets[1:]):
        worst = max(worst, step_error(oracle, a, b))
    return worst <= delta + STEP_SLACK, worst


class DriftSchedule:
    """Base class.  Subclasses implement ``_step(f) -> f_next``."""

    policy = "constant"

    def __init__(self, f0, delta=0.0, oracle=None):
        if delta < 0:
            raise ConfigurationError("Delta must be non-negative")
        self.f0 = f0
        self.delta = float(delta)
        self.oracle = oracle
        self.current = f0
        self.index = 0
        self.max_step_error = 0.0

    def initial(self):
        self.current = self.f0
        self.index = 0
        self.max_step_error = 0.0
        self._reset()
        return self.current

    def _reset(self):
        pass

    def _step(self, f):
        return f

    def next_target(self):
        nxt = self._step(self.current)
        if self.oracle is not None:
            err = step_error(self.oracle, self.current, nxt)
            self.max_step_error = max(self.max_step_error, err)
            if err > self.delta + STEP_SLACK:
                raise DriftViolation(
                    f"step {self.index + 1} has error {err:.3g} > Delta = {self.delta:.3g}"
                )
        self.current = nxt
        self.index += 1
        return nxt

    def targets(self, count):
        """f_0 .. f_{count-1} from a fresh start."""
        out = [self.initial()]
        for _ in range(count - 1):
            out.append(self.next_target())
        return out


class ConstantSchedule(DriftSchedule):
    pass


class ConjunctionSchedule(DriftSchedule):
    """Single-literal edits of a long conjunction."""

    def __init__(self, f0, delta, policy, n, seed, oracle=None):
        if policy not in ("constant", "long-swap", "long-shrink-grow"):
            raise ConfigurationError(f"unknown conjunction drift policy {policy!r}")
        if policy != "constant" and (delta <= 0 or 2.0 ** -len(f0) > delta):
            raise cj.DriftRefused(
                f"target of length {len(f0)} cannot drift within Delta = {delta:g}; "
                f"use |f| >= {cj.min_drift_length(delta)}"
            )
        if policy != "constant" and len(f0) >= n:
            raise cj.DriftRefused("target uses every variable; nothing to swap in")
        super().__init__(f0, delta, oracle)
        self.policy = policy
        self.n = n
        self.seed = seed
        self._reset()

    def _reset(self):
        self.rng = np.random.default_rng(self.seed)

    def _step(self, f):
        return cj.drift_step_conjunction(f, self.delta, self.policy, self.rng, self.n)


class HyperplaneSchedule(DriftSchedule):
    """Rotations by angle pi*Delta.

    With ``sigma`` set the rotation happens between the sigma-scaled images,
    which is where product-normal error is measured.
    """

    def __init__(self, f0, delta, policy, seed, sigma=None, oracle=None):
        if policy not in ("constant", "steady-rotation", "random-walk"):
            raise ConfigurationError(f"unknown hyperplane drift policy {policy!r}")
        if delta > 1:
            raise ConfigurationError("Delta must be at most 1")
        super().__init__(hp.unit(f0), delta, oracle)
        self.policy = policy
        self.seed = seed
        self.sigma = None if sigma is None else np.asarray(sigma, dtype=np.float64)
        self._reset()

    def _to_image(self, f):
        return f if self.sigma is None else hp.sigma_transform(f, self.sigma)

    def _from_image(self, u):
        return u if self.sigma is None else hp.unit(u / self.sigma)

    def _reset(self):
        self.rng = np.random.default_rng(self.seed)
        self.u0 = self._to_image(self.f0)
        self.u = self.u0
        if self.policy == "steady-rotation":
            self.direction = hp.random_tangent(self.u0, self.rng)

    def _step(self, f):
        if self.policy == "constant" or self.delta == 0:
            return f
        if self.policy == "steady-rotation":
            # closed form keeps the walk on one great circle without
            # accumulating rounding from repeated small rotations
            angle = (self.index + 1) * math.pi * self.delta
            self.u = hp.unit(math.cos(angle) * self.u0 + math.sin(angle) * self.direction)
        else:
            self.u = hp.drift_step_rotation(self.u, self.delta, "random-walk", self.rng)
        return self._from_image(self.u)


class ListSchedule(DriftSchedule):
    """User-supplied targets, checked against Delta on load.  The last
    target is held once the list is exhausted."""

    policy = "list"

    def __init__(self, targets, delta, oracle):
        targets = list(targets)
        if not targets:
            raise ConfigurationError("schedule file holds no targets")
        if len(targets) > 1:
            ok, worst = verify_drift_sequence(targets, oracle, delta)
            if not ok:
                raise DriftViolation(
                    f"schedule has a step of error {worst:.3g} > Delta = {delta:.3g}"
                )
        super().__init__(targets[0], delta, oracle)
        self.sequence = targets

    def _step(self, f):
        return self.sequence[min(self.index + 1, len(self.sequence) - 1)]


def load_schedule(path, decode, oracle, delta):
    """One concept encoding per line.  Blank lines and ``#`` comments are
    skipped, so the empty conjunction is written as a lone ``-``."""
    targets = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line.startswith("#") or not line:
                continue
            targets.append(decode("" if line == "-" else line))
    return ListSchedule(targets, delta, oracle)
