"""Compare the numba kernels with the numpy fallback.

    python3 benchmarks/bench_backends.py --repeat 200

Each kernel is called once per backend before timing so numba compile time
is excluded.  The last rows time whole evolution runs, which is where the
per-call overhead of small arrays shows up.
"""
import argparse
import time

import numpy as np

from driftevo import kernels
from driftevo import hyperplanes as hp
from driftevo.conjunctions import MonotoneConjunctions, ConjunctionOracle, random_conjunction
from driftevo.distributions import DistributionSpec
from driftevo.drift import ConstantSchedule, HyperplaneSchedule
from driftevo.engine import EngineConfig, run_evolution


def _cases(rng):
    n = 10
    r = hp.random_unit(n, rng)
    gauss = rng.standard_normal((n - 1, n))
    R = np.stack([hp.random_unit(n, rng) for _ in range(2000)])
    X = DistributionSpec("unit-sphere", n).sample(5000, rng)
    pos = rng.integers(0, 1 << 20, size=20000)
    neg = rng.integers(0, 1 << 20, size=20000) & ~pos
    xbits = rng.integers(0, 1 << 20, size=5000)
    return {
        "conj_perf_batch (20k)": lambda: kernels.conj_perf_batch(0b1011, 0b100, pos, neg),
        "conj_agreement (200 x 5k)": lambda: kernels.conj_agreement(
            0b1011, 0b100, pos[:200], neg[:200], xbits),
        "general_neighbors (n=16)": lambda: kernels.general_neighbors(0b10110, 0b1000000, 16, 5),
        "rotation_neighbors (n=10)": lambda: kernels.rotation_neighbors(r, gauss, 0.01),
        "componentwise_neighbors (n=4,k=1)": lambda: kernels.componentwise_neighbors(
            r[:4] / np.linalg.norm(r[:4]), 1e-3, 16),
        "spherical_perf_batch (2k)": lambda: kernels.spherical_perf_batch(r, R),
        "halfspace_agreement (50 x 5k)": lambda: kernels.halfspace_agreement(r, R[:50], X),
    }


def _evolution(kind, horizon):
    rng = np.random.default_rng(7)
    cfg = EngineConfig(horizon=horizon, epsilon=0.2, keep_estimates=False)
    if kind == "rotation":
        algo = hp.RotationHyperplanes(5, 0.2)
        oracle = hp.HyperplaneOracle(DistributionSpec("unit-sphere", 5))
        f = hp.random_unit(5, rng)
        sched = HyperplaneSchedule(f, 1.6e-4, "steady-rotation", 3, oracle=oracle)
        r0 = hp.random_unit(5, rng)
    else:
        algo = MonotoneConjunctions(10, 0.2)
        oracle = ConjunctionOracle(10)
        sched = ConstantSchedule(random_conjunction(10, 3, rng))
        r0 = random_conjunction(10, 0, rng)
    return lambda: run_evolution(algo, sched, oracle, cfg, r0, rng=np.random.default_rng(1))


def _time(fn, repeat):
    fn()
    start = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - start) / repeat


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=100)
    ap.add_argument("--horizon", type=int, default=2000)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    cases = _cases(rng)
    cases[f"evolution rotation n=5 ({args.horizon} gens)"] = _evolution("rotation", args.horizon)
    cases[f"evolution monotone conj n=10 ({args.horizon} gens)"] = _evolution("conj", args.horizon)

    rows = []
    for name, fn in cases.items():
        timings = {}
        for backend in ("numpy", "numba"):
            kernels.use_backend(backend)
            reps = args.repeat if not name.startswith("evolution") else max(1, args.repeat // 50)
            timings[backend] = _time(fn, reps)
        rows.append((name, timings["numpy"], timings["numba"]))
    kernels.reload_backend()

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':{width}s}  {'numpy':>12s}  {'numba':>12s}  {'speedup':>8s}")
    for name, a, b in rows:
        print(f"{name:{width}s}  {a * 1e6:10.1f}us  {b * 1e6:10.1f}us  {a / b:7.1f}x")


if __name__ == "__main__":
    main()
