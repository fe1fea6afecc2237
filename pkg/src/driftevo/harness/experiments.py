"""Trial orchestration: build a family from a resolved config, run seeded
trials (optionally in worker processes) and write CSV + JSON summaries."""
from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import conjunctions as cj
from .. import csq
from .. import hyperplanes as hp
from ..distributions import DistributionSpec
from ..drift import ConjunctionSchedule, ConstantSchedule, HyperplaneSchedule, load_schedule
from ..engine import ConfigurationError, EngineConfig, analyze_trajectory, run_evolution
from .config import dumps

CSV_COLUMNS = ("trial", "generation", "perf_exact", "selection_class", "target_id", "rep_id")


@dataclass
class Family:
    algorithm: object
    oracle: object
    encode: object
    decode: object
    make_target: object  # rng -> f_0
    make_start: object  # (rng, f_0) -> r_0
    make_schedule: object  # (f_0, seed) -> DriftSchedule
    vector_ids: bool = False


def _conj_family(cfg):
    n, eps = cfg["n"], cfg["epsilon"]
    monotone = cfg["family"] == "monotone-conj"
    algo = cj.MonotoneConjunctions(n, eps) if monotone else cj.GeneralConjunctions(n, eps)
    oracle = cj.ConjunctionOracle(n)

    def make_target(rng):
        if cfg["target"] is not None:
            f = algo.decode(cfg["target"]) if monotone else cj.Conjunction.parse(cfg["target"])
            if f.max_index > n:
                raise ConfigurationError(f"target {cfg['target']!r} uses variables beyond n = {n}")
            return f
        length = cfg["target_length"]
        if length is None:
            length = int(rng.integers(0, n + 1))
        return cj.random_conjunction(n, length, rng, monotone)

    def make_start(rng, f0):
        start = cfg["start"]
        if start in (None, "empty"):
            return cj.Conjunction()
        if start == "random":
            length = int(rng.integers(0, min(algo.q, n) + 1))
            return cj.random_conjunction(n, length, rng, monotone)
        r = algo.decode(start)
        cj._check_rep(r, n, algo.q)
        return r

    def make_schedule(f0, seed):
        policy, delta = cfg["drift_policy"], cfg["delta_resolved"]
        if policy == "constant" or delta == 0:
            return ConstantSchedule(f0, delta, oracle)
        return ConjunctionSchedule(f0, delta, policy, n, seed, oracle)

    return Family(algo, oracle, algo.encode, algo.decode, make_target, make_start, make_schedule)


def _hyperplane_family(cfg):
    n, eps = cfg["n"], cfg["epsilon"]
    if cfg["family"] == "hyperplane-rotation":
        algo = hp.RotationHyperplanes(n, eps)
        dist = DistributionSpec("unit-sphere", n)
        sigma = None
    else:
        algo = hp.ComponentwiseHyperplanes(n, eps, cfg["k"])
        dist = DistributionSpec("product-normal", n, tuple(cfg["sigma"]), cfg["k"])
        sigma = dist.sigma_array
    oracle = hp.HyperplaneOracle(dist)

    def make_target(rng):
        if cfg["target"] is not None:
            return hp.parse_vector(cfg["target"], n)
        return hp.random_unit(n, rng)

    def make_start(rng, f0):
        start = cfg["start"]
        if start in (None, "random"):
            return hp.random_unit(n, rng)
        if start == "antipodal":
            return -f0
        return hp.parse_vector(start, n)

    def make_schedule(f0, seed):
        policy, delta = cfg["drift_policy"], cfg["delta_resolved"]
        if policy == "constant" or delta == 0:
            return ConstantSchedule(f0, delta, oracle)
        return HyperplaneSchedule(f0, delta, policy, seed, sigma, oracle)

    return Family(algo, oracle, algo.encode, algo.decode, make_target, make_start,
                  make_schedule, vector_ids=True)


def _csq_family(cfg):
    learner = csq.ToyConjunctionLearner(cfg["n"], cfg["kmax"])
    red = csq.Reduction(learner, cfg["epsilon"], cfg["quasi_monotonic"])
    oracle = csq.ReductionOracle(red)

    def decode(text):
        f = cj.Conjunction.parse(text)
        if not f.is_monotone() or not 1 <= len(f) <= learner.kmax or f.max_index > learner.n:
            raise ConfigurationError(
                f"target {text!r} must be a monotone conjunction of 1..{learner.kmax} "
                f"variables out of {learner.n}"
            )
        return f

    def make_target(rng):
        if cfg["target"] is not None:
            return decode(cfg["target"])
        return learner.random_target(rng)

    def make_start(rng, f0):
        start = cfg["start"]
        if start in (None, "zero"):
            return red.start()
        if start != "random":
            raise ConfigurationError("csq-reduction start must be 'zero' or 'random'")
        h = learner.random_hypothesis(rng)
        z = "".join("1" if b else "0" for b in rng.random(red.q) < 0.5)
        if rng.random() < 0.5:
            return red.start(h, z[: int(rng.integers(0, red.q))])
        return csq.Backslide(h, z, int(rng.integers(0, red.K + 1)))

    def make_schedule(f0, seed):
        return ConstantSchedule(f0, cfg["delta_resolved"], None)

    return Family(red, oracle, red.encode, decode, make_target, make_start, make_schedule)


def build_family(cfg):
    fam = cfg["family"]
    if fam.endswith("conj"):
        return _conj_family(cfg)
    if fam.startswith("hyperplane"):
        return _hyperplane_family(cfg)
    return _csq_family(cfg)


# --------------------------------------------------------------------------
# trials
# --------------------------------------------------------------------------

@dataclass
class TrialResult:
    trial: int
    perf: np.ndarray
    kinds: list
    target_ids: list
    rep_ids: list
    summary: dict = field(default_factory=dict)


def trial_seeds(seed, trial):
    """Independent (engine, schedule, setup) streams for one trial."""
    return np.random.SeedSequence([int(seed), int(trial)]).spawn(3)


def _digest(v):
    return hashlib.blake2b(np.ascontiguousarray(v, dtype=np.float64).tobytes(),
                           digest_size=6).hexdigest()


def _id_function(cfg, family):
    style = cfg["id_style"]
    if style == "digest" or (style == "auto" and family.vector_ids):
        return _digest
    return family.encode


def trial_summary(cfg, trial, perf, max_step_error):
    eps = cfg["epsilon"]
    g = cfg["g"]
    horizon = len(perf) - 1
    analysis = analyze_trajectory(perf, eps, g=min(g, horizon))
    final_ok = bool(perf[-1] >= 1 - eps)
    if horizon >= g:
        at_g = float(perf[g])
        success = bool(at_g >= 1 - eps and analysis.perpetual_accuracy >= 1 - eps)
    else:
        at_g = None
        success = final_ok
    return {
        "trial": trial,
        "final_perf": float(perf[-1]),
        "perf_at_g": at_g,
        "min_perf_after_g": float(np.min(perf[min(g, horizon):])),
        "perpetual_accuracy": analysis.perpetual_accuracy,
        "monotone": analysis.monotone,
        "quasi_monotone": analysis.quasi_monotone,
        "success": success,
        "final_success": final_ok,
        "max_step_error": float(max_step_error),
    }


def run_trial(cfg, trial):
    family = build_family(cfg)
    engine_ss, sched_ss, setup_ss = trial_seeds(cfg["seed"], trial)
    setup = np.random.default_rng(setup_ss)
    if cfg["schedule_file"]:
        schedule = load_schedule(cfg["schedule_file"], family.decode, family.oracle,
                                 cfg["delta_resolved"])
        f0 = schedule.f0
    else:
        f0 = family.make_target(setup)
        schedule = family.make_schedule(f0, sched_ss)
    r0 = family.make_start(setup, f0)
    econf = EngineConfig(
        horizon=cfg["horizon_resolved"],
        epsilon=cfg["epsilon"],
        mode=cfg["mode"],
        rng_seed=cfg["seed"],
        noise=cfg["noise"],
        sample_size=cfg["sample_size"],
        suppress_rare=bool(cfg["suppress_rare"]),
        keep_estimates=False,
    )
    traj = run_evolution(family.algorithm, schedule, family.oracle, econf, r0,
                         rng=np.random.default_rng(engine_ss))
    ident = _id_function(cfg, family)
    cache = {}

    def cached(obj):
        key = obj if not isinstance(obj, np.ndarray) else None
        if key is None:
            return ident(obj)
        hit = cache.get(key)
        if hit is None:
            hit = cache[key] = ident(obj)
        return hit

    return TrialResult(
        trial=trial,
        perf=traj.perf,
        kinds=["initial"] + traj.kinds,
        target_ids=[cached(t) for t in traj.targets],
        rep_ids=[cached(r) for r in traj.reps],
        summary=trial_summary(cfg, trial, traj.perf, schedule.max_step_error),
    )


def _run_one(args):
    cfg, trial = args
    return run_trial(cfg, trial)


def run_trials(cfg, threads=None):
    """All trials, in trial order, serial or across worker processes."""
    threads = threads or cfg.get("threads", 1)
    jobs = [(cfg, t) for t in range(cfg["trials"])]
    if threads <= 1 or len(jobs) == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_one, jobs))


def aggregate(cfg, results):
    trials = [r.summary for r in results]
    count = len(trials)
    return {
        "config": cfg,
        "trials": count,
        "success_rate": sum(t["success"] for t in trials) / count,
        "final_success_rate": sum(t["final_success"] for t in trials) / count,
        "mean_final_perf": float(np.mean([t["final_perf"] for t in trials])),
        "min_final_perf": float(np.min([t["final_perf"] for t in trials])),
        "per_trial": trials,
    }


def write_csv(path, cfg, results):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config={dumps(cfg)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for res in results:
            for i, p in enumerate(res.perf):
                w.writerow((res.trial, i, repr(float(p)), res.kinds[i],
                            res.target_ids[i], res.rep_ids[i]))


def write_json(path, record):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, sort_keys=True, indent=2)
        fh.write("\n")
