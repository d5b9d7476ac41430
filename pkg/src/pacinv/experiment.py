"""Monte-Carlo estimation of learner error on the constructions."""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .constructions import Construction, generate
from .core import err, sample
from .exceptions import PacInvError
from .learners.spec import LearnerSpec

logger = logging.getLogger(__name__)

CSV_HEADER = ["construction", "learner", "m", "trials", "mean_err", "se", "pr_exceed_eps", "seed"]


@dataclass
class ResultRow:
    construction: str
    learner: str
    m: int
    trials: int
    mean_err: float
    se: float
    pr_exceed_eps: float
    seed: int
    failures: int = 0
    wall_time: float = 0.0
    errors: list = field(default_factory=list, repr=False)

    def csv_values(self) -> list:
        return [self.construction, self.learner, self.m, self.trials, repr(self.mean_err),
                repr(self.se), repr(self.pr_exceed_eps), self.seed]


@dataclass
class ExperimentResult:
    rows: list
    meta: dict

    def row(self, learner: str, m: int) -> ResultRow:
        for r in self.rows:
            if r.learner == learner and r.m == m:
                return r
        raise KeyError((learner, m))


def trial_streams(seed: int, trial: int):
    """Independent generators for target, sample and learner of one trial."""
    ss = np.random.SeedSequence([int(seed), int(trial)])
    return [np.random.default_rng(s) for s in ss.spawn(3)]


def run_trial(construction: Construction, spec: LearnerSpec, m: int, seed: int, trial: int) -> float:
    r_target, r_sample, r_learner = trial_streams(seed, trial)
    target = construction.sample_target(r_target)
    S = sample(target.D, m, r_sample)
    est = spec.build(target.problem, r_learner)
    est.fit(S.xs, S.ys)
    return err(est.model_, target.D)


def monte_carlo(construction: Construction, spec: LearnerSpec, m: int, trials: int, seed: int = 0,
                eps: float | None = None, threads: int = 1) -> ResultRow:
    """Exact error against D averaged over independent trials.

    Trials whose learner raises a package error are counted in ``failures``
    and left out of the statistics.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    eps = construction.params.get("eps", 0.0) if eps is None else eps
    start = time.perf_counter()

    def one(trial):
        try:
            return run_trial(construction, spec, m, seed, trial)
        except PacInvError as exc:
            logger.warning("trial %d of %s failed: %s", trial, spec.name, exc)
            return math.nan

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            errors = list(pool.map(one, range(trials)))
    else:
        errors = [one(t) for t in range(trials)]
    ok = [e for e in errors if not math.isnan(e)]
    n = len(ok)
    mean = math.fsum(ok) / n if n else math.nan
    if n > 1:
        var = math.fsum((e - mean) ** 2 for e in ok) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    exceed = sum(e > eps + 1e-9 for e in ok) / n if n else math.nan
    return ResultRow(construction.name, spec.name, m, trials, mean, se, exceed, seed,
                     trials - n, time.perf_counter() - start, errors)


def sample_complexity_curve(construction: Construction, specs, eps: float, m_grid, trials: int,
                            seed: int = 0, delta: float | None = None, threads: int = 1) -> ExperimentResult:
    """monte_carlo over a grid of sample sizes for several learners.

    With ``delta`` set, ``meta["smallest_m"]`` maps each learner to the
    first grid size whose empirical Pr(err > eps) is at most delta.
    """
    rows = []
    for spec in specs:
        for m in m_grid:
            rows.append(monte_carlo(construction, spec, int(m), trials, seed, eps, threads))
    meta = {"construction": construction.name, "params": construction.params, "eps": eps,
            "m_grid": [int(m) for m in m_grid], "trials": trials, "seed": seed,
            "learners": [s.to_dict() for s in specs]}
    if delta is not None:
        meta["delta"] = delta
        meta["smallest_m"] = {
            s.name: next((r.m for r in rows if r.learner == s.name and r.pr_exceed_eps <= delta), None)
            for s in specs}
    return ExperimentResult(rows, meta)


def run_config(config: dict, seed: int | None = None, trials: int | None = None,
               threads: int = 1) -> ExperimentResult:
    """Run an experiment described by a config dictionary::

        {"construction": {"name": ..., "params": {...}},
         "learners": [{"kind": "DA", "tie_rule": "uniform_random"}, ...],
         "m_grid": [...], "eps": 0.0156, "trials": 1000, "seed": 0, "delta": 0.1}
    """
    c = generate(config["construction"]["name"], config["construction"].get("params", {}))
    specs = [LearnerSpec.from_dict(d) for d in config["learners"]]
    seed = int(config.get("seed", 0) if seed is None else seed)
    trials = int(config.get("trials", 100) if trials is None else trials)
    eps = config.get("eps", c.params.get("eps", 0.0))
    return sample_complexity_curve(c, specs, eps, config.get("m_grid", [0]), trials, seed,
                                   config.get("delta"), threads)


def write_csv(result: ExperimentResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in result.rows:
            w.writerow(r.csv_values())
    sidecar = {"meta": result.meta,
               "rows": [{k: v for k, v in asdict(r).items() if k not in ("errors", "wall_time")}
                        for r in result.rows]}
    with open(f"{path}.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, default=float)


def plot_data(result: ExperimentResult) -> dict:
    """Per learner, (m, mean_err, 95% half-width) triples."""
    out: dict = {}
    for r in result.rows:
        out.setdefault(r.learner, []).append([r.m, r.mean_err, 1.96 * r.se])
    return out
