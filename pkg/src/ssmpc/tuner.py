"""Weight tuning: seeded random search with successive halving.

Trials are screened on cheap short batches; the top quartile is re-scored
on full batches and the incumbent maximizer wins. Deliberately simple --
three to five parameters do not need a model-based optimizer.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

from ssmpc.types import Rng


@dataclass(frozen=True)
class ParamRange:
    lo: float
    hi: float
    log: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("empty parameter range")
        if self.log and self.lo <= 0:
            raise ValueError("log-scale range needs lo > 0")

    def sample(self, rng: Rng) -> float:
        if self.log:
            return math.exp(rng.uniform(math.log(self.lo), math.log(self.hi)))
        return rng.uniform(self.lo, self.hi)


@dataclass(frozen=True)
class SearchSpace:
    params: dict[str, ParamRange]
    budget: int = 40
    seed: int = 0
    screen_runs: int = 20
    full_runs: int = 100

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not self.params:
            raise ValueError("empty search space")


@dataclass
class Trial:
    index: int
    params: dict[str, float]
    screen_score: float
    full_score: float | None = None
    incumbent: float = -math.inf


def tune(space: SearchSpace,
         eval_fn: Callable[[dict, int], float],
         budget: int | None = None,
         seed: int | None = None) -> tuple[dict, float, list[Trial]]:
    """Maximize eval_fn(params, n_runs) over the space.

    eval_fn must be deterministic for a given (params, n_runs). Failed
    evaluations score -inf and the search continues.
    """
    budget = budget if budget is not None else space.budget
    seed = seed if seed is not None else space.seed
    rng = Rng(seed)

    trials: list[Trial] = []
    for i in range(budget):
        params = {k: r.sample(rng) for k, r in space.params.items()}
        try:
            s = eval_fn(params, space.screen_runs)
        except Exception:
            s = -math.inf
        trials.append(Trial(index=i, params=params, screen_score=s))

    # successive halving: full evaluation for the top quartile (>= 1 trial)
    n_finalists = max(1, budget // 4)
    finalists = sorted(trials, key=lambda t: t.screen_score, reverse=True)[:n_finalists]
    for t in finalists:
        try:
            t.full_score = eval_fn(t.params, space.full_runs)
        except Exception:
            t.full_score = -math.inf

    incumbent = -math.inf
    best_params = trials[0].params
    for t in trials:
        candidate = t.full_score if t.full_score is not None else -math.inf
        if candidate > incumbent:
            incumbent = candidate
            best_params = t.params
        t.incumbent = incumbent
    return best_params, incumbent, trials


def write_trial_log(trials: list[Trial], path) -> None:
    if not trials:
        return
    names = sorted(trials[0].params)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["trial", *names, "screen_score", "full_score", "incumbent"])
        for t in trials:
            w.writerow([t.index,
                        *[repr(t.params[k]) for k in names],
                        repr(t.screen_score),
                        "" if t.full_score is None else repr(t.full_score),
                        repr(t.incumbent)])
