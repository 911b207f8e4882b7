"""Monte-Carlo robustness benchmark: perturb the initial motions, then
register with each strategy and score the final objective.

Strategies: "chained" composes consecutive pairwise registrations (so
pairwise errors accumulate along the chain) and "averaged" runs the
full multi-view pipeline with motion averaging.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .averaging import ViewGraph
from .errors import ToolkitError
from .geometry import compose, inverse
from .icp import IcpConfig, icp_adaptive
from .pipeline import PipelineConfig, objective_value, perturb_graph, register_multiview

STRATEGIES = ("chained", "averaged")


@dataclass(frozen=True)
class BenchEntry:
    noise_level: float
    strategy: str
    mean_objective: float
    std_objective: float
    mean_seconds: float
    failures: int


@dataclass
class BenchResult:
    entries: list[BenchEntry]
    # (level, strategy) -> objective per trial, nan where a trial failed
    trials: dict


def chain_register(clouds, init: ViewGraph, icp_cfg: IcpConfig) -> ViewGraph:
    """Greedy chain: register each cloud onto its predecessor and compose."""
    motions = [init.global_motions[0]]
    for k in range(1, len(clouds)):
        warm = compose(inverse(init.global_motions[k - 1]), init.global_motions[k])
        result = icp_adaptive(clouds[k], clouds[k - 1], warm, icp_cfg)
        motions.append(compose(motions[k - 1], result.motion))
    return ViewGraph(tuple(motions), ())


def run_benchmark(clouds, truth: ViewGraph, noise_levels, trials: int,
                  seed: int, cfg: PipelineConfig) -> BenchResult:
    """Seeded perturb/register cycles for every noise level and strategy.

    Failures (toolkit errors raised inside a trial) are recorded per
    trial and excluded from the statistics, never fatal.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    trial_seeds = rng.integers(0, 2**31 - 1, size=(len(noise_levels), trials))
    entries = []
    per_trial: dict = {}
    for li, level in enumerate(noise_levels):
        objectives = {s: np.full(trials, np.nan) for s in STRATEGIES}
        seconds = {s: [] for s in STRATEGIES}
        failures = {s: 0 for s in STRATEGIES}
        for t in range(trials):
            init = perturb_graph(truth, level, int(trial_seeds[li, t]))
            for strategy in STRATEGIES:
                start = time.perf_counter()
                try:
                    if strategy == "chained":
                        graph = chain_register(clouds, init, cfg.icp)
                        obj = objective_value(clouds, graph, cfg)
                    else:
                        obj = register_multiview(clouds, init, cfg).objective
                    objectives[strategy][t] = obj
                except ToolkitError:
                    failures[strategy] += 1
                seconds[strategy].append(time.perf_counter() - start)
        for strategy in STRATEGIES:
            ok = objectives[strategy][np.isfinite(objectives[strategy])]
            std = float(np.std(ok, ddof=1)) if ok.size > 1 else 0.0
            entries.append(BenchEntry(
                noise_level=float(level),
                strategy=strategy,
                mean_objective=float(np.mean(ok)) if ok.size else float("nan"),
                std_objective=std,
                mean_seconds=float(np.mean(seconds[strategy])),
                failures=failures[strategy],
            ))
            per_trial[(float(level), strategy)] = objectives[strategy]
    return BenchResult(entries=entries, trials=per_trial)


def write_bench_table(result: BenchResult, path) -> None:
    """Summary table; the mean_seconds column is wall-clock and varies
    between runs, everything else is deterministic."""
    with open(path, "w", encoding="ascii") as f:
        f.write("noise_level,strategy,mean_obj,std_obj,mean_seconds,failures\n")
        for e in result.entries:
            f.write(
                f"{e.noise_level!r},{e.strategy},{e.mean_objective!r},"
                f"{e.std_objective!r},{e.mean_seconds!r},{e.failures}\n"
            )


def write_bench_objectives(result: BenchResult, path) -> None:
    """Per-trial objective values (fully deterministic)."""
    with open(path, "w", encoding="ascii") as f:
        f.write("noise_level,strategy,trial,objective\n")
        for (level, strategy), values in result.trials.items():
            for t, v in enumerate(values):
                val = repr(float(v)) if np.isfinite(v) else "failed"
                f.write(f"{level!r},{strategy},{t},{val}\n")
