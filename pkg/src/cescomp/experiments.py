"""Completeness and scalability experiment harness.

Each experiment sweeps the service-to-query ratio, runs the full pipeline
(index, candidate selection, eligibility, composition) per query, and emits
flat records ready for CSV. Tasks across (ratio, repeat) are independent and
may run in parallel; results merge in a deterministic order so the worker
count never changes output bytes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .composability import (
    DEFAULT_ELIGIBILITY_MARGIN,
    DEFAULT_ESD_METERS,
    filter_eligible,
)
from .composers import COMPOSERS, GAConfig, Preference
from .model import EnergyQuery, PartialService
from .stindex import build_index, select_candidates
from .workload import ScenarioConfig, generate_scenario

AVERAGED_SQ = -1.0  # sq sentinel for the record averaged over all sq values


@dataclass(frozen=True, slots=True)
class CompletenessRecord:
    ratio: float
    sq: float            # threshold fraction; AVERAGED_SQ marks the average row
    algorithm: str
    completeness: float  # served / total queries
    seed: int


@dataclass(frozen=True, slots=True)
class RuntimeRecord:
    ratio: float
    algorithm: str
    mean_us: float
    p50_us: float
    p95_us: float
    n_queries: int


@dataclass(frozen=True, slots=True)
class PipelineSettings:
    esd: float = DEFAULT_ESD_METERS
    margin_factor: float = DEFAULT_ELIGIBILITY_MARGIN
    min_chunk_seconds: float | None = None
    ga: GAConfig = GAConfig()
    pref: Preference = Preference()


def derive_seed(base: int, *key: int) -> int:
    """Stable 63-bit child seed for a (ratio, repeat, ...) task."""
    ss = np.random.SeedSequence(entropy=base, spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def compose_with(
    algorithm: str,
    q: EnergyQuery,
    candidates: list[PartialService],
    settings: PipelineSettings,
):
    """Dispatch one composition; unknown labels list the valid ones."""
    if algorithm not in COMPOSERS:
        raise ValueError(
            f"unknown algorithm {algorithm!r}; valid: {', '.join(sorted(COMPOSERS))}")
    if algorithm == "greedy":
        return COMPOSERS[algorithm](q, candidates, settings.pref)
    if algorithm == "priority":
        return COMPOSERS[algorithm](q, candidates)
    if algorithm == "ga":
        ga = replace(settings.ga, seed=derive_seed(settings.ga.seed, _stable_id(q.qid)))
        return COMPOSERS[algorithm](
            q, candidates, ga,
            min_chunk_seconds=settings.min_chunk_seconds,
            margin_factor=settings.margin_factor)
    return COMPOSERS[algorithm](
        q, candidates,
        min_chunk_seconds=settings.min_chunk_seconds,
        margin_factor=settings.margin_factor)


def _stable_id(qid: str) -> int:
    """Process-independent integer for a query id (hash() is salted)."""
    return sum((i + 1) * b for i, b in enumerate(qid.encode("utf-8"))) & 0x7FFFFFFF


def run_query_pipeline(
    index,
    q: EnergyQuery,
    algorithms: list[str],
    settings: PipelineSettings,
) -> dict[str, object]:
    """Select, filter, and compose one query under every algorithm."""
    partials = select_candidates(index, q, settings.esd)
    eligible = filter_eligible(partials, index.services, q, settings.margin_factor)
    return {algo: compose_with(algo, q, eligible, settings) for algo in algorithms}


def _scenario_for(cfg: ScenarioConfig, ratio: float, rep: int) -> ScenarioConfig:
    return replace(
        cfg,
        n_services=max(0, round(ratio * cfg.n_queries)),
        seed=derive_seed(cfg.seed, int(round(ratio * 1000)), rep),
    )


def _completeness_task(args) -> tuple[float, int, dict[str, list[tuple[float, float]]]]:
    cfg, ratio, rep, algorithms, settings = args
    scenario_cfg = _scenario_for(cfg, ratio, rep)
    services, queries = generate_scenario(scenario_cfg)
    index = build_index(services)
    outcomes: dict[str, list[tuple[float, float]]] = {a: [] for a in algorithms}
    for q in queries:
        plans = run_query_pipeline(index, q, algorithms, settings)
        for algo, plan in plans.items():
            outcomes[algo].append((plan.total_energy, q.re))
    return ratio, scenario_cfg.seed, outcomes


def served_fraction(outcomes: list[tuple[float, float]], sq: float) -> float:
    """Fraction of queries whose delivered energy reaches sq * required."""
    if not outcomes:
        return 0.0
    served = sum(1 for total, re in outcomes if total + 1e-9 >= sq * re)
    return served / len(outcomes)


def run_completeness(
    cfg: ScenarioConfig,
    ratios: list[float],
    sq_values: list[float],
    algorithms: list[str],
    repeats: int = 1,
    settings: PipelineSettings = PipelineSettings(),
    workers: int = 1,
) -> list[CompletenessRecord]:
    """Sweep service/query ratios and emit one record per (ratio, sq,
    algorithm, repeat) plus a per-(ratio, algorithm) record averaged over sq
    values and repeats (sq column = AVERAGED_SQ)."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    for algo in algorithms:
        if algo not in COMPOSERS:
            raise ValueError(
                f"unknown algorithm {algo!r}; valid: {', '.join(sorted(COMPOSERS))}")
    tasks = [(cfg, ratio, rep, list(algorithms), settings)
             for ratio in ratios for rep in range(repeats)]
    results = _run_tasks(_completeness_task, tasks, workers)
    records: list[CompletenessRecord] = []
    by_ratio: dict[float, list[tuple[int, dict]]] = {}
    for ratio, seed, outcomes in results:
        by_ratio.setdefault(ratio, []).append((seed, outcomes))
    for ratio in ratios:
        runs = by_ratio[ratio]
        for algo in algorithms:
            averaged: list[float] = []
            for seed, outcomes in runs:
                for sq in sq_values:
                    frac = served_fraction(outcomes[algo], sq)
                    records.append(CompletenessRecord(ratio, sq, algo, frac, seed))
                    averaged.append(frac)
            records.append(CompletenessRecord(
                ratio, AVERAGED_SQ, algo, float(np.mean(averaged)), cfg.seed))
    records.sort(key=lambda r: (r.ratio, r.sq, r.algorithm, r.seed))
    return records


def _scalability_task(args) -> tuple[float, dict[str, list[int]]]:
    cfg, ratio, algorithms, settings = args
    scenario_cfg = _scenario_for(cfg, ratio, 0)
    services, queries = generate_scenario(scenario_cfg)
    index = build_index(services)
    times: dict[str, list[int]] = {a: [] for a in algorithms}
    for q in queries:
        partials = select_candidates(index, q, settings.esd)
        eligible = filter_eligible(partials, index.services, q, settings.margin_factor)
        for algo in algorithms:
            plan = compose_with(algo, q, eligible, settings)
            times[algo].append(plan.wall_time_us)
    return ratio, times


def run_scalability(
    cfg: ScenarioConfig,
    ratios: list[float],
    algorithms: list[str],
    settings: PipelineSettings = PipelineSettings(),
    workers: int = 1,
) -> list[RuntimeRecord]:
    """Time the composition call alone (generation, indexing, and candidate
    selection excluded) per algorithm across the ratio sweep."""
    for algo in algorithms:
        if algo not in COMPOSERS:
            raise ValueError(
                f"unknown algorithm {algo!r}; valid: {', '.join(sorted(COMPOSERS))}")
    tasks = [(cfg, ratio, list(algorithms), settings) for ratio in ratios]
    results = dict(_run_tasks(_scalability_task, tasks, workers))
    records: list[RuntimeRecord] = []
    for ratio in ratios:
        times = results[ratio]
        for algo in algorithms:
            us = np.asarray(times[algo], dtype=float)
            records.append(RuntimeRecord(
                ratio=ratio,
                algorithm=algo,
                mean_us=float(us.mean()) if us.size else 0.0,
                p50_us=float(np.percentile(us, 50)) if us.size else 0.0,
                p95_us=float(np.percentile(us, 95)) if us.size else 0.0,
                n_queries=len(times[algo]),
            ))
    records.sort(key=lambda r: (r.ratio, r.algorithm))
    return records


def _run_tasks(fn, tasks, workers: int):
    """Run tasks serially or in a process pool; order follows `tasks`."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def completeness_csv(records: list[CompletenessRecord]) -> str:
    lines = ["ratio,sq,algorithm,completeness,seed"]
    for r in records:
        sq = "avg" if r.sq == AVERAGED_SQ else f"{r.sq:g}"
        lines.append(f"{r.ratio:g},{sq},{r.algorithm},{r.completeness:.6f},{r.seed}")
    return "\n".join(lines) + "\n"


def scalability_csv(records: list[RuntimeRecord]) -> str:
    lines = ["ratio,algorithm,mean_us,p50_us,p95_us,n_queries"]
    for r in records:
        lines.append(f"{r.ratio:g},{r.algorithm},{r.mean_us:.3f},"
                     f"{r.p50_us:.3f},{r.p95_us:.3f},{r.n_queries}")
    return "\n".join(lines) + "\n"
