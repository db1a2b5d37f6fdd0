"""Composition strategies over filtered partial-service candidates.

Six composers share one output contract (CompositionPlan): a greedy
whole-service selector, an exact per-chunk 0/1 knapsack, a chunk-merging
heuristic, two baselines (priority scheduling and a genetic search), and a
brute-force oracle for verification. All are pure given their inputs; only
the genetic baseline consumes a seed.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass

import numpy as np

from .chunking import Chunk, chunk_query, default_min_chunk_seconds, smooth_thin_chunks
from .composability import DEFAULT_ELIGIBILITY_MARGIN, intensity_compatible
from .model import (
    REL_EPS,
    CompositionPlan,
    EnergyQuery,
    PartialService,
    TimeInterval,
    plan_total,
)

PlanChunks = list[tuple[TimeInterval, tuple[PartialService, ...]]]


@dataclass(frozen=True, slots=True)
class KnapsackItem:
    """One partial service as a knapsack item: current draw is the weight,
    deliverable energy over the chunk is the value."""

    service_ref: str
    weight: int    # intensity, integer mA
    value: float   # dec over the chunk, mAh

    def __post_init__(self) -> None:
        if self.weight <= 0:
            raise ValueError("weight must be positive")
        if self.value < 0:
            raise ValueError("value must be >= 0")


VALID_OBJECTIVES = ("max_energy", "earliest_time", "shortest_time")


@dataclass(frozen=True, slots=True)
class Preference:
    objective: str = "max_energy"

    def __post_init__(self) -> None:
        if self.objective not in VALID_OBJECTIVES:
            raise ValueError(
                f"objective must be one of {VALID_OBJECTIVES}, got {self.objective!r}")


@dataclass(frozen=True, slots=True)
class GAConfig:
    population: int = 50
    generations: int = 100
    tournament_k: int = 3
    mutation_rate: float = 0.1
    seed: int = 0

    @classmethod
    def from_dict(cls, record: dict) -> "GAConfig":
        kwargs = {}
        for key, value in record.items():
            if key not in cls.__dataclass_fields__:
                raise ValueError(f"ga config: unknown field '{key}'")
            kwargs[key] = value
        return cls(**kwargs)


class OracleSizeError(ValueError):
    """Instance too large for exhaustive enumeration."""


def _now_us() -> int:
    return time.perf_counter_ns() // 1000


def _finish(chunks: PlanChunks, tag: str, t0_us: int) -> CompositionPlan:
    return CompositionPlan(
        chunks=tuple(chunks),
        total_energy=plan_total(chunks),
        algorithm_tag=tag,
        wall_time_us=_now_us() - t0_us,
    )


def _prepare_chunks(
    q: EnergyQuery,
    candidates: list[PartialService],
    min_chunk_seconds: float | None,
    margin_factor: float,
) -> list[Chunk]:
    if min_chunk_seconds is None:
        min_chunk_seconds = default_min_chunk_seconds(q, candidates, margin_factor)
    return smooth_thin_chunks(chunk_query(q, candidates), min_chunk_seconds)


def _whole_service_plan_chunks(
    window: TimeInterval, selected: list[PartialService]
) -> PlanChunks:
    """Express a whole-service selection as a chunk partition of the window."""
    bounds = {window.st, window.et}
    for p in selected:
        bounds.add(p.interval.st)
        bounds.add(p.interval.et)
    cuts = sorted(bounds)
    ordered = sorted(selected, key=lambda p: p.parent_eid)
    chunks: PlanChunks = []
    for lo, hi in zip(cuts, cuts[1:]):
        iv = TimeInterval(lo, hi)
        sel = tuple(p.clip(iv) for p in ordered
                    if p.interval.st <= lo and hi <= p.interval.et)
        chunks.append((iv, sel))
    return chunks


# ---------------------------------------------------------------------------
# Greedy and priority baselines (whole services, no chunk switching)
# ---------------------------------------------------------------------------

def _greedy_key(pref: Preference):
    if pref.objective == "max_energy":
        return lambda p: (-p.dec, p.parent_eid)
    if pref.objective == "earliest_time":
        return lambda p: (p.interval.st, -p.dec, p.parent_eid)
    return lambda p: (p.interval.duration_seconds, -p.dec, p.parent_eid)


def compose_greedy(
    q: EnergyQuery,
    candidates: list[PartialService],
    pref: Preference = Preference(),
) -> CompositionPlan:
    """Repeatedly admit the best remaining whole service under the preference,
    skipping services that would break the receive-current cap, until the
    required energy is met or the candidates run out."""
    t0 = _now_us()
    window = q.window
    selected: list[PartialService] = []
    total = 0.0
    for p in sorted(candidates, key=_greedy_key(pref)):
        if intensity_compatible(selected, p, q, window):
            selected.append(p)
            total += p.dec
            if total >= q.re:
                break
    return _finish(_whole_service_plan_chunks(window, selected), "greedy", t0)


def compose_priority_baseline(
    q: EnergyQuery, candidates: list[PartialService]
) -> CompositionPlan:
    """Priority scheduling: walk services by deliverable energy (descending)
    and admit every one that stays current-compatible. No chunking, no
    partial invocation, no switching away from an admitted service."""
    t0 = _now_us()
    window = q.window
    selected: list[PartialService] = []
    for p in sorted(candidates, key=lambda p: (-p.dec, p.parent_eid)):
        if intensity_compatible(selected, p, q, window):
            selected.append(p)
    return _finish(_whole_service_plan_chunks(window, selected), "priority", t0)


# ---------------------------------------------------------------------------
# Exact per-chunk knapsack
# ---------------------------------------------------------------------------

def chunk_items(chunk: Chunk, capacity: int) -> list[tuple[KnapsackItem, PartialService]]:
    """Roster entries as knapsack items, dropping services that alone exceed
    the capacity. Roster order (ascending id) is preserved; it fixes the
    float summation order shared with the oracle."""
    items = []
    for p in chunk.roster:
        weight = int(round(p.intensity))
        if 0 < weight <= capacity:
            items.append((KnapsackItem(p.parent_eid, weight, p.dec), p))
    return items


def _solve_chunk_dp(items: list[tuple[KnapsackItem, PartialService]], capacity: int):
    """Exact 0/1 knapsack by dynamic programming over integer-mA capacity.

    Ties resolve toward not taking later items (fewer services, lower ids
    first), matching the oracle's enumeration order.
    """
    rows = [np.zeros(capacity + 1)]
    for item, _ in items:
        prev = rows[-1]
        cur = prev.copy()
        shifted = prev[: capacity + 1 - item.weight] + item.value
        np.maximum(cur[item.weight:], shifted, out=cur[item.weight:])
        rows.append(cur)
    selected = []
    w = capacity
    for i in range(len(items) - 1, -1, -1):
        item, partial = items[i]
        if rows[i + 1][w] != rows[i][w]:
            selected.append(partial)
            w -= item.weight
    selected.reverse()
    return selected


def compose_knapsack(
    q: EnergyQuery,
    candidates: list[PartialService],
    *,
    min_chunk_seconds: float | None = None,
    margin_factor: float = DEFAULT_ELIGIBILITY_MARGIN,
    per_chunk: str = "dp",
) -> CompositionPlan:
    """Chunk the window, solve a 0/1 knapsack per chunk (receive-current cap
    as the knapsack capacity), and union the per-chunk optima.

    `per_chunk="greedy"` swaps the exact solver for take-best-while-it-fits
    within each chunk, kept for comparison.
    """
    if per_chunk not in ("dp", "greedy"):
        raise ValueError(f"per_chunk must be 'dp' or 'greedy', got {per_chunk!r}")
    t0 = _now_us()
    capacity = int(math.floor(q.i_max + 1e-9))
    chunks = _prepare_chunks(q, candidates, min_chunk_seconds, margin_factor)
    plan_chunks: PlanChunks = []
    for chunk in chunks:
        items = chunk_items(chunk, capacity)
        if not items:
            plan_chunks.append((chunk.interval, ()))
            continue
        if per_chunk == "dp":
            selected = _solve_chunk_dp(items, capacity)
        else:
            selected = _solve_chunk_greedy(items, capacity)
        plan_chunks.append((chunk.interval, tuple(selected)))
    tag = "knapsack" if per_chunk == "dp" else "knapsack-greedy"
    return _finish(plan_chunks, tag, t0)


def _solve_chunk_greedy(items, capacity: int):
    """Per-chunk greedy: take services by value while the summed draw fits."""
    order = sorted(items, key=lambda pair: (-pair[0].value, pair[0].service_ref))
    load = 0
    selected = []
    for item, partial in order:
        if load + item.weight <= capacity:
            selected.append(partial)
            load += item.weight
    selected.sort(key=lambda p: p.parent_eid)
    return selected


# ---------------------------------------------------------------------------
# Chunk-merging heuristic
# ---------------------------------------------------------------------------

def _chunk_argmax(chunk: Chunk, capacity: int) -> PartialService | None:
    best = None
    for p in chunk.roster:
        if int(round(p.intensity)) > capacity:
            continue
        if best is None or p.dec > best.dec or (p.dec == best.dec and p.parent_eid < best.parent_eid):
            best = p
    return best


def merge_equal_argmax(chunks: list[Chunk], capacity: int) -> list[Chunk]:
    """Fuse consecutive chunks whose highest-energy selectable service is the
    same provider; the per-chunk optimum is then most likely unchanged."""
    merged: list[Chunk] = []
    merged_max: list[str | None] = []
    for chunk in chunks:
        best = _chunk_argmax(chunk, capacity)
        eid = best.parent_eid if best is not None else None
        if merged and merged_max[-1] == eid:
            merged[-1] = _fuse(merged[-1], chunk)
        else:
            merged.append(chunk)
            merged_max.append(eid)
    return merged


def _fuse(a: Chunk, b: Chunk) -> Chunk:
    interval = TimeInterval(a.interval.st, b.interval.et)
    surviving = {p.parent_eid for p in a.roster} & {p.parent_eid for p in b.roster}
    by_eid = {p.parent_eid: p for p in a.roster}
    roster = tuple(
        PartialService(eid, interval, by_eid[eid].intensity,
                       by_eid[eid].energy_rate * interval.duration_hours())
        for eid in sorted(surviving)
    )
    return Chunk(interval, roster)


def compose_heuristic(
    q: EnergyQuery,
    candidates: list[PartialService],
    *,
    min_chunk_seconds: float | None = None,
    margin_factor: float = DEFAULT_ELIGIBILITY_MARGIN,
) -> CompositionPlan:
    """Search-space-reduced composition: merge equal-argmax chunks, then per
    merged chunk take the top service plus at most one current-compatible
    runner-up instead of a full knapsack."""
    t0 = _now_us()
    capacity = int(math.floor(q.i_max + 1e-9))
    chunks = merge_equal_argmax(
        _prepare_chunks(q, candidates, min_chunk_seconds, margin_factor), capacity)
    plan_chunks: PlanChunks = []
    for chunk in chunks:
        first = _chunk_argmax(chunk, capacity)
        if first is None:
            plan_chunks.append((chunk.interval, ()))
            continue
        second = None
        for p in chunk.roster:
            if p.parent_eid == first.parent_eid:
                continue
            if int(round(p.intensity)) + int(round(first.intensity)) > capacity:
                continue
            if second is None or p.dec > second.dec or (
                    p.dec == second.dec and p.parent_eid < second.parent_eid):
                second = p
        pair = [first] if second is None else sorted(
            [first, second], key=lambda p: p.parent_eid)
        plan_chunks.append((chunk.interval, tuple(pair)))
    return _finish(plan_chunks, "heuristic", t0)


# ---------------------------------------------------------------------------
# Genetic-search baseline
# ---------------------------------------------------------------------------

def compose_ga_baseline(
    q: EnergyQuery,
    candidates: list[PartialService],
    ga: GAConfig = GAConfig(),
    *,
    min_chunk_seconds: float | None = None,
    margin_factor: float = DEFAULT_ELIGIBILITY_MARGIN,
) -> CompositionPlan:
    """Generational GA over one-service-per-chunk chromosomes.

    Fitness is total delivered energy; the receive-current cap is deliberately
    not checked during the search. An infeasible final chromosome is repaired
    by dropping its lowest-value genes until every chunk fits the cap.
    """
    t0 = _now_us()
    chunks = _prepare_chunks(q, candidates, min_chunk_seconds, margin_factor)
    rng = random.Random(ga.seed)
    rosters = [c.roster for c in chunks]
    n_genes = len(rosters)

    def random_gene(c: int) -> int:
        return rng.randint(-1, len(rosters[c]) - 1)

    def fitness(chrom: list[int]) -> float:
        return sum(rosters[c][g].dec for c, g in enumerate(chrom) if g >= 0)

    population = [[random_gene(c) for c in range(n_genes)]
                  for _ in range(ga.population)]
    scores = [fitness(ch) for ch in population]
    best_chrom = list(population[int(np.argmax(scores))])
    best_score = max(scores)

    for _ in range(ga.generations):
        def tournament() -> list[int]:
            winner = None
            winner_score = -1.0
            for _ in range(ga.tournament_k):
                i = rng.randrange(ga.population)
                if scores[i] > winner_score:
                    winner, winner_score = population[i], scores[i]
            return winner

        next_pop = [list(best_chrom)]  # elitism keeps the search monotone
        while len(next_pop) < ga.population:
            a, b = tournament(), tournament()
            if n_genes > 1:
                cut = rng.randint(1, n_genes - 1)
                child = a[:cut] + b[cut:]
            else:
                child = list(a)
            for c in range(n_genes):
                if rng.random() < ga.mutation_rate:
                    child[c] = random_gene(c)
            next_pop.append(child)
        population = next_pop
        scores = [fitness(ch) for ch in population]
        gen_best = int(np.argmax(scores))
        if scores[gen_best] > best_score:
            best_score = scores[gen_best]
            best_chrom = list(population[gen_best])

    capacity = q.i_max
    chosen: list[tuple[int, PartialService]] = [
        (c, rosters[c][g]) for c, g in enumerate(best_chrom) if g >= 0]
    # Repair: drop lowest-value genes until every chunk respects the cap.
    while any(p.intensity > capacity for _, p in chosen):
        drop = min((pair for pair in chosen if pair[1].intensity > capacity),
                   key=lambda pair: (pair[1].dec, pair[0]))
        chosen.remove(drop)
    by_chunk = dict(chosen)
    plan_chunks: PlanChunks = [
        (chunk.interval, (by_chunk[c],) if c in by_chunk else ())
        for c, chunk in enumerate(chunks)
    ]
    return _finish(plan_chunks, "ga", t0)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def compose_oracle(
    q: EnergyQuery,
    candidates: list[PartialService],
    *,
    min_chunk_seconds: float | None = None,
    margin_factor: float = DEFAULT_ELIGIBILITY_MARGIN,
    max_candidates: int = 12,
    max_chunks: int = 10,
) -> CompositionPlan:
    """Exhaustive per-chunk subset enumeration; the global maximum-energy plan.

    Guarded against blow-up; raises OracleSizeError above the limits.
    """
    t0 = _now_us()
    if len(candidates) > max_candidates:
        raise OracleSizeError(
            f"{len(candidates)} candidates exceed the oracle limit {max_candidates}")
    capacity = int(math.floor(q.i_max + 1e-9))
    chunks = _prepare_chunks(q, candidates, min_chunk_seconds, margin_factor)
    if len(chunks) > max_chunks:
        raise OracleSizeError(
            f"{len(chunks)} chunks exceed the oracle limit {max_chunks}")
    plan_chunks: PlanChunks = []
    for chunk in chunks:
        items = chunk_items(chunk, capacity)
        best_value = 0.0
        best_sel: tuple[PartialService, ...] = ()
        for size in range(1, len(items) + 1):
            for combo in itertools.combinations(items, size):
                if sum(item.weight for item, _ in combo) > capacity:
                    continue
                value = 0.0
                for item, _ in combo:
                    value += item.value
                if value > best_value:
                    best_value = value
                    best_sel = tuple(p for _, p in combo)
        plan_chunks.append((chunk.interval, best_sel))
    return _finish(plan_chunks, "oracle", t0)


# ---------------------------------------------------------------------------
# Post-hoc plan validation
# ---------------------------------------------------------------------------

def validate_plan(
    plan: CompositionPlan,
    q: EnergyQuery,
    candidates: list[PartialService],
    rel_eps: float = REL_EPS,
) -> list[str]:
    """Check a plan against the composition contract; returns violations.

    Verifies the chunk partition of the window, the per-chunk current cap,
    that every selection slices a known candidate, and the energy total.
    """
    errs: list[str] = []
    window = q.window
    by_eid = {p.parent_eid: p for p in candidates}
    cursor = window.st
    for iv, selected in plan.chunks:
        if not math.isclose(iv.st, cursor, rel_tol=0, abs_tol=1e-9):
            errs.append(f"chunk at {iv.st} leaves a gap or overlap from {cursor}")
        cursor = iv.et
        if not window.contains(iv):
            errs.append(f"chunk [{iv.st}, {iv.et}] exceeds the query window")
        load = sum(p.intensity for p in selected)
        if load > q.i_max * (1 + rel_eps):
            errs.append(f"chunk [{iv.st}, {iv.et}] draws {load} mA over cap {q.i_max}")
        for p in selected:
            source = by_eid.get(p.parent_eid)
            if source is None:
                errs.append(f"unknown candidate {p.parent_eid} in plan")
                continue
            if p.interval != iv:
                errs.append(f"slice of {p.parent_eid} does not span its chunk")
            if not source.interval.contains(p.interval):
                errs.append(f"slice of {p.parent_eid} exceeds the candidate interval")
            expect = source.energy_rate * p.interval.duration_hours()
            if not math.isclose(p.dec, expect, rel_tol=rel_eps, abs_tol=rel_eps):
                errs.append(f"slice energy of {p.parent_eid} inconsistent with its rate")
    if not math.isclose(cursor, window.et, rel_tol=0, abs_tol=1e-9):
        errs.append(f"chunks end at {cursor}, window ends at {window.et}")
    if not math.isclose(plan.total_energy, plan_total(plan.chunks),
                        rel_tol=rel_eps, abs_tol=rel_eps):
        errs.append("total_energy inconsistent with chunk contents")
    return errs


COMPOSERS = {
    "greedy": compose_greedy,
    "knapsack": compose_knapsack,
    "heuristic": compose_heuristic,
    "priority": compose_priority_baseline,
    "ga": compose_ga_baseline,
    "oracle": compose_oracle,
}
