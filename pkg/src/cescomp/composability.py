"""Composability predicates and waiting-time query splitting.

Four rules gate which services may join a composition: spatial reach,
temporal containment, receive-current compatibility, and eligibility against
coordination losses. All predicates are pure and return a verdict carrying
the violated rule, never an exception.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .model import (
    EnergyQuery,
    EnergyService,
    PartialService,
    SoCSeries,
    TimeInterval,
)

DEFAULT_ESD_METERS = 5.0          # config key "esd_meters"
DEFAULT_ELIGIBILITY_MARGIN = 10.0  # config key "eligibility_margin"

RULE_SPATIAL = "spatial"
RULE_TEMPORAL = "temporal"
RULE_INTENSITY_SEQ = "intensity_sequential"
RULE_INTENSITY_SIM = "intensity_simultaneous"
RULE_ELIGIBILITY = "eligibility"


@dataclass(frozen=True, slots=True)
class CompatibilityVerdict:
    composable: bool
    rule: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.composable


_OK = CompatibilityVerdict(True)


def spatially_composable(
    s1: EnergyService, s2: EnergyService, q: EnergyQuery, esd: float
) -> CompatibilityVerdict:
    """Both providers must be within wireless range of the consumer (inclusive)."""
    for s in (s1, s2):
        dist = s.loc.distance(q.l)
        if dist > esd:
            return CompatibilityVerdict(
                False, RULE_SPATIAL,
                f"service {s.eid} is {dist:.2f} m from the consumer (esd {esd} m)")
    return _OK


def temporally_composable(s: PartialService, q: EnergyQuery) -> CompatibilityVerdict:
    if not q.window.contains(s.interval):
        return CompatibilityVerdict(
            False, RULE_TEMPORAL,
            f"slice [{s.interval.st}, {s.interval.et}] exceeds the query window")
    return _OK


def intensity_compatible(
    selected: list[PartialService] | tuple[PartialService, ...],
    candidate: PartialService,
    q: EnergyQuery,
    overlap_interval: TimeInterval,
) -> CompatibilityVerdict:
    """Receive-current cap check for adding `candidate` to `selected`.

    The cap applies to concurrently delivering services: at every instant of
    the candidate's span (restricted to `overlap_interval`) the summed
    current of candidate plus overlapping selections must stay within the
    consumer's limit. Non-overlapping services only need to fit individually.
    """
    if candidate.intensity > q.i_max:
        return CompatibilityVerdict(
            False, RULE_INTENSITY_SEQ,
            f"{candidate.parent_eid} draws {candidate.intensity} mA alone "
            f"(cap {q.i_max} mA)")
    span = candidate.interval.intersection(overlap_interval)
    if span is None:
        return _OK
    worst = _peak_concurrent(selected, span)
    if worst + candidate.intensity > q.i_max:
        return CompatibilityVerdict(
            False, RULE_INTENSITY_SIM,
            f"{candidate.parent_eid} would raise concurrent draw to "
            f"{worst + candidate.intensity} mA (cap {q.i_max} mA)")
    return _OK


def _peak_concurrent(selected, span: TimeInterval) -> float:
    """Highest summed intensity of `selected` anywhere inside `span`."""
    cuts = {span.st}
    for s in selected:
        iv = s.interval.intersection(span)
        if iv is not None:
            cuts.add(iv.st)
    worst = 0.0
    for t in cuts:
        load = sum(s.intensity for s in selected
                   if s.interval.st <= t < s.interval.et)
        worst = max(worst, load)
    return worst


def eligible(
    s: PartialService,
    parent: EnergyService,
    q: EnergyQuery,
    margin_factor: float = DEFAULT_ELIGIBILITY_MARGIN,
) -> CompatibilityVerdict:
    """Reject slices whose net deliverable energy cannot clearly repay the
    connection-establishment overhead; `margin_factor` encodes how clearly."""
    gain = s.dec * parent.tsr - parent.pcl
    if q.cl * margin_factor > gain:
        return CompatibilityVerdict(
            False, RULE_ELIGIBILITY,
            f"{s.parent_eid}: coordination loss {q.cl} x{margin_factor} exceeds "
            f"net gain {gain:.3f} mAh")
    return _OK


def filter_eligible(
    partials: list[PartialService],
    services: dict[str, EnergyService],
    q: EnergyQuery,
    margin_factor: float = DEFAULT_ELIGIBILITY_MARGIN,
) -> list[PartialService]:
    return [p for p in partials
            if eligible(p, services[p.parent_eid], q, margin_factor)]


# ---------------------------------------------------------------------------
# Waiting-time based query splitting
# ---------------------------------------------------------------------------

def waiting_time(first: PartialService, second: PartialService) -> float:
    """Idle gap between the end of `first` and the start of `second` (may be < 0)."""
    return second.interval.st - first.interval.et


def split_query(q: EnergyQuery, candidates: list[PartialService]) -> list[EnergyQuery]:
    """Divide the query at survivable service gaps into shorter sub-queries.

    Candidates are clustered by temporal overlap; a gap splits the query only
    when the consumer's battery still sits above shutdown at the moment the
    next cluster starts. Required energy is apportioned to sub-queries in
    proportion to their window lengths. The leading sub-query is dropped when
    the battery at its end both survives and already covers that sub-query's
    energy share; its share is not redistributed since that energy is in hand.
    """
    if not candidates:
        return [q]
    ordered = sorted(candidates, key=lambda p: (p.interval.st, p.interval.et))
    clusters: list[list[float]] = [[ordered[0].interval.st, ordered[0].interval.et]]
    for p in ordered[1:]:
        if p.interval.st <= clusters[-1][1]:
            clusters[-1][1] = max(clusters[-1][1], p.interval.et)
        else:
            clusters.append([p.interval.st, p.interval.et])
    if len(clusters) == 1:
        return [q]

    # Split only at gaps the device survives; merge across deadly gaps.
    spans: list[list[float]] = [clusters[0]]
    for nxt in clusters[1:]:
        if q.soc_at(nxt[0]) > q.soc.soc_zero:
            spans.append(nxt)
        else:
            spans[-1][1] = nxt[1]
    if len(spans) == 1:
        return [q]

    window = q.window
    windows = [TimeInterval(max(window.st, lo), min(window.et, hi)) for lo, hi in spans]
    total = sum(w.duration_seconds for w in windows)
    shares = [q.re * w.duration_seconds / total for w in windows]
    shares[-1] = q.re - sum(shares[:-1])  # exact total despite rounding

    subs: list[EnergyQuery] = []
    for k, (w, share) in enumerate(zip(windows, shares)):
        if k == 0:
            level_at_end = q.soc_at(w.et)
            if level_at_end > q.soc.soc_zero and level_at_end - q.soc.soc_zero >= share:
                continue  # battery already covers this span
        level_at_start = q.soc_at(w.st)
        if level_at_start <= q.soc.soc_zero:
            continue  # device cannot coordinate transfers in this span
        soc = SoCSeries(
            soc_initial=level_at_start,
            soc_zero=q.soc.soc_zero,
            drain_rate=q.soc.drain_rate,
        )
        subs.append(replace(
            q, qid=f"{q.qid}/{k}", t=w.st, d=w.duration_seconds, re=share, soc=soc))
    return subs
