"""Query-window chunking and thin-chunk smoothing.

The query window is cut at every candidate start/end timestamp, giving
maximal sub-intervals over which the set of available services is constant.
Chunks narrower than a minimum width are merged into a neighbor, because a
connection that lives shorter than its establishment overhead wastes energy.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

from .model import EnergyQuery, PartialService, TimeInterval

MIN_CHUNK_FLOOR_SECONDS = 30.0


@dataclass(frozen=True, slots=True)
class Chunk:
    """A window slice with the slices of every service covering it fully."""

    interval: TimeInterval
    roster: tuple[PartialService, ...]

    def width(self) -> float:
        return self.interval.duration_seconds


def chunk_query(q: EnergyQuery, candidates: list[PartialService]) -> list[Chunk]:
    """Partition the query window at candidate start/end times.

    Every candidate must already be clipped to the window. Chunks with no
    covering service are kept with an empty roster so the result is always a
    partition. Deterministic and independent of candidate order.
    """
    window = q.window
    for p in candidates:
        if not window.contains(p.interval):
            raise ValueError(f"candidate {p.parent_eid} exceeds the query window")
    bounds = {window.st, window.et}
    for p in candidates:
        bounds.add(p.interval.st)
        bounds.add(p.interval.et)
    cuts = sorted(bounds)
    ordered = sorted(candidates, key=lambda p: p.parent_eid)
    chunks: list[Chunk] = []
    for lo, hi in zip(cuts, cuts[1:]):
        interval = TimeInterval(lo, hi)
        roster = tuple(p.clip(interval) for p in ordered
                       if p.interval.st <= lo and hi <= p.interval.et)
        chunks.append(Chunk(interval, roster))
    return chunks


def default_min_chunk_seconds(
    q: EnergyQuery,
    candidates: list[PartialService],
    margin_factor: float,
) -> float:
    """Smallest chunk worth a connection: wide enough that a median-intensity
    service at perfect efficiency repays the margined coordination loss."""
    if not candidates or q.cl == 0:
        return MIN_CHUNK_FLOOR_SECONDS
    median_intensity = statistics.median(p.intensity for p in candidates)
    breakeven = 3600.0 * q.cl * margin_factor / median_intensity
    return max(MIN_CHUNK_FLOOR_SECONDS, breakeven)


def smooth_thin_chunks(chunks: list[Chunk], min_width: float) -> list[Chunk]:
    """Merge every chunk narrower than `min_width` into a neighbor.

    Which neighbor absorbs the thin chunk depends on what created its
    delimiters: between two service end times the later end is dropped
    (the right neighbor widens leftward); between two start times the
    earlier start is dropped (the left neighbor widens rightward); between
    a start and an end the delimiter of the lower-intensity service is
    dropped, ties falling to the end-time delimiter. Rosters are recomputed
    after each merge; iterates to a fixed point.
    """
    out = list(chunks)
    while len(out) > 1:
        idx = next((i for i, c in enumerate(out) if c.width() < min_width), None)
        if idx is None:
            break
        merge_left = _pick_merge_side(out, idx)
        if merge_left:
            out[idx - 1:idx + 1] = [_merge_chunks(out[idx - 1], out[idx])]
        else:
            out[idx:idx + 2] = [_merge_chunks(out[idx], out[idx + 1])]
    return out


def _boundary_profile(left: Chunk, right: Chunk) -> tuple[str, float]:
    """Classify the delimiter between two adjacent chunks.

    Returns ("st" | "et" | "mixed", strongest intensity among the services
    whose start or end defines the boundary). Services present on the left
    but not the right end here; the reverse start here.
    """
    left_eids = {p.parent_eid: p for p in left.roster}
    right_eids = {p.parent_eid: p for p in right.roster}
    ending = [p for eid, p in left_eids.items() if eid not in right_eids]
    starting = [p for eid, p in right_eids.items() if eid not in left_eids]
    intensities = [p.intensity for p in ending + starting]
    strongest = max(intensities) if intensities else 0.0
    if ending and starting:
        return "mixed", strongest
    if ending:
        return "et", strongest
    if starting:
        return "st", strongest
    return "none", strongest


def _pick_merge_side(chunks: list[Chunk], idx: int) -> bool:
    """True to merge the thin chunk into its left neighbor (drop the left
    delimiter), False to merge right (drop the right delimiter)."""
    if idx == 0:
        return False  # window edge on the left is immovable
    if idx == len(chunks) - 1:
        return True   # window edge on the right is immovable
    left_kind, left_strength = _boundary_profile(chunks[idx - 1], chunks[idx])
    right_kind, right_strength = _boundary_profile(chunks[idx], chunks[idx + 1])
    if left_kind == "et" and right_kind == "et":
        return False  # drop the later end time, widen the next chunk leftward
    if left_kind == "st" and right_kind == "st":
        return True   # drop the earlier start time, widen the previous chunk rightward
    # Mixed start/end delimiters: drop the one held by the weaker service.
    if left_strength < right_strength:
        return True
    if right_strength < left_strength:
        return False
    # Tie: drop an end-time delimiter, preferring the right one.
    if right_kind in ("et", "mixed"):
        return False
    if left_kind in ("et", "mixed"):
        return True
    return False


def _merge_chunks(a: Chunk, b: Chunk) -> Chunk:
    interval = TimeInterval(a.interval.st, b.interval.et)
    surviving = {p.parent_eid for p in a.roster} & {p.parent_eid for p in b.roster}
    rate_by_eid = {p.parent_eid: (p.intensity, p.energy_rate) for p in a.roster}
    roster = tuple(
        PartialService(eid, interval, rate_by_eid[eid][0],
                       rate_by_eid[eid][1] * interval.duration_hours())
        for eid in sorted(surviving)
    )
    return Chunk(interval, roster)
