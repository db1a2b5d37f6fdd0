"""Domain types for crowdsourced wireless-energy composition.

Units are fixed package-wide: time in seconds since the scenario epoch
(durations converted to hours only inside energy formulas), energy in mAh,
current in mA, distance in meters of a local planar frame. All types are
immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Relative tolerance for floating-point comparisons, used package-wide.
REL_EPS = 1e-6

# Allowed usage-pattern factors: device suspended, used casually, used regularly.
EUB_VALUES = (1.0, 0.75, 0.5)


def _close(a: float, b: float, rel: float = REL_EPS) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=rel)


@dataclass(frozen=True, slots=True)
class TimeInterval:
    """Half-open-by-convention interval [st, et] in seconds; zero length rejected."""

    st: float
    et: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.st) and math.isfinite(self.et)):
            raise ValueError(f"non-finite interval bounds ({self.st}, {self.et})")
        if self.st >= self.et:
            raise ValueError(f"empty interval: st={self.st} >= et={self.et}")

    @property
    def duration_seconds(self) -> float:
        return self.et - self.st

    def duration_hours(self) -> float:
        return (self.et - self.st) / 3600.0

    def contains(self, other: "TimeInterval") -> bool:
        return self.st <= other.st and other.et <= self.et

    def contains_point(self, t: float) -> bool:
        return self.st <= t <= self.et

    def overlaps(self, other: "TimeInterval") -> bool:
        """True when the intervals share a positive-length span."""
        return self.st < other.et and other.st < self.et

    def intersection(self, other: "TimeInterval") -> "TimeInterval | None":
        lo = max(self.st, other.st)
        hi = min(self.et, other.et)
        if lo >= hi:
            return None
        return TimeInterval(lo, hi)


@dataclass(frozen=True, slots=True)
class GeoPoint:
    """Local planar coordinates (east, north) in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    def distance(self, other: "GeoPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True, slots=True)
class SoCSeries:
    """Linear state-of-charge model: uniform self-drain from an initial level.

    soc_zero is the shutdown threshold below which the device cannot
    coordinate an energy transfer.
    """

    soc_initial: float
    soc_zero: float
    drain_rate: float  # mA, assumed-uniform self consumption

    def __post_init__(self) -> None:
        if self.soc_zero < 0:
            raise ValueError("soc_zero must be >= 0")
        if self.soc_zero >= self.soc_initial:
            raise ValueError("soc_zero must be below soc_initial")
        if self.drain_rate < 0:
            raise ValueError("drain_rate must be >= 0")

    def level(self, elapsed_seconds: float) -> float:
        """Charge remaining after `elapsed_seconds` of self-drain, floored at 0."""
        return max(0.0, self.soc_initial - self.drain_rate * elapsed_seconds / 3600.0)


def service_end_time(st: float, ec: float, intensity: float) -> float:
    """Effective end time of a service delivering `ec` mAh at `intensity` mA."""
    if ec <= 0:
        raise ValueError(f"ec must be positive, got {ec}")
    if intensity <= 0:
        raise ValueError(f"intensity must be positive, got {intensity}")
    return st + (ec / intensity) * 3600.0


@dataclass(frozen=True, slots=True)
class EnergyService:
    """A provider's advertised energy offer.

    `dec` is the deliverable energy capacity alpha * ec * tsr; construct
    through `make_service` to keep it consistent with the other fields.
    """

    eid: str
    owner_id: str
    loc: GeoPoint
    interval: TimeInterval
    ec: float          # advertised capacity, mAh
    intensity: float   # transfer current, mA
    tsr: float         # transmission success rate, [0, 1]
    alpha: float       # provision consistency, [0, 1]
    dec: float         # deliverable capacity, mAh
    eub: float = 1.0   # usage-pattern factor
    pcl: float = 0.0   # provider coordination loss, mAh


def make_service(
    eid: str,
    owner_id: str,
    loc: GeoPoint,
    st: float,
    intensity: float,
    *,
    ec: float | None = None,
    et: float | None = None,
    tsr: float = 1.0,
    alpha: float = 1.0,
    eub: float = 1.0,
    pcl: float = 0.0,
) -> EnergyService:
    """Build a consistent EnergyService from either a capacity or an end time.

    With `ec` given, the end time follows from the capacity/current ratio;
    with `et` given, the capacity is re-capped to intensity * duration so the
    two views never disagree.
    """
    if intensity <= 0:
        raise ValueError(f"intensity must be positive, got {intensity}")
    if et is None:
        if ec is None:
            raise ValueError("one of ec or et is required")
        et = service_end_time(st, ec, intensity)
        interval = TimeInterval(st, et)
    else:
        interval = TimeInterval(st, et)
        ec = intensity * interval.duration_hours()
    dec = alpha * ec * tsr
    return EnergyService(
        eid=eid, owner_id=owner_id, loc=loc, interval=interval,
        ec=ec, intensity=intensity, tsr=tsr, alpha=alpha, dec=dec,
        eub=eub, pcl=pcl,
    )


def validate_service(s: EnergyService) -> list[str]:
    """Return every violated invariant of `s`; an empty list means ok."""
    violations: list[str] = []
    if s.interval.st >= s.interval.et:
        violations.append("empty interval")  # unreachable via TimeInterval, kept for raw data
    if s.ec <= 0:
        violations.append("non-positive ec")
    if s.intensity <= 0:
        violations.append("non-positive intensity")
    if not 0.0 <= s.tsr <= 1.0:
        violations.append("tsr outside [0, 1]")
    if not 0.0 <= s.alpha <= 1.0:
        violations.append("alpha outside [0, 1]")
    if s.eub not in EUB_VALUES:
        violations.append("eub not in {1.0, 0.75, 0.5}")
    if s.pcl < 0:
        violations.append("negative pcl")
    if s.ec > 0 and not _close(s.dec, s.alpha * s.ec * s.tsr):
        violations.append("stale DEC")
    if s.ec > 0 and s.intensity > 0:
        if not _close(s.ec, s.intensity * s.interval.duration_hours()):
            violations.append("ec inconsistent with intensity and duration")
    return violations


@dataclass(frozen=True, slots=True)
class EnergyQuery:
    """A consumer's spatio-temporal energy request."""

    qid: str
    t: float           # launch timestamp, seconds
    l: GeoPoint        # consumer location (fixed for the query duration)
    re: float          # required energy, mAh
    i_max: float       # max receivable current, mA
    d: float           # charging window length, seconds
    cl: float          # coordination loss per connection, mAh
    soc: SoCSeries

    def __post_init__(self) -> None:
        if self.re <= 0:
            raise ValueError("re must be positive")
        if self.i_max <= 0:
            raise ValueError("i_max must be positive")
        if self.d <= 0:
            raise ValueError("d must be positive")
        if self.cl < 0:
            raise ValueError("cl must be >= 0")

    @property
    def window(self) -> TimeInterval:
        return TimeInterval(self.t, self.t + self.d)

    def soc_at(self, t: float) -> float:
        """State of charge at absolute time `t` (equals soc_initial at launch)."""
        return self.soc.level(t - self.t)


@dataclass(frozen=True, slots=True)
class PartialService:
    """A sub-interval slice of a service with its deliverable energy recomputed."""

    parent_eid: str
    interval: TimeInterval
    intensity: float
    dec: float

    @property
    def energy_rate(self) -> float:
        """Deliverable energy per hour over this slice (mAh/h)."""
        return self.dec / self.interval.duration_hours()

    def clip(self, interval: TimeInterval) -> "PartialService":
        """Slice down to `interval` (must be contained), scaling dec with duration."""
        if interval == self.interval:
            return self
        if not self.interval.contains(interval):
            raise ValueError("clip interval must be contained in the slice")
        dec = self.energy_rate * interval.duration_hours()
        return PartialService(self.parent_eid, interval, self.intensity, dec)


def derive_partial(service: EnergyService, window: TimeInterval) -> PartialService | None:
    """Clip `service` to `window`; None when there is no positive overlap.

    An unclipped service keeps its dec bit-for-bit; a clipped one gets
    duration_hours * intensity * tsr * alpha over the overlap.
    """
    overlap = service.interval.intersection(window)
    if overlap is None:
        return None
    if overlap == service.interval:
        return PartialService(service.eid, overlap, service.intensity, service.dec)
    dec = overlap.duration_hours() * service.intensity * service.tsr * service.alpha
    return PartialService(service.eid, overlap, service.intensity, dec)


@dataclass(frozen=True, slots=True)
class CompositionPlan:
    """Output contract of every composer: per-chunk selections plus totals.

    Chunk intervals are disjoint, ordered, and partition the query window;
    `total_energy` is the sum over chunks of the selected slice energies.
    """

    chunks: tuple[tuple[TimeInterval, tuple[PartialService, ...]], ...]
    total_energy: float
    algorithm_tag: str
    wall_time_us: int = 0

    @property
    def selected_eids(self) -> set[str]:
        return {p.parent_eid for _, sel in self.chunks for p in sel}


def plan_total(chunks) -> float:
    """Canonical plan total: per-chunk left-to-right sums, then across chunks.

    The grouping is part of the contract so that two plans selecting
    equal-valued chunk subsets report bit-identical totals.
    """
    total = 0.0
    for _, selected in chunks:
        subtotal = 0.0
        for p in selected:
            subtotal += p.dec
        total += subtotal
    return total


# ---------------------------------------------------------------------------
# JSON interchange (field names are the wire contract for the CLI)
# ---------------------------------------------------------------------------

_SERVICE_FIELDS = ("eid", "owner_id", "loc", "interval", "ec", "intensity",
                   "tsr", "alpha", "dec", "eub", "pcl")
_QUERY_FIELDS = ("qid", "t", "l", "re", "i_max", "d", "cl", "soc")


def service_to_dict(s: EnergyService) -> dict:
    return {
        "eid": s.eid,
        "owner_id": s.owner_id,
        "loc": {"x": s.loc.x, "y": s.loc.y},
        "interval": {"st": s.interval.st, "et": s.interval.et},
        "ec": s.ec,
        "intensity": s.intensity,
        "tsr": s.tsr,
        "alpha": s.alpha,
        "dec": s.dec,
        "eub": s.eub,
        "pcl": s.pcl,
    }


def query_to_dict(q: EnergyQuery) -> dict:
    return {
        "qid": q.qid,
        "t": q.t,
        "l": {"x": q.l.x, "y": q.l.y},
        "re": q.re,
        "i_max": q.i_max,
        "d": q.d,
        "cl": q.cl,
        "soc": {
            "soc_initial": q.soc.soc_initial,
            "soc_zero": q.soc.soc_zero,
            "drain_rate": q.soc.drain_rate,
        },
    }


class SchemaError(ValueError):
    """Scenario data that violates the interchange schema; names the bad field."""


def _require(record: dict, key: str, where: str):
    if key not in record:
        raise SchemaError(f"{where}: missing field '{key}'")
    return record[key]


def _number(record: dict, key: str, where: str) -> float:
    v = _require(record, key, where)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SchemaError(f"{where}.{key}: expected a finite number, got {v!r}")
    return float(v)


def service_from_dict(record: dict, where: str = "service") -> EnergyService:
    """Parse one service record, recomputing derived fields when stale."""
    for key in record:
        if key not in _SERVICE_FIELDS:
            raise SchemaError(f"{where}: unknown field '{key}'")
    eid = str(_require(record, "eid", where))
    owner = str(_require(record, "owner_id", where))
    loc_rec = _require(record, "loc", where)
    loc = GeoPoint(_number(loc_rec, "x", f"{where}.loc"), _number(loc_rec, "y", f"{where}.loc"))
    iv_rec = _require(record, "interval", where)
    st = _number(iv_rec, "st", f"{where}.interval")
    et = _number(iv_rec, "et", f"{where}.interval")
    if st >= et:
        raise SchemaError(f"{where}.interval: st must be < et")
    ec = _number(record, "ec", where)
    intensity = _number(record, "intensity", where)
    if ec <= 0:
        raise SchemaError(f"{where}.ec: must be positive, got {ec}")
    if intensity <= 0:
        raise SchemaError(f"{where}.intensity: must be positive, got {intensity}")
    tsr = _number(record, "tsr", where)
    alpha = _number(record, "alpha", where)
    if not 0.0 <= tsr <= 1.0:
        raise SchemaError(f"{where}.tsr: must be in [0, 1], got {tsr}")
    if not 0.0 <= alpha <= 1.0:
        raise SchemaError(f"{where}.alpha: must be in [0, 1], got {alpha}")
    eub = _number(record, "eub", where) if "eub" in record else 1.0
    if eub not in EUB_VALUES:
        raise SchemaError(f"{where}.eub: must be one of {EUB_VALUES}, got {eub}")
    pcl = _number(record, "pcl", where) if "pcl" in record else 0.0
    if pcl < 0:
        raise SchemaError(f"{where}.pcl: must be >= 0, got {pcl}")
    interval = TimeInterval(st, et)
    # Re-cap a capacity that disagrees with the interval, and refresh a stale
    # dec; values already consistent round-trip bit-for-bit.
    consistent_ec = intensity * interval.duration_hours()
    if not _close(ec, consistent_ec):
        ec = consistent_ec
    dec = _number(record, "dec", where) if "dec" in record else alpha * ec * tsr
    if not _close(dec, alpha * ec * tsr):
        dec = alpha * ec * tsr
    return EnergyService(eid, owner, loc, interval, ec, intensity, tsr, alpha, dec, eub, pcl)


def query_from_dict(record: dict, where: str = "query") -> EnergyQuery:
    for key in record:
        if key not in _QUERY_FIELDS:
            raise SchemaError(f"{where}: unknown field '{key}'")
    qid = str(_require(record, "qid", where))
    t = _number(record, "t", where)
    loc_rec = _require(record, "l", where)
    loc = GeoPoint(_number(loc_rec, "x", f"{where}.l"), _number(loc_rec, "y", f"{where}.l"))
    re_ = _number(record, "re", where)
    i_max = _number(record, "i_max", where)
    d = _number(record, "d", where)
    cl = _number(record, "cl", where)
    if re_ <= 0:
        raise SchemaError(f"{where}.re: must be positive, got {re_}")
    if i_max <= 0:
        raise SchemaError(f"{where}.i_max: must be positive, got {i_max}")
    if d <= 0:
        raise SchemaError(f"{where}.d: must be positive, got {d}")
    if cl < 0:
        raise SchemaError(f"{where}.cl: must be >= 0, got {cl}")
    soc_rec = _require(record, "soc", where)
    soc = SoCSeries(
        _number(soc_rec, "soc_initial", f"{where}.soc"),
        _number(soc_rec, "soc_zero", f"{where}.soc"),
        _number(soc_rec, "drain_rate", f"{where}.soc"),
    )
    return EnergyQuery(qid, t, loc, re_, i_max, d, cl, soc)


def plan_to_dict(plan: CompositionPlan) -> dict:
    return {
        "algorithm_tag": plan.algorithm_tag,
        "total_energy": plan.total_energy,
        "wall_time_us": plan.wall_time_us,
        "chunks": [
            {
                "st": iv.st,
                "et": iv.et,
                "selected": [
                    {
                        "parent_eid": p.parent_eid,
                        "st": p.interval.st,
                        "et": p.interval.et,
                        "intensity": p.intensity,
                        "dec": p.dec,
                    }
                    for p in sel
                ],
            }
            for iv, sel in plan.chunks
        ],
    }
