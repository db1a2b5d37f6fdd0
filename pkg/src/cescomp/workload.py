"""Seeded synthetic scenario generation plus JSON/CSV scenario files.

Scenarios mimic a confined area (coffee shop, waiting room): provider
check-ins uniform over a business-hours window, locations uniform in a disc,
and capacity/current draws uniform over configurable ranges. Generation is
deterministic for a fixed seed; every entity draws from its own split of the
seed stream, so adding queries never perturbs service draws.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .model import (
    EnergyQuery,
    EnergyService,
    GeoPoint,
    SchemaError,
    SoCSeries,
    make_service,
    query_from_dict,
    query_to_dict,
    service_from_dict,
    service_to_dict,
)
from .qos import provision_consistency

META_SCENARIOS = ("short_svc_short_q", "short_svc_long_q",
                  "long_svc_short_q", "long_svc_long_q", "mixed")

_EUB_CHOICES = (1.0, 0.75, 0.5)

# Meta-scenario presets: (provided_energy, service_intensity, implied
# service_duration) for the service side, query_duration for the query side.
_SHORT_SVC = ((50.0, 400.0), (800, 1500), (300.0, 1200.0))
_LONG_SVC = ((400.0, 1000.0), (500, 1000), (1800.0, 5400.0))
_SHORT_Q = (600.0, 1800.0)
_LONG_Q = (3600.0, 7200.0)


@dataclass(frozen=True, slots=True)
class ScenarioConfig:
    """Knobs of one synthetic confined-area scenario.

    Service durations are not drawn directly: they follow from the drawn
    capacity and current (end time = start + capacity/current), so
    `service_duration` documents the implied range and is set consistently
    by the meta-scenario presets.
    """

    n_services: int = 100
    n_queries: int = 20
    seed: int = 0
    service_duration: tuple[float, float] = (600.0, 3600.0)    # seconds
    query_duration: tuple[float, float] = (300.0, 7200.0)      # seconds
    provided_energy: tuple[float, float] = (50.0, 1000.0)      # mAh
    required_energy: tuple[float, float] = (100.0, 800.0)      # mAh
    service_intensity: tuple[float, float] = (500.0, 1500.0)   # mA, drawn integer
    query_intensity_cap: tuple[float, float] = (1000.0, 2500.0)  # mA, drawn integer
    area_radius: float = 2.5                                   # meters
    business_hours: tuple[float, float] = (0.0, 10800.0)       # scenario seconds
    meta_scenario: str = "mixed"

    def __post_init__(self) -> None:
        if self.n_services < 0 or self.n_queries < 0:
            raise ValueError("entity counts must be >= 0")
        for name in ("service_duration", "query_duration", "provided_energy",
                     "required_energy", "service_intensity", "query_intensity_cap"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi) or not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"{name} must be a positive non-empty range, got ({lo}, {hi})")
        if self.area_radius <= 0:
            raise ValueError("area_radius must be positive")
        lo, hi = self.business_hours
        if not lo < hi:
            raise ValueError("business_hours must be a non-empty window")
        if self.meta_scenario not in META_SCENARIOS:
            raise ValueError(f"meta_scenario must be one of {META_SCENARIOS}")

    def resolved(self) -> "ScenarioConfig":
        """Apply the meta-scenario presets to the affected ranges."""
        if self.meta_scenario == "mixed":
            return self
        svc = _SHORT_SVC if self.meta_scenario.startswith("short_svc") else _LONG_SVC
        qd = _SHORT_Q if self.meta_scenario.endswith("short_q") else _LONG_Q
        return replace(
            self,
            provided_energy=svc[0],
            service_intensity=(float(svc[1][0]), float(svc[1][1])),
            service_duration=svc[2],
            query_duration=qd,
        )

    def to_dict(self) -> dict:
        return {
            "n_services": self.n_services,
            "n_queries": self.n_queries,
            "seed": self.seed,
            "service_duration": list(self.service_duration),
            "query_duration": list(self.query_duration),
            "provided_energy": list(self.provided_energy),
            "required_energy": list(self.required_energy),
            "service_intensity": list(self.service_intensity),
            "query_intensity_cap": list(self.query_intensity_cap),
            "area_radius": self.area_radius,
            "business_hours": list(self.business_hours),
            "meta_scenario": self.meta_scenario,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "ScenarioConfig":
        kwargs = {}
        for key, value in record.items():
            if key not in cls.__dataclass_fields__:
                raise SchemaError(f"config: unknown field '{key}'")
            if isinstance(value, list):
                value = tuple(value)
            kwargs[key] = value
        return cls(**kwargs)


def _entity_rng(seed: int, kind: int, index: int) -> np.random.Generator:
    """Independent, portable stream per entity (seed split, not sequential)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(kind, index))))


def _disc_point(rng: np.random.Generator, radius: float) -> GeoPoint:
    r = radius * math.sqrt(rng.uniform())
    theta = rng.uniform(0.0, 2.0 * math.pi)
    return GeoPoint(r * math.cos(theta), r * math.sin(theta))


def _gen_service(cfg: ScenarioConfig, i: int) -> EnergyService:
    rng = _entity_rng(cfg.seed, 0, i)
    ec = rng.uniform(*cfg.provided_energy)
    intensity = float(rng.integers(int(cfg.service_intensity[0]),
                                   int(cfg.service_intensity[1]) + 1))
    st = rng.uniform(*cfg.business_hours)
    loc = _disc_point(rng, cfg.area_radius)
    tsr = rng.uniform(0.6, 0.95)
    eub = _EUB_CHOICES[rng.integers(0, len(_EUB_CHOICES))]
    kolent = rng.uniform(0.5, 1.5)
    alpha = provision_consistency(kolent, eub)
    pcl = rng.uniform(0.02, 0.2)
    return make_service(
        eid=f"s{i}", owner_id=f"o{i}", loc=loc, st=st, intensity=intensity,
        ec=ec, tsr=tsr, alpha=alpha, eub=eub, pcl=pcl,
    )


def _gen_query(cfg: ScenarioConfig, j: int) -> EnergyQuery:
    rng = _entity_rng(cfg.seed, 1, j)
    d = rng.uniform(*cfg.query_duration)
    lo, hi = cfg.business_hours
    t = rng.uniform(lo, max(lo, hi - d)) if hi - d > lo else lo
    loc = _disc_point(rng, cfg.area_radius)
    re_ = rng.uniform(*cfg.required_energy)
    i_max = float(rng.integers(int(cfg.query_intensity_cap[0]),
                               int(cfg.query_intensity_cap[1]) + 1))
    cl = rng.uniform(0.01, 0.1)
    soc_initial = rng.uniform(800.0, 2000.0)
    soc_zero = rng.uniform(50.0, 150.0)
    drain_rate = rng.uniform(50.0, 200.0)
    return EnergyQuery(
        qid=f"q{j}", t=t, l=loc, re=re_, i_max=i_max, d=d, cl=cl,
        soc=SoCSeries(soc_initial, soc_zero, drain_rate),
    )


def generate_scenario(cfg: ScenarioConfig) -> tuple[list[EnergyService], list[EnergyQuery]]:
    """Draw all services and queries of a scenario, deterministically."""
    eff = cfg.resolved()
    services = [_gen_service(eff, i) for i in range(eff.n_services)]
    queries = [_gen_query(eff, j) for j in range(eff.n_queries)]
    return services, queries


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------

def save_scenario(
    scenario: tuple[list[EnergyService], list[EnergyQuery]],
    path: str | Path,
    config: ScenarioConfig | None = None,
) -> None:
    services, queries = scenario
    doc = {
        "config": config.to_dict() if config is not None else None,
        "services": [service_to_dict(s) for s in services],
        "queries": [query_to_dict(q) for q in queries],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def load_scenario(path: str | Path) -> tuple[list[EnergyService], list[EnergyQuery]]:
    services, queries, _ = load_scenario_with_config(path)
    return services, queries


def load_scenario_with_config(
    path: str | Path,
) -> tuple[list[EnergyService], list[EnergyQuery], ScenarioConfig | None]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object at the top level")
    services = [service_from_dict(rec, where=f"services[{i}]")
                for i, rec in enumerate(doc.get("services", []))]
    seen: set[str] = set()
    for i, s in enumerate(services):
        if s.eid in seen:
            raise SchemaError(f"services[{i}].eid: duplicate id {s.eid!r}")
        seen.add(s.eid)
    queries = [query_from_dict(rec, where=f"queries[{i}]")
               for i, rec in enumerate(doc.get("queries", []))]
    config = None
    if doc.get("config") is not None:
        config = ScenarioConfig.from_dict(doc["config"])
    return services, queries, config


_SERVICE_COLUMNS = ("eid", "owner_id", "x", "y", "st", "et", "ec", "intensity",
                    "tsr", "alpha", "dec", "eub", "pcl")
_QUERY_COLUMNS = ("qid", "t", "x", "y", "re", "i_max", "d", "cl",
                  "soc_initial", "soc_zero", "drain_rate")


def export_scenario_csv(
    scenario: tuple[list[EnergyService], list[EnergyQuery]],
    prefix: str | Path,
) -> tuple[Path, Path]:
    """Write `<prefix>_services.csv` and `<prefix>_queries.csv` mirrors."""
    services, queries = scenario
    prefix = Path(prefix)
    services_path = prefix.with_name(prefix.name + "_services.csv")
    queries_path = prefix.with_name(prefix.name + "_queries.csv")
    with services_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_SERVICE_COLUMNS)
        for s in services:
            writer.writerow([s.eid, s.owner_id, s.loc.x, s.loc.y,
                             s.interval.st, s.interval.et, s.ec, s.intensity,
                             s.tsr, s.alpha, s.dec, s.eub, s.pcl])
    with queries_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_QUERY_COLUMNS)
        for q in queries:
            writer.writerow([q.qid, q.t, q.l.x, q.l.y, q.re, q.i_max, q.d, q.cl,
                             q.soc.soc_initial, q.soc.soc_zero, q.soc.drain_rate])
    return services_path, queries_path
