"""Shared regression fixtures and instance generators for the test suite."""

from __future__ import annotations

import numpy as np

from cescomp.model import (
    EnergyQuery,
    EnergyService,
    GeoPoint,
    PartialService,
    SoCSeries,
    make_service,
)

MINUTE = 60.0

# Worked five-provider example: slot boundaries in minutes from query start
# and the published per-slot energy matrix (mAh) with its per-service
# current-coefficient column (A). Bold entries are the per-slot maxima.
SLOT_BOUNDS_MIN = (0.0, 4.0, 8.0, 11.0, 15.0, 20.0, 26.0, 30.0)
WORKED_COEFFICIENTS = {
    "CES1": 0.92, "CES2": 0.78, "CES3": 1.09, "CES4": 0.90, "CES5": 0.66,
}
WORKED_CELLS = {
    "CES1": {1: 61.33, 2: 61.33, 3: 47.34},
    "CES2": {6: 78.00, 7: 52.00},
    "CES3": {2: 72.67, 3: 54.66, 4: 72.67},
    "CES4": {3: 45.00, 4: 60.00, 5: 75.00, 6: 90.00},
    "CES5": {1: 44.00, 2: 44.00, 3: 33.00, 4: 44.00, 5: 55.00, 6: 66.00, 7: 44.00},
}
WORKED_TOTALS = {"CES1": 170.0, "CES2": 130.0, "CES3": 200.0, "CES4": 270.0, "CES5": 330.0}
BOLD_ARGMAX = {1: "CES1", 2: "CES3", 3: "CES3", 4: "CES3", 5: "CES4", 6: "CES4", 7: "CES2"}
BOLD_SUM = 478.33

# Service spans in minutes and per-service current draws (mA). Currents are
# chosen so each provider fits the consumer cap alone but no pair involving
# the window-spanning CES5 does, which is what locks whole-service selection
# into composition C1.
WORKED_SPANS_MIN = {
    "CES1": (0.0, 11.0), "CES2": (20.0, 30.0), "CES3": (4.0, 15.0),
    "CES4": (8.0, 26.0), "CES5": (0.0, 30.0),
}
WORKED_INTENSITY = {
    "CES1": 1150.0, "CES2": 1000.0, "CES3": 1400.0, "CES4": 1200.0, "CES5": 1500.0,
}


def worked_example_services() -> list[EnergyService]:
    services = []
    for eid, (st_min, et_min) in WORKED_SPANS_MIN.items():
        intensity = WORKED_INTENSITY[eid]
        tsr = WORKED_COEFFICIENTS[eid] * 1000.0 / intensity
        services.append(make_service(
            eid=eid, owner_id=f"owner-{eid}", loc=GeoPoint(1.0, 0.5),
            st=st_min * MINUTE, et=et_min * MINUTE, intensity=intensity,
            tsr=tsr, alpha=1.0,
        ))
    return services


def worked_example_query() -> EnergyQuery:
    return EnergyQuery(
        qid="qX", t=0.0, l=GeoPoint(0.0, 0.0), re=450.0, i_max=2000.0,
        d=30.0 * MINUTE, cl=0.0, soc=SoCSeries(300.0, 50.0, 100.0),
    )


def random_instance(seed: int, n_max: int = 10, grid_cells: int = 6,
                    window_seconds: float = 3600.0):
    """Small random composer instance with grid-aligned intervals.

    Intensities are integer mA, endpoints snap to a coarse grid (so chunk
    counts stay within the oracle guard and coincident delimiters occur),
    and coordination loss is zero so every candidate is eligible.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    step = window_seconds / grid_cells
    services = []
    for i in range(n):
        a = int(rng.integers(0, grid_cells))
        b = int(rng.integers(a + 1, grid_cells + 1))
        services.append(make_service(
            eid=f"s{i:02d}", owner_id=f"o{i}", loc=GeoPoint(float(rng.uniform(-2, 2)),
                                                            float(rng.uniform(-2, 2))),
            st=a * step, et=b * step,
            intensity=float(rng.integers(300, 1501)),
            tsr=float(rng.uniform(0.4, 0.95)),
            alpha=float(rng.uniform(0.4, 1.0)),
        ))
    q = EnergyQuery(
        qid=f"q{seed}", t=0.0, l=GeoPoint(0.0, 0.0),
        re=float(rng.uniform(100, 800)),
        i_max=float(rng.integers(800, 2501)),
        d=window_seconds, cl=0.0,
        soc=SoCSeries(1000.0, 100.0, 100.0),
    )
    window = q.window
    candidates = [
        PartialService(s.eid, s.interval, s.intensity, s.dec) for s in services
    ]
    assert all(window.contains(p.interval) for p in candidates)
    return q, services, candidates
