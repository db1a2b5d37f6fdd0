import json
import math

import pytest
from hypothesis import given, strategies as st

from cescomp.model import (
    EnergyService,
    GeoPoint,
    PartialService,
    SchemaError,
    SoCSeries,
    TimeInterval,
    derive_partial,
    make_service,
    plan_total,
    query_from_dict,
    query_to_dict,
    service_end_time,
    service_from_dict,
    service_to_dict,
    validate_service,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def test_service_end_time_half_hour():
    assert service_end_time(0.0, 500.0, 1000.0) == pytest.approx(1800.0)


def test_service_end_time_unit_ratio():
    assert service_end_time(0.0, 1000.0, 1000.0) == pytest.approx(3600.0)


def test_service_end_time_offset_start():
    # 250 mAh at 500 mA is half an hour, on top of a 600 s start.
    assert service_end_time(600.0, 250.0, 500.0) == pytest.approx(2400.0)


@pytest.mark.parametrize("ec,intensity", [(0.0, 500.0), (-1.0, 500.0), (100.0, 0.0), (100.0, -5.0)])
def test_service_end_time_rejects_nonpositive(ec, intensity):
    with pytest.raises(ValueError):
        service_end_time(0.0, ec, intensity)


def test_empty_interval_rejected():
    with pytest.raises(ValueError, match="empty interval"):
        TimeInterval(100.0, 100.0)


def test_validate_service_ok():
    s = make_service(eid="a", owner_id="o", loc=GeoPoint(0, 0), st=0.0,
                     intensity=200.0, ec=100.0, tsr=0.9, alpha=1.0, eub=0.75)
    assert s.dec == pytest.approx(90.0)
    assert validate_service(s) == []


def test_validate_service_stale_dec():
    s = make_service(eid="a", owner_id="o", loc=GeoPoint(0, 0), st=0.0,
                     intensity=200.0, ec=100.0, tsr=0.9, alpha=1.0)
    stale = EnergyService(s.eid, s.owner_id, s.loc, s.interval, s.ec, s.intensity,
                          s.tsr, s.alpha, dec=100.0, eub=s.eub, pcl=s.pcl)
    assert "stale DEC" in validate_service(stale)


def test_validate_service_flags_bad_fields():
    s = make_service(eid="a", owner_id="o", loc=GeoPoint(0, 0), st=0.0,
                     intensity=200.0, ec=100.0, tsr=0.9, alpha=1.0)
    bad = EnergyService(s.eid, s.owner_id, s.loc, s.interval, s.ec, s.intensity,
                        tsr=0.9, alpha=0.5, dec=s.ec * 0.9 * 0.5, eub=0.6, pcl=-1.0)
    violations = validate_service(bad)
    assert "eub not in {1.0, 0.75, 0.5}" in violations
    assert "negative pcl" in violations


def test_make_service_recaps_ec_when_et_given():
    s = make_service(eid="a", owner_id="o", loc=GeoPoint(0, 0), st=0.0, et=1800.0,
                     intensity=1000.0, ec=9999.0, tsr=1.0, alpha=1.0)
    assert s.ec == pytest.approx(500.0)
    assert s.dec == pytest.approx(500.0)


@given(st.floats(min_value=1.0, max_value=5000.0),
       st.floats(min_value=10.0, max_value=3000.0),
       st.floats(min_value=0.0, max_value=1e5))
def test_capacity_duration_identity(ec, intensity, st_time):
    s = make_service(eid="x", owner_id="o", loc=GeoPoint(0, 0), st=st_time,
                     intensity=intensity, ec=ec)
    assert math.isclose(s.intensity * s.interval.duration_hours(), s.ec, rel_tol=1e-9)


@given(finite, finite, finite, finite)
def test_distance_symmetric_nonnegative(ax, ay, bx, by):
    a, b = GeoPoint(ax, ay), GeoPoint(bx, by)
    assert a.distance(b) == b.distance(a)
    assert a.distance(b) >= 0.0
    assert a.distance(a) == 0.0


@given(st.floats(min_value=10.0, max_value=3600.0), st.floats(min_value=10.0, max_value=3600.0))
def test_partial_dec_monotone_in_length(d1, d2):
    base = PartialService("p", TimeInterval(0.0, 7200.0), 1000.0, 1500.0)
    lo, hi = sorted((d1, d2))
    shorter = base.clip(TimeInterval(0.0, lo))
    longer = base.clip(TimeInterval(0.0, hi))
    assert shorter.dec <= longer.dec + 1e-9


def test_derive_partial_clips_and_recomputes():
    # Service straddling the window start: [-600, 1200] against [0, 1800].
    s = make_service(eid="a", owner_id="o", loc=GeoPoint(0, 0), st=-600.0, et=1200.0,
                     intensity=1000.0, tsr=0.9, alpha=1.0)
    p = derive_partial(s, TimeInterval(0.0, 1800.0))
    assert p.interval == TimeInterval(0.0, 1200.0)
    assert p.dec == pytest.approx((1200.0 / 3600.0) * 1000.0 * 0.9 * 1.0)
    assert p.dec == pytest.approx(300.0)


def test_derive_partial_passthrough_preserves_dec_exactly():
    s = make_service(eid="a", owner_id="o", loc=GeoPoint(0, 0), st=100.0, et=900.0,
                     intensity=777.0, tsr=0.33, alpha=0.77)
    p = derive_partial(s, TimeInterval(0.0, 1800.0))
    assert p.interval == s.interval
    assert p.dec == s.dec  # bit-for-bit


def test_derive_partial_no_overlap():
    s = make_service(eid="a", owner_id="o", loc=GeoPoint(0, 0), st=0.0, et=100.0,
                     intensity=500.0)
    assert derive_partial(s, TimeInterval(100.0, 200.0)) is None


def test_derive_partial_clip_never_exceeds_original():
    s = make_service(eid="a", owner_id="o", loc=GeoPoint(0, 0), st=-50.0, et=1000.0,
                     intensity=900.0, tsr=0.8, alpha=0.9)
    p = derive_partial(s, TimeInterval(0.0, 600.0))
    assert p.dec <= s.dec + 1e-9


def test_soc_series_linear_drain():
    soc = SoCSeries(soc_initial=1000.0, soc_zero=100.0, drain_rate=360.0)
    assert soc.level(0.0) == 1000.0
    assert soc.level(3600.0) == pytest.approx(640.0)
    assert soc.level(1e7) == 0.0


def test_soc_series_validation():
    with pytest.raises(ValueError):
        SoCSeries(100.0, 100.0, 10.0)
    with pytest.raises(ValueError):
        SoCSeries(100.0, -1.0, 10.0)


def test_plan_total_groups_by_chunk():
    iv1, iv2 = TimeInterval(0, 600), TimeInterval(600, 1200)
    p1 = PartialService("a", iv1, 500.0, 10.0)
    p2 = PartialService("b", iv1, 500.0, 20.0)
    p3 = PartialService("a", iv2, 500.0, 30.0)
    assert plan_total([(iv1, (p1, p2)), (iv2, (p3,))]) == pytest.approx(60.0)


def test_service_json_round_trip():
    s = make_service(eid="a", owner_id="o", loc=GeoPoint(1.25, -0.5), st=60.0,
                     intensity=1250.0, ec=333.3, tsr=0.62, alpha=0.81, eub=0.75, pcl=0.1)
    again = service_from_dict(json.loads(json.dumps(service_to_dict(s))))
    assert again == s


def test_query_json_round_trip():
    q_dict = {
        "qid": "q0", "t": 0.0, "l": {"x": 0.0, "y": 0.0}, "re": 450.0,
        "i_max": 2000.0, "d": 1800.0, "cl": 0.05,
        "soc": {"soc_initial": 900.0, "soc_zero": 90.0, "drain_rate": 120.0},
    }
    q = query_from_dict(q_dict)
    assert query_to_dict(q) == q_dict


def test_service_from_dict_negative_ec_names_field():
    record = service_to_dict(make_service(
        eid="a", owner_id="o", loc=GeoPoint(0, 0), st=0.0, intensity=500.0, ec=100.0))
    record["ec"] = -5.0
    with pytest.raises(SchemaError, match=r"services\[3\]\.ec"):
        service_from_dict(record, where="services[3]")


def test_service_from_dict_rejects_unknown_field():
    record = service_to_dict(make_service(
        eid="a", owner_id="o", loc=GeoPoint(0, 0), st=0.0, intensity=500.0, ec=100.0))
    record["price"] = 3.0
    with pytest.raises(SchemaError, match="unknown field 'price'"):
        service_from_dict(record)
