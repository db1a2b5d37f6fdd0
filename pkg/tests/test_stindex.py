import numpy as np
import pytest

from cescomp.model import EnergyQuery, GeoPoint, SoCSeries, TimeInterval, make_service
from cescomp.qos import TsrParams
from cescomp.stindex import (
    STBox,
    STIndex,
    build_index,
    linear_scan,
    search_cube,
    select_candidates,
    service_box,
)


def svc(eid, x, y, st, et, intensity=1000.0, tsr=0.9, alpha=1.0):
    return make_service(eid=eid, owner_id=f"o-{eid}", loc=GeoPoint(x, y), st=st, et=et,
                        intensity=intensity, tsr=tsr, alpha=alpha)


def query(x=0.0, y=0.0, t=0.0, d=1800.0, i_max=2000.0, re=400.0):
    return EnergyQuery(qid="q", t=t, l=GeoPoint(x, y), re=re, i_max=i_max, d=d,
                       cl=0.0, soc=SoCSeries(500.0, 50.0, 50.0))


def random_services(rng, n, radius=10.0, horizon=7200.0):
    out = []
    for i in range(n):
        st = float(rng.uniform(-600.0, horizon))
        et = st + float(rng.uniform(60.0, 3600.0))
        out.append(svc(f"s{i}", float(rng.uniform(-radius, radius)),
                       float(rng.uniform(-radius, radius)), st, et,
                       intensity=float(rng.integers(300, 1500))))
    return out


def test_empty_index_returns_nothing():
    index = build_index([])
    assert index.query(STBox((-10, -10, 0), (10, 10, 10000))) == []


def test_singleton_hit_and_miss():
    index = build_index([svc("a", 1.0, 1.0, 0.0, 600.0)])
    assert index.query(STBox((0, 0, 0), (2, 2, 700))) == ["a"]
    assert index.query(STBox((5, 5, 0), (6, 6, 700))) == []


def test_duplicate_eid_rejected():
    index = build_index([svc("a", 0, 0, 0, 600)])
    with pytest.raises(ValueError, match="duplicate eid"):
        index.insert(svc("a", 1, 1, 0, 600))


def test_box_query_matches_linear_scan_on_1000_services():
    rng = np.random.default_rng(11)
    services = random_services(rng, 1000)
    index = build_index(services)
    for _ in range(100):
        lo = (float(rng.uniform(-12, 8)), float(rng.uniform(-12, 8)),
              float(rng.uniform(-600, 6000)))
        hi = (lo[0] + float(rng.uniform(0.5, 8)), lo[1] + float(rng.uniform(0.5, 8)),
              lo[2] + float(rng.uniform(60, 3000)))
        box = STBox(lo, hi)
        assert index.query(box) == linear_scan(services, box)


def test_box_boundaries_inclusive():
    index = build_index([svc("a", 2.0, 0.0, 100.0, 200.0)])
    # Query box touching the service box exactly at one corner still matches.
    assert index.query(STBox((2.0, 0.0, 200.0), (3.0, 1.0, 300.0))) == ["a"]


def test_select_inside_window_unclipped():
    inside = svc("in", 1.0, 1.0, 300.0, 900.0)
    index = build_index([inside])
    got = select_candidates(index, query(), esd=5.0)
    assert len(got) == 1
    assert got[0].interval == inside.interval
    assert got[0].dec == inside.dec


def test_select_excludes_far_service_regardless_of_time():
    index = build_index([svc("far", 6.0, 0.0, 0.0, 1800.0)])
    assert select_candidates(index, query(), esd=5.0) == []


def test_select_boundary_distance_inclusive():
    index = build_index([svc("edge", 5.0, 0.0, 0.0, 1800.0)])
    assert len(select_candidates(index, query(), esd=5.0)) == 1


def test_select_clips_overlapping_service():
    index = build_index([svc("a", 1.0, 0.0, -600.0, 1200.0, intensity=1000.0, tsr=0.9)])
    got = select_candidates(index, query(), esd=5.0)
    assert got[0].interval == TimeInterval(0.0, 1200.0)
    assert got[0].dec == pytest.approx(300.0)


def test_select_clips_service_containing_window():
    index = build_index([svc("a", 1.0, 0.0, -600.0, 3600.0, intensity=1000.0, tsr=0.9)])
    q = query()
    got = select_candidates(index, q, esd=5.0)
    assert got[0].interval == q.window
    assert got[0].dec == pytest.approx(0.5 * 1000.0 * 0.9)


def test_select_drops_services_touching_window_edge_only():
    # A service ending exactly at the window start has no positive overlap.
    index = build_index([svc("a", 0.0, 0.0, -600.0, 0.0)])
    assert select_candidates(index, query(), esd=5.0) == []


def test_select_matches_brute_force_on_random_scenarios():
    rng = np.random.default_rng(23)
    for round_ in range(300):
        services = random_services(rng, int(rng.integers(1, 40)), radius=8.0)
        index = build_index(services)
        q = EnergyQuery(qid="q", t=float(rng.uniform(0, 3600)), l=GeoPoint(
            float(rng.uniform(-6, 6)), float(rng.uniform(-6, 6))),
            re=300.0, i_max=2000.0, d=float(rng.uniform(300, 3600)),
            cl=0.0, soc=SoCSeries(500.0, 50.0, 50.0))
        esd = float(rng.uniform(1.0, 8.0))
        got = select_candidates(index, q, esd)
        window = q.window
        expect = sorted(
            (s.eid for s in services
             if s.loc.distance(q.l) <= esd and s.interval.overlaps(window)),
        )
        assert sorted(p.parent_eid for p in got) == expect
        for p in got:
            assert window.contains(p.interval)
            assert index.services[p.parent_eid].loc.distance(q.l) <= esd
            assert p.dec <= index.services[p.parent_eid].dec + 1e-9


def test_select_candidates_rejects_bad_esd():
    index = build_index([])
    with pytest.raises(ValueError):
        select_candidates(index, query(), esd=0.0)


def test_select_with_tsr_recomputation():
    s = svc("a", 3.0, 4.0, 0.0, 1800.0, tsr=0.9)  # 5 m from origin
    index = build_index([s])
    params = TsrParams()
    got = select_candidates(index, query(), esd=5.0, tsr_params=params,
                            recompute_tsr=True)
    from cescomp.qos import compute_tsr

    expected_tsr = compute_tsr(params, 5.0)
    assert got[0].dec == pytest.approx(s.alpha * s.ec * expected_tsr)
    with pytest.raises(ValueError, match="requires tsr_params"):
        select_candidates(index, query(), esd=5.0, recompute_tsr=True)


def test_search_cube_encloses_esd_disc():
    q = query(x=2.0, y=-1.0)
    cube = search_cube(q, 5.0)
    assert cube.min == (-3.0, -6.0, q.t)
    assert cube.max == (7.0, 4.0, q.t + q.d)


def test_service_box_degenerate_spatial_extent():
    s = svc("a", 1.5, -2.5, 10.0, 400.0)
    box = service_box(s)
    assert box.min[:2] == box.max[:2] == (1.5, -2.5)
    assert (box.min[2], box.max[2]) == (10.0, 400.0)
