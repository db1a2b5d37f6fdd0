"""3D R-tree over (x, y, t) service extents and the candidate-selection step.

Services are indexed as boxes with a degenerate spatial extent (their point
location) and their availability interval on the time axis. Correctness is
defined against a linear-scan oracle; the quadratic-split insert is purely a
performance choice. After build the index is immutable and supports
unlimited concurrent box queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import EnergyService, EnergyQuery, PartialService, TimeInterval, derive_partial
from .qos import TsrParams, compute_tsr


@dataclass(frozen=True, slots=True)
class STBox:
    """Axis-aligned box in (x, y, t); bounds are inclusive."""

    min: tuple[float, float, float]
    max: tuple[float, float, float]

    def __post_init__(self) -> None:
        if any(a > b for a, b in zip(self.min, self.max)):
            raise ValueError(f"box min must be <= max componentwise: {self.min} / {self.max}")

    def intersects(self, other: "STBox") -> bool:
        return all(a <= d and c <= b
                   for a, b, c, d in zip(self.min, self.max, other.min, other.max))


def _merge(a: STBox, b: STBox) -> STBox:
    return STBox(tuple(map(min, a.min, b.min)), tuple(map(max, a.max, b.max)))


def _volume(box: STBox) -> float:
    v = 1.0
    for lo, hi in zip(box.min, box.max):
        v *= hi - lo
    return v


def _enlargement(box: STBox, extra: STBox) -> float:
    return _volume(_merge(box, extra)) - _volume(box)


class _Node:
    __slots__ = ("leaf", "entries", "box")

    def __init__(self, leaf: bool):
        self.leaf = leaf
        self.entries: list[tuple[STBox, object]] = []  # payload: eid or child _Node
        self.box: STBox | None = None

    def recompute_box(self) -> None:
        box = self.entries[0][0]
        for b, _ in self.entries[1:]:
            box = _merge(box, b)
        self.box = box


class STIndex:
    """Static R-tree mapping service boxes to service ids."""

    def __init__(self, fanout: int = 8):
        if fanout < 4:
            raise ValueError("fanout must be >= 4")
        self.fanout = fanout
        self._min_fill = max(2, fanout // 2 - 1)
        self._root = _Node(leaf=True)
        self._services: dict[str, EnergyService] = {}

    def __len__(self) -> int:
        return len(self._services)

    @property
    def services(self) -> dict[str, EnergyService]:
        return self._services

    def insert(self, service: EnergyService) -> None:
        if service.eid in self._services:
            raise ValueError(f"duplicate eid {service.eid!r}")
        self._services[service.eid] = service
        box = service_box(service)
        self._insert_entry(box, service.eid)

    def query(self, box: STBox) -> list[str]:
        """Ids of all services whose boxes intersect `box`, sorted for determinism."""
        found: list[str] = []
        if self._root.box is not None and self._root.box.intersects(box):
            self._collect(self._root, box, found)
        found.sort()
        return found

    # -- internals ----------------------------------------------------------

    def _collect(self, node: _Node, box: STBox, out: list[str]) -> None:
        for b, payload in node.entries:
            if b.intersects(box):
                if node.leaf:
                    out.append(payload)
                else:
                    self._collect(payload, box, out)

    def _insert_entry(self, box: STBox, eid: str) -> None:
        path = [self._root]
        node = self._root
        while not node.leaf:
            node = self._choose_subtree(node, box)
            path.append(node)
        node.entries.append((box, eid))
        self._adjust(path)

    def _choose_subtree(self, node: _Node, box: STBox) -> "_Node":
        best = None
        best_key = None
        for b, child in node.entries:
            key = (_enlargement(b, box), _volume(b))
            if best_key is None or key < best_key:
                best_key = key
                best = child
        return best

    def _adjust(self, path: list[_Node]) -> None:
        for depth in range(len(path) - 1, -1, -1):
            node = path[depth]
            if len(node.entries) > self.fanout:
                sibling = self._split(node)
                if depth == 0:
                    new_root = _Node(leaf=False)
                    new_root.entries = [(node.box, node), (sibling.box, sibling)]
                    new_root.recompute_box()
                    self._root = new_root
                else:
                    parent = path[depth - 1]
                    parent.entries = [(node.box if c is node else b, c)
                                      for b, c in parent.entries]
                    parent.entries.append((sibling.box, sibling))
            node.recompute_box()
            if depth > 0:
                parent = path[depth - 1]
                parent.entries = [(node.box if c is node else b, c) for b, c in parent.entries]

    def _split(self, node: _Node) -> "_Node":
        """Guttman quadratic split; keeps `node`, returns the new sibling."""
        entries = node.entries
        # Pick seeds: the pair wasting the most volume when joined.
        worst = -math.inf
        seed_a = seed_b = 0
        for i in range(len(entries)):
            for j in range(i + 1, len(entries)):
                waste = (_volume(_merge(entries[i][0], entries[j][0]))
                         - _volume(entries[i][0]) - _volume(entries[j][0]))
                if waste > worst:
                    worst = waste
                    seed_a, seed_b = i, j
        group_a = [entries[seed_a]]
        group_b = [entries[seed_b]]
        box_a = entries[seed_a][0]
        box_b = entries[seed_b][0]
        rest = [e for k, e in enumerate(entries) if k not in (seed_a, seed_b)]
        while rest:
            # Honor the minimum fill before preferences.
            if len(group_a) + len(rest) == self._min_fill:
                group_a.extend(rest)
                for b, _ in rest:
                    box_a = _merge(box_a, b)
                break
            if len(group_b) + len(rest) == self._min_fill:
                group_b.extend(rest)
                for b, _ in rest:
                    box_b = _merge(box_b, b)
                break
            # Pick next: the entry with the strongest preference for one group.
            best_idx = 0
            best_diff = -1.0
            for k, (b, _) in enumerate(rest):
                diff = abs(_enlargement(box_a, b) - _enlargement(box_b, b))
                if diff > best_diff:
                    best_diff = diff
                    best_idx = k
            box, payload = rest.pop(best_idx)
            grow_a = _enlargement(box_a, box)
            grow_b = _enlargement(box_b, box)
            if (grow_a, _volume(box_a), len(group_a)) <= (grow_b, _volume(box_b), len(group_b)):
                group_a.append((box, payload))
                box_a = _merge(box_a, box)
            else:
                group_b.append((box, payload))
                box_b = _merge(box_b, box)
        node.entries = group_a
        node.recompute_box()
        sibling = _Node(leaf=node.leaf)
        sibling.entries = group_b
        sibling.recompute_box()
        return sibling


def service_box(service: EnergyService) -> STBox:
    loc, iv = service.loc, service.interval
    return STBox((loc.x, loc.y, iv.st), (loc.x, loc.y, iv.et))


def build_index(services: list[EnergyService], fanout: int = 8) -> STIndex:
    index = STIndex(fanout=fanout)
    for s in services:
        index.insert(s)
    return index


def linear_scan(services: list[EnergyService], box: STBox) -> list[str]:
    """Brute-force equivalent of STIndex.query, used as the correctness oracle."""
    return sorted(s.eid for s in services if service_box(s).intersects(box))


def search_cube(q: EnergyQuery, esd: float) -> STBox:
    """Axis-aligned pre-filter cube around the query; the exact distance check
    happens afterwards, so the cube only needs to enclose the ESD disc."""
    return STBox(
        (q.l.x - esd, q.l.y - esd, q.t),
        (q.l.x + esd, q.l.y + esd, q.t + q.d),
    )


def select_candidates(
    index: STIndex,
    q: EnergyQuery,
    esd: float,
    tsr_params: TsrParams | None = None,
    *,
    recompute_tsr: bool = False,
) -> list[PartialService]:
    """Nearby available services, clipped to the query window.

    A service qualifies when its exact Euclidean distance to the consumer is
    within `esd` and its interval positively overlaps [q.t, q.t + q.d].
    Services inside the window pass through with dec unchanged; overlapping
    ones are clipped with dec recomputed from the new duration.

    With `recompute_tsr`, each candidate's success rate is re-evaluated from
    its actual distance to the consumer using `tsr_params` before clipping;
    by default the advertised per-service tsr is authoritative.
    """
    if esd <= 0:
        raise ValueError(f"esd must be positive, got {esd}")
    window = q.window
    out: list[PartialService] = []
    for eid in index.query(search_cube(q, esd)):
        service = index.services[eid]
        distance = service.loc.distance(q.l)
        if distance > esd:
            continue
        if recompute_tsr:
            if tsr_params is None:
                raise ValueError("recompute_tsr requires tsr_params")
            tsr = compute_tsr(tsr_params, distance)
            service = EnergyService(
                eid=service.eid, owner_id=service.owner_id, loc=service.loc,
                interval=service.interval, ec=service.ec, intensity=service.intensity,
                tsr=tsr, alpha=service.alpha, dec=service.alpha * service.ec * tsr,
                eub=service.eub, pcl=service.pcl,
            )
        partial = derive_partial(service, window)
        if partial is not None:
            out.append(partial)
    out.sort(key=lambda p: (p.interval.st, p.interval.et, p.parent_eid))
    return out
