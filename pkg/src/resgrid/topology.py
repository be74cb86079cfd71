"""Regional power network: regions, lines, main-grid ties, and islanding.

The grid is a transport/capacity model. Lines carry scalar kW limits and the
main grid is a single reserved node with unlimited supply while connected.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import (
    DanglingLine,
    DuplicateLine,
    DuplicateRegion,
    NonPositiveCapacity,
    UnknownRegion,
)

MAIN_GRID_ID = 0


@dataclass(frozen=True)
class Region:
    id: int
    name: str
    base_demand: float  # kW
    priority: float = 1.0

    def __post_init__(self):
        if self.base_demand < 0:
            raise NonPositiveCapacity(f"region {self.id}: base_demand must be >= 0")
        if self.priority < 0:
            raise NonPositiveCapacity(f"region {self.id}: priority must be >= 0")


@dataclass(frozen=True)
class Line:
    from_region: int
    to_region: int
    capacity: float  # kW
    is_main_tie: bool = False

    def __post_init__(self):
        if self.capacity <= 0:
            raise NonPositiveCapacity(
                f"line {self.from_region}-{self.to_region}: capacity must be > 0"
            )

    def key(self) -> frozenset:
        return frozenset((self.from_region, self.to_region))


@dataclass(frozen=True)
class GridTopology:
    regions: tuple[Region, ...]
    lines: tuple[Line, ...]
    main_grid_id: int = MAIN_GRID_ID
    _by_id: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {r.id: r for r in self.regions})

    @property
    def region_ids(self) -> frozenset[int]:
        return frozenset(self._by_id)

    def region(self, region_id: int) -> Region:
        try:
            return self._by_id[region_id]
        except KeyError:
            raise UnknownRegion(f"no region with id {region_id}") from None

    def neighbors(self, region_id: int) -> frozenset[int]:
        """Adjacent region ids over region-region lines (main ties excluded)."""
        out = set()
        for ln in self.lines:
            if ln.is_main_tie:
                continue
            if ln.from_region == region_id:
                out.add(ln.to_region)
            elif ln.to_region == region_id:
                out.add(ln.from_region)
        return frozenset(out)

    def region_lines(self) -> tuple[Line, ...]:
        return tuple(ln for ln in self.lines if not ln.is_main_tie)

    def main_ties(self) -> tuple[Line, ...]:
        return tuple(ln for ln in self.lines if ln.is_main_tie)


@dataclass(frozen=True)
class IslandPartition:
    islands: tuple[frozenset[int], ...]
    grid_connected: frozenset[int]

    def all_regions(self) -> frozenset[int]:
        out = set(self.grid_connected)
        for isl in self.islands:
            out |= isl
        return frozenset(out)


def build_topology(
    regions: list[Region],
    lines: list[Line],
    main_grid_id: int = MAIN_GRID_ID,
) -> GridTopology:
    """Validate and freeze a topology.

    Rejects duplicate region ids, duplicate (undirected) edges, lines whose
    endpoints are not declared regions, and region ids colliding with the
    reserved main-grid node id.
    """
    ids = set()
    for r in regions:
        if r.id in ids:
            raise DuplicateRegion(f"region id {r.id} declared twice")
        if r.id == main_grid_id:
            raise DuplicateRegion(f"region id {r.id} collides with the main-grid node")
        ids.add(r.id)

    seen_edges = set()
    for ln in lines:
        if ln.is_main_tie:
            endpoints = {ln.from_region, ln.to_region}
            endpoints.discard(main_grid_id)
            if len(endpoints) != 1:
                raise DanglingLine(
                    f"main tie {ln.from_region}-{ln.to_region} must join one region "
                    f"to the main-grid node {main_grid_id}"
                )
            (rid,) = endpoints
            if rid not in ids:
                raise DanglingLine(f"main tie references unknown region {rid}")
        else:
            if ln.from_region == ln.to_region:
                raise DanglingLine(f"line {ln.from_region}-{ln.to_region} is a self-loop")
            for rid in (ln.from_region, ln.to_region):
                if rid not in ids:
                    raise DanglingLine(f"line references unknown region {rid}")
        k = ln.key()
        if k in seen_edges:
            raise DuplicateLine(f"duplicate line {set(k)}")
        seen_edges.add(k)

    return GridTopology(tuple(regions), tuple(lines), main_grid_id)


def _components(nodes: set[int], adjacency: dict[int, set[int]]) -> list[frozenset[int]]:
    remaining = set(nodes)
    comps = []
    while remaining:
        start = min(remaining)
        comp = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adjacency.get(u, ()):
                if v in remaining and v not in comp:
                    comp.add(v)
                    queue.append(v)
        comps.append(frozenset(comp))
        remaining -= comp
    return sorted(comps, key=min)


def connected_components(topology: GridTopology) -> list[frozenset[int]]:
    """Connected components of the region-only subgraph (main ties ignored)."""
    adj: dict[int, set[int]] = {rid: set() for rid in topology.region_ids}
    for ln in topology.region_lines():
        adj[ln.from_region].add(ln.to_region)
        adj[ln.to_region].add(ln.from_region)
    return _components(set(topology.region_ids), adj)


def isolate(topology: GridTopology, cut_set: set[int]) -> IslandPartition:
    """Preventively island ``cut_set``.

    Removes every main tie of a cut region and every line crossing the cut
    boundary, then partitions the surviving graph. Regions still reachable
    from the main-grid node form ``grid_connected``; the rest are islands.
    """
    cut = set(cut_set)
    unknown = cut - topology.region_ids
    if unknown:
        raise UnknownRegion(f"cut set references unknown regions {sorted(unknown)}")

    adj: dict[int, set[int]] = {rid: set() for rid in topology.region_ids}
    adj[topology.main_grid_id] = set()
    for ln in topology.region_lines():
        # drop lines crossing the cut boundary
        if (ln.from_region in cut) != (ln.to_region in cut):
            continue
        adj[ln.from_region].add(ln.to_region)
        adj[ln.to_region].add(ln.from_region)
    for tie in topology.main_ties():
        rid = next(iter(set((tie.from_region, tie.to_region)) - {topology.main_grid_id}))
        if rid in cut:
            continue
        adj[topology.main_grid_id].add(rid)
        adj[rid].add(topology.main_grid_id)

    nodes = set(topology.region_ids) | {topology.main_grid_id}
    comps = _components(nodes, adj)
    grid_connected: frozenset[int] = frozenset()
    islands = []
    for comp in comps:
        if topology.main_grid_id in comp:
            grid_connected = frozenset(comp - {topology.main_grid_id})
        else:
            islands.append(comp)
    return IslandPartition(tuple(islands), grid_connected)
