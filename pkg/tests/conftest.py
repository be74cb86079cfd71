import numpy as np
import pytest

from resgrid.topology import Line, Region, build_topology


def make_chain(n, main_tie_at=None, capacity=100.0):
    """Chain topology 1-2-...-n with an optional main tie."""
    regions = [Region(id=i, name=f"r{i}", base_demand=100.0) for i in range(1, n + 1)]
    lines = [Line(i, i + 1, capacity) for i in range(1, n)]
    if main_tie_at is not None:
        lines.append(Line(main_tie_at, 0, capacity, is_main_tie=True))
    return build_topology(regions, lines)


def random_topology(rng, max_regions=12, edge_prob=0.3):
    """Random region graph; returns (topology, adjacency edge list)."""
    n = int(rng.integers(1, max_regions + 1))
    regions = [Region(id=i, name=f"r{i}", base_demand=50.0) for i in range(1, n + 1)]
    lines = []
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            if rng.random() < edge_prob:
                lines.append(Line(a, b, 10.0))
    return build_topology(regions, lines), [(ln.from_region, ln.to_region) for ln in lines]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
