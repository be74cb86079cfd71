"""Hazard sensing, risk scoring, spread forecasting, and isolation selection.

Hazard spread is an independent-cascade process on the region graph: every
time slot, each line from an affected region to an unaffected one carries the
hazard with a fixed per-slot probability. Wildfires and hurricanes share the
machinery and differ only in default parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import TooLarge, UnknownRegion
from .topology import GridTopology

# intensity below which a burning region is considered extinguished
EXTINCTION_INTENSITY = 0.05

# per-slot edge spread probability used when the scenario gives none
DEFAULT_EDGE_PROB = {"wildfire": 0.3, "hurricane": 0.6}

EXACT_REGION_LIMIT = 15


@dataclass(frozen=True)
class SensorReading:
    region_id: int
    timestamp: int
    intensity: float  # synthetic hazard signal in [0, 1]

    def __post_init__(self):
        if not 0.0 <= self.intensity <= 1.0:
            raise ValueError(f"intensity {self.intensity} outside [0, 1]")


@dataclass(frozen=True)
class RiskMap:
    scores: dict[int, float]
    timestamp: int


@dataclass(frozen=True)
class SpreadForecast:
    horizon: int
    prob_affected: dict[int, float]
    method: str  # "monte-carlo" | "exact"
    sample_count: int | None = None


@dataclass(frozen=True)
class HazardProcess:
    kind: str  # "wildfire" | "hurricane"
    ignition_set: frozenset[int]
    edge_spread_prob: dict[frozenset, float] = field(default_factory=dict)
    default_edge_prob: float | None = None
    intensity_decay: float = 0.6

    def __post_init__(self):
        for k, p in self.edge_spread_prob.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"edge probability {p} for {set(k)} outside [0, 1]")
        if not 0.0 < self.intensity_decay <= 1.0:
            raise ValueError("intensity_decay must lie in (0, 1]")

    def edge_prob(self, a: int, b: int) -> float:
        p = self.edge_spread_prob.get(frozenset((a, b)))
        if p is None:
            p = self.default_edge_prob
        if p is None:
            p = DEFAULT_EDGE_PROB.get(self.kind, DEFAULT_EDGE_PROB["wildfire"])
        return p


def score_risk(
    readings: list[SensorReading],
    topology: GridTopology,
    smoothing: float,
) -> RiskMap:
    """Blend each region's latest sensor intensity with its neighbors' mean.

    score(r) = a * latest(r) + (1 - a) * mean(latest over neighbors of r).
    Regions without a reading contribute intensity 0.
    """
    if not 0.0 < smoothing <= 1.0:
        raise ValueError("smoothing must lie in (0, 1]")
    latest: dict[int, tuple[int, float]] = {}
    last_ts = 0
    for rd in readings:
        if rd.region_id not in topology.region_ids:
            raise UnknownRegion(f"reading references unknown region {rd.region_id}")
        prev = latest.get(rd.region_id)
        if prev is None or rd.timestamp >= prev[0]:
            latest[rd.region_id] = (rd.timestamp, rd.intensity)
        last_ts = max(last_ts, rd.timestamp)

    def intensity(rid: int) -> float:
        entry = latest.get(rid)
        return entry[1] if entry else 0.0

    scores = {}
    for rid in sorted(topology.region_ids):
        nbrs = sorted(topology.neighbors(rid))
        nbr_mean = sum(intensity(n) for n in nbrs) / len(nbrs) if nbrs else 0.0
        scores[rid] = smoothing * intensity(rid) + (1.0 - smoothing) * nbr_mean
    return RiskMap(scores=scores, timestamp=last_ts)


def _edge_prob_matrix(process: HazardProcess, topology: GridTopology,
                      order: list[int]) -> np.ndarray:
    idx = {rid: i for i, rid in enumerate(order)}
    n = len(order)
    P = np.zeros((n, n))
    for ln in topology.region_lines():
        p = process.edge_prob(ln.from_region, ln.to_region)
        i, j = idx[ln.from_region], idx[ln.to_region]
        P[i, j] = p
        P[j, i] = p
    return P


def simulate_spread(
    process: HazardProcess,
    topology: GridTopology,
    horizon: int,
    samples: int,
    seed: int,
) -> SpreadForecast:
    """Monte Carlo estimate of per-region affectedness within ``horizon`` slots.

    Each slot, every line from an affected to an unaffected region ignites the
    latter independently with its per-slot probability. Reproducible for a
    fixed seed.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    order = sorted(topology.region_ids)
    n = len(order)
    P = _edge_prob_matrix(process, topology, order)
    # log(1-p); floor at -800 so exp() underflows to exactly 0 for p == 1
    with np.errstate(divide="ignore"):
        L = np.log1p(-np.minimum(P, 1.0))
    L = np.maximum(L, -800.0)

    rng = np.random.default_rng(seed)
    burning = np.zeros((samples, n), dtype=bool)
    for rid in process.ignition_set:
        if rid not in topology.region_ids:
            raise UnknownRegion(f"ignition references unknown region {rid}")
        burning[:, order.index(rid)] = True

    for _ in range(horizon):
        p_safe = np.exp(burning.astype(float) @ L)
        ignite = rng.random((samples, n)) < (1.0 - p_safe)
        burning |= ignite
    probs = burning.mean(axis=0)
    return SpreadForecast(
        horizon=horizon,
        prob_affected={rid: float(probs[i]) for i, rid in enumerate(order)},
        method="monte-carlo",
        sample_count=samples,
    )


def exact_spread_probability(
    process: HazardProcess,
    topology: GridTopology,
    horizon: int,
) -> SpreadForecast:
    """Exact affectedness probabilities by dynamic programming over burning sets.

    Enumerates the distribution of the burning set slot by slot; feasible for
    small graphs only and intended as the verification oracle for
    :func:`simulate_spread`.
    """
    order = sorted(topology.region_ids)
    if len(order) > EXACT_REGION_LIMIT:
        raise TooLarge(f"exact enumeration limited to {EXACT_REGION_LIMIT} regions")
    for rid in process.ignition_set:
        if rid not in topology.region_ids:
            raise UnknownRegion(f"ignition references unknown region {rid}")

    neighbors = {rid: sorted(topology.neighbors(rid)) for rid in order}
    start = frozenset(process.ignition_set)
    dist: dict[frozenset, float] = {start: 1.0}
    for _ in range(horizon):
        nxt: dict[frozenset, float] = {}
        for state, mass in dist.items():
            candidates = []
            for v in order:
                if v in state:
                    continue
                p_safe = 1.0
                for u in neighbors[v]:
                    if u in state:
                        p_safe *= 1.0 - process.edge_prob(u, v)
                q = 1.0 - p_safe
                if q > 0.0:
                    candidates.append((v, q))
            if not candidates:
                nxt[state] = nxt.get(state, 0.0) + mass
                continue
            for picks in product((False, True), repeat=len(candidates)):
                p = mass
                newly = []
                for (v, q), take in zip(candidates, picks):
                    p *= q if take else 1.0 - q
                    if take:
                        newly.append(v)
                if p == 0.0:
                    continue
                ns = state | frozenset(newly)
                nxt[ns] = nxt.get(ns, 0.0) + p
        dist = nxt

    probs = {rid: 0.0 for rid in order}
    for state, mass in dist.items():
        for rid in state:
            probs[rid] += mass
    probs = {rid: min(1.0, p) for rid, p in probs.items()}
    return SpreadForecast(horizon=horizon, prob_affected=probs, method="exact")


def select_isolation_set(
    forecast: SpreadForecast,
    risk: RiskMap,
    threshold: float,
) -> frozenset[int]:
    """Regions whose forecast affectedness or instantaneous risk reaches the
    threshold. Antitone in the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    out = set()
    for rid, p in forecast.prob_affected.items():
        if max(p, risk.scores.get(rid, 0.0)) >= threshold:
            out.add(rid)
    return frozenset(out)


def synthetic_readings(
    burning: dict[int, float],
    topology: GridTopology,
    decay: float,
    timestamp: int,
) -> list[SensorReading]:
    """Sensor proxy signals: burning regions read their intensity, their direct
    neighbors read a decayed echo, everything else reads 0."""
    values: dict[int, float] = {}
    for rid, inten in burning.items():
        values[rid] = max(values.get(rid, 0.0), min(1.0, inten))
        for nb in topology.neighbors(rid):
            if nb not in burning:
                values[nb] = max(values.get(nb, 0.0), min(1.0, inten * decay))
    return [
        SensorReading(region_id=rid, timestamp=timestamp, intensity=values.get(rid, 0.0))
        for rid in sorted(topology.region_ids)
    ]


def step_hazard(
    burning: dict[int, float],
    process: HazardProcess,
    topology: GridTopology,
    rng: np.random.Generator,
    immune: set[int] | None = None,
) -> dict[int, float]:
    """Advance the realized hazard one slot.

    Intensities decay multiplicatively; regions below the extinction level
    drop out; the hazard jumps each boundary line with its per-slot
    probability, igniting new regions at intensity 1. Regions in ``immune``
    (typically already burned out) cannot ignite again.
    """
    immune = immune or set()
    nxt: dict[int, float] = {}
    for rid, inten in sorted(burning.items()):
        decayed = inten * process.intensity_decay
        if decayed >= EXTINCTION_INTENSITY:
            nxt[rid] = decayed
    for rid in sorted(burning):
        for nb in sorted(topology.neighbors(rid)):
            if nb in burning or nb in nxt or nb in immune:
                continue
            if rng.random() < process.edge_prob(rid, nb):
                nxt[nb] = 1.0
    return nxt
