"""Scenario configuration, the top-level simulation loop, and result records.

A scenario file is YAML with named sections (topology, agents, hazard,
market, metrics, run). The per-slot loop advances the realized hazard,
scores risk, selects and applies preventive islanding, solves one market per
island (warm-started from the previous slot), applies atomic transactions,
and records served/demanded power; metrics are computed at the end.

All randomness flows from one seed through two named sub-streams (hazard,
init), so changing the agent population does not perturb hazard draws.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import metrics as met
from .agents import DemandAgentState, StorageAgentState
from .errors import (
    ParseError,
    SimulationError,
    TooLargeForOracle,
    ValidationError,
)
from .hazard import (
    HazardProcess,
    RiskMap,
    SpreadForecast,
    score_risk,
    select_isolation_set,
    simulate_spread,
    step_hazard,
    synthetic_readings,
)
from .lp_oracle import market_lp_optimum
from .market import (
    CouplingConstraint,
    OfferStatus,
    StepSchedule,
    TransactionLog,
    run_market,
)
from .topology import GridTopology, Line, Region, build_topology, isolate

MODE_BASELINE = "baseline"
MODE_RESILIENT = "resilient"


@dataclass(frozen=True)
class HazardConfig:
    process: HazardProcess
    start_slot: int = 1
    forecast_horizon: int = 2
    samples: int = 2000
    threshold: float = 0.5
    smoothing: float = 0.7


@dataclass(frozen=True)
class MarketConfig:
    xi: float = 1e-3
    schedule: StepSchedule = field(default_factory=StepSchedule)
    max_iter: int = 10000
    export_threshold: float = 0.0  # kWh, strict SoC floor for exporting


@dataclass(frozen=True)
class MetricsConfig:
    voll: float = 10.0  # $/kWh


@dataclass(frozen=True)
class Scenario:
    name: str
    topology: GridTopology
    demand_agents: tuple[DemandAgentState, ...]
    storage_agents: tuple[StorageAgentState, ...]
    hazard: HazardConfig | None
    market: MarketConfig
    metrics: MetricsConfig
    horizon: int
    dt: float
    seed: int
    mode: str


@dataclass
class EquilibriumRecord:
    slot: int
    island: tuple[int, ...]
    iterations: int
    residual: float
    converged: bool
    violation: float
    lam: tuple[float, ...]
    x: dict[int, float]


@dataclass
class TransactionRecord:
    slot: int
    offer_id: int
    from_dsa: int
    to_dra: int
    quantity: float
    incentive: float
    status: str


@dataclass
class SlotRecord:
    slot: int
    burning: tuple[int, ...]
    cut_set: tuple[int, ...]
    islands: tuple[tuple[int, ...], ...]
    grid_connected: tuple[int, ...]
    served: dict[int, float]
    demanded: dict[int, float]


@dataclass
class RunResult:
    name: str
    mode: str
    seed: int
    dt: float
    slots: list[SlotRecord]
    equilibria: list[EquilibriumRecord]
    transactions: list[TransactionRecord]
    solver_rows: list[tuple[int, str, int, float, float]]
    logs: list[tuple[int, TransactionLog]]
    soc_initial: dict[int, float]
    soc_trajectory: dict[int, list[float]]  # per DSA, SoC at end of each slot
    x_storage: dict[int, list[float]]  # per DSA, realized power per slot (kW)
    energy_delivered: dict[int, float]  # per DRA, kWh over the episode
    timeline: list[met.PerformanceSample]
    curve: met.EightPointCurve
    report: met.ResilienceReport
    oracle_gaps: list[tuple[int, tuple[int, ...], float]] | None = None

    def report_dict(self) -> dict:
        r = self.report
        return {
            "scenario": self.name,
            "mode": self.mode,
            "seed": self.seed,
            "loss_area_index_hours": r.loss_area,
            "unserved_energy_kwh": r.unserved_energy,
            "monetary_loss_usd": r.monetary_loss,
            "p_min": r.p_min,
            "time_below_threshold_hours": r.time_below_threshold,
            "t_d": self.curve.t_d,
            "t_m": self.curve.t_m,
            "eight_point_curve": [
                {"label": p.label, "t": p.t, "value": p.value}
                for p in self.curve.points
            ],
        }

    def write_outputs(self, out_dir: str | Path, fmt: str = "csv") -> list[Path]:
        """Serialize results; byte-identical for identical runs."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []

        def w(path: Path, text: str):
            path.write_bytes(text.encode("utf-8"))
            written.append(path)

        if fmt == "csv":
            lines = ["t,served_kW,demanded_kW,index"]
            for s in self.timeline:
                lines.append(f"{s.t},{s.served!r},{s.demanded!r},{s.index!r}")
            w(out / "timeline.csv", "\n".join(lines) + "\n")

            lines = ["slot,island,m,residual,max_violation"]
            for slot, isl, m, res, viol in self.solver_rows:
                lines.append(f"{slot},{isl},{m},{res!r},{viol!r}")
            w(out / "solver.csv", "\n".join(lines) + "\n")

            lines = ["slot,offer_id,from_dsa,to_dra,quantity_kWh,incentive_usd_per_kWh,status"]
            for tr in self.transactions:
                lines.append(
                    f"{tr.slot},{tr.offer_id},{tr.from_dsa},{tr.to_dra},"
                    f"{tr.quantity!r},{tr.incentive!r},{tr.status}"
                )
            w(out / "transactions.csv", "\n".join(lines) + "\n")
        else:
            full = {
                "report": self.report_dict(),
                "timeline": [
                    {"t": s.t, "served_kW": s.served, "demanded_kW": s.demanded,
                     "index": s.index}
                    for s in self.timeline
                ],
                "equilibria": [
                    {"slot": e.slot, "island": list(e.island),
                     "iterations": e.iterations, "residual": e.residual,
                     "converged": e.converged, "violation": e.violation,
                     "lam": list(e.lam),
                     "x": {str(k): v for k, v in sorted(e.x.items())}}
                    for e in self.equilibria
                ],
                "transactions": [
                    {"slot": tr.slot, "offer_id": tr.offer_id,
                     "from_dsa": tr.from_dsa, "to_dra": tr.to_dra,
                     "quantity_kWh": tr.quantity, "incentive": tr.incentive,
                     "status": tr.status}
                    for tr in self.transactions
                ],
            }
            w(out / "run_result.json",
              json.dumps(full, sort_keys=True, indent=2) + "\n")

        w(out / "report.json",
          json.dumps(self.report_dict(), sort_keys=True, indent=2) + "\n")
        return written


# -- scenario file parsing -------------------------------------------------

def _require(mapping: dict, key: str, path: str):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ValidationError(f"missing required field {path}.{key}")
    return mapping[key]


def _num(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path} must be a number, got {value!r}")
    return float(value)


def _int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{path} must be an integer, got {value!r}")
    return value


def _node_id(value, path: str) -> int:
    if value in ("main", "grid"):
        return 0
    return _int(value, path)


def load_scenario(path: str | Path) -> Scenario:
    """Parse and fully validate a scenario file."""
    p = Path(path)
    try:
        raw = yaml.safe_load(p.read_text())
    except FileNotFoundError:
        raise ParseError(f"scenario file not found: {p}") from None
    except yaml.YAMLError as exc:
        raise ParseError(f"cannot parse {p}: {exc}") from None
    if not isinstance(raw, dict):
        raise ParseError(f"{p}: top level must be a mapping")
    return scenario_from_dict(raw, name=raw.get("name", p.stem))


def scenario_from_dict(raw: dict, name: str = "scenario") -> Scenario:
    topo_raw = _require(raw, "topology", "")
    regions = []
    for i, r in enumerate(_require(topo_raw, "regions", "topology")):
        path = f"topology.regions[{i}]"
        try:
            regions.append(Region(
                id=_int(_require(r, "id", path), f"{path}.id"),
                name=str(r.get("name", f"region-{r.get('id', i)}")),
                base_demand=_num(_require(r, "base_demand_kw", path), f"{path}.base_demand_kw"),
                priority=_num(r.get("priority", 1.0), f"{path}.priority"),
            ))
        except SimulationError:
            raise
        except ValueError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    lines = []
    for i, ln in enumerate(topo_raw.get("lines", [])):
        path = f"topology.lines[{i}]"
        try:
            lines.append(Line(
                from_region=_node_id(_require(ln, "from", path), f"{path}.from"),
                to_region=_node_id(_require(ln, "to", path), f"{path}.to"),
                capacity=_num(_require(ln, "capacity_kw", path), f"{path}.capacity_kw"),
                is_main_tie=bool(ln.get("main_tie", False)),
            ))
        except SimulationError:
            raise
        except ValueError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    try:
        topology = build_topology(regions, lines)
    except SimulationError as exc:
        raise ValidationError(f"topology: {exc}") from None

    agents_raw = _require(raw, "agents", "")
    dras = []
    for i, a in enumerate(agents_raw.get("demand", [])):
        path = f"agents.demand[{i}]"
        rid = _int(_require(a, "region", path), f"{path}.region")
        if rid not in topology.region_ids:
            raise ValidationError(f"{path}.region: unknown region {rid}")
        try:
            dras.append(DemandAgentState(
                id=_int(_require(a, "id", path), f"{path}.id"),
                region_id=rid,
                load_min=_num(a.get("load_min_kw", 0.0), f"{path}.load_min_kw"),
                load_max=_num(_require(a, "load_max_kw", path), f"{path}.load_max_kw"),
                energy_requirement=(
                    float("inf") if a.get("energy_requirement_kwh") is None
                    else _num(a["energy_requirement_kwh"],
                              f"{path}.energy_requirement_kwh")
                ),
                utility_weight=_num(_require(a, "utility_weight", path),
                                    f"{path}.utility_weight"),
                interested=bool(a.get("interested", True)),
            ))
        except SimulationError:
            raise
        except ValueError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    dsas = []
    for i, a in enumerate(agents_raw.get("storage", [])):
        path = f"agents.storage[{i}]"
        rid = _int(_require(a, "region", path), f"{path}.region")
        if rid not in topology.region_ids:
            raise ValidationError(f"{path}.region: unknown region {rid}")
        try:
            dsas.append(StorageAgentState(
                id=_int(_require(a, "id", path), f"{path}.id"),
                region_id=rid,
                soc=_num(_require(a, "soc_kwh", path), f"{path}.soc_kwh"),
                soc_min=_num(a.get("soc_min_kwh", 0.0), f"{path}.soc_min_kwh"),
                soc_max=_num(_require(a, "soc_max_kwh", path), f"{path}.soc_max_kwh"),
                charge_limit=_num(a.get("charge_limit_kw", 0.0), f"{path}.charge_limit_kw"),
                discharge_limit=_num(_require(a, "discharge_limit_kw", path),
                                     f"{path}.discharge_limit_kw"),
                eta_c=_num(a.get("eta_c", 1.0), f"{path}.eta_c"),
                eta_d=_num(a.get("eta_d", 1.0), f"{path}.eta_d"),
                degradation_cost=_num(a.get("degradation_cost", 0.0),
                                      f"{path}.degradation_cost"),
                interested=bool(a.get("interested", True)),
                min_incentive=_num(a.get("min_incentive", 0.0), f"{path}.min_incentive"),
            ))
        except SimulationError:
            raise
        except ValueError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    ids = [a.id for a in dras] + [a.id for a in dsas]
    if len(ids) != len(set(ids)):
        raise ValidationError("agents: agent ids must be unique")

    hazard = None
    if raw.get("hazard"):
        h = raw["hazard"]
        kind = h.get("kind", "wildfire")
        if kind not in ("wildfire", "hurricane"):
            raise ValidationError(f"hazard.kind: unknown kind {kind!r}")
        ignition = frozenset(
            _int(r, f"hazard.ignition[{i}]") for i, r in enumerate(h.get("ignition", []))
        )
        unknown = ignition - topology.region_ids
        if unknown:
            raise ValidationError(f"hazard.ignition: unknown regions {sorted(unknown)}")
        edge_probs = {}
        for key, pv in (h.get("edge_probs") or {}).items():
            try:
                a, b = (int(s) for s in str(key).split("-"))
            except ValueError:
                raise ValidationError(
                    f"hazard.edge_probs: key {key!r} must look like '1-2'"
                ) from None
            edge_probs[frozenset((a, b))] = _num(pv, f"hazard.edge_probs[{key}]")
        default_p = h.get("default_edge_prob")
        threshold = _num(h.get("threshold", 0.5), "hazard.threshold")
        if not 0.0 <= threshold <= 1.0:
            raise ValidationError("hazard.threshold must lie in [0, 1]")
        smoothing = _num(h.get("smoothing", 0.7), "hazard.smoothing")
        if not 0.0 < smoothing <= 1.0:
            raise ValidationError("hazard.smoothing must lie in (0, 1]")
        try:
            process = HazardProcess(
                kind=kind,
                ignition_set=ignition,
                edge_spread_prob=edge_probs,
                default_edge_prob=None if default_p is None
                else _num(default_p, "hazard.default_edge_prob"),
                intensity_decay=_num(h.get("intensity_decay", 0.6),
                                     "hazard.intensity_decay"),
            )
        except ValueError as exc:
            raise ValidationError(f"hazard: {exc}") from None
        hazard = HazardConfig(
            process=process,
            start_slot=_int(h.get("start_slot", 1), "hazard.start_slot"),
            forecast_horizon=_int(h.get("forecast_horizon", 2), "hazard.forecast_horizon"),
            samples=_int(h.get("samples", 2000), "hazard.samples"),
            threshold=threshold,
            smoothing=smoothing,
        )

    m = raw.get("market", {}) or {}
    xi = _num(m.get("xi", 1e-3), "market.xi")
    if xi <= 0:
        raise ValidationError("market.xi must be > 0")
    sched_kind = m.get("step_schedule", "diminishing")
    c0 = m.get("step_c0")
    try:
        schedule = StepSchedule(sched_kind, None if c0 is None else _num(c0, "market.step_c0"))
    except ValueError as exc:
        raise ValidationError(f"market.step_schedule: {exc}") from None
    max_iter = _int(m.get("max_iter", 10000), "market.max_iter")
    if max_iter < 1:
        raise ValidationError("market.max_iter must be >= 1")
    market = MarketConfig(
        xi=xi,
        schedule=schedule,
        max_iter=max_iter,
        export_threshold=_num(m.get("export_threshold_kwh", 0.0),
                              "market.export_threshold_kwh"),
    )

    met_raw = raw.get("metrics", {}) or {}
    voll = _num(met_raw.get("voll", 10.0), "metrics.voll")
    if voll < 0:
        raise ValidationError("metrics.voll must be >= 0")

    run = raw.get("run", {}) or {}
    horizon = _int(run.get("horizon", 1), "run.horizon")
    if horizon < 1:
        raise ValidationError("run.horizon must be >= 1")
    dt = _num(run.get("dt_hours", 1.0), "run.dt_hours")
    if dt <= 0:
        raise ValidationError("run.dt_hours must be > 0")

    mode = raw.get("mode", MODE_RESILIENT)
    if mode not in (MODE_BASELINE, MODE_RESILIENT):
        raise ValidationError(f"mode must be baseline or resilient, got {mode!r}")

    return Scenario(
        name=str(name),
        topology=topology,
        demand_agents=tuple(dras),
        storage_agents=tuple(dsas),
        hazard=hazard,
        market=market,
        metrics=MetricsConfig(voll=voll),
        horizon=horizon,
        dt=dt,
        seed=_int(raw.get("seed", 0), "seed"),
        mode=str(mode),
    )


# -- simulation loop -------------------------------------------------------

def run_scenario(scenario: Scenario, oracle: bool = False) -> RunResult:
    """Execute the full pipeline; deterministic for a fixed scenario seed.

    With ``oracle=True``, every market solve is additionally checked against
    the centralized LP optimum (vertex enumeration) and the relative
    objective gaps are collected.
    """
    topo = scenario.topology
    dt = scenario.dt
    ss = np.random.SeedSequence(scenario.seed)
    hazard_seq, init_seq = ss.spawn(2)
    hazard_rng = np.random.default_rng(hazard_seq)
    init_rng = np.random.default_rng(init_seq)

    dras = sorted((copy.deepcopy(a) for a in scenario.demand_agents), key=lambda a: a.id)
    dsas = sorted((copy.deepcopy(a) for a in scenario.storage_agents), key=lambda a: a.id)
    # conventional baseline profiles seed the t=1 storage decision
    for dsa in dsas:
        dsa.p_con = tuple(
            init_rng.uniform(dsa.soc_min, dsa.soc_max, scenario.horizon).tolist()
        )
        dsa.q_con = tuple(
            init_rng.uniform(dsa.soc_min, dsa.soc_max, scenario.horizon).tolist()
        )
    load_cap = {d.id: d.load_max for d in dras}
    remaining_energy = {d.id: d.energy_requirement for d in dras}
    priorities = {
        d.id: topo.region(d.region_id).priority for d in dras
    }

    burning: dict[int, float] = {}
    ever_burned: set[int] = set()
    warm: dict[frozenset, object] = {}
    slots: list[SlotRecord] = []
    equilibria: list[EquilibriumRecord] = []
    transactions: list[TransactionRecord] = []
    solver_rows: list[tuple[int, str, int, float, float]] = []
    logs: list[tuple[int, TransactionLog]] = []
    soc_initial = {s.id: s.soc for s in dsas}
    soc_traj: dict[int, list[float]] = {s.id: [] for s in dsas}
    x_storage: dict[int, list[float]] = {s.id: [] for s in dsas}
    gaps: list[tuple[int, tuple[int, ...], float]] = []
    served_by_slot: list[dict[int, float]] = []
    demanded_by_slot: list[dict[int, float]] = []

    for t in range(1, scenario.horizon + 1):
        hz = scenario.hazard
        if hz is not None:
            if t == hz.start_slot:
                burning = {rid: 1.0 for rid in sorted(hz.process.ignition_set)}
            elif t > hz.start_slot:
                burning = step_hazard(burning, hz.process, topo, hazard_rng,
                                      immune=ever_burned - set(burning))
            ever_burned |= set(burning)
            readings = synthetic_readings(burning, topo, hz.process.intensity_decay, t)
            risk = score_risk(readings, topo, hz.smoothing)
            forecast_seed = int(hazard_rng.integers(2**63))
            if burning:
                live = replace(hz.process, ignition_set=frozenset(burning))
                forecast = simulate_spread(
                    live, topo, hz.forecast_horizon, hz.samples, forecast_seed
                )
            else:
                forecast = SpreadForecast(
                    horizon=hz.forecast_horizon,
                    prob_affected={rid: 0.0 for rid in topo.region_ids},
                    method="monte-carlo",
                    sample_count=hz.samples,
                )
            cut = select_isolation_set(forecast, risk, hz.threshold)
        else:
            risk = RiskMap({rid: 0.0 for rid in topo.region_ids}, t)
            cut = frozenset()

        partition = isolate(topo, cut)
        burning_now = frozenset(burning)
        demanded = {rid: topo.region(rid).base_demand for rid in sorted(topo.region_ids)}
        served = {rid: 0.0 for rid in sorted(topo.region_ids)}
        for rid in partition.grid_connected:
            if rid not in burning_now:
                served[rid] = demanded[rid]

        slot_x_kwh = {s.id: 0.0 for s in dsas}

        for island in partition.islands:
            active = frozenset(island) - burning_now
            if not active:
                continue
            island_dras = [d for d in dras if d.region_id in active and d.interested]
            if scenario.mode == MODE_RESILIENT:
                island_dsas = [s for s in dsas if s.region_id in active]
            else:
                island_dsas = []
            if not island_dras or not island_dsas:
                continue

            for d in island_dras:
                d.load_max = min(load_cap[d.id],
                                 max(0.0, remaining_energy[d.id]) / dt)
                d.load_min = min(d.load_min, d.load_max)
            rows = {d.id: np.array([1.0]) for d in island_dras}
            rows.update({s.id: np.array([-1.0]) for s in island_dsas})
            constraint = CouplingConstraint(
                rows=rows, c=np.array([0.0]), kinds=("supply_upper",)
            )

            if oracle:
                pre_dras = [copy.deepcopy(d) for d in island_dras]
                pre_dsas = [copy.deepcopy(s) for s in island_dsas]

            received_before = {d.id: d.energy_received for d in island_dras}
            outcome = run_market(
                island=active,
                demand_agents=island_dras,
                storage_agents=island_dsas,
                constraint=constraint,
                xi=scenario.market.xi,
                max_iter=scenario.market.max_iter,
                warm_start=warm.get(active),
                rng=init_rng,
                dt=dt,
                schedule=scenario.market.schedule,
                export_threshold=scenario.market.export_threshold,
                priorities=priorities,
            )
            warm[active] = outcome.equilibrium

            if oracle:
                if len(pre_dras) + len(pre_dsas) > 6:
                    raise TooLargeForOracle(
                        f"slot {t}: island {sorted(active)} has more than 6 agents"
                    )
                sol = market_lp_optimum(
                    pre_dras, pre_dsas, constraint, dt,
                    export_allowed={
                        s.id: s.soc > scenario.market.export_threshold and s.interested
                        for s in pre_dsas
                    },
                )
                eq = outcome.equilibrium
                obj = sum(d.utility_weight * eq.x[d.id] for d in pre_dras) - sum(
                    s.degradation_cost * abs(eq.x[s.id]) * dt for s in pre_dsas
                )
                gap = abs(obj - sol.value) / max(abs(sol.value), 1e-6)
                gaps.append((t, tuple(sorted(active)), gap))

            label = "-".join(str(r) for r in sorted(active))
            eq = outcome.equilibrium
            equilibria.append(EquilibriumRecord(
                slot=t, island=tuple(sorted(active)),
                iterations=eq.iterations, residual=eq.residual,
                converged=eq.converged, violation=eq.violation,
                lam=tuple(float(v) for v in eq.lam_final),
                x=dict(sorted(eq.x.items())),
            ))
            for row in outcome.diagnostics:
                solver_rows.append(
                    (t, label, int(row[0]), float(row[1]), float(row[2]))
                )
            for off in outcome.offers:
                transactions.append(TransactionRecord(
                    slot=t, offer_id=off.offer_id, from_dsa=off.from_dsa,
                    to_dra=off.to_dra, quantity=off.quantity,
                    incentive=off.incentive, status=off.status.value,
                ))
                if off.status is OfferStatus.COMMITTED:
                    slot_x_kwh[off.from_dsa] += off.quantity
            logs.append((t, outcome.log))

            for d in island_dras:
                delivered = d.energy_received - received_before[d.id]
                if delivered > 0.0:
                    give = min(delivered / dt,
                               demanded[d.region_id] - served[d.region_id])
                    served[d.region_id] += max(0.0, give)
                    remaining_energy[d.id] -= delivered

        for s in dsas:
            soc_traj[s.id].append(s.soc)
            x_storage[s.id].append(slot_x_kwh[s.id] / dt)

        slots.append(SlotRecord(
            slot=t,
            burning=tuple(sorted(burning_now)),
            cut_set=tuple(sorted(cut)),
            islands=tuple(tuple(sorted(i)) for i in partition.islands),
            grid_connected=tuple(sorted(partition.grid_connected)),
            served=served,
            demanded=demanded,
        ))
        served_by_slot.append(served)
        demanded_by_slot.append(demanded)

    timeline = met.build_timeline(served_by_slot, demanded_by_slot)
    curve = met.eight_point_approx(timeline)
    report = met.make_report(timeline, scenario.metrics.voll, dt)
    return RunResult(
        name=scenario.name,
        mode=scenario.mode,
        seed=scenario.seed,
        dt=dt,
        slots=slots,
        equilibria=equilibria,
        transactions=transactions,
        solver_rows=solver_rows,
        logs=logs,
        soc_initial=soc_initial,
        soc_trajectory=soc_traj,
        x_storage=x_storage,
        energy_delivered={d.id: d.energy_received for d in dras},
        timeline=timeline,
        curve=curve,
        report=report,
        oracle_gaps=gaps if oracle else None,
    )


def oracle_check(scenario: Scenario) -> dict:
    """Compare every (island, slot) equilibrium against the LP oracle."""
    result = run_scenario(scenario, oracle=True)
    gaps = result.oracle_gaps or []
    return {
        "solves": len(gaps),
        "max_relative_gap": max((g for _, _, g in gaps), default=0.0),
        "gaps": [
            {"slot": slot, "island": list(isl), "relative_gap": g}
            for slot, isl, g in gaps
        ],
    }
