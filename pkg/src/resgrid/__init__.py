"""resgrid: deterministic power-grid resilience simulator.

Pipeline: hazard-driven risk scoring and preventive islanding of a regional
power network, decentralized energy-market trading among storage and
demand-response agents coordinated by dual decomposition, and quantified
resilience curves with monetary loss.
"""

from .agents import (
    DemandAgentState,
    Offer,
    OfferStatus,
    StorageAgentState,
    demand_best_response,
    evaluate_offer,
    soc_step,
    storage_best_response,
)
from .hazard import (
    HazardProcess,
    RiskMap,
    SensorReading,
    SpreadForecast,
    exact_spread_probability,
    score_risk,
    select_isolation_set,
    simulate_spread,
)
from .market import (
    CouplingConstraint,
    DualState,
    MarketEquilibrium,
    StepSchedule,
    TransactionLog,
    allocate_power,
    commit_transaction,
    dual_update,
    export_eligibility,
    run_market,
    step_size,
)
from .metrics import (
    EightPointCurve,
    PerformanceSample,
    ResilienceReport,
    build_timeline,
    eight_point_approx,
    monetary_loss,
    resilience_loss,
)
from .scenario import (
    RunResult,
    Scenario,
    load_scenario,
    oracle_check,
    run_scenario,
)
from .topology import (
    GridTopology,
    IslandPartition,
    Line,
    Region,
    build_topology,
    connected_components,
    isolate,
)

__version__ = "0.1.0"
