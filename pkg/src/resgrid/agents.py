"""Demand response agents (DRA) and distributed storage agents (DSA).

Local utilities are linear, so price best responses are closed-form: demand
is bang-bang on its marginal value versus the effective dual price, storage
picks an endpoint of its feasible power interval or stays idle. Ties break
to the conservative choice (minimum load, zero exchange).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import SocBoundViolation, WrongAddressee

_SOC_TOL = 1e-9


class OfferStatus(str, enum.Enum):
    PROPOSED = "proposed"
    ACCEPTED_BY_DSA = "accepted_by_dsa"
    ACCEPTED_BY_DRA = "accepted_by_dra"
    COMMITTED = "committed"
    ABORTED = "aborted"


@dataclass
class DemandAgentState:
    id: int
    region_id: int
    load_min: float  # kW
    load_max: float  # kW
    energy_requirement: float  # kWh over the episode
    utility_weight: float  # $/kW marginal value of served load
    interested: bool = True
    x: float = 0.0  # current decision, kW
    energy_received: float = 0.0  # kWh delivered through committed offers

    def __post_init__(self):
        if self.load_min < 0 or self.load_max < self.load_min:
            raise ValueError(f"DRA {self.id}: need 0 <= load_min <= load_max")


@dataclass
class StorageAgentState:
    id: int
    region_id: int
    soc: float  # kWh
    soc_min: float
    soc_max: float
    charge_limit: float  # kW
    discharge_limit: float  # kW
    eta_c: float = 1.0
    eta_d: float = 1.0
    degradation_cost: float = 0.0  # $/kWh throughput
    interested: bool = True
    min_incentive: float = 0.0  # $/kWh price floor for exporting
    x: float = 0.0  # current decision, kW; positive = discharge
    p_con: tuple[float, ...] = field(default_factory=tuple)  # baseline SoC profile
    q_con: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not (self.soc_min <= self.soc <= self.soc_max):
            raise SocBoundViolation(
                f"DSA {self.id}: soc {self.soc} outside [{self.soc_min}, {self.soc_max}]"
            )
        if not (0.0 < self.eta_c <= 1.0 and 0.0 < self.eta_d <= 1.0):
            raise ValueError(f"DSA {self.id}: efficiencies must lie in (0, 1]")
        if self.charge_limit < 0 or self.discharge_limit < 0:
            raise ValueError(f"DSA {self.id}: power limits must be >= 0")

    def exportable_energy(self) -> float:
        """Deliverable energy above the SoC floor, after discharge losses (kWh)."""
        return max(0.0, self.soc - self.soc_min) * self.eta_d

    def power_bounds(self, dt: float) -> tuple[float, float]:
        """Feasible power interval for one slot of length dt, SoC-reachable."""
        hi = min(self.discharge_limit, max(0.0, self.soc - self.soc_min) * self.eta_d / dt)
        lo = -min(self.charge_limit, max(0.0, self.soc_max - self.soc) / (self.eta_c * dt))
        return lo, hi


@dataclass
class Offer:
    offer_id: int
    from_dsa: int
    to_dra: int
    quantity: float  # kWh
    incentive: float  # $/kWh
    status: OfferStatus = OfferStatus.PROPOSED

    def __post_init__(self):
        if self.quantity < 0 or self.incentive < 0:
            raise ValueError("offer quantity and incentive must be >= 0")


def soc_step(state: StorageAgentState, x_j: float, dt: float) -> StorageAgentState:
    """Apply one slot of the SoC dynamics; never clamps.

    Discharging (x_j > 0) drains soc by x_j*dt/eta_d; charging (x_j < 0)
    adds |x_j|*dt*eta_c. A result outside the SoC bounds raises.
    """
    if x_j > state.discharge_limit + _SOC_TOL or -x_j > state.charge_limit + _SOC_TOL:
        raise SocBoundViolation(
            f"DSA {state.id}: power {x_j} kW outside "
            f"[-{state.charge_limit}, {state.discharge_limit}]"
        )
    if x_j > 0:
        soc_new = state.soc - x_j * dt / state.eta_d
    else:
        soc_new = state.soc - x_j * dt * state.eta_c
    if soc_new < state.soc_min - _SOC_TOL or soc_new > state.soc_max + _SOC_TOL:
        raise SocBoundViolation(
            f"DSA {state.id}: soc would become {soc_new}, "
            f"bounds [{state.soc_min}, {state.soc_max}]"
        )
    return replace(state, soc=soc_new, x=x_j)


def demand_best_response(
    state: DemandAgentState,
    lam: np.ndarray,
    coupling_row: np.ndarray,
) -> float:
    """Maximize w*x - (lam . A_i) x over [load_min, load_max]; bang-bang,
    tie to load_min."""
    price = float(np.dot(np.asarray(lam, dtype=float), np.asarray(coupling_row, dtype=float)))
    return state.load_max if state.utility_weight > price else state.load_min


def storage_best_response(
    state: StorageAgentState,
    lam: np.ndarray,
    coupling_row: np.ndarray,
    dt: float = 1.0,
) -> float:
    """Maximize (lam . A_j) x - d|x|dt over the SoC-reachable power interval.

    The coupling row is price-oriented: a positive ``lam . A_j`` is revenue
    per kW of discharge. The optimum sits at an interval endpoint or at 0;
    ties break toward 0.
    """
    price = float(np.dot(np.asarray(lam, dtype=float), np.asarray(coupling_row, dtype=float)))
    lo, hi = state.power_bounds(dt)

    def value(x: float) -> float:
        return price * x - state.degradation_cost * abs(x) * dt

    best_x, best_v = 0.0, 0.0  # idling is always feasible (lo <= 0 <= hi)
    for cand in sorted((lo, hi), key=abs):
        if value(cand) > best_v + 1e-15:
            best_x, best_v = cand, value(cand)
    return best_x


def evaluate_offer(state, offer: Offer) -> bool:
    """Offer acceptance rule for either agent kind."""
    if isinstance(state, StorageAgentState):
        if offer.from_dsa != state.id:
            raise WrongAddressee(f"offer {offer.offer_id} is not from DSA {state.id}")
        return (
            state.interested
            and offer.incentive >= state.min_incentive
            and offer.quantity <= state.exportable_energy() + _SOC_TOL
        )
    if isinstance(state, DemandAgentState):
        if offer.to_dra != state.id:
            raise WrongAddressee(f"offer {offer.offer_id} does not target DRA {state.id}")
        return state.interested and offer.incentive <= state.utility_weight
    raise WrongAddressee(f"cannot evaluate offer against {type(state).__name__}")
