"""Resilience Management System market engine.

Runs the decentralized trading loop per island and time slot: agents best-
respond to dual prices, the RMS updates the stacked nonnegative dual vector
by projected subgradient ascent, and on convergence a two-phase transaction
protocol moves energy from storage to demand atomically.

The primal decision reported as the equilibrium is a restart-averaged mean
of the best-response iterates (the average is re-anchored every time the
iteration count doubles), which converges to an optimal point of the
underlying LP while the raw bang-bang responses oscillate. Convergence
additionally requires near-feasibility and approximate complementary
slackness so the loop cannot stop while the dual is still climbing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .agents import (
    DemandAgentState,
    Offer,
    OfferStatus,
    StorageAgentState,
    evaluate_offer,
)
from .errors import (
    DimensionMismatch,
    InvalidTransition,
    NoAgents,
    SocBoundViolation,
    UnknownRegion,
)

FEASIBILITY_TOL_FACTOR = 1e-2
COMPLEMENTARITY_TOL = 1e-2
MIN_OFFER_KWH = 1e-9

CONSTANT = "constant"
DIMINISHING = "diminishing"


@dataclass(frozen=True)
class StepSchedule:
    kind: str = DIMINISHING
    c0: float | None = None  # None: scale from the problem data

    def __post_init__(self):
        if self.kind not in (CONSTANT, DIMINISHING):
            raise ValueError(f"unknown step schedule {self.kind!r}")
        if self.c0 is not None and self.c0 <= 0:
            raise ValueError("step size c0 must be > 0")


def step_size(m: int, schedule: StepSchedule) -> float:
    """Step size at iteration m: c0 (constant) or c0/sqrt(m) (diminishing)."""
    if m < 1:
        raise ValueError("iteration counter starts at 1")
    c0 = schedule.c0
    if c0 is None:
        raise ValueError("schedule has no explicit c0; step_size needs one")
    return c0 if schedule.kind == CONSTANT else c0 / np.sqrt(m)


@dataclass(frozen=True)
class DualState:
    lam: np.ndarray
    m: int
    zeta: float
    schedule: StepSchedule

    def __post_init__(self):
        if np.any(self.lam < 0):
            raise ValueError("dual vector must be componentwise nonnegative")


def make_dual_state(dim: int, schedule: StepSchedule) -> DualState:
    return DualState(np.zeros(dim), 1, step_size(1, schedule), schedule)


def dual_update(dual: DualState, aggregate_violation: np.ndarray) -> DualState:
    """Projected subgradient step: lam <- [lam + zeta * violation]+ ."""
    g = np.asarray(aggregate_violation, dtype=float)
    if g.shape != dual.lam.shape:
        raise DimensionMismatch(
            f"violation has shape {g.shape}, dual has {dual.lam.shape}"
        )
    lam_next = np.maximum(0.0, dual.lam + dual.zeta * g)
    m_next = dual.m + 1
    return DualState(lam_next, m_next, step_size(m_next, dual.schedule), dual.schedule)


@dataclass(frozen=True)
class CouplingConstraint:
    rows: dict[int, np.ndarray]  # agent id -> coefficient row, length K
    c: np.ndarray  # right-hand side, length K
    kinds: tuple[str, ...] = ()  # per-component label, e.g. "supply_upper"

    def __post_init__(self):
        k = len(self.c)
        for aid, row in self.rows.items():
            if len(row) != k:
                raise DimensionMismatch(
                    f"agent {aid} row has length {len(row)}, expected {k}"
                )
        if self.kinds and len(self.kinds) != k:
            raise DimensionMismatch("kinds must label every constraint component")

    def supply_index(self) -> int:
        """Component used as the market-clearing incentive price."""
        for i, kind in enumerate(self.kinds):
            if kind == "supply_upper":
                return i
        return 0


@dataclass(frozen=True)
class MarketEquilibrium:
    x: dict[int, float]
    lam_final: np.ndarray
    iterations: int
    residual: float
    converged: bool
    violation: float  # max positive component of sum A_b x_b - c


@dataclass(frozen=True)
class TransactionEntry:
    offer_id: int
    from_dsa: int
    to_dra: int
    quantity: float
    incentive: float
    old_status: str
    new_status: str
    seq: int


@dataclass
class TransactionLog:
    entries: list[TransactionEntry] = field(default_factory=list)
    _seq: int = 0

    def record(self, offer: Offer, old: OfferStatus, new: OfferStatus) -> None:
        self.entries.append(
            TransactionEntry(
                offer_id=offer.offer_id,
                from_dsa=offer.from_dsa,
                to_dra=offer.to_dra,
                quantity=offer.quantity,
                incentive=offer.incentive,
                old_status=old.value,
                new_status=new.value,
                seq=self._seq,
            )
        )
        self._seq += 1

    def validate(self) -> None:
        """Every commit needs both prior acceptances; commit and abort exclude
        each other. Raises InvalidTransition on violation."""
        accepted_dsa: set[int] = set()
        accepted_dra: set[int] = set()
        committed: set[int] = set()
        aborted: set[int] = set()
        for e in self.entries:
            if e.new_status == OfferStatus.ACCEPTED_BY_DSA.value:
                accepted_dsa.add(e.offer_id)
            elif e.new_status == OfferStatus.ACCEPTED_BY_DRA.value:
                accepted_dra.add(e.offer_id)
            elif e.new_status == OfferStatus.COMMITTED.value:
                if e.offer_id not in accepted_dsa or e.offer_id not in accepted_dra:
                    raise InvalidTransition(
                        f"offer {e.offer_id} committed without both acceptances"
                    )
                committed.add(e.offer_id)
            elif e.new_status == OfferStatus.ABORTED.value:
                aborted.add(e.offer_id)
        both = committed & aborted
        if both:
            raise InvalidTransition(f"offers both committed and aborted: {sorted(both)}")

    def replay(
        self,
        soc_init: dict[int, float],
        eta_d: dict[int, float],
        energy_init: dict[int, float] | None = None,
    ) -> tuple[dict[int, float], dict[int, float]]:
        """Event-sourcing reconstruction of final SoC and delivered energy."""
        soc = dict(soc_init)
        energy = dict(energy_init or {})
        for e in self.entries:
            if e.new_status == OfferStatus.COMMITTED.value:
                soc[e.from_dsa] = soc[e.from_dsa] - e.quantity / eta_d[e.from_dsa]
                energy[e.to_dra] = energy.get(e.to_dra, 0.0) + e.quantity
        return soc, energy


@dataclass(frozen=True)
class MarketOutcome:
    equilibrium: MarketEquilibrium
    log: TransactionLog
    offers: tuple[Offer, ...]
    diagnostics: np.ndarray  # rows of (m, residual, max_violation, lam...)


def export_eligibility(dsa: StorageAgentState, threshold: float) -> bool:
    """A storage agent may export only above the SoC threshold (strict) and
    while flagged interested."""
    return dsa.soc > threshold and dsa.interested


def commit_transaction(
    offer: Offer,
    dsa: StorageAgentState,
    dra: DemandAgentState,
    log: TransactionLog,
    dt: float = 1.0,
) -> Offer:
    """Two-phase commit of one offer.

    Both agents must accept; then SoC and delivered-energy state mutate
    together. Any rejection aborts with zero state change.
    """
    if offer.status is not OfferStatus.PROPOSED:
        raise InvalidTransition(
            f"offer {offer.offer_id} is {offer.status.value}, expected proposed"
        )
    if not evaluate_offer(dsa, offer):
        log.record(offer, offer.status, OfferStatus.ABORTED)
        offer.status = OfferStatus.ABORTED
        return offer
    log.record(offer, offer.status, OfferStatus.ACCEPTED_BY_DSA)
    offer.status = OfferStatus.ACCEPTED_BY_DSA

    if not evaluate_offer(dra, offer):
        log.record(offer, offer.status, OfferStatus.ABORTED)
        offer.status = OfferStatus.ABORTED
        return offer
    log.record(offer, offer.status, OfferStatus.ACCEPTED_BY_DRA)
    offer.status = OfferStatus.ACCEPTED_BY_DRA

    soc_new = dsa.soc - offer.quantity / dsa.eta_d
    if soc_new < dsa.soc_min - 1e-9:
        # acceptance guaranteed exportable energy, so this is a numeric guard
        raise SocBoundViolation(
            f"DSA {dsa.id}: committing {offer.quantity} kWh would break the SoC floor"
        )
    dsa.soc = soc_new
    dra.energy_received += offer.quantity
    log.record(offer, offer.status, OfferStatus.COMMITTED)
    offer.status = OfferStatus.COMMITTED
    return offer


@njit(cache=True)
def _dual_ascent(w_dem, is_dem, d_cost, A, c, lo, hi, x0, lam0,
                 xi, max_iter, c0, diminishing, ftol, cstol):
    """Jitted subgradient loop.

    A holds physical coupling rows (K x n); storage agents see the negated
    price. Returns the restart-averaged primal, final dual, iteration count,
    convergence flag, residual, and per-iteration (residual, max-violation)
    plus the dual trajectory.
    """
    n = lo.shape[0]
    K = c.shape[0]
    lam = lam0.copy()
    xm = np.empty(n)
    xbar = x0.copy()
    S = 0.0
    next_restart = 64
    conv = False
    m = 1
    res = 1e300
    diag = np.empty((max_iter, 2))
    lam_hist = np.empty((max_iter, K))
    while m <= max_iter:
        for i in range(n):
            p = 0.0
            for k in range(K):
                p += A[k, i] * lam[k]
            if is_dem[i]:
                xm[i] = hi[i] if w_dem[i] > p else lo[i]
            else:
                best = 0.0
                xv = 0.0
                vlo = -p * lo[i] - d_cost[i] * abs(lo[i])
                vhi = -p * hi[i] - d_cost[i] * abs(hi[i])
                if vlo > best + 1e-15:
                    best = vlo
                    xv = lo[i]
                if vhi > best + 1e-15:
                    best = vhi
                    xv = hi[i]
                xm[i] = xv
        zeta = c0 / np.sqrt(m) if diminishing else c0
        maxviol = -1e300
        for k in range(K):
            g = -c[k]
            for i in range(n):
                g += A[k, i] * xm[i]
            lam[k] = max(0.0, lam[k] + zeta * g)
            if g > maxviol:
                maxviol = g
        if m == next_restart:
            S = 0.0
            next_restart *= 2
        S += zeta
        wgt = zeta / S
        res = 0.0
        for i in range(n):
            d = wgt * (xm[i] - xbar[i])
            xbar[i] += d
            if abs(d) > res:
                res = abs(d)
        diag[m - 1, 0] = res
        diag[m - 1, 1] = maxviol
        for k in range(K):
            lam_hist[m - 1, k] = lam[k]
        if m > 1 and res <= xi:
            ok = True
            for k in range(K):
                g = -c[k]
                for i in range(n):
                    g += A[k, i] * xbar[i]
                if g > ftol or lam[k] * abs(g) > cstol:
                    ok = False
                    break
            if ok:
                conv = True
                break
        m += 1
    m_final = m if m <= max_iter else max_iter
    return xbar, lam, m_final, conv, res, diag[:m_final], lam_hist[:m_final]


def _auto_c0(w_dem, d_cost, A, c, lo, hi) -> float:
    """Step scale: price magnitude over constraint-violation magnitude."""
    price_scale = max(float(np.max(np.abs(w_dem), initial=0.0)),
                      float(np.max(np.abs(d_cost), initial=0.0)), 1e-9)
    bound = np.maximum(np.abs(lo), np.abs(hi))
    viol_scale = max(float(np.max(np.abs(A) @ bound - c, initial=0.0)),
                     float(np.max(np.abs(c), initial=0.0)), 1e-9)
    return price_scale / viol_scale


def run_market(
    island: frozenset[int],
    demand_agents: list[DemandAgentState],
    storage_agents: list[StorageAgentState],
    constraint: CouplingConstraint,
    xi: float = 1e-3,
    max_iter: int = 10000,
    warm_start: MarketEquilibrium | None = None,
    rng: np.random.Generator | None = None,
    dt: float = 1.0,
    schedule: StepSchedule = StepSchedule(),
    export_threshold: float = 0.0,
    priorities: dict[int, float] | None = None,
) -> MarketOutcome:
    """Solve one (island, slot) market and run the transaction phase.

    Iterates best responses against the dual prices until the max-norm
    residual of the working decision vector drops to ``xi`` (with the
    feasibility and complementarity guards described in the module
    docstring) or ``max_iter`` is hit, in which case the best iterate is
    returned with ``converged=False``. With a warm start, the initial
    primal/dual state is copied from the previous slot's equilibrium;
    otherwise the primal is randomly initialized from ``rng``.

    The transaction phase pairs eligible storage exports with demand needs
    at the supply constraint's final dual price and commits each offer
    atomically, mutating the passed agent states.
    """
    if xi <= 0:
        raise ValueError("xi must be > 0")
    if not demand_agents and not storage_agents:
        raise NoAgents("market needs at least one agent")
    for ag in list(demand_agents) + list(storage_agents):
        if ag.region_id not in island:
            raise UnknownRegion(
                f"agent {ag.id} sits in region {ag.region_id}, outside the island"
            )

    dras = sorted(demand_agents, key=lambda a: a.id)
    dsas = sorted(storage_agents, key=lambda a: a.id)
    agents: list = dras + dsas
    n = len(agents)
    K = len(constraint.c)

    A = np.zeros((K, n))
    for j, ag in enumerate(agents):
        row = constraint.rows.get(ag.id)
        if row is None:
            raise DimensionMismatch(f"agent {ag.id} has no coupling row")
        A[:, j] = row
    c = np.asarray(constraint.c, dtype=float)

    is_dem = np.array([isinstance(a, DemandAgentState) for a in agents])
    w_dem = np.array([a.utility_weight if d else 0.0 for a, d in zip(agents, is_dem)])
    d_cost = np.array(
        [0.0 if d else a.degradation_cost * dt for a, d in zip(agents, is_dem)]
    )
    lo = np.empty(n)
    hi = np.empty(n)
    eligible = {}
    for j, ag in enumerate(agents):
        if is_dem[j]:
            lo[j], hi[j] = ag.load_min, ag.load_max
        else:
            lo[j], hi[j] = ag.power_bounds(dt)
            eligible[ag.id] = export_eligibility(ag, export_threshold)
            if not eligible[ag.id]:
                hi[j] = 0.0

    if warm_start is not None and len(warm_start.lam_final) == K:
        lam0 = np.asarray(warm_start.lam_final, dtype=float).copy()
        x0 = np.array(
            [np.clip(warm_start.x.get(a.id, 0.0), lo[j], hi[j])
             for j, a in enumerate(agents)]
        )
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        lam0 = np.zeros(K)
        x0 = np.empty(n)
        for j, ag in enumerate(agents):
            if is_dem[j]:
                x0[j] = lo[j] + (hi[j] - lo[j]) * rng.random()
            elif ag.q_con:
                x0[j] = float(np.clip((ag.soc - ag.q_con[0]) / dt, lo[j], hi[j]))
            else:
                x0[j] = lo[j] + (hi[j] - lo[j]) * rng.random()

    c0 = schedule.c0 if schedule.c0 is not None else _auto_c0(w_dem, d_cost, A, c, lo, hi)
    ftol = FEASIBILITY_TOL_FACTOR * max(float(np.max(np.abs(c), initial=0.0)), 1.0)
    xbar, lam, m, conv, res, diag, lam_hist = _dual_ascent(
        w_dem, is_dem, d_cost, A, c, lo, hi, x0, lam0,
        xi, max_iter, c0, schedule.kind == DIMINISHING, ftol, COMPLEMENTARITY_TOL,
    )

    viol = float(np.max(A @ xbar - c, initial=0.0))
    equilibrium = MarketEquilibrium(
        x={ag.id: float(xbar[j]) for j, ag in enumerate(agents)},
        lam_final=lam,
        iterations=int(m),
        residual=float(res),
        converged=bool(conv),
        violation=max(0.0, viol),
    )
    for j, ag in enumerate(agents):
        ag.x = float(xbar[j])

    diagnostics = np.hstack([
        np.arange(1, m + 1, dtype=float)[:, None], diag, lam_hist
    ])

    log = TransactionLog()
    offers = _transaction_phase(
        equilibrium, dras, dsas, eligible, constraint, log, dt, priorities
    )
    return MarketOutcome(equilibrium, log, tuple(offers), diagnostics)


def _transaction_phase(
    equilibrium: MarketEquilibrium,
    dras: list[DemandAgentState],
    dsas: list[StorageAgentState],
    eligible: dict[int, bool],
    constraint: CouplingConstraint,
    log: TransactionLog,
    dt: float,
    priorities: dict[int, float] | None = None,
) -> list[Offer]:
    """Pair storage exports with demand needs and commit offers two-phase.

    With region priorities the RMS first runs the scarce-supply allocation
    rule over the equilibrium requests, so each agent's transaction budget
    is its granted share of the exportable energy.
    """
    price = float(equilibrium.lam_final[constraint.supply_index()])
    requests = {d.id: max(0.0, equilibrium.x[d.id]) for d in dras}
    if priorities is not None and dras:
        available = sum(
            max(0.0, equilibrium.x[s.id]) for s in dsas if eligible.get(s.id, False)
        )
        granted = allocate_power(requests, available, priorities)
        needs = {aid: g * dt for aid, g in granted.items()}
    else:
        needs = {aid: r * dt for aid, r in requests.items()}
    offers: list[Offer] = []
    offer_id = 0
    for dsa in dsas:
        remaining = max(0.0, equilibrium.x[dsa.id]) * dt
        if not eligible.get(dsa.id, False):
            continue
        for dra in dras:
            if remaining <= MIN_OFFER_KWH:
                break
            chunk = min(remaining, needs[dra.id])
            if chunk <= MIN_OFFER_KWH:
                continue
            # the averaged dual price can overshoot the marginal buyer's
            # weight by the residual tolerance, so cap the proposal at what
            # the recipient is willing to pay
            offer = Offer(
                offer_id=offer_id,
                from_dsa=dsa.id,
                to_dra=dra.id,
                quantity=chunk,
                incentive=min(price, dra.utility_weight),
            )
            offer_id += 1
            commit_transaction(offer, dsa, dra, log, dt)
            offers.append(offer)
            if offer.status is OfferStatus.COMMITTED:
                remaining -= chunk
                needs[dra.id] -= chunk
    return offers


def allocate_power(
    requests: dict[int, float],
    available: float,
    priorities: dict[int, float],
    needs: dict[int, float] | None = None,
) -> dict[int, float]:
    """Split scarce supply across demand agents.

    Abundant supply grants every request. Under scarcity, supply is shared
    proportionally to priority-weighted requests; any grant beyond an
    agent's true need is returned to the pool and redistributed among
    still-unsatisfied agents until a fixpoint. Grants never exceed the
    available supply. Exact rational arithmetic keeps the worked examples
    and the no-over-allocation invariant exact; grants round toward zero on
    conversion back to float so the invariant survives rounding.
    """
    import math
    from fractions import Fraction

    def down(g: Fraction) -> float:
        f = float(g)
        return math.nextafter(f, 0.0) if Fraction(f) > g else f

    if available < 0:
        raise ValueError("available supply must be >= 0")
    for aid, req in requests.items():
        if req < 0:
            raise ValueError(f"request for agent {aid} must be >= 0")

    needs = dict(needs) if needs is not None else dict(requests)
    req = {a: Fraction(r) for a, r in requests.items()}
    cap = {a: min(req[a], Fraction(needs.get(a, requests[a]))) for a in requests}
    avail = Fraction(available)

    if sum(req.values(), Fraction(0)) <= avail:
        return {a: float(r) for a, r in req.items()}

    grant = {a: Fraction(0) for a in requests}
    remaining = avail
    while remaining > 0:
        unmet = [a for a in sorted(requests) if grant[a] < cap[a]]
        if not unmet:
            break
        weights = {a: Fraction(priorities.get(a, 1)) * req[a] for a in unmet}
        total_w = sum(weights.values(), Fraction(0))
        if total_w == 0:
            weights = {a: Fraction(1) for a in unmet}
            total_w = Fraction(len(unmet))
        progressed = False
        pool = remaining
        for a in unmet:
            share = pool * weights[a] / total_w
            add = min(share, cap[a] - grant[a])
            if add > 0:
                grant[a] += add
                remaining -= add
                progressed = True
        if not progressed:
            break
    return {a: down(g) for a, g in grant.items()}
