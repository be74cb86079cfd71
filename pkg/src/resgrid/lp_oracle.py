"""Brute-force linear-program oracle by exhaustive vertex enumeration.

Independent verification path for the market engine: enumerates every basic
feasible point of a box-plus-halfspaces polytope and takes the best one.
Intended for desk-scale instances only (a handful of variables).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .agents import DemandAgentState, StorageAgentState
from .errors import TooLargeForOracle
from .market import CouplingConstraint

MAX_ORACLE_VARS = 8
_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class OracleSolution:
    value: float
    x: np.ndarray


def solve_box_lp(
    w: np.ndarray,
    A: np.ndarray,
    c: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
) -> OracleSolution | None:
    """max w.x subject to A x <= c and lo <= x <= hi.

    Enumerates vertices: every choice of active coupling rows plus bound
    assignments for the remaining variables. Returns None when infeasible.
    """
    n = len(w)
    if n > MAX_ORACLE_VARS:
        raise TooLargeForOracle(f"{n} variables exceed the enumeration limit")
    K = len(c)
    best = None
    for r in range(0, min(K, n) + 1):
        for rows in itertools.combinations(range(K), r):
            for free in itertools.combinations(range(n), r):
                fixed = [i for i in range(n) if i not in free]
                for pattern in itertools.product((0, 1), repeat=len(fixed)):
                    x = np.empty(n)
                    for i, at_hi in zip(fixed, pattern):
                        x[i] = hi[i] if at_hi else lo[i]
                    if r:
                        M = A[np.ix_(rows, free)]
                        rhs = c[list(rows)] - A[np.ix_(rows, fixed)] @ x[fixed]
                        try:
                            x[list(free)] = np.linalg.solve(M, rhs)
                        except np.linalg.LinAlgError:
                            continue
                    if np.any(x < lo - _FEAS_TOL) or np.any(x > hi + _FEAS_TOL):
                        continue
                    if np.any(A @ x > c + _FEAS_TOL):
                        continue
                    v = float(w @ x)
                    if best is None or v > best.value:
                        best = OracleSolution(v, x.copy())
    return best


def market_lp_optimum(
    demand_agents: list[DemandAgentState],
    storage_agents: list[StorageAgentState],
    constraint: CouplingConstraint,
    dt: float = 1.0,
    export_allowed: dict[int, bool] | None = None,
) -> OracleSolution:
    """Centralized optimum of the market problem.

    Objective: sum of w_i x_i over demand minus sum of d_j |x_j| dt over
    storage, subject to the coupling constraint and every agent's box. The
    |x| terms are handled by enumerating storage sign restrictions.
    """
    dras = sorted(demand_agents, key=lambda a: a.id)
    dsas = sorted(storage_agents, key=lambda a: a.id)
    agents = dras + dsas
    n = len(agents)
    if n == 0:
        raise TooLargeForOracle("no agents to optimize")
    if n > MAX_ORACLE_VARS:
        raise TooLargeForOracle(f"{n} agents exceed the enumeration limit")

    A = np.zeros((len(constraint.c), n))
    for j, ag in enumerate(agents):
        A[:, j] = constraint.rows[ag.id]
    c = np.asarray(constraint.c, dtype=float)

    lo = np.empty(n)
    hi = np.empty(n)
    w = np.zeros(n)
    for j, ag in enumerate(agents):
        if isinstance(ag, DemandAgentState):
            lo[j], hi[j] = ag.load_min, ag.load_max
            w[j] = ag.utility_weight
        else:
            lo[j], hi[j] = ag.power_bounds(dt)
            if export_allowed is not None and not export_allowed.get(ag.id, True):
                hi[j] = 0.0

    stor_idx = [j for j, ag in enumerate(agents) if isinstance(ag, StorageAgentState)]
    best = None
    for signs in itertools.product((0, 1), repeat=len(stor_idx)):
        lo2, hi2, w2 = lo.copy(), hi.copy(), w.copy()
        skip = False
        for j, discharge in zip(stor_idx, signs):
            d = agents[j].degradation_cost * dt
            if discharge:
                lo2[j] = 0.0
                w2[j] = -d
            else:
                hi2[j] = 0.0
                w2[j] = d  # x <= 0, so d*x = -d|x|
            if lo2[j] > hi2[j] + _FEAS_TOL:
                skip = True
        if skip:
            continue
        sol = solve_box_lp(w2, A, c, lo2, hi2)
        if sol is not None and (best is None or sol.value > best.value):
            best = sol
    if best is None:
        raise TooLargeForOracle("market LP infeasible")
    return best
