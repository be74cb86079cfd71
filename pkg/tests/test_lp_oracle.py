import numpy as np
import pytest
from scipy.optimize import linprog

from resgrid.agents import DemandAgentState, StorageAgentState
from resgrid.errors import TooLargeForOracle
from resgrid.lp_oracle import market_lp_optimum, solve_box_lp
from resgrid.market import CouplingConstraint


def test_simple_box_lp():
    # max x + y, x + y <= 1.5, boxes [0, 1]
    sol = solve_box_lp(np.array([1.0, 1.0]), np.array([[1.0, 1.0]]),
                       np.array([1.5]), np.zeros(2), np.ones(2))
    assert sol.value == pytest.approx(1.5)


def test_unconstrained_box_lp():
    sol = solve_box_lp(np.array([2.0, -1.0]), np.zeros((0, 2)), np.zeros(0),
                       np.array([0.0, 0.0]), np.array([3.0, 3.0]))
    assert sol.value == pytest.approx(6.0)
    assert np.allclose(sol.x, [3.0, 0.0])


def test_infeasible_returns_none():
    sol = solve_box_lp(np.array([1.0]), np.array([[1.0]]), np.array([-5.0]),
                       np.array([0.0]), np.array([1.0]))
    assert sol is None


def test_size_limit():
    n = 9
    with pytest.raises(TooLargeForOracle):
        solve_box_lp(np.ones(n), np.zeros((0, n)), np.zeros(0),
                     np.zeros(n), np.ones(n))


def test_matches_scipy_on_random_instances():
    rng = np.random.default_rng(17)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        k = int(rng.integers(0, 3))
        w = rng.uniform(-2, 2, n)
        A = rng.uniform(-1, 1, (k, n))
        lo = rng.uniform(-3, 0, n)
        hi = lo + rng.uniform(0.5, 4, n)
        # keep the instance feasible: rhs above the box minimum of A x
        c = A @ ((lo + hi) / 2) + rng.uniform(0.1, 2, k)
        sol = solve_box_lp(w, A, c, lo, hi)
        ref = linprog(-w, A_ub=A if k else None, b_ub=c if k else None,
                      bounds=list(zip(lo, hi)), method="highs")
        assert ref.status == 0
        assert sol is not None
        assert sol.value == pytest.approx(-ref.fun, abs=1e-7)


def test_market_optimum_single_demand_agent():
    d = DemandAgentState(id=1, region_id=1, load_min=0.0, load_max=5.0,
                         energy_requirement=float("inf"), utility_weight=2.0)
    con = CouplingConstraint(rows={1: np.array([1.0])}, c=np.array([10.0]))
    sol = market_lp_optimum([d], [], con)
    assert sol.value == pytest.approx(10.0)


def test_market_optimum_scarce_supply():
    d = DemandAgentState(id=1, region_id=1, load_min=0.0, load_max=5.0,
                         energy_requirement=float("inf"), utility_weight=1.0)
    s = StorageAgentState(id=2, region_id=1, soc=10.0, soc_min=0.0, soc_max=20.0,
                          charge_limit=4.0, discharge_limit=3.0,
                          degradation_cost=0.1)
    con = CouplingConstraint(rows={1: np.array([1.0]), 2: np.array([-1.0])},
                             c=np.array([0.0]))
    sol = market_lp_optimum([d], [s], con)
    # serve 3 kW from the battery: value 3.0, degradation 0.3
    assert sol.value == pytest.approx(2.7)


def test_market_optimum_respects_export_ban():
    d = DemandAgentState(id=1, region_id=1, load_min=0.0, load_max=5.0,
                         energy_requirement=float("inf"), utility_weight=1.0)
    s = StorageAgentState(id=2, region_id=1, soc=10.0, soc_min=0.0, soc_max=20.0,
                          charge_limit=4.0, discharge_limit=3.0)
    con = CouplingConstraint(rows={1: np.array([1.0]), 2: np.array([-1.0])},
                             c=np.array([0.0]))
    sol = market_lp_optimum([d], [s], con, export_allowed={2: False})
    assert sol.value == pytest.approx(0.0)
