import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from laxnet.solve import (
    DENSE_LIMIT,
    LinearProgram,
    ModelBuilder,
    enumerate_binaries,
    pick_backend,
    solve_lp,
    solve_mip,
    verify,
)
from oracles import brute_integer_program


def lp_from(c, rows, sense="max", bounds=None, integer=None):
    """rows: list of (coeff list, sense, rhs)."""
    mb = ModelBuilder(sense)
    n = len(c)
    bounds = bounds or [(0.0, np.inf)] * n
    for j in range(n):
        mb.var(f"x{j}", *bounds[j], integer=bool(integer and integer[j]))
        mb.add_objective(j, c[j])
    for k, (a, s, b) in enumerate(rows):
        mb.row({j: v for j, v in enumerate(a)}, s, b, f"r{k}")
    return mb.build()


def check_certificate(lp, sol, tol=1e-7):
    """Primal feasibility, dual signs, complementary slackness and reduced-cost
    signs at the bounds: together a proof of optimality."""
    x, y = sol.x, sol.duals
    assert verify(lp, x).max_violation <= tol
    s = 1.0 if lp.sense == "max" else -1.0
    Ax = lp.A @ x
    for i in range(lp.m):
        slack = abs(Ax[i] - lp.rhs[i])
        if lp.row_sense[i] == "L":
            assert s * y[i] >= -tol
        elif lp.row_sense[i] == "G":
            assert s * y[i] <= tol
        if lp.row_sense[i] != "E":
            assert abs(y[i]) * slack <= tol * max(1.0, abs(y[i]))
    d = s * (lp.c - lp.A.T @ y)
    for j in range(lp.n):
        at_lo = x[j] <= lp.lb[j] + tol
        at_hi = x[j] >= lp.ub[j] - tol
        if at_lo and not at_hi:
            assert d[j] <= tol
        elif at_hi and not at_lo:
            assert d[j] >= -tol
        elif not (at_lo or at_hi):
            assert abs(d[j]) <= tol


# -- LP -----------------------------------------------------------------------


@pytest.mark.parametrize("backend", ["simplex", "highs"])
def test_small_lp_with_duals(backend):
    # optimum at (4, 2); by hand KKT the prices are 2 on x + y <= 6 and 1 on x <= 4
    lp = lp_from([3, 2], [([1, 1], "L", 6), ([1, 0], "L", 4), ([1, 3], "L", 30)])
    sol = solve_lp(lp, backend)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(16.0)
    assert np.allclose(sol.x, [4, 2])
    assert np.allclose(sol.duals, [2, 1, 0], atol=1e-9)


def test_infeasible_lp():
    lp = lp_from([1], [([1], "G", 2), ([1], "L", 1)])
    assert solve_lp(lp, "simplex").status == "infeasible"
    assert solve_lp(lp, "highs").status == "infeasible"


def test_unbounded_lp():
    lp = lp_from([1, 0], [([1, -1], "L", 1)])
    assert solve_lp(lp, "simplex").status == "unbounded"


def test_bounds_only_lp():
    lp = lp_from([1, -1], [], bounds=[(0, 3), (-2, 5)])
    sol = solve_lp(lp, "simplex")
    assert sol.objective == 5.0 and sol.x.tolist() == [3.0, -2.0]


def test_beale_cycling_example():
    # classic degenerate LP on which textbook Dantzig pivoting cycles
    c = [-0.75, 20, -0.5, 6]
    rows = [([0.25, -8, -1, 9], "L", 0), ([0.5, -12, -0.5, 3], "L", 0), ([0, 0, 1, 0], "L", 1)]
    sol = solve_lp(lp_from(c, rows, "min"), "simplex")
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(-1.25)


def test_equality_and_free_columns():
    # min x + y  s.t.  x - y = 1, x + y >= -3, both free
    lp = lp_from([1, 1], [([1, -1], "E", 1), ([1, 1], "G", -3)], "min",
                 bounds=[(-np.inf, np.inf), (-np.inf, np.inf)])
    sol = solve_lp(lp, "simplex")
    assert sol.objective == pytest.approx(-3.0)
    check_certificate(lp, sol)


def random_lp(rng, sense):
    n = int(rng.integers(2, 8))
    m = int(rng.integers(1, 8))
    x0 = rng.uniform(-2, 2, n)
    A = rng.normal(size=(m, n)) * (rng.random((m, n)) < 0.7)
    kinds = rng.choice(["L", "G", "E"], size=m, p=[0.45, 0.35, 0.2])
    slack = rng.uniform(0, 2, m)
    rhs = A @ x0 + np.where(kinds == "L", slack, np.where(kinds == "G", -slack, 0.0))
    lo = np.where(rng.random(n) < 0.2, -np.inf, x0 - rng.uniform(0, 3, n))
    hi = x0 + rng.uniform(0, 3, n)
    c = rng.normal(size=n)
    rows = [(A[i].tolist(), str(kinds[i]), float(rhs[i])) for i in range(m)]
    return lp_from(c.tolist(), rows, sense, bounds=list(zip(lo, hi)))


@given(st.integers(0, 2**32 - 1), st.sampled_from(["max", "min"]))
def test_simplex_matches_highs_and_is_certified(seed, sense):
    rng = np.random.default_rng(seed)
    lp = random_lp(rng, sense)
    ours = solve_lp(lp, "simplex")
    cmat = lp.c if sense == "min" else -lp.c
    L, G, E = (np.flatnonzero(lp.row_sense == k) for k in "LGE")
    A = lp.A.toarray()
    ref = linprog(cmat, A_ub=np.vstack([A[L], -A[G]]) if L.size + G.size else None,
                  b_ub=np.concatenate([lp.rhs[L], -lp.rhs[G]]) if L.size + G.size else None,
                  A_eq=A[E] if E.size else None, b_eq=lp.rhs[E] if E.size else None,
                  bounds=list(zip(lp.lb, lp.ub)), method="highs")
    if ref.status == 3:
        assert ours.status == "unbounded"
        return
    assert ref.status == 0 and ours.status == "optimal"
    want = ref.fun if sense == "min" else -ref.fun
    assert ours.objective == pytest.approx(want, abs=1e-7 * max(1.0, abs(want)))
    check_certificate(lp, ours)
    check_certificate(lp, solve_lp(lp, "highs"))


def test_pick_backend_by_size():
    lp = lp_from([1], [([1], "L", 1)])
    assert pick_backend(lp) == "simplex"
    assert pick_backend(lp, "highs") == "highs"
    big = int(np.sqrt(DENSE_LIMIT)) + 10
    mb = ModelBuilder()
    for j in range(big):
        mb.var(f"x{j}", 0, 1)
    for i in range(big):
        mb.row({i: 1.0}, "L", 0.5, f"r{i}")
    big_lp = mb.build()
    assert big_lp.m * (big_lp.n + 2 * big_lp.m) > DENSE_LIMIT
    assert pick_backend(big_lp) == "highs"


def test_unknown_backend():
    with pytest.raises(ValueError):
        solve_lp(lp_from([1], [([1], "L", 1)]), "cplex")


def test_duplicate_column_rejected():
    mb = ModelBuilder()
    mb.var("x")
    with pytest.raises(ValueError):
        mb.var("x")


# -- verification -------------------------------------------------------------


def test_verify_reports_integrality():
    mb = ModelBuilder()
    b = mb.binary("B")
    mb.row({b: 1.0}, "L", 1.0, "cap")
    lp = mb.build()
    assert verify(lp, [0.5]).integrality == 0.5
    assert verify(lp, [1.0]).ok()


def test_verify_measures_injected_perturbation():
    lp = lp_from([3, 2], [([1, 1], "L", 6), ([1, 0], "L", 4), ([1, -1], "E", 2)])
    x = solve_lp(lp, "simplex").x
    assert verify(lp, x).max_violation <= 1e-12
    chk = verify(lp, x + np.array([0.0, 1e-3]))
    assert chk.max_violation == pytest.approx(1e-3)
    assert chk.worst_row in ("r0", "r2")
    # rows hold here, only the sign bounds fail
    chk = verify(lp, [-0.25, -2.25])
    assert chk.worst_row == "bound:x1" and chk.max_violation == 2.25


# -- branch and bound ---------------------------------------------------------


def test_small_integer_program():
    # max 5x + 4y  s.t.  6x + 4y <= 24, x + 2y <= 6, integer: optimum 20 at (4, 0)
    lp = lp_from([5, 4], [([6, 4], "L", 24), ([1, 2], "L", 6)], integer=[True, True],
                 bounds=[(0, 10), (0, 10)])
    res = solve_mip(lp, backend="simplex")
    best, arg = brute_integer_program(np.array([5, 4]), np.array([[6, 4], [1, 2]]), np.array([24, 6]),
                                      [(0, 10), (0, 10)])
    assert res.status == "optimal"
    assert res.objective == pytest.approx(best) == 20
    assert np.allclose(res.x, arg)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["max", "min"]))
def test_branch_and_bound_matches_enumeration(seed, sense):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    m = int(rng.integers(1, 4))
    A = rng.integers(-3, 6, size=(m, n)).astype(float)
    b = rng.integers(2, 15, size=m).astype(float)
    c = rng.integers(-4, 8, size=n).astype(float)
    bounds = [(0, int(rng.integers(1, 5))) for _ in range(n)]
    lp = lp_from(c.tolist(), [(A[i].tolist(), "L", float(b[i])) for i in range(m)], sense,
                 bounds=[(float(lo), float(hi)) for lo, hi in bounds], integer=[True] * n)
    best, _ = brute_integer_program(c, A, b, bounds, sense)
    res = solve_mip(lp, backend="simplex")
    if best is None:
        assert res.status == "infeasible"
    else:
        assert res.status == "optimal"
        assert res.objective == pytest.approx(best, abs=1e-7)
        assert verify(lp, res.x).ok()


@given(st.integers(0, 2**32 - 1))
def test_bound_sequence_is_monotone(seed):
    rng = np.random.default_rng(seed)
    n = 8
    A = rng.uniform(1, 10, size=(2, n))
    lp = lp_from(rng.uniform(1, 10, n).tolist(), [(A[0].tolist(), "L", float(A[0].sum() / 3)),
                                                   (A[1].tolist(), "L", float(A[1].sum() / 2))],
                 bounds=[(0, 1)] * n, integer=[True] * n)
    res = solve_mip(lp, backend="simplex")
    h = np.array(res.bound_history)
    assert np.all(np.diff(h) <= 1e-9)
    assert h[-1] == pytest.approx(res.objective)
    assert res.objective == pytest.approx(enumerate_binaries(lp, "simplex")[0])


def test_mixed_program_with_continuous_columns():
    # max x + 2z  s.t.  x + z <= 2.5, z binary, x continuous in [0, 2]
    lp = lp_from([1, 2], [([1, 1], "L", 2.5)], bounds=[(0, 2), (0, 1)], integer=[False, True])
    res = solve_mip(lp, backend="simplex")
    assert res.objective == pytest.approx(3.5)
    assert res.x[1] == 1.0


def test_integer_infeasible():
    lp = lp_from([1], [([1], "G", 0.2), ([1], "L", 0.8)], integer=[True], bounds=[(0, 1)])
    assert solve_mip(lp).status == "infeasible"


def test_node_limit_reports_budget():
    rng = np.random.default_rng(7)
    n = 10
    w = rng.uniform(1, 10, n)
    lp = lp_from(rng.uniform(1, 10, n).tolist(), [(w.tolist(), "L", float(w.sum() / 2))],
                 bounds=[(0, 1)] * n, integer=[True] * n)
    best = enumerate_binaries(lp, "simplex")[0]
    res = solve_mip(lp, backend="simplex", node_limit=2, use_hooks=False)
    assert res.status == "budget"
    assert res.bound >= best - 1e-9
    if res.x is not None:
        assert verify(lp, res.x).ok() and res.objective <= best + 1e-9
    full = solve_mip(lp, backend="simplex")
    assert full.status == "optimal"
    assert full.objective == pytest.approx(best)


def test_zero_time_budget():
    rng = np.random.default_rng(3)
    n = 12
    w = rng.uniform(1, 10, n)
    lp = lp_from(rng.uniform(1, 10, n).tolist(), [(w.tolist(), "L", float(w.sum() / 2.5))],
                 bounds=[(0, 1)] * n, integer=[True] * n)
    res = solve_mip(lp, backend="simplex", time_budget=0.0)
    assert res.status in ("budget", "optimal")
    if res.x is not None:
        assert verify(lp, res.x).ok()


def test_enumeration_limit():
    lp = lp_from([1] * 3, [], bounds=[(0, 1)] * 3, integer=[True] * 3)
    with pytest.raises(ValueError):
        enumerate_binaries(lp, limit=2)
    assert enumerate_binaries(lp)[0] == 3.0


def test_with_bounds_copies():
    lp = lp_from([1], [([1], "L", 5)])
    tight = lp.with_bounds([0.0], [2.0])
    assert isinstance(tight, LinearProgram)
    assert solve_lp(tight).objective == 2.0 and solve_lp(lp).objective == 5.0
    assert sp.issparse(tight.A)
