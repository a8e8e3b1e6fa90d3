"""LP and MIP solution.

``solve_lp`` runs a dense bounded-variable primal simplex (two phases,
Dantzig pricing with a switch to Bland's rule while pivots are degenerate).
Large relaxations can be delegated to HiGHS through scipy. ``solve_mip`` is a
best-first branch-and-bound over the integer columns on top of either LP
backend.
"""

from __future__ import annotations

import dataclasses
import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
INT_TOL = 1e-6
# dense tableau entries above which "auto" hands the LP to HiGHS
DENSE_LIMIT = 4_000_000


class SolverError(RuntimeError):
    """Numerical failure inside the simplex method."""


# ---------------------------------------------------------------------------
# model container


@dataclass
class LinearProgram:
    """optimize c.x + const  s.t.  A x (<=, >=, =) rhs,  lb <= x <= ub."""

    names: list[str]
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray
    c: np.ndarray
    A: sp.csr_matrix
    row_sense: np.ndarray  # 'L', 'G' or 'E'
    rhs: np.ndarray
    row_names: list[str]
    sense: str = "max"
    obj_const: float = 0.0

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def m(self) -> int:
        return len(self.row_names)

    def objective(self, x) -> float:
        return float(self.c @ np.asarray(x, dtype=float) + self.obj_const)

    def with_bounds(self, lb, ub) -> "LinearProgram":
        return LinearProgram(self.names, np.asarray(lb, float), np.asarray(ub, float), self.integer,
                             self.c, self.A, self.row_sense, self.rhs, self.row_names, self.sense,
                             self.obj_const)


class ModelBuilder:
    """Accumulates columns and sparse rows, then freezes them into a LinearProgram."""

    def __init__(self, sense: str = "max"):
        if sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        self.sense = sense
        self.names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.integer: list[bool] = []
        self.obj: dict[int, float] = {}
        self.obj_const = 0.0
        self.rows: list[tuple[dict[int, float], str, float, str]] = []
        self.index: dict[str, int] = {}

    def var(self, name: str, lb: float = 0.0, ub: float = np.inf, integer: bool = False) -> int:
        if name in self.index:
            raise ValueError(f"duplicate variable {name}")
        k = len(self.names)
        self.names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.integer.append(bool(integer))
        self.index[name] = k
        return k

    def binary(self, name: str) -> int:
        return self.var(name, 0.0, 1.0, integer=True)

    def row(self, coeffs: dict[int, float], sense: str, rhs: float, name: str) -> int:
        clean = {}
        for j, a in coeffs.items():
            if a != 0.0:
                clean[j] = clean.get(j, 0.0) + float(a)
        self.rows.append((clean, sense, float(rhs), name))
        return len(self.rows) - 1

    def add_objective(self, j: int, coef: float) -> None:
        self.obj[j] = self.obj.get(j, 0.0) + float(coef)

    def build(self, cls=LinearProgram, **extra):
        n = len(self.names)
        data, ri, ci = [], [], []
        for r, (coeffs, _, _, _) in enumerate(self.rows):
            for j, a in coeffs.items():
                ri.append(r)
                ci.append(j)
                data.append(a)
        A = sp.csr_matrix((data, (ri, ci)), shape=(len(self.rows), n))
        c = np.zeros(n)
        for j, a in self.obj.items():
            c[j] = a
        return cls(
            names=list(self.names),
            lb=np.array(self.lb, dtype=float),
            ub=np.array(self.ub, dtype=float),
            integer=np.array(self.integer, dtype=bool),
            c=c,
            A=A,
            row_sense=np.array([s for _, s, _, _ in self.rows], dtype="<U1"),
            rhs=np.array([b for _, _, b, _ in self.rows], dtype=float),
            row_names=[nm for _, _, _, nm in self.rows],
            sense=self.sense,
            obj_const=self.obj_const,
            **extra,
        )


# ---------------------------------------------------------------------------
# LP


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    objective: float = np.nan
    x: np.ndarray | None = None
    duals: np.ndarray | None = None  # d objective / d rhs, in the model's sense
    iterations: int = 0
    backend: str = "simplex"


class _Tableau:
    """Dense bounded-variable simplex on  Abar z = b,  l <= z <= u  (minimize)."""

    def __init__(self, Abar, b, cost, l, u, max_iter):
        m, n = Abar.shape
        self.m, self.n = m, n
        self.Abar, self.b, self.cost, self.l, self.u = Abar, b, cost, l, u
        self.max_iter = max_iter
        self.iterations = 0
        z = l.copy()
        r = b - Abar @ z
        sign = np.where(r < 0, -1.0, 1.0)
        # columns: structural+slack (n), artificial (m)
        self.T = np.hstack([Abar * sign[:, None], np.eye(m)])
        self.lo = np.concatenate([l, np.zeros(m)])
        self.hi = np.concatenate([u, np.full(m, np.inf)])
        self.z = np.concatenate([z, np.abs(r)])
        self.basis = np.arange(n, n + m)
        self.is_basic = np.zeros(n + m, dtype=bool)
        self.is_basic[self.basis] = True
        self.sign = sign

    def _reduced(self, c):
        return c - c[self.basis] @ self.T

    def run(self, c, phase):
        d = self._reduced(c)
        degenerate = 0
        bland = False
        T, z, lo, hi = self.T, self.z, self.lo, self.hi
        while True:
            if self.iterations >= self.max_iter:
                raise SolverError(f"iteration limit {self.max_iter} reached in phase {phase}")
            movable = (~self.is_basic) & (hi > lo)
            at_lo = z <= lo + FEAS_TOL
            at_hi = z >= hi - FEAS_TOL
            cand = movable & ((at_lo & (d < -OPT_TOL)) | (at_hi & (d > OPT_TOL)) | (~at_lo & ~at_hi & (np.abs(d) > OPT_TOL)))
            idx = np.flatnonzero(cand)
            if idx.size == 0:
                return "optimal"
            j = int(idx[0]) if bland else int(idx[np.argmax(np.abs(d[idx]))])
            sgn = 1.0 if d[j] < 0 else -1.0
            col = T[:, j] * sgn
            xB = z[self.basis]
            lB, uB = lo[self.basis], hi[self.basis]
            theta = hi[j] - z[j] if sgn > 0 else z[j] - lo[j]
            leave = -1
            with np.errstate(divide="ignore", invalid="ignore"):
                dec = col > PIVOT_TOL
                inc = col < -PIVOT_TOL
                ratios = np.full(self.m, np.inf)
                ratios[dec] = (xB[dec] - lB[dec]) / col[dec]
                ratios[inc] = (uB[inc] - xB[inc]) / (-col[inc])
            ratios = np.maximum(ratios, 0.0)
            if ratios.size:
                rmin = ratios.min()
                if rmin < theta:
                    ties = np.flatnonzero(ratios <= rmin + 1e-12)
                    if bland:
                        leave = int(ties[np.argmin(self.basis[ties])])
                    else:
                        leave = int(ties[np.argmax(np.abs(col[ties]))])
                    theta = ratios[leave]
            if not np.isfinite(theta):
                return "unbounded"
            self.iterations += 1
            z[self.basis] = xB - theta * col
            z[j] += sgn * theta
            if theta <= 1e-12:
                degenerate += 1
                if degenerate > 50:
                    bland = True
            else:
                degenerate = 0
                bland = False
            if leave < 0:
                continue  # bound flip, basis unchanged
            piv = T[leave, j]
            if abs(piv) < PIVOT_TOL:
                raise SolverError(f"pivot {piv:.3e} too small at row {leave}, column {j}")
            out = self.basis[leave]
            # snap the leaving variable onto the bound it reached
            z[out] = lB[leave] if col[leave] > 0 else uB[leave]
            T[leave] /= piv
            colj = T[:, j].copy()
            colj[leave] = 0.0
            T -= np.outer(colj, T[leave])
            d -= d[j] * T[leave]
            self.basis[leave] = j
            self.is_basic[out] = False
            self.is_basic[j] = True

    def drive_out_artificials(self):
        n = self.n
        for r in range(self.m):
            if self.basis[r] < n:
                continue
            row = self.T[r, :n].copy()
            row[self.is_basic[:n]] = 0.0
            j = int(np.argmax(np.abs(row))) if row.size else 0
            if row.size and abs(row[j]) > 1e-7:
                piv = self.T[r, j]
                out = self.basis[r]
                self.T[r] /= piv
                colj = self.T[:, j].copy()
                colj[r] = 0.0
                self.T -= np.outer(colj, self.T[r])
                self.basis[r] = j
                self.is_basic[out] = False
                self.is_basic[j] = True


def _standard_form(lp: LinearProgram, lb, ub):
    """Append slacks so every row is an equality; shift free columns."""
    A = lp.A.toarray() if sp.issparse(lp.A) else np.asarray(lp.A, dtype=float)
    m, n = A.shape
    free = ~np.isfinite(lb)
    flipped = free & np.isfinite(ub)  # x = -y with y >= -ub
    split = free & ~np.isfinite(ub)
    Acols = [A]
    l, u = lb.copy(), ub.copy()
    c = (lp.c if lp.sense == "min" else -lp.c).astype(float)
    A = A.copy()
    A[:, flipped] *= -1
    c = c.copy()
    c[flipped] *= -1
    l[flipped], u[flipped] = -ub[flipped], np.inf
    l[split] = 0.0
    Acols = [A]
    extra_l, extra_u, extra_c = [], [], []
    if split.any():
        Acols.append(-A[:, split])
        extra_l += [0.0] * int(split.sum())
        extra_u += [np.inf] * int(split.sum())
        extra_c += list(-c[split])
    ineq = np.flatnonzero(lp.row_sense != "E")
    S = np.zeros((m, ineq.size))
    for k, r in enumerate(ineq):
        S[r, k] = 1.0 if lp.row_sense[r] == "L" else -1.0
    Acols.append(S)
    Abar = np.hstack(Acols)
    l_all = np.concatenate([l, extra_l, np.zeros(ineq.size)])
    u_all = np.concatenate([u, extra_u, np.full(ineq.size, np.inf)])
    c_all = np.concatenate([c, extra_c, np.zeros(ineq.size)])
    return Abar, lp.rhs.astype(float), c_all, l_all, u_all, flipped, split


def _solve_simplex(lp: LinearProgram, lb, ub, max_iter=None) -> LpSolution:
    n = lp.n
    if np.any(lb > ub + FEAS_TOL):
        return LpSolution("infeasible", backend="simplex")
    Abar, b, c, l, u, flipped, split = _standard_form(lp, lb, ub)
    m, ntot = Abar.shape
    if m == 0:
        # bounds only
        x = np.where(c < 0, u, l)
        if np.any(~np.isfinite(x[:n])):
            return LpSolution("unbounded", backend="simplex")
        return _finish_trivial(lp, x[:n], flipped)
    tab = _Tableau(Abar, b, c, l, u, max_iter or 50 * (m + ntot) + 1000)
    phase1 = np.concatenate([np.zeros(ntot), np.ones(m)])
    tab.run(phase1, 1)
    infeas = tab.z[ntot:].sum()
    if infeas > 1e-7 * max(1.0, np.abs(b).max(initial=0.0)):
        return LpSolution("infeasible", iterations=tab.iterations, backend="simplex")
    tab.drive_out_artificials()
    tab.hi[ntot:] = 0.0
    tab.z[ntot:] = np.minimum(tab.z[ntot:], 0.0)
    status = tab.run(np.concatenate([c, np.zeros(m)]), 2)
    if status == "unbounded":
        return LpSolution("unbounded", iterations=tab.iterations, backend="simplex")
    # refactorize for accurate primal and dual values
    full = np.hstack([Abar * tab.sign[:, None], np.eye(m)])
    B = full[:, tab.basis]
    nonb = ~tab.is_basic
    z = tab.z.copy()
    try:
        rhs = tab.sign * b - full[:, nonb] @ z[nonb]
        z[tab.basis] = np.linalg.solve(B, rhs)
        cfull = np.concatenate([c, np.zeros(m)])
        y = np.linalg.solve(B.T, cfull[tab.basis]) * tab.sign
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"singular final basis: {exc}") from exc
    x = z[:n].copy()
    if split.any():
        x[split] -= z[n:n + int(split.sum())]
    x[flipped] *= -1
    x = np.clip(x, lb, ub)
    duals = y if lp.sense == "min" else -y
    return LpSolution("optimal", lp.objective(x), x, duals, tab.iterations, "simplex")


def _finish_trivial(lp, x, flipped):
    x = x.copy()
    x[flipped] *= -1
    return LpSolution("optimal", lp.objective(x), x, np.zeros(0), 0, "simplex")


def _solve_highs(lp: LinearProgram, lb, ub) -> LpSolution:
    from scipy.optimize import linprog

    if np.any(lb > ub + FEAS_TOL):
        return LpSolution("infeasible", backend="highs")
    A = sp.csr_matrix(lp.A)
    L = np.flatnonzero(lp.row_sense == "L")
    G = np.flatnonzero(lp.row_sense == "G")
    E = np.flatnonzero(lp.row_sense == "E")
    ineq = sp.vstack([A[L], -A[G]]) if (L.size + G.size) else None
    b_ub = np.concatenate([lp.rhs[L], -lp.rhs[G]]) if ineq is not None else None
    c = lp.c if lp.sense == "min" else -lp.c
    res = linprog(c, A_ub=ineq, b_ub=b_ub, A_eq=A[E] if E.size else None,
                  b_eq=lp.rhs[E] if E.size else None,
                  bounds=np.column_stack([lb, ub]), method="highs")
    if res.status == 2:
        return LpSolution("infeasible", backend="highs")
    if res.status == 3:
        return LpSolution("unbounded", backend="highs")
    if res.status != 0:
        raise SolverError(f"HiGHS failed: {res.message}")
    y = np.zeros(lp.m)
    if ineq is not None:
        mu = res.ineqlin.marginals
        y[L] = mu[:L.size]
        y[G] = -mu[L.size:]
    if E.size:
        y[E] = res.eqlin.marginals
    if lp.sense == "max":
        y = -y
    x = np.clip(res.x, lb, ub)
    return LpSolution("optimal", lp.objective(x), x, y, int(res.nit), "highs")


def pick_backend(lp: LinearProgram, backend: str = "auto") -> str:
    if backend != "auto":
        return backend
    m = lp.m
    ntot = lp.n + int(np.sum(lp.row_sense != "E")) + m
    return "simplex" if m * ntot <= DENSE_LIMIT else "highs"


def solve_lp(lp: LinearProgram, backend: str = "auto", lb=None, ub=None) -> LpSolution:
    """Solve the continuous relaxation of ``lp`` (integrality ignored)."""
    lb = lp.lb if lb is None else np.asarray(lb, dtype=float)
    ub = lp.ub if ub is None else np.asarray(ub, dtype=float)
    which = pick_backend(lp, backend)
    if which == "simplex":
        return _solve_simplex(lp, lb, ub)
    if which == "highs":
        return _solve_highs(lp, lb, ub)
    raise ValueError(f"unknown LP backend {backend!r}")


# ---------------------------------------------------------------------------
# verification


@dataclass
class Verification:
    max_violation: float
    integrality: float
    worst_row: str | None = None

    def ok(self, tol: float = 1e-6) -> bool:
        return self.max_violation <= tol and self.integrality <= tol


def verify(lp: LinearProgram, x) -> Verification:
    """Largest row/bound violation and largest distance of an integer column
    from the nearest integer."""
    x = np.asarray(x, dtype=float)
    Ax = lp.A @ x
    viol = np.zeros(lp.m)
    L, G, E = lp.row_sense == "L", lp.row_sense == "G", lp.row_sense == "E"
    viol[L] = np.maximum(0.0, Ax[L] - lp.rhs[L])
    viol[G] = np.maximum(0.0, lp.rhs[G] - Ax[G])
    viol[E] = np.abs(Ax[E] - lp.rhs[E])
    bvi = np.maximum(np.maximum(0.0, lp.lb - x), np.maximum(0.0, x - lp.ub))
    worst = None
    vmax = 0.0
    if viol.size and viol.max() > 0:
        k = int(np.argmax(viol))
        vmax, worst = float(viol[k]), lp.row_names[k]
    if bvi.size and bvi.max() > vmax:
        k = int(np.argmax(bvi))
        vmax, worst = float(bvi[k]), f"bound:{lp.names[k]}"
    xi = x[lp.integer]
    integ = float(np.max(np.abs(xi - np.round(xi)), initial=0.0))
    return Verification(vmax, integ, worst)


# ---------------------------------------------------------------------------
# branch and bound


@dataclass
class MipResult:
    status: str  # optimal | budget | infeasible
    x: np.ndarray | None
    objective: float
    bound: float
    nodes: int = 0
    bound_history: list[float] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def gap(self) -> float:
        if self.x is None:
            return np.inf
        return abs(self.bound - self.objective) / max(1.0, abs(self.objective))


class _Search:
    def __init__(self, lp, backend, gap_tol, use_hooks=True):
        self.lp = lp
        self.use_hooks = use_hooks
        self.backend = backend
        self.gap_tol = gap_tol
        self.sgn = 1.0 if lp.sense == "max" else -1.0  # internal: maximize sgn*obj
        self.best_x = None
        self.best = -np.inf
        self.nodes = 0

    def lp_solve(self, lb, ub):
        self.nodes += 1
        return solve_lp(self.lp, self.backend, lb, ub)

    def offer(self, x, source: str):
        if x is None:
            return
        x = x.copy()
        ints = self.lp.integer
        x[ints] = np.round(x[ints])
        polish = getattr(self.lp, "polish", None) if self.use_hooks else None
        if polish is not None and source != "repair":
            # same point rebuilt without LP round-off, kept when no worse
            px = polish(x)
            if px is not None and verify(self.lp, px).ok() and \
                    self.lp.objective(px) * self.sgn >= self.lp.objective(x) * self.sgn - 1e-9 * max(1.0, abs(self.lp.objective(x))):
                x = px
        chk = verify(self.lp, x)
        if not chk.ok():
            log.debug("rejected %s candidate: violation %.2e at %s", source, chk.max_violation, chk.worst_row)
            return
        val = self.sgn * self.lp.objective(x)
        if val > self.best + 1e-12:
            log.debug("incumbent %.9g from %s", self.sgn * val, source)
            self.best, self.best_x = val, x

    def try_fixing(self, fix_vals, lb, ub, source):
        ints = np.flatnonzero(self.lp.integer)
        lb2, ub2 = lb.copy(), ub.copy()
        vals = np.clip(np.round(fix_vals[ints]), lb[ints], ub[ints])
        lb2[ints] = vals
        ub2[ints] = vals
        sol = self.lp_solve(lb2, ub2)
        if sol.status == "optimal":
            self.offer(sol.x, source)

    def heuristics(self, x, lb, ub):
        ints = self.lp.integer
        self.try_fixing(np.where(x > 0.5, 1.0, 0.0) * (ints) + x * (~ints), lb, ub, "rounding")
        repair = getattr(self.lp, "repair", None) if self.use_hooks else None
        if repair is not None:
            cand = repair(x)
            if cand is not None and np.all(cand[ints] >= lb[ints] - 1e-9) and np.all(cand[ints] <= ub[ints] + 1e-9):
                self.offer(cand, "repair")
                self.try_fixing(cand, lb, ub, "repair+lp")

    def dive(self, lb, ub, weight=1e-7):
        """Re-solve with a small push along the model's preferred direction,
        then repair; a cheap way to land on a vertex the repair hook can use."""
        direction = getattr(self.lp, "dive_direction", None)
        repair = getattr(self.lp, "repair", None)
        if direction is None or repair is None or not self.use_hooks:
            return
        nudged = dataclasses.replace(self.lp, c=self.lp.c + self.sgn * weight * direction)
        sol = solve_lp(nudged, self.backend, lb, ub)
        self.nodes += 1
        if sol.status == "optimal":
            self.offer(repair(sol.x), "dive")

    def closed(self, bound):
        if self.best_x is None:
            return False
        return bound - self.best <= self.gap_tol * max(1.0, abs(self.best))


def solve_mip(lp: LinearProgram, gap_tol: float = 1e-9, time_budget: float | None = None,
              backend: str = "auto", node_limit: int | None = None, use_hooks: bool = True) -> MipResult:
    """Best-first branch-and-bound on the most fractional integer column.

    Incumbents come from integral relaxations, from rounding the integer
    columns at 0.5 and re-solving, and from the model's own ``repair`` hook
    when it has one (``use_hooks=False`` restricts the search to plain LP
    relaxations and rounding). Returns status "budget" when the time or node budget runs
    out first; the incumbent, if any, is always feasible.
    """
    t0 = time.perf_counter()
    S = _Search(lp, backend, gap_tol, use_hooks)
    ints = np.flatnonzero(lp.integer)
    root = S.lp_solve(lp.lb, lp.ub)
    if root.status == "infeasible":
        return MipResult("infeasible", None, np.nan, np.nan, S.nodes, [], time.perf_counter() - t0)
    if root.status == "unbounded":
        raise SolverError("LP relaxation is unbounded")
    counter = itertools.count()
    heap: list = []

    def consider(sol, lb, ub, parent_bound):
        x = sol.x
        bound = min(S.sgn * sol.objective, parent_bound)
        if bound <= S.best + 1e-9 * max(1.0, abs(S.best)):
            return
        frac = np.abs(x[ints] - np.round(x[ints]))
        if frac.size == 0 or frac.max() <= INT_TOL:
            S.offer(x, "relaxation")
            return
        heapq.heappush(heap, (-bound, next(counter), lb, ub, x))

    consider(root, lp.lb.copy(), lp.ub.copy(), np.inf)
    if heap:
        S.heuristics(root.x, lp.lb, lp.ub)
        if not S.closed(-heap[0][0]):
            S.dive(lp.lb, lp.ub)
    history = []
    status = "optimal"
    while heap:
        bound = -heap[0][0]
        history.append(S.sgn * max(bound, S.best))
        if S.closed(bound):
            break
        if time_budget is not None and time.perf_counter() - t0 > time_budget:
            status = "budget"
            break
        if node_limit is not None and S.nodes >= node_limit:
            status = "budget"
            break
        negb, _, lb, ub, x = heapq.heappop(heap)
        if -negb <= S.best + 1e-9 * max(1.0, abs(S.best)):
            continue
        frac = np.abs(x[ints] - np.round(x[ints]))
        # most fractional: distance to nearest integer closest to 0.5
        j = int(ints[np.argmax(frac)])
        for side in (0, 1):
            lb2, ub2 = lb.copy(), ub.copy()
            if side == 0:
                ub2[j] = np.floor(x[j])
            else:
                lb2[j] = np.ceil(x[j])
            sol = S.lp_solve(lb2, ub2)
            if sol.status != "optimal":
                continue
            consider(sol, lb2, ub2, -negb)
            if S.nodes % 8 == 0 and heap:
                S.heuristics(sol.x, lb2, ub2)
    if heap:
        top = max(-heap[0][0], S.best)
    else:
        top = S.best
    if S.best_x is None:
        return MipResult("infeasible" if status == "optimal" else "budget", None, np.nan,
                         S.sgn * top, S.nodes, history, time.perf_counter() - t0)
    history.append(S.sgn * top)
    return MipResult(status, S.best_x, S.sgn * S.best, S.sgn * top, S.nodes, history,
                     time.perf_counter() - t0)


def enumerate_binaries(lp: LinearProgram, backend: str = "auto", limit: int = 16) -> tuple[float, np.ndarray | None]:
    """Exhaustive oracle: fix every integer column to each 0/1 pattern."""
    ints = np.flatnonzero(lp.integer)
    if ints.size > limit:
        raise ValueError(f"{ints.size} binaries exceed the enumeration limit {limit}")
    sgn = 1.0 if lp.sense == "max" else -1.0
    best, best_x = -np.inf, None
    for bits in itertools.product((0.0, 1.0), repeat=ints.size):
        lb, ub = lp.lb.copy(), lp.ub.copy()
        lb[ints] = ub[ints] = bits
        sol = solve_lp(lp, backend, lb, ub)
        if sol.status == "optimal" and sgn * sol.objective > best:
            best, best_x = sgn * sol.objective, sol.x
    return (sgn * best if best_x is not None else np.nan), best_x
