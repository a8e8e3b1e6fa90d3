"""Mixed-integer program for network flow optimization.

Per arc e and grid index the columns are, in this order,

    Q_i  (i = 1..N)            cumulative arrivals
    W_i  (i = 1..N)            cumulative exits
    R_i  (i = D+1..D+N)        running minimum of Qhat_j - mu t_j
    B_i  (i = D+1..D+N)        binary: 1 keeps R_{i-1}, 0 takes the new term

with D the arc's grid offset. Q_0 = W_0 = 0 and R_D = -mu t_0 are constants.
The running minimum is linearized with the binaries and a per-arc big-M:

    R_{i-1} + (B_i - 1) M <= R_i <= R_{i-1}
    g_{i-D} - M B_i       <= R_i <= g_{i-D},   g_j = q0 + Q_j - mu t_j

and the exit count is W_i = R_i + (t_i - L/V) mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from laxnet import lax
from laxnet.network import CumulativeCurve, Network, TimeGrid, ValidationError
from laxnet.sim import AllocationSchedule, NetworkState, propagate, recover_allocations
from laxnet.solve import LinearProgram, ModelBuilder, Verification, verify

OBJECTIVES = ("terminal_throughput", "time_weighted", "throughput_minus_inventory")


@dataclass(frozen=True)
class ObjectiveSpec:
    """What to maximize and which quantities are free.

    ``arcs`` names the throughput arcs (default: every sink). ``alpha``
    overrides the per-arc inventory costs stored on the processors.
    """

    kind: str = "terminal_throughput"
    decide_inflow: bool = False
    arcs: tuple[str, ...] | None = None
    alpha: Mapping[str, float] | float | None = None

    def __post_init__(self):
        if self.kind not in OBJECTIVES:
            raise ValidationError(f"unknown objective {self.kind!r}; expected one of {OBJECTIVES}")

    def alpha_for(self, net: Network, e: str) -> float:
        if self.alpha is None:
            return net[e].alpha_q
        if isinstance(self.alpha, Mapping):
            return float(self.alpha.get(e, net[e].alpha_q))
        return float(self.alpha)


@dataclass
class MipModel(LinearProgram):
    net: Network | None = None
    grid: TimeGrid | None = None
    deltas: dict[str, int] = field(default_factory=dict)
    bigM: dict[str, float] = field(default_factory=dict)
    cols: dict[tuple[str, str, int], int] = field(default_factory=dict)
    spec: ObjectiveSpec = field(default_factory=ObjectiveSpec)
    inflows: dict[str, CumulativeCurve] = field(default_factory=dict)
    supply: dict[str, float] = field(default_factory=dict)
    fixed_alloc: AllocationSchedule | None = None

    def __repr__(self):
        return f"MipModel({self.n} columns, {int(self.integer.sum())} binary, {self.m} rows)"

    # -- reading assignments -------------------------------------------------

    def values(self, x, kind: str, arc: str) -> np.ndarray:
        """Q or W samples for i = 0..N, or R for i = D..D+N, from an assignment."""
        N, D = self.grid.N, self.deltas[arc]
        if kind in ("Q", "W"):
            out = np.zeros(N + 1)
            out[1:] = [x[self.cols[kind, arc, i]] for i in range(1, N + 1)]
            if kind == "W":
                out[0] = self._w0(arc)
            return out
        if kind == "R":
            out = np.empty(N + 1)
            out[0] = -self.net[arc].mu * self.grid.t0
            out[1:] = [x[self.cols["R", arc, D + k]] for k in range(1, N + 1)]
            return out
        raise KeyError(kind)

    def _w0(self, arc):
        p = self.net[arc]
        return 0.0 if p.rho0.is_zero() else float(lax.density_exit(p, self.grid.t0))

    def queues(self, x, arc: str) -> np.ndarray:
        """q_i = Qhat_i - mu t_i - R_{i+D}, i = 0..N."""
        p = self.net[arc]
        Qh = lax.discrete_hat(self.values(x, "Q", arc), p.q0)
        return Qh - p.mu * self.grid.t - self.values(x, "R", arc)

    def state(self, x) -> NetworkState:
        arcs = self.net.order
        return NetworkState(self.grid, {e: self.values(x, "Q", e) for e in arcs},
                            {e: self.values(x, "W", e) for e in arcs},
                            {e: self.queues(x, e) for e in arcs})

    # -- building assignments ------------------------------------------------

    def assignment_from_state(self, state: NetworkState) -> np.ndarray:
        """The unique assignment whose Q columns equal the state's arrivals."""
        x = np.zeros(self.n)
        grid = self.grid
        for e, p in self.net.processors.items():
            D = self.deltas[e]
            Q = state.Q[e]
            R = lax.running_min(grid, lax.discrete_hat(Q, p.q0), p.mu)
            g = lax.discrete_hat(Q, p.q0) - p.mu * grid.t
            for i in range(1, grid.N + 1):
                x[self.cols["Q", e, i]] = Q[i]
                x[self.cols["W", e, i]] = state.W[e][i]
                x[self.cols["R", e, D + i]] = R[i]
                x[self.cols["B", e, D + i]] = 1.0 if g[i] >= R[i - 1] else 0.0
        return x

    def repair(self, x) -> np.ndarray | None:
        """Feasible assignment near ``x``: read allocation rates (and decided
        inflows) off its Q columns, then simulate forward exactly."""
        x = np.asarray(x, dtype=float)
        state = self.state(x)
        inflows = dict(self.inflows)
        for e in self.supply:
            Q = np.maximum.accumulate(np.clip(state.Q[e], 0.0, self.supply[e]))
            Q[0] = 0.0
            inflows[e] = CumulativeCurve.from_samples(self.grid.t, Q)
        if self.fixed_alloc is not None:
            alloc = self.fixed_alloc
        else:
            alloc = recover_allocations(state, self.net, self.grid)
        try:
            sim = propagate(self.net, inflows, alloc, self.grid)
        except ValidationError:
            return None
        return self.assignment_from_state(sim)

    polish = repair

    @property
    def dive_direction(self) -> np.ndarray:
        """Unit weight on every R column: pushes running minima up to the
        exact envelope, where integral binaries exist."""
        d = np.zeros(self.n)
        for (kind, _, _), j in self.cols.items():
            if kind == "R":
                d[j] = 1.0
        return d


def big_m(net: Network, grid: TimeGrid, inflows: Mapping[str, CumulativeCurve],
          supply: Mapping[str, float]) -> dict[str, float]:
    """M^e = q0^e + total possible network inflow + mu^e T + 1.

    Initial queues and initial densities on every arc count towards the
    network inflow, since they can all reach any downstream arc.
    """
    total = sum(float(c(grid.T)) for c in inflows.values()) + sum(supply.values())
    total += sum(p.q0 + p.initial_mass() for p in net.processors.values())
    tmax = max(abs(grid.t0), abs(grid.T))
    return {e: p.q0 + total + p.mu * tmax + 1.0 for e, p in net.processors.items()}


def build_mip(net: Network, grid: TimeGrid, inflows: Mapping[str, CumulativeCurve] | None = None,
              obj: ObjectiveSpec | None = None, buffer_caps: Mapping[str, float] | None = None,
              fixed_alloc: AllocationSchedule | None = None,
              supply: Mapping[str, float] | None = None) -> MipModel:
    """Assemble the mixed-integer program on ``grid``.

    Source inflows are fixed curves unless ``obj.decide_inflow`` is set; then
    Q on each source arc becomes a non-decreasing decision bounded by
    ``supply`` (default: the total of the given inflow curve). Buffer caps
    come from ``buffer_caps`` or, failing that, from each processor's Cq.
    ``fixed_alloc`` pins the allocation rates at every dispersive node.
    """
    obj = obj or ObjectiveSpec()
    inflows = dict(inflows or {})
    unknown = set(inflows) - set(net.source_arcs)
    if unknown:
        raise ValidationError(f"inflow given for non-source arcs {sorted(unknown)}")
    grid.check(net)
    N, t, h = grid.N, grid.t, grid.h
    deltas = grid.deltas(net)

    dec_supply: dict[str, float] = {}
    if obj.decide_inflow:
        for e in net.source_arcs:
            if supply is not None and e in supply:
                dec_supply[e] = float(supply[e])
            elif e in inflows:
                dec_supply[e] = float(inflows[e](grid.T))
            else:
                dec_supply[e] = 0.0
        fixed_in: dict[str, CumulativeCurve] = {}
    else:
        fixed_in = inflows
    M = big_m(net, grid, fixed_in, dec_supply)
    # no column can exceed the total mass plus one step of rounding per arc
    cap = max(M.values()) + h * sum(p.mu for p in net.processors.values())

    caps = {e: p.Cq for e, p in net.processors.items() if p.Cq is not None}
    if buffer_caps:
        bad = set(buffer_caps) - set(net.processors)
        if bad:
            raise ValidationError(f"buffer caps for unknown arcs {sorted(bad)}")
        caps.update({e: float(c) for e, c in buffer_caps.items()})

    b = ModelBuilder("max")
    cols: dict[tuple[str, str, int], int] = {}
    for e in sorted(net.processors):
        p, D = net[e], deltas[e]
        sampled = fixed_in[e](t) if e in fixed_in else None
        for i in range(1, N + 1):
            if e in net.source_arcs and not obj.decide_inflow:
                v = 0.0 if sampled is None else float(sampled[i])
                cols["Q", e, i] = b.var(f"Q{e}_{i}", v, v)
            else:
                cols["Q", e, i] = b.var(f"Q{e}_{i}", 0.0, dec_supply.get(e, cap))
        dens = lax.density_exit(p, t) if not p.rho0.is_zero() else np.zeros(N + 1)
        for i in range(1, N + 1):
            if i <= D:
                # before the first link row the exit count is known
                w = dens[i] + (0.0 if i < D else -p.mu * grid.t0 + (t[i] - p.T) * p.mu)
                cols["W", e, i] = b.var(f"W{e}_{i}", w, w)
            else:
                cols["W", e, i] = b.var(f"W{e}_{i}", 0.0, cap)
        for i in range(D + 1, D + N + 1):
            cols["R", e, i] = b.var(f"R{e}_{i}", -M[e], M[e])
        for i in range(D + 1, D + N + 1):
            cols["B", e, i] = b.binary(f"B{e}_{i}")

    def Q(e, j):
        """(coefficients, constant) of Q^e_j."""
        return ({}, 0.0) if j == 0 else ({cols["Q", e, j]: 1.0}, 0.0)

    def W(e, j):
        if j == 0:
            p = net[e]
            return {}, (0.0 if p.rho0.is_zero() else float(lax.density_exit(p, t[0])))
        return {cols["W", e, j]: 1.0}, 0.0

    def R(e, i):
        if i == deltas[e]:
            return {}, -net[e].mu * grid.t0
        return {cols["R", e, i]: 1.0}, 0.0

    def row(terms, sense, rhs, name):
        coeffs: dict[int, float] = {}
        const = 0.0
        for sign, (cs, c0) in terms:
            for j, a in cs.items():
                coeffs[j] = coeffs.get(j, 0.0) + sign * a
            const += sign * c0
        b.row(coeffs, sense, rhs - const, name)

    # node conservation and non-negative flow at dispersive nodes
    for v in sorted(net.nodes):
        nd = net.nodes[v]
        for i in range(1, N + 1):
            row([(1.0, Q(e, i)) for e in nd.out_arcs] + [(-1.0, W(u, i)) for u in nd.in_arcs],
                "E", 0.0, f"n{v}_{i}")
        if nd.dispersive:
            for e in nd.out_arcs:
                for i in range(1, N + 1):
                    row([(1.0, Q(e, i)), (-1.0, Q(e, i - 1))], "G", 0.0, f"m{e}_{i}")
    for e in sorted(dec_supply):
        for i in range(2, N + 1):
            row([(1.0, Q(e, i)), (-1.0, Q(e, i - 1))], "G", 0.0, f"m{e}_{i}")

    # running minimum, exit linkage and buffers
    for e in sorted(net.processors):
        p, D, Me = net[e], deltas[e], M[e]
        for i in range(D + 1, D + N + 1):
            j = i - D
            Beta = ({cols["B", e, i]: 1.0}, 0.0)
            gj = (Q(e, j)[0], p.q0 - p.mu * t[j])
            row([(1.0, R(e, i)), (-1.0, R(e, i - 1))], "L", 0.0, f"r1{e}_{i}")
            row([(1.0, R(e, i)), (-1.0, R(e, i - 1)), (-Me, Beta)], "G", -Me, f"r2{e}_{i}")
            row([(1.0, R(e, i)), (-1.0, gj)], "L", 0.0, f"r3{e}_{i}")
            row([(1.0, R(e, i)), (-1.0, gj), (Me, Beta)], "G", 0.0, f"r4{e}_{i}")
        dens = lax.density_exit(p, t) if not p.rho0.is_zero() else np.zeros(N + 1)
        for i in range(D + 1, N + 1):
            row([(1.0, W(e, i)), (-1.0, R(e, i))], "E", (t[i] - p.T) * p.mu + dens[i], f"w{e}_{i}")
        if e in caps:
            for i in range(1, N + 1):
                # q0 + Q_i - mu t_i - R_{i+D} <= C
                row([(1.0, Q(e, i)), (-1.0, R(e, i + D))], "L", caps[e] - p.q0 + p.mu * t[i], f"c{e}_{i}")

    # pinned allocation rates: Q^e increments follow the upstream exits
    if fixed_alloc is not None:
        rates = fixed_alloc.on_grid(net, grid)
        for v in sorted(net.dispersive_nodes()):
            nd = net.nodes[v]
            for e in nd.out_arcs[:-1]:
                for i in range(1, N + 1):
                    a = float(rates[v][e][i])
                    terms = [(1.0, Q(e, i)), (-1.0, Q(e, i - 1))]
                    for u in nd.in_arcs:
                        terms += [(-a, W(u, i)), (a, W(u, i - 1))]
                    row(terms, "E", 0.0, f"a{e}_{i}")

    for e in sorted(dec_supply):
        row([(1.0, Q(e, N))], "L", dec_supply[e], f"s{e}")

    # objective
    targets = obj.arcs or net.sink_arcs
    for e in targets:
        if e not in net.processors:
            raise ValidationError(f"objective references unknown arc {e!r}")
    for e in targets:
        if obj.kind == "time_weighted":
            for i in range(1, N + 1):
                cs, c0 = W(e, i)
                for j, a in cs.items():
                    b.add_objective(j, a / (1.0 + t[i]))
                b.obj_const += c0 / (1.0 + t[i])
        else:
            cs, c0 = W(e, N)
            for j, a in cs.items():
                b.add_objective(j, a)
            b.obj_const += c0
    if obj.kind == "throughput_minus_inventory":
        for e in sorted(net.processors):
            alpha = obj.alpha_for(net, e)
            if alpha == 0.0:
                continue
            p, D = net[e], deltas[e]
            for i in range(0, N + 1):
                cs, c0 = Q(e, i)
                rs, r0 = R(e, i + D)
                for j, a in cs.items():
                    b.add_objective(j, -alpha * a)
                for j, a in rs.items():
                    b.add_objective(j, alpha * a)
                qh0 = 0.0 if i == 0 else p.q0
                b.obj_const -= alpha * (qh0 + c0 - p.mu * t[i] - r0)

    return b.build(MipModel, net=net, grid=grid, deltas=deltas, bigM=M, cols=cols, spec=obj,
                   inflows=dict(fixed_in), supply=dec_supply, fixed_alloc=fixed_alloc)


# ---------------------------------------------------------------------------
# solutions


class InfeasibleAssignment(ValidationError):
    def __init__(self, report: Verification):
        self.report = report
        super().__init__(f"assignment violates {report.worst_row} by {report.max_violation:.3e} "
                         f"(integrality {report.integrality:.3e})")


@dataclass
class MipSolution:
    state: NetworkState
    alloc: AllocationSchedule
    queues: dict[str, np.ndarray]
    objective: float
    report: Verification


def extract_solution(model: MipModel, x, tol: float = 1e-6) -> MipSolution:
    """Curves, queues and recovered allocation rates of a feasible assignment."""
    x = np.asarray(x, dtype=float)
    report = verify(model, x)
    if not report.ok(tol):
        raise InfeasibleAssignment(report)
    state = model.state(x)
    alloc = recover_allocations(state, model.net, model.grid)
    return MipSolution(state, alloc, dict(state.q), model.objective(x), report)


# ---------------------------------------------------------------------------
# MPS and LP text


def _num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _short_names(names, prefix):
    if all(len(n) <= 8 and " " not in n for n in names):
        return list(names)
    return [f"{prefix}{k:07d}" for k in range(len(names))]


def write_mps(lp: LinearProgram, path) -> None:
    """Fixed-format MPS.

    Names longer than eight characters are replaced by positional aliases
    (C0000001, R0000001). Values are written with full repr precision, which
    can overflow the 12-character value field; readers that split on
    whitespace accept this.
    """
    cn = _short_names(lp.names, "C")
    rn = _short_names(lp.row_names, "R")
    A = sp.csc_matrix(lp.A)
    lines = [f"NAME          {Path(str(path)).stem[:8] or 'MODEL'}", "OBJSENSE", f"    {lp.sense.upper()}", "ROWS",
             " N  OBJ"]
    lines += [f" {s}  {nm}" for s, nm in zip(lp.row_sense, rn)]
    lines.append("COLUMNS")
    in_int = False
    for j in range(lp.n):
        if lp.integer[j] and not in_int:
            lines.append("    MARKER                 'MARKER'                 'INTORG'")
            in_int = True
        elif not lp.integer[j] and in_int:
            lines.append("    MARKER                 'MARKER'                 'INTEND'")
            in_int = False
        entries = []
        if lp.c[j] != 0.0:
            entries.append(("OBJ", lp.c[j]))
        lo, hi = A.indptr[j], A.indptr[j + 1]
        entries += [(rn[r], v) for r, v in zip(A.indices[lo:hi], A.data[lo:hi])]
        if not entries:
            entries.append(("OBJ", 0.0))
        for r, v in entries:
            lines.append(f"    {cn[j]:<8}  {r:<8}  {_num(v):>12}")
    if in_int:
        lines.append("    MARKER                 'MARKER'                 'INTEND'")
    lines.append("RHS")
    if lp.obj_const != 0.0:
        lines.append(f"    {'RHS':<8}  {'OBJ':<8}  {_num(-lp.obj_const):>12}")
    for r in range(lp.m):
        if lp.rhs[r] != 0.0:
            lines.append(f"    {'RHS':<8}  {rn[r]:<8}  {_num(lp.rhs[r]):>12}")
    lines.append("BOUNDS")
    for j in range(lp.n):
        lo, hi, nm = lp.lb[j], lp.ub[j], cn[j]
        if lp.integer[j] and lo == 0.0 and hi == 1.0:
            lines.append(f" BV BND       {nm}")
        elif lo == hi:
            lines.append(f" FX BND       {nm:<8}  {_num(lo):>12}")
        else:
            if lo == -math.inf and hi == math.inf:
                lines.append(f" FR BND       {nm}")
                continue
            if lo == -math.inf:
                lines.append(f" MI BND       {nm}")
            elif lo != 0.0:
                lines.append(f" LO BND       {nm:<8}  {_num(lo):>12}")
            if hi != math.inf:
                lines.append(f" UP BND       {nm:<8}  {_num(hi):>12}")
    lines.append("ENDATA")
    Path(path).write_text("\n".join(lines) + "\n")


def read_mps(path) -> LinearProgram:
    section = None
    sense = "min"
    obj_row = None
    row_names: list[str] = []
    row_sense: list[str] = []
    row_idx: dict[str, int] = {}
    names: list[str] = []
    col_idx: dict[str, int] = {}
    integer: list[bool] = []
    entries: list[tuple[int, int, float]] = []
    obj: dict[int, float] = {}
    rhs: dict[int, float] = {}
    obj_const = 0.0
    bounds: dict[int, list[float]] = {}
    in_int = False
    for raw in Path(path).read_text().splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            section = raw.split()[0]
            continue
        tok = raw.split()
        if section == "OBJSENSE":
            sense = "max" if tok[0].upper().startswith("MAX") else "min"
        elif section == "ROWS":
            if tok[0] == "N":
                if obj_row is None:
                    obj_row = tok[1]
                continue
            row_idx[tok[1]] = len(row_names)
            row_names.append(tok[1])
            row_sense.append(tok[0])
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1] == "'MARKER'":
                in_int = tok[2] == "'INTORG'"
                continue
            nm = tok[0]
            if nm not in col_idx:
                col_idx[nm] = len(names)
                names.append(nm)
                integer.append(in_int)
            j = col_idx[nm]
            for r, v in zip(tok[1::2], tok[2::2]):
                if r == obj_row:
                    obj[j] = float(v)
                else:
                    entries.append((row_idx[r], j, float(v)))
        elif section == "RHS":
            for r, v in zip(tok[1::2], tok[2::2]):
                if r == obj_row:
                    obj_const = -float(v)
                else:
                    rhs[row_idx[r]] = float(v)
        elif section == "BOUNDS":
            kind, nm = tok[0], tok[2]
            j = col_idx[nm]
            lo, hi = bounds.setdefault(j, [0.0, math.inf])
            val = float(tok[3]) if len(tok) > 3 else None
            if kind == "BV":
                lo, hi = 0.0, 1.0
                integer[j] = True
            elif kind == "FX":
                lo = hi = val
            elif kind == "LO":
                lo = val
            elif kind == "UP":
                hi = val
            elif kind == "MI":
                lo = -math.inf
            elif kind == "PL":
                hi = math.inf
            elif kind == "FR":
                lo, hi = -math.inf, math.inf
            bounds[j] = [lo, hi]
    n, m = len(names), len(row_names)
    lb = np.zeros(n)
    ub = np.full(n, math.inf)
    for j, (lo, hi) in bounds.items():
        lb[j], ub[j] = lo, hi
    integ = np.array(integer, dtype=bool)
    A = sp.csr_matrix(([v for _, _, v in entries], ([r for r, _, _ in entries], [j for _, j, _ in entries])),
                      shape=(m, n))
    c = np.zeros(n)
    for j, v in obj.items():
        c[j] = v
    return LinearProgram(names, lb, ub, integ, c, A, np.array(row_sense, dtype="<U1"),
                         np.array([rhs.get(r, 0.0) for r in range(m)]), row_names, sense, obj_const)


def write_lp(lp: LinearProgram, path) -> None:
    """CPLEX-style LP text."""
    A = sp.csr_matrix(lp.A)

    def expr(pairs):
        out = []
        for j, v in pairs:
            sign = "-" if v < 0 else "+"
            out.append(f"{sign} {_num(abs(v))} {lp.names[j]}")
        s = " ".join(out)
        return s[2:] if s.startswith("+ ") else s

    lines = ["\\ written by laxnet", "Maximize" if lp.sense == "max" else "Minimize"]
    objpairs = [(j, lp.c[j]) for j in np.flatnonzero(lp.c)]
    const = f" + {_num(lp.obj_const)} CONSTANT" if lp.obj_const else ""
    lines.append(f" obj: {expr(objpairs)}{const}" if objpairs or const else " obj:")
    lines.append("Subject To")
    ops = {"L": "<=", "G": ">=", "E": "="}
    for r in range(lp.m):
        lo, hi = A.indptr[r], A.indptr[r + 1]
        body = expr(zip(A.indices[lo:hi], A.data[lo:hi])) or "0 CONSTANT"
        lines.append(f" {lp.row_names[r]}: {body} {ops[lp.row_sense[r]]} {_num(lp.rhs[r])}")
    lines.append("Bounds")
    if lp.obj_const:
        lines.append(" CONSTANT = 1")
    for j in range(lp.n):
        lo, hi = lp.lb[j], lp.ub[j]
        nm = lp.names[j]
        if lp.integer[j] and lo == 0.0 and hi == 1.0:
            continue
        if lo == hi:
            lines.append(f" {nm} = {_num(lo)}")
        elif lo == -math.inf and hi == math.inf:
            lines.append(f" {nm} free")
        else:
            los = "-inf" if lo == -math.inf else _num(lo)
            his = "+inf" if hi == math.inf else _num(hi)
            lines.append(f" {los} <= {nm} <= {his}")
    gen = [lp.names[j] for j in range(lp.n) if lp.integer[j] and not (lp.lb[j] == 0.0 and lp.ub[j] == 1.0)]
    bins = [lp.names[j] for j in range(lp.n) if lp.integer[j] and lp.lb[j] == 0.0 and lp.ub[j] == 1.0]
    if gen:
        lines += ["General"] + [f" {nm}" for nm in gen]
    if bins:
        lines += ["Binaries"] + [f" {nm}" for nm in bins]
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_expr(tokens):
    """[+|-] coef name ... -> list of (coef, name)."""
    out = []
    sign = 1.0
    k = 0
    while k < len(tokens):
        tk = tokens[k]
        if tk in ("+", "-"):
            sign = 1.0 if tk == "+" else -1.0
            k += 1
            continue
        out.append((sign * float(tk), tokens[k + 1]))
        sign = 1.0
        k += 2
    return out


def read_lp(path) -> LinearProgram:
    """Reader for the LP text produced by write_lp."""
    lines = Path(path).read_text().splitlines()
    sense = "min"
    section = None
    names: list[str] = []
    col: dict[str, int] = {}

    def idx(nm):
        if nm not in col:
            col[nm] = len(names)
            names.append(nm)
        return col[nm]

    obj_terms = []
    rows = []
    bounds: dict[str, tuple[float, float]] = {}
    ints: set[str] = set()
    bins: set[str] = set()
    heads = {"maximize": "obj", "minimize": "obj", "subject": "rows", "bounds": "bounds",
             "general": "gen", "binaries": "bin", "end": "end"}
    for raw in lines:
        s = raw.strip()
        if not s or s.startswith("\\"):
            continue
        key = s.split()[0].lower()
        if not raw[0].isspace() and key in heads:
            section = heads[key]
            if key == "maximize":
                sense = "max"
            continue
        if section == "obj":
            _, body = s.split(":", 1)
            obj_terms = _parse_expr(body.split())
        elif section == "rows":
            name, body = s.split(":", 1)
            tok = body.split()
            op, rhs = tok[-2], float(tok[-1])
            terms = [(a, nm) for a, nm in _parse_expr(tok[:-2]) if nm != "CONSTANT"]
            rows.append((name.strip(), terms, {"<=": "L", ">=": "G", "=": "E"}[op], rhs))
        elif section == "bounds":
            tok = s.split()
            if len(tok) == 3 and tok[1] == "=":
                bounds[tok[0]] = (float(tok[2]), float(tok[2]))
            elif len(tok) == 2 and tok[1] == "free":
                bounds[tok[0]] = (-math.inf, math.inf)
            else:
                bounds[tok[2]] = (float(tok[0]), float(tok[4]))
        elif section == "gen":
            ints.add(s)
        elif section == "bin":
            bins.add(s)
    const = 0.0
    for a, nm in obj_terms:
        if nm == "CONSTANT":
            const += a
        else:
            idx(nm)
    for _, terms, _, _ in rows:
        for _, nm in terms:
            idx(nm)
    for nm in list(bounds) + sorted(ints | bins):
        if nm != "CONSTANT":
            idx(nm)
    n = len(names)
    order = {nm: k for k, nm in enumerate(names)}
    lb = np.zeros(n)
    ub = np.full(n, math.inf)
    integer = np.zeros(n, dtype=bool)
    for nm, (lo, hi) in bounds.items():
        if nm in order:
            lb[order[nm]], ub[order[nm]] = lo, hi
    for nm in ints:
        integer[order[nm]] = True
    for nm in bins:
        integer[order[nm]] = True
        lb[order[nm]], ub[order[nm]] = 0.0, 1.0
    c = np.zeros(n)
    for a, nm in obj_terms:
        if nm != "CONSTANT":
            c[order[nm]] += a
    data, ri, ci = [], [], []
    for r, (_, terms, _, _) in enumerate(rows):
        for a, nm in terms:
            data.append(a)
            ri.append(r)
            ci.append(order[nm])
    A = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), n))
    return LinearProgram(names, lb, ub, integer, c, A, np.array([r[2] for r in rows], dtype="<U1"),
                         np.array([r[3] for r in rows], dtype=float), [r[0] for r in rows], sense, const)


def export_model(model: LinearProgram, path, fmt: str = "mps") -> Path:
    """Write ``model`` as fixed-format MPS (fmt="mps") or LP text (fmt="lp")."""
    path = Path(path)
    fmt = fmt.lower()
    if fmt == "mps":
        write_mps(model, path)
    elif fmt in ("lp", "lp-text"):
        write_lp(model, path)
    else:
        raise ValueError(f"unknown model format {fmt!r}")
    return path
