"""Forward propagation of product flow through a network under fixed
allocation rates, using the discrete Lax formula on every arc."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from laxnet import lax
from laxnet.network import (
    CumulativeCurve,
    Network,
    PiecewiseConstant,
    TimeGrid,
    ValidationError,
)

ALLOC_TOL = 1e-9
FLOW_EPS = 1e-12


@dataclass
class AllocationSchedule:
    """Allocation rates A^{v,e}(t) at nodes, as piecewise-constant functions.

    Nodes that are missing, or have a single outgoing arc, route everything
    to that arc.
    """

    rates: dict[str, dict[str, PiecewiseConstant]] = field(default_factory=dict)

    def __post_init__(self):
        self.rates = {
            str(v): {str(e): PiecewiseConstant.coerce(f) for e, f in arcs.items()}
            for v, arcs in self.rates.items()
        }

    @classmethod
    def uniform(cls, net: Network, T: float = np.inf) -> "AllocationSchedule":
        out = {}
        for v in net.dispersive_nodes():
            arcs = net.nodes[v].out_arcs
            out[v] = {e: PiecewiseConstant.constant(1.0 / len(arcs), 0.0, T) for e in arcs}
        return cls(out)

    @classmethod
    def constant(cls, fractions: Mapping[str, Mapping[str, float]], T: float = np.inf) -> "AllocationSchedule":
        return cls({v: {e: PiecewiseConstant.constant(a, 0.0, T) for e, a in arcs.items()}
                    for v, arcs in fractions.items()})

    def on_grid(self, net: Network, grid: TimeGrid) -> dict[str, dict[str, np.ndarray]]:
        """Per-interval rates: entry i (i >= 1) applies on (t_{i-1}, t_i].

        The rate of an interval is read at its midpoint. Raises on rates
        outside [0, 1] or sums different from one.
        """
        mid = np.concatenate([[grid.t0], grid.t[1:] - 0.5 * grid.h])
        out = {}
        for v, nd in net.nodes.items():
            arcs = nd.out_arcs
            if len(arcs) == 1:
                out[v] = {arcs[0]: np.ones(grid.N + 1)}
                continue
            given = self.rates.get(v)
            if given is None:
                raise ValidationError(f"no allocation rates for dispersive node {v!r}")
            unknown = set(given) - set(arcs)
            if unknown:
                raise ValidationError(f"node {v!r}: allocation for non-outgoing arcs {sorted(unknown)}")
            vals = {e: np.asarray(given[e](mid), dtype=float) if e in given else np.zeros(grid.N + 1)
                    for e in arcs}
            total = sum(vals.values())
            lo = min(float(a[1:].min()) for a in vals.values())
            hi = max(float(a[1:].max()) for a in vals.values())
            if lo < -ALLOC_TOL or hi > 1 + ALLOC_TOL:
                raise ValidationError(f"node {v!r}: allocation rates must lie in [0, 1]")
            bad = np.abs(total[1:] - 1.0) > ALLOC_TOL
            if np.any(bad):
                i = int(np.argmax(bad)) + 1
                raise ValidationError(
                    f"node {v!r}: allocation rates sum to {total[i]:g} on interval ending t={grid.t[i]:g}"
                )
            out[v] = vals
        return out

    def to_rows(self, grid: TimeGrid, net: Network):
        """Rows ``(t, node, arc, A)``; t is the start of each grid interval."""
        mats = self.on_grid(net, grid)
        for v in net.dispersive_nodes():
            for e, vals in mats[v].items():
                for i in range(1, grid.N + 1):
                    yield grid.t[i - 1], v, e, vals[i]

    @classmethod
    def from_rows(cls, rows, T: float) -> "AllocationSchedule":
        """Inverse of to_rows: each row's value holds until the next row's t."""
        series: dict[tuple[str, str], list[tuple[float, float]]] = {}
        for t, v, e, a in rows:
            series.setdefault((str(v), str(e)), []).append((float(t), float(a)))
        rates: dict[str, dict[str, list]] = {}
        for (v, e), pts in series.items():
            pts.sort()
            pieces = []
            for k, (t, a) in enumerate(pts):
                end = pts[k + 1][0] if k + 1 < len(pts) else T
                if end > t:
                    pieces.append((t, end, a))
            rates.setdefault(v, {})[e] = pieces
        return cls(rates)


@dataclass
class NetworkState:
    """Grid samples of arrivals Q, exits W and queue q on every arc."""

    grid: TimeGrid
    Q: dict[str, np.ndarray]
    W: dict[str, np.ndarray]
    q: dict[str, np.ndarray]

    def curve(self, kind: str, arc: str) -> CumulativeCurve:
        return CumulativeCurve.from_samples(self.grid.t, getattr(self, kind)[arc])

    def arcs(self):
        return list(self.Q)


def _density_part(proc, grid):
    if proc.rho0.is_zero():
        return np.zeros(grid.N + 1)
    return lax.density_exit(proc, grid.t)


def arc_exit(proc, grid: TimeGrid, Q_i) -> np.ndarray:
    """Discrete exit samples, with the initial density added exactly."""
    if proc.rho0.is_zero():
        return lax.exit_flow_discrete(proc, grid, Q_i)
    bare = type(proc)(proc.id, proc.L, proc.V, proc.mu, proc.q0, (), proc.Cq, proc.alpha_q)
    return lax.exit_flow_discrete(bare, grid, Q_i) + _density_part(proc, grid)


def propagate(net: Network, inflows: Mapping[str, CumulativeCurve], alloc: AllocationSchedule | None,
              grid: TimeGrid) -> NetworkState:
    """Push source inflows through the network in topological order.

    On each grid interval an arc's arrivals grow by its allocation rate times
    the summed exit increments of the arcs entering its upstream node.
    """
    grid.check(net)
    unknown = set(inflows) - set(net.source_arcs)
    if unknown:
        raise ValidationError(f"inflow given for non-source arcs {sorted(unknown)}")
    rates = (alloc or AllocationSchedule()).on_grid(net, grid)
    Q: dict[str, np.ndarray] = {}
    W: dict[str, np.ndarray] = {}
    qq: dict[str, np.ndarray] = {}
    for e in net.order:
        proc = net[e]
        if e in net.source_arcs:
            curve = inflows.get(e)
            Qe = np.zeros(grid.N + 1) if curve is None else np.asarray(curve(grid.t), dtype=float)
        else:
            v = net.tail[e]
            upstream = sum(np.diff(W[u], prepend=0.0) for u in net.nodes[v].in_arcs)
            inc = rates[v][e] * upstream
            inc[0] = 0.0
            Qe = np.cumsum(inc)
        Q[e] = Qe
        W[e] = arc_exit(proc, grid, Qe)
        qq[e] = lax.queue_discrete(grid, Qe, proc.mu, q0=proc.q0)
    return NetworkState(grid, Q, W, qq)


def propagate_continuous(net: Network, inflows: Mapping[str, CumulativeCurve],
                         alloc: AllocationSchedule | None = None) -> dict[str, lax.LaxSolution]:
    """Grid-free counterpart of propagate: exact curves on every arc.

    Arrivals on an arc out of node v are the integral of the allocation rate
    against the summed exit curves of the arcs entering v. Both factors are
    piecewise (constant resp. affine), so the integral is exact on the merged
    breakpoints.
    """
    unknown = set(inflows) - set(net.source_arcs)
    if unknown:
        raise ValidationError(f"inflow given for non-source arcs {sorted(unknown)}")
    alloc = alloc or AllocationSchedule()
    out: dict[str, lax.LaxSolution] = {}
    for e in net.order:
        proc = net[e]
        if e in net.source_arcs:
            Q = inflows.get(e) or CumulativeCurve.zero()
        else:
            nd = net.nodes[net.tail[e]]
            S = out[nd.in_arcs[0]].W
            for u in nd.in_arcs[1:]:
                S = S + out[u].W
            if len(nd.out_arcs) == 1:
                Q = CumulativeCurve._from(S)
            else:
                rates = alloc.rates.get(nd.id)
                if rates is None:
                    raise ValidationError(f"no allocation rates for dispersive node {nd.id!r}")
                Q = _integrate_share(S, rates.get(e, PiecewiseConstant()))
        out[e] = lax.solve_processor(proc, Q)
    return out


def _integrate_share(S: CumulativeCurve, rate: PiecewiseConstant) -> CumulativeCurve:
    ts = [x for x in rate.breakpoints() if S.times[0] < x < np.inf]
    t = np.unique(np.concatenate([[0.0], S.times[S.times >= 0], ts]))
    dS = np.diff(S(t))
    share = rate(0.5 * (t[:-1] + t[1:]))
    if np.any(share < -ALLOC_TOL) or np.any(share > 1 + ALLOC_TOL):
        raise ValidationError("allocation rates must lie in [0, 1]")
    vals = np.concatenate([[0.0], np.cumsum(share * dS)])
    return CumulativeCurve(t, vals).simplify()


def recover_allocations(state: NetworkState, net: Network, grid: TimeGrid | None = None) -> AllocationSchedule:
    """Allocation rates implied by the arrival increments at each node.

    A_i = (Q^e_i - Q^e_{i-1}) / sum of upstream (W_i - W_{i-1}). Intervals
    without upstream flow get the uniform split 1/|O^v|.
    """
    grid = grid or state.grid
    t = grid.t
    rates = {}
    for v in net.dispersive_nodes():
        nd = net.nodes[v]
        denom = sum(np.diff(state.W[u]) for u in nd.in_arcs)
        if isinstance(denom, int):
            denom = np.zeros(grid.N)
        k = len(nd.out_arcs)
        ratios = np.full((k, grid.N), 1.0 / k)
        flowing = denom > FLOW_EPS
        for r, e in enumerate(nd.out_arcs):
            ratios[r, flowing] = np.diff(state.Q[e])[flowing] / denom[flowing]
        ratios = np.clip(ratios, 0.0, 1.0)
        ratios /= ratios.sum(axis=0, keepdims=True)
        rates[v] = {e: _compress(t, ratios[r]) for r, e in enumerate(nd.out_arcs)}
    return AllocationSchedule(rates)


def _compress(t, vals):
    pieces = []
    for i, a in enumerate(vals):
        if pieces and abs(pieces[-1][2] - a) <= 1e-12:
            pieces[-1][1] = t[i + 1]
        else:
            pieces.append([t[i], t[i + 1], float(a)])
    return [tuple(p) for p in pieces]


def conservation_residual(state: NetworkState, net: Network, grid: TimeGrid | None = None) -> float:
    """max over nodes and grid points of |sum_out Q - sum_in W|."""
    res = 0.0
    for nd in net.nodes.values():
        if not all(e in state.Q for e in nd.out_arcs):
            continue
        out = sum(state.Q[e] for e in nd.out_arcs)
        inn = sum(state.W[e] for e in nd.in_arcs)
        res = max(res, float(np.max(np.abs(out - inn), initial=0.0)))
    return res


def mass_balance_residual(state: NetworkState, net: Network) -> float:
    """max_i |exited at sinks + stock on all arcs - (source arrivals + initial stock)|.

    Stock on an arc is its queue plus the products in transit.
    """
    t = state.grid.t
    lhs = np.zeros(t.size)
    rhs = np.zeros(t.size)
    for e, proc in net.processors.items():
        Qh = lax.discrete_hat(state.Q[e], proc.q0)
        released = Qh - state.q[e]
        transit = released + proc.initial_mass() - state.W[e]
        lhs += state.q[e] + transit
        rhs += proc.q0 + proc.initial_mass()
        if e in net.sink_arcs:
            lhs += state.W[e]
        if e in net.source_arcs:
            rhs += state.Q[e]
    # at t_0 queues hold nothing yet: Qhat_0 = 0 by convention
    rhs[0] -= sum(p.q0 for p in net.processors.values())
    return float(np.max(np.abs(lhs - rhs)))


def write_csv(path_or_file, state: NetworkState, scheme: str | None = None, meta: str | None = None) -> None:
    """Rows ``t, arc, Q, W, q`` (plus ``scheme`` when given), grouped by arc."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        if meta:
            fh.write(f"# {meta}\n")
        w = csv.writer(fh)
        head = ["t", "arc", "Q", "W", "q"] + (["scheme"] if scheme else [])
        w.writerow(head)
        for e in state.arcs():
            for i, ti in enumerate(state.grid.t):
                row = [f"{ti:.12g}", e, f"{state.Q[e][i]:.12g}", f"{state.W[e][i]:.12g}",
                       f"{state.q[e][i]:.12g}"]
                w.writerow(row + ([scheme] if scheme else []))
    finally:
        if own:
            fh.close()
