"""Finite-difference baseline: first-order upwind for the processor advection
equation, forward Euler for the buffer-queue ODE.

Each arc is cut into D cells of width L/D. On every step the queue releases
products into the first cell at the service rate, the cells advect at speed V
and the last cell's flux V rho leaves the arc.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from laxnet.network import CumulativeCurve, Network, PiecewiseConstant, ValidationError
from laxnet.sim import AllocationSchedule

Q_ZERO = 1e-14


@dataclass(frozen=True)
class FdConfig:
    """dt: time step; D: cells per arc; epsilon: smoothing parameter of the
    queue law (None selects the discontinuous law)."""

    dt: float
    D: int | Mapping[str, int] = 1
    epsilon: float | None = None

    def cells(self, arc: str) -> int:
        return int(self.D[arc]) if isinstance(self.D, Mapping) else int(self.D)

    def dx(self, net: Network, arc: str) -> float:
        return net[arc].L / self.cells(arc)

    def check(self, net: Network) -> None:
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.epsilon is not None:
            if self.epsilon <= 0:
                raise ValidationError("smoothing parameter must be positive")
            if self.dt > self.epsilon * (1 + 1e-12):
                raise ValidationError(f"stiffness condition violated: dt={self.dt:g} > epsilon={self.epsilon:g}")
        for e, p in net.processors.items():
            if self.cells(e) < 1:
                raise ValidationError(f"arc {e!r}: need at least one cell")
            limit = self.dx(net, e) / p.V
            if self.dt > limit * (1 + 1e-12):
                raise ValidationError(f"CFL violated on {e!r}: dt={self.dt:g} > dx/V={limit:g}")

    @property
    def scheme(self) -> str:
        return "fd" if self.epsilon is None else "fd-smoothed"


@dataclass
class FdState:
    t: float
    rho: dict[str, np.ndarray]
    q: dict[str, np.ndarray | float]
    W: dict[str, float]  # accumulated exits
    Qin: dict[str, float] = field(default_factory=dict)  # accumulated arrivals

    @classmethod
    def initial(cls, net: Network, config: FdConfig) -> "FdState":
        rho, q = {}, {}
        for e, p in net.processors.items():
            D = config.cells(e)
            edges = np.linspace(0.0, p.L, D + 1)
            rho[e] = np.array([p.rho0.integral(a, b) / (b - a) for a, b in zip(edges, edges[1:])])
            q[e] = float(p.q0)
        return cls(0.0, rho, q, {e: 0.0 for e in net.processors}, {e: 0.0 for e in net.processors})

    def mass(self, net: Network, config: FdConfig) -> float:
        return sum(self.q[e] + self.rho[e].sum() * config.dx(net, e) for e in net.processors)


def service_rate(q: float, inflow: float, mu: float, dt: float, epsilon: float | None) -> float:
    """Rate at which the queue releases products into the processor."""
    if epsilon is not None:
        return min(mu, q / epsilon)
    if q <= Q_ZERO:
        return min(inflow, mu)
    # never drain more than the queue holds in one step
    return min(mu, q / dt + inflow)


def fd_step(state: FdState, source_rates: Mapping[str, float], config: FdConfig, net: Network,
            alloc: Mapping[str, Mapping[str, float]] | None = None) -> FdState:
    """One explicit step of length config.dt.

    ``alloc`` gives this step's allocation rate per dispersive node and
    outgoing arc; missing nodes split evenly.
    """
    dt = config.dt
    exits = {e: net[e].V * state.rho[e][-1] for e in net.processors}
    rho, q, W, Qin = {}, {}, dict(state.W), dict(state.Qin)
    for e, p in net.processors.items():
        if e in net.source_arcs:
            u = float(source_rates.get(e, 0.0))
        else:
            v = net.tail[e]
            nd = net.nodes[v]
            if len(nd.out_arcs) == 1:
                share = 1.0
            elif alloc is not None and v in alloc:
                share = float(alloc[v].get(e, 0.0))
            else:
                share = 1.0 / len(nd.out_arcs)
            u = share * sum(exits[a] for a in nd.in_arcs)
        f = service_rate(state.q[e], u, p.mu, dt, config.epsilon)
        qn = state.q[e] + dt * (u - f)
        q[e] = 0.0 if abs(qn) < Q_ZERO else qn
        flux = p.V * state.rho[e]
        influx = np.concatenate([[f], flux[:-1]])
        rho[e] = state.rho[e] + dt / config.dx(net, e) * (influx - flux)
        W[e] += dt * exits[e]
        Qin[e] += dt * u
    return FdState(state.t + dt, rho, q, W, Qin)


@dataclass
class FdResult:
    times: np.ndarray
    Q: dict[str, np.ndarray]
    W: dict[str, np.ndarray]
    q: dict[str, np.ndarray]
    mass_residual: float
    scheme: str

    def exit_curve(self, arc: str) -> CumulativeCurve:
        return CumulativeCurve.from_samples(self.times, self.W[arc])


def fd_simulate(net: Network, inflows: Mapping[str, PiecewiseConstant], alloc: AllocationSchedule | None,
                config: FdConfig, horizon: float) -> FdResult:
    """Run fd_step from t = 0 to the horizon, recording counts after every step.

    Source rates are averaged over each step so that cumulative inflow is
    exact for any step size. Allocation rates are read at step midpoints.
    """
    config.check(net)
    rates = {e: PiecewiseConstant.coerce(r) for e, r in inflows.items()}
    n = int(round(horizon / config.dt))
    if abs(n * config.dt - horizon) > 1e-9 * max(1.0, horizon):
        raise ValidationError("horizon must be a multiple of dt")
    alloc = alloc or AllocationSchedule.uniform(net)
    disp = net.dispersive_nodes()
    state = FdState.initial(net, config)
    m0 = state.mass(net, config)
    times = config.dt * np.arange(n + 1)
    Q = {e: np.zeros(n + 1) for e in net.processors}
    W = {e: np.zeros(n + 1) for e in net.processors}
    q = {e: np.zeros(n + 1) for e in net.processors}
    for e in net.processors:
        q[e][0] = state.q[e]
    worst = 0.0
    inflow_total = 0.0
    for k in range(n):
        a, b = times[k], times[k + 1]
        src = {e: r.integral(a, b) / config.dt for e, r in rates.items()}
        mid = 0.5 * (a + b)
        A = {v: {e: float(alloc.rates[v][e](mid)) if e in alloc.rates.get(v, {}) else 0.0
                 for e in net.nodes[v].out_arcs} for v in disp if v in alloc.rates}
        state = fd_step(state, src, config, net, A)
        inflow_total += sum(src.get(e, 0.0) for e in net.source_arcs) * config.dt
        for e in net.processors:
            Q[e][k + 1] = state.Qin[e]
            W[e][k + 1] = state.W[e]
            q[e][k + 1] = state.q[e]
        out = sum(state.W[e] for e in net.sink_arcs)
        worst = max(worst, abs(state.mass(net, config) + out - m0 - inflow_total))
    return FdResult(times, Q, W, q, worst, config.scheme)
