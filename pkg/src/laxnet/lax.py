"""Single-processor variational solver.

The exit count of a processor with speed V, capacity mu and length L is

    U(t, L) = min_{tau <= t - L/V} {Qhat(tau) - mu tau} + (t - L/V) mu

(plus the contribution of the initial density), where Qhat is the arrival
curve with the initial queue folded in as a jump at t = 0. For piecewise-affine
Qhat the minimum is attained at a breakpoint or at t - L/V, so evaluation is
exact. On a uniform grid the same formula becomes a running minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from laxnet.network import (
    CumulativeCurve,
    PiecewiseAffine,
    Processor,
    TimeGrid,
    ValidationError,
    ceil_ratio,
    hat_extend,
)


@dataclass(frozen=True)
class FluxKernel:
    """g(u) = u / V on [0, mu]: density as a function of flux."""

    V: float
    mu: float

    def g(self, u):
        return np.asarray(u, dtype=float) / self.V

    def conjugate(self, slope):
        return legendre(self, slope)


def legendre(kernel: FluxKernel, slope):
    """g*(q) = sup_{p in [0, mu]} {q p - g(p)}: zero below 1/V, then (q - 1/V) mu."""
    q = np.asarray(slope, dtype=float)
    out = np.where(q <= 1.0 / kernel.V, 0.0, (q - 1.0 / kernel.V) * kernel.mu)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class LaxSolution:
    Qhat: CumulativeCurve
    Ubar: CumulativeCurve  # released into the processor
    W: CumulativeCurve  # exited the processor, U(., L)
    q: PiecewiseAffine  # queue size Qhat - Ubar

    def in_transit(self, t):
        return self.Ubar(t) - self.W(t)


def release_curve(Qhat: CumulativeCurve, mu: float) -> CumulativeCurve:
    """inf_{tau <= t} {Qhat(tau) + mu (t - tau)}, computed exactly.

    Sweeps the segments of G(tau) = Qhat(tau) - mu tau keeping its running
    minimum m; the release curve is mu t + m. G only jumps upward, so m is
    continuous and changes only where G dips below it.
    """
    t, v, r = Qhat.times, Qhat.values, Qhat.right_values
    m = v[0] - mu * t[0]
    pts = [(t[0], v[0])]
    for k in range(t.size - 1):
        g0 = r[k] - mu * t[k]
        g1 = v[k + 1] - mu * t[k + 1]
        if g1 < m:
            # G falls through m somewhere on the segment (g0 >= m always)
            tau = t[k] + (g0 - m) / (g0 - g1) * (t[k + 1] - t[k])
            if tau > t[k] and tau < t[k + 1]:
                pts.append((tau, mu * tau + m))
            m = g1
        pts.append((t[k + 1], mu * t[k + 1] + m))
    # flat tail: Qhat stays at r[-1] and the release catches up at rate mu
    g0 = r[-1] - mu * t[-1]
    if g0 > m:
        tau = t[-1] + (g0 - m) / mu
        pts.append((tau, mu * tau + m))
    times, vals = zip(*pts)
    times = np.array(times)
    vals = np.array(vals)
    keep = np.concatenate([[True], np.diff(times) > 1e-12])
    return CumulativeCurve(times[keep], vals[keep]).simplify()


def density_exit(proc: Processor, t):
    """Products initially on the processor that have exited by time t."""
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    lo = np.maximum(0.0, proc.L - proc.V * np.maximum(ta, 0.0))
    out = np.array([proc.rho0.integral(a, proc.L) for a in lo])
    return out if np.ndim(t) else float(out[0])


def density_exit_curve(proc: Processor) -> CumulativeCurve:
    """density_exit as a curve; breakpoints where rho0's pieces reach x = L."""
    ts = {0.0, proc.T}
    for x in proc.rho0.breakpoints():
        ts.add((proc.L - x) / proc.V)
    ts = np.array(sorted(s for s in ts if 0.0 <= s <= proc.T))
    return CumulativeCurve(ts, density_exit(proc, ts))


def exit_flow_continuous(proc: Processor, Q: CumulativeCurve, t):
    """Exact exit count U(t, L) for piecewise-affine arrivals Q.

    The minimum over tau <= t - L/V is taken over the candidate set made of
    Qhat's breakpoints up to t - L/V plus t - L/V itself.
    """
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ta < 0):
        raise ValidationError("exit flow requested at negative time")
    Qhat = hat_extend(Q, proc.q0)
    mu = proc.mu
    xi = Qhat.times
    g = Qhat.values - mu * xi
    runmin = np.minimum.accumulate(g)
    s = ta - proc.T
    idx = np.searchsorted(xi, s, side="right")  # number of breakpoints <= s
    m = Qhat(s) - mu * s
    has = idx > 0
    m[has] = np.minimum(m[has], runmin[idx[has] - 1])
    mass = proc.initial_mass()
    out = np.where(ta < proc.T, density_exit(proc, ta), m + mu * s + mass)
    return out if np.ndim(t) else float(out[0])


def solve_processor(proc: Processor, Q: CumulativeCurve) -> LaxSolution:
    """Release, exit and queue curves of one processor, exactly."""
    Qhat = hat_extend(Q, proc.q0)
    Ubar = release_curve(Qhat, proc.mu)
    W = Ubar.shift(proc.T)
    if not proc.rho0.is_zero():
        W = W + density_exit_curve(proc)
    q = Qhat - Ubar
    return LaxSolution(Qhat=Qhat, Ubar=Ubar, W=CumulativeCurve._from(W.simplify()), q=q)


# ---------------------------------------------------------------------------
# discrete form


def discrete_hat(Q_i, q0: float) -> np.ndarray:
    """Qhat_0 = 0, Qhat_i = Q_i + q0 for i >= 1."""
    Qh = np.asarray(Q_i, dtype=float) + q0
    Qh[0] = 0.0
    return Qh


def running_min(grid: TimeGrid, Qhat_i, mu: float) -> np.ndarray:
    """R[k] = min_{j <= k} {Qhat_j - mu t_j}, k = 0..N.

    Entry k is the R-sequence value R_{k + Delta}; R[0] = Qhat_0 - mu t_0.
    """
    return np.minimum.accumulate(np.asarray(Qhat_i, dtype=float) - mu * grid.t)


def exit_flow_discrete(proc: Processor, grid: TimeGrid, Q_i, q0: float | None = None) -> np.ndarray:
    """Discrete Lax formula U_{i,L}, i = 0..N, from grid samples Q_i = Q(t_i-).

    Zero for i < Delta = ceil(L / (V h)); afterwards
    min_{j <= i - Delta} {Qhat_j - mu t_j} + (t_i - L/V) mu.
    Overestimates the exact exit count by at most error_bound(proc, h).
    """
    if not proc.rho0.is_zero():
        raise ValidationError(
            f"discrete solver assumes zero initial density on {proc.id!r}; "
            "add density_exit(...) separately"
        )
    Q_i = np.asarray(Q_i, dtype=float)
    if Q_i.shape != (grid.N + 1,):
        raise ValidationError(f"expected {grid.N + 1} samples, got {Q_i.shape}")
    grid.check([proc])
    q0 = proc.q0 if q0 is None else q0
    delta = grid.delta(proc)
    R = running_min(grid, discrete_hat(Q_i, q0), proc.mu)
    U = np.zeros(grid.N + 1)
    i = np.arange(delta, grid.N + 1)
    # (t_i - L/V) mu = mu t_{i-Delta} + (Delta h - L/V) mu; grouping this way keeps
    # the zero-inflow result exactly zero on integer-ratio grids
    j = i - delta
    U[i] = (R[j] + proc.mu * grid.t[j]) + error_bound(proc, grid.h)
    return U


def queue_discrete(grid: TimeGrid, Q_i, mu: float, R=None, q0: float = 0.0) -> np.ndarray:
    """q_i = Qhat_i - mu t_i - R_{i + Delta}, i = 0..N."""
    Qh = discrete_hat(Q_i, q0)
    if R is None:
        R = running_min(grid, Qh, mu)
    return Qh - mu * grid.t - np.asarray(R, dtype=float)


def error_bound(proc: Processor, h: float) -> float:
    """(ceil(L/(V h)) - L/(V h)) h mu; zero exactly when L/(V h) is an integer."""
    if h <= 0:
        raise ValidationError("step must be positive")
    x = proc.L / (proc.V * h)
    gap = ceil_ratio(x) - x
    if abs(gap) < 1e-9:
        return 0.0
    return gap * h * proc.mu
