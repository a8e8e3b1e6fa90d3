"""Domain types: piecewise functions, cumulative curves, processors, networks
and time grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TIME_TOL = 1e-12
# Tolerance used when deciding whether L/(V h) is an integer.
RATIO_TOL = 1e-9


class ValidationError(ValueError):
    """Rejected input: violates a documented precondition."""


def ceil_ratio(x: float) -> int:
    """ceil(x), snapping values within RATIO_TOL of an integer onto it.

    With L = 1, V = 3 and h = 0.3 / 45, L / (V h) evaluates to
    50.00000000000001 in floating point; a plain ceil would give 51 and
    destroy the exactness of integer-ratio grids.
    """
    r = round(x)
    if abs(x - r) <= RATIO_TOL * max(1.0, abs(x)):
        return int(r)
    return int(math.ceil(x))


def is_integer_ratio(x: float) -> bool:
    return abs(x - round(x)) <= RATIO_TOL * max(1.0, abs(x))


# ---------------------------------------------------------------------------
# piecewise-constant functions (rates, densities, speed/capacity profiles)


@dataclass(frozen=True)
class PiecewiseConstant:
    """Right-continuous step function given as ``(start, end, value)`` pieces.

    Outside the pieces the function is zero. Pieces must not overlap.
    """

    pieces: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        ps = tuple(sorted((float(a), float(b), float(v)) for a, b, v in self.pieces))
        for a, b, _ in ps:
            if not b > a:
                raise ValidationError(f"empty or reversed piece [{a}, {b})")
        for (a0, b0, _), (a1, _, _) in zip(ps, ps[1:]):
            if a1 < b0 - TIME_TOL:
                raise ValidationError(f"overlapping pieces at {a1}")
        object.__setattr__(self, "pieces", ps)

    @classmethod
    def constant(cls, value: float, start: float, end: float) -> "PiecewiseConstant":
        return cls(((start, end, value),))

    @classmethod
    def coerce(cls, obj) -> "PiecewiseConstant":
        if obj is None:
            return cls()
        if isinstance(obj, PiecewiseConstant):
            return obj
        return cls(tuple(tuple(p) for p in obj))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, b, v in self.pieces:
            out = np.where((x >= a) & (x < b), v, out)
        return out if out.ndim else float(out)

    def is_zero(self) -> bool:
        return all(v == 0.0 for _, _, v in self.pieces)

    def min_value(self) -> float:
        return min((v for _, _, v in self.pieces), default=0.0)

    def integral(self, lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        return sum(v * max(0.0, min(b, hi) - max(a, lo)) for a, b, v in self.pieces)

    def breakpoints(self) -> list[float]:
        pts = set()
        for a, b, _ in self.pieces:
            pts.add(a)
            pts.add(b)
        return sorted(pts)

    def to_list(self) -> list[list[float]]:
        return [[a, b, v] for a, b, v in self.pieces]


# ---------------------------------------------------------------------------
# piecewise-affine functions of time


def _merge_times(*arrays: np.ndarray) -> np.ndarray:
    t = np.unique(np.concatenate([np.asarray(a, dtype=float) for a in arrays]))
    if t.size <= 1:
        return t
    keep = np.concatenate([[True], np.diff(t) > TIME_TOL])
    return t[keep]


class PiecewiseAffine:
    """Left-continuous piecewise-affine function of time.

    ``values[k]`` is the left limit at ``times[k]`` (which is also the value,
    by left-continuity) and ``jumps[k]`` the size of the discontinuity there,
    so the right limit is ``values[k] + jumps[k]``. Between breakpoints the
    function is affine; after the last one it stays at the last right limit.
    For ``t <= times[0]`` the function equals ``values[0]``, which is zero for
    every cumulative curve.
    """

    def __init__(self, times, values, jumps=None):
        t = np.asarray(times, dtype=float).ravel()
        v = np.asarray(values, dtype=float).ravel()
        j = np.zeros_like(v) if jumps is None else np.asarray(jumps, dtype=float).ravel()
        if t.size == 0:
            t, v, j = np.zeros(1), np.zeros(1), np.zeros(1)
        if not (t.size == v.size == j.size):
            raise ValidationError("times, values and jumps must have equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValidationError("breakpoint times must be strictly increasing")
        self.times = t
        self.values = v
        self.jumps = j
        for a in (self.times, self.values, self.jumps):
            a.setflags(write=False)

    # -- evaluation -------------------------------------------------------

    @property
    def right_values(self) -> np.ndarray:
        return self.values + self.jumps

    def _interp(self, t: np.ndarray, idx: np.ndarray) -> np.ndarray:
        n = self.times.size
        right = self.right_values
        out = np.empty_like(t)
        before = idx == 0
        after = idx >= n
        mid = ~(before | after)
        out[before] = self.values[0]
        out[after] = right[-1]
        if np.any(mid):
            k = idx[mid]
            t0, t1 = self.times[k - 1], self.times[k]
            v0, v1 = right[k - 1], self.values[k]
            out[mid] = v0 + (v1 - v0) * (t[mid] - t0) / (t1 - t0)
        return out

    def __call__(self, t):
        """Left limit f(t-), which is the value under left-continuity."""
        ta = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.times, ta, side="left")
        out = self._interp(ta, idx)
        return out if np.ndim(t) else float(out[0])

    def right(self, t):
        """Right limit f(t+)."""
        ta = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.times, ta, side="right")
        exact = (idx > 0) & (idx <= self.times.size)
        out = self._interp(ta, idx)
        if np.any(exact):
            k = idx[exact] - 1
            hit = ta[exact] == self.times[k]
            vals = out[exact]
            vals[hit] = self.right_values[k[hit]]
            out[exact] = vals
        return out if np.ndim(t) else float(out[0])

    # -- algebra ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return PiecewiseAffine(self.times, self.values + other, self.jumps)
        t = _merge_times(self.times, other.times)
        left = self(t) + other(t)
        right = self.right(t) + other.right(t)
        return _as_best_type(PiecewiseAffine(t, left, right - left), self, other)

    def __neg__(self):
        return PiecewiseAffine(self.times, -self.values, -self.jumps)

    def __sub__(self, other):
        return PiecewiseAffine.__add__(self, -other)

    def scale(self, c: float):
        out = PiecewiseAffine(self.times, c * self.values, c * self.jumps)
        return CumulativeCurve._from(out) if isinstance(self, CumulativeCurve) and c >= 0 else out

    def shift(self, dt: float):
        """Translate in time: g(t) = f(t - dt)."""
        out = PiecewiseAffine(self.times + dt, self.values, self.jumps)
        return CumulativeCurve._from(out) if isinstance(self, CumulativeCurve) else out

    def simplify(self, tol: float = 1e-12):
        """Drop breakpoints with no jump where the slope does not change."""
        t, v, j = self.times, self.values, self.jumps
        if t.size <= 2:
            return self
        keep = np.ones(t.size, dtype=bool)
        right = v + j
        for k in range(1, t.size - 1):
            if abs(j[k]) > tol:
                continue
            s0 = (v[k] - right[k - 1]) / (t[k] - t[k - 1])
            s1 = (v[k + 1] - right[k]) / (t[k + 1] - t[k])
            if abs(s0 - s1) <= tol * max(1.0, abs(s0), abs(s1)):
                keep[k] = False
        out = PiecewiseAffine(t[keep], v[keep], j[keep])
        return CumulativeCurve._from(out) if isinstance(self, CumulativeCurve) else out

    def slopes(self) -> np.ndarray:
        if self.times.size < 2:
            return np.zeros(0)
        return (self.values[1:] - self.right_values[:-1]) / np.diff(self.times)

    def max_abs_diff(self, other, times=None) -> float:
        """Sup-norm distance, evaluated on both one-sided limits at all breakpoints."""
        t = _merge_times(self.times, other.times) if times is None else np.asarray(times, float)
        d1 = np.abs(self(t) - other(t))
        d2 = np.abs(self.right(t) - other.right(t))
        return float(max(d1.max(initial=0.0), d2.max(initial=0.0)))

    def __repr__(self):
        pts = ", ".join(f"({a:g}, {b:g})" for a, b in zip(self.times, self.values))
        return f"{type(self).__name__}[{pts}]"


def _as_best_type(out: PiecewiseAffine, *inputs):
    if all(isinstance(x, CumulativeCurve) for x in inputs):
        return CumulativeCurve._from(out)
    return out


class CumulativeCurve(PiecewiseAffine):
    """Non-decreasing, left-continuous piecewise-affine count of products.

    Zero for every ``t <= times[0]``.
    """

    def __init__(self, times, values, jumps=None, tol: float = 1e-9):
        super().__init__(times, values, jumps)
        if abs(self.values[0]) > tol:
            raise ValidationError("cumulative curve must start at zero")
        if np.any(self.jumps < -tol):
            raise ValidationError("cumulative curve has a downward jump")
        if np.any(np.diff(self.values) < -tol) or np.any(self.values[1:] < self.right_values[:-1] - tol):
            raise ValidationError("cumulative curve must be non-decreasing")

    @classmethod
    def _from(cls, pa: PiecewiseAffine) -> "CumulativeCurve":
        return cls(pa.times, pa.values, pa.jumps)

    @classmethod
    def zero(cls, t0: float = 0.0) -> "CumulativeCurve":
        return cls([t0], [0.0])

    @classmethod
    def from_samples(cls, times, values) -> "CumulativeCurve":
        """Piecewise-affine interpolant through grid samples (no jumps)."""
        return cls(times, values)

    def total(self) -> float:
        return float(self.right_values[-1])


def eval_left(curve: PiecewiseAffine, t):
    """Value of a left-continuous curve at ``t``, i.e. the left limit."""
    return curve(t)


def cumulative_from_rate(rate, horizon: float, start: float = 0.0) -> CumulativeCurve:
    """Running integral of a non-negative piecewise-constant rate on [start, horizon]."""
    rate = PiecewiseConstant.coerce(rate)
    if rate.min_value() < 0:
        raise ValidationError("inflow rate must be non-negative")
    grid = _merge_times(np.array([start, horizon] + [x for x in rate.breakpoints() if start < x < horizon]))
    avg = np.array([rate.integral(a, b) / (b - a) for a, b in zip(grid, grid[1:])])
    # breakpoints only where the rate changes
    keep = np.concatenate([[True], np.abs(np.diff(avg)) > 0, [True]])
    t = grid[keep]
    return CumulativeCurve(t, [rate.integral(start, x) for x in t])


def hat_extend(Q: CumulativeCurve, q0: float) -> CumulativeCurve:
    """Prepend an initial queue: 0 for t <= 0, q0 + Q(t) for t > 0."""
    if q0 < 0:
        raise ValidationError("initial queue must be non-negative")
    if abs(Q(0.0)) > 1e-9:
        raise ValidationError("arrival curve must vanish for t <= 0")
    if q0 == 0:
        return Q
    return Q + CumulativeCurve([0.0], [0.0], [q0])


# ---------------------------------------------------------------------------
# processors and networks


@dataclass(frozen=True)
class Processor:
    id: str
    L: float
    V: float
    mu: float
    q0: float = 0.0
    rho0: PiecewiseConstant = field(default_factory=PiecewiseConstant)
    Cq: float | None = None
    alpha_q: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "rho0", PiecewiseConstant.coerce(self.rho0))
        if not (self.L > 0 and self.V > 0 and self.mu > 0):
            raise ValidationError(f"processor {self.id}: L, V and mu must be positive")
        if self.q0 < 0:
            raise ValidationError(f"processor {self.id}: q0 must be non-negative")
        if self.rho0.min_value() < 0:
            raise ValidationError(f"processor {self.id}: initial density must be non-negative")
        for a, b, _ in self.rho0.pieces:
            if a < -TIME_TOL or b > self.L + TIME_TOL:
                raise ValidationError(f"processor {self.id}: rho0 piece outside [0, L]")
        if self.Cq is not None and self.Cq < 0:
            raise ValidationError(f"processor {self.id}: buffer capacity must be non-negative")
        if self.alpha_q < 0:
            raise ValidationError(f"processor {self.id}: inventory cost must be non-negative")

    @property
    def T(self) -> float:
        """Throughput time L/V."""
        return self.L / self.V

    def initial_mass(self) -> float:
        return self.rho0.integral(0.0, self.L)


@dataclass(frozen=True)
class Node:
    id: str
    in_arcs: tuple[str, ...] = ()
    out_arcs: tuple[str, ...] = ()

    @property
    def dispersive(self) -> bool:
        return len(self.out_arcs) > 1


class Network:
    """Feed-forward directed graph of processors joined at nodes.

    An arc listed in no node's ``out_arcs`` is a source (fed by exogenous
    inflow); an arc in no node's ``in_arcs`` is a sink.
    """

    def __init__(self, processors: Iterable[Processor], nodes: Iterable[Node]):
        self.processors: dict[str, Processor] = {}
        for p in processors:
            if p.id in self.processors:
                raise ValidationError(f"duplicate processor id {p.id!r}")
            self.processors[p.id] = p
        self.nodes: dict[str, Node] = {}
        self.tail: dict[str, str] = {}  # arc -> node at its upstream end (its queue)
        self.head: dict[str, str] = {}  # arc -> node it feeds
        for nd in nodes:
            if nd.id in self.nodes:
                raise ValidationError(f"duplicate node id {nd.id!r}")
            nd = Node(str(nd.id), tuple(nd.in_arcs), tuple(nd.out_arcs))
            self.nodes[nd.id] = nd
            for e in nd.in_arcs:
                self._check_arc(e, nd.id)
                if e in self.head:
                    raise ValidationError(f"arc {e!r} enters more than one node")
                self.head[e] = nd.id
            for e in nd.out_arcs:
                self._check_arc(e, nd.id)
                if e in self.tail:
                    raise ValidationError(f"arc {e!r} leaves more than one node")
                self.tail[e] = nd.id
            if not nd.out_arcs:
                raise ValidationError(f"node {nd.id!r} has no outgoing arcs")
        self.source_arcs = tuple(e for e in self.processors if e not in self.tail)
        self.sink_arcs = tuple(e for e in self.processors if e not in self.head)
        self.order = self._topological_order()

    def _check_arc(self, e, node_id):
        if e not in self.processors:
            raise ValidationError(f"node {node_id!r} references unknown arc {e!r}")

    def _topological_order(self) -> tuple[str, ...]:
        indeg = {e: 0 for e in self.processors}
        succ: dict[str, list[str]] = {e: [] for e in self.processors}
        for nd in self.nodes.values():
            for u in nd.in_arcs:
                for w in nd.out_arcs:
                    succ[u].append(w)
                    indeg[w] += 1
        ready = [e for e in self.processors if indeg[e] == 0]
        order = []
        while ready:
            e = ready.pop(0)
            order.append(e)
            for w in succ[e]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        if len(order) != len(self.processors):
            raise ValidationError("network contains a cycle")
        return tuple(order)

    @property
    def arcs(self) -> tuple[str, ...]:
        return tuple(self.processors)

    def __getitem__(self, arc: str) -> Processor:
        return self.processors[arc]

    def __len__(self):
        return len(self.processors)

    def node_order(self) -> list[str]:
        """Nodes sorted so that every node follows the nodes feeding it."""
        pos = {e: k for k, e in enumerate(self.order)}
        return sorted(self.nodes, key=lambda v: min(pos[e] for e in self.nodes[v].out_arcs))

    def dispersive_nodes(self) -> list[str]:
        return [v for v, nd in self.nodes.items() if nd.dispersive]

    def paths(self) -> list[list[str]]:
        """All source-to-sink arc sequences."""
        out: list[list[str]] = []

        def walk(path):
            e = path[-1]
            v = self.head.get(e)
            if v is None:
                out.append(list(path))
                return
            for w in self.nodes[v].out_arcs:
                walk(path + [w])

        for s in self.source_arcs:
            walk([s])
        return out

    def max_path_capacity(self) -> float:
        """max over source-to-sink paths of the summed capacities."""
        return max(sum(self.processors[e].mu for e in p) for p in self.paths())

    def min_throughput_time(self) -> float:
        return min(p.T for p in self.processors.values())


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = t0 + i h, i = 0..N, with h = (T - t0) / N."""

    T: float
    N: int
    t0: float = 0.0

    def __post_init__(self):
        if self.N < 1 or not self.T > self.t0:
            raise ValidationError("grid needs N >= 1 and T > t0")

    @property
    def h(self) -> float:
        return (self.T - self.t0) / self.N

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.N + 1)

    def delta(self, proc: Processor) -> int:
        """Grid offset ceil(L / (V h)), the throughput time in whole steps."""
        return ceil_ratio(proc.L / (proc.V * self.h))

    def deltas(self, net: Network) -> dict[str, int]:
        return {e: self.delta(p) for e, p in net.processors.items()}

    def check(self, net: Network | Sequence[Processor]) -> None:
        """Require Delta >= 1 on every arc.

        ceil(L / (V h)) >= 1 for any positive step, so coarse grids with h
        larger than a throughput time are accepted; the discrete error bound
        still holds for them.
        """
        procs = net.processors.values() if isinstance(net, Network) else net
        for p in procs:
            if self.delta(p) < 1:
                raise ValidationError(f"grid offset of {p.id!r} is below one step")


def split_heterogeneous(L: float, V_profile, mu_profile, id: str = "p", q0: float = 0.0,
                        rho0=None) -> list[Processor]:
    """Break an arc with piecewise-constant V(x), mu(x) into homogeneous segments.

    Segments are returned upstream first. The initial queue stays with the
    first segment; the initial density is cut along the segment boundaries.
    """
    V_profile = PiecewiseConstant.coerce(V_profile)
    mu_profile = PiecewiseConstant.coerce(mu_profile)
    rho0 = PiecewiseConstant.coerce(rho0)
    cuts = {0.0, float(L)}
    for prof, name in ((V_profile, "speed"), (mu_profile, "capacity")):
        if prof.min_value() <= 0:
            raise ValidationError(f"{name} profile must be positive")
        covered = sum(b - a for a, b, _ in prof.pieces)
        if abs(covered - L) > 1e-9 or prof.pieces[0][0] > TIME_TOL or prof.pieces[-1][1] < L - 1e-9:
            raise ValidationError(f"{name} profile must cover [0, L]")
        cuts.update(x for x in prof.breakpoints() if 0 < x < L)
    xs = sorted(cuts)
    segs: list[list[float]] = []
    for a, b in zip(xs, xs[1:]):
        m = 0.5 * (a + b)
        V, mu = float(V_profile(m)), float(mu_profile(m))
        if segs and segs[-1][2] == V and segs[-1][3] == mu:
            segs[-1][1] = b
        else:
            segs.append([a, b, V, mu])
    if len(segs) == 1:
        return [Processor(id, L, segs[0][2], segs[0][3], q0=q0, rho0=rho0)]
    out = []
    for k, (a, b, V, mu) in enumerate(segs):
        local = tuple((max(pa, a) - a, min(pb, b) - a, v) for pa, pb, v in rho0.pieces
                      if min(pb, b) > max(pa, a))
        out.append(Processor(f"{id}.{k}", b - a, V, mu, q0=q0 if k == 0 else 0.0, rho0=local))
    return out
