import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from laxnet.network import (
    CumulativeCurve,
    Network,
    Node,
    PiecewiseAffine,
    PiecewiseConstant,
    Processor,
    TimeGrid,
    ValidationError,
    ceil_ratio,
    cumulative_from_rate,
    eval_left,
    hat_extend,
    split_heterogeneous,
)
from laxnet.sim import propagate


# -- rates and curves --------------------------------------------------------


def test_rate_curve_breakpoints():
    Q = cumulative_from_rate([(0, 2, 37.5)], 10)
    assert list(Q.times) == [0.0, 2.0, 10.0]
    assert list(Q.values) == [0.0, 75.0, 75.0]


def test_zero_rate_gives_zero_curve():
    Q = cumulative_from_rate([], 10)
    assert np.all(Q(np.linspace(-1, 12, 27)) == 0.0)


def test_rate_45_total():
    Q = cumulative_from_rate([(0, 10, 45)], 80)
    assert Q(80.0) == 450.0


def test_negative_rate_rejected():
    with pytest.raises(ValidationError):
        cumulative_from_rate([(0, 1, -2.0)], 5)


def test_overlapping_pieces_rejected():
    with pytest.raises(ValidationError):
        PiecewiseConstant(((0, 2, 1.0), (1, 3, 1.0)))


def test_eval_left_at_jump():
    step = hat_extend(CumulativeCurve.zero(), 5.0)
    assert eval_left(step, 0.0) == 0.0
    assert step.right(0.0) == 5.0
    assert step(0.5) == 5.0


def test_eval_left_interpolates():
    assert eval_left(CumulativeCurve([0, 2], [0, 75]), 1.0) == 37.5


def test_eval_before_first_breakpoint():
    c = CumulativeCurve([1.0, 3.0], [0.0, 4.0])
    assert c(-3.0) == 0.0 and c(1.0) == 0.0


def test_hat_identity_for_zero_queue(inflow_375):
    t = np.linspace(0.01, 10, 50)
    assert np.array_equal(hat_extend(inflow_375, 0.0)(t), inflow_375(t))


def test_hat_linear_inflow():
    Q = CumulativeCurve([0, 10], [0, 10])
    assert hat_extend(Q, 2.0)(1.0) == pytest.approx(3.0, abs=1e-15)


def test_hat_requires_zero_start():
    with pytest.raises(ValidationError):
        hat_extend(PiecewiseAffine([0, 1], [1, 2]), 0.0)


def test_cumulative_rejects_decrease():
    with pytest.raises(ValidationError):
        CumulativeCurve([0, 1, 2], [0, 2, 1])
    with pytest.raises(ValidationError):
        CumulativeCurve([0, 1], [0, 1], [0, -0.5])


def test_curve_shift_and_scale():
    c = CumulativeCurve([0, 2], [0, 4])
    s = c.shift(1.0)
    assert s(2.0) == 2.0 and s(1.0) == 0.0
    assert isinstance(c.scale(0.5), CumulativeCurve)
    assert c.scale(0.5)(2.0) == 2.0


@st.composite
def curves(draw):
    n = draw(st.integers(1, 6))
    dt = draw(st.lists(st.floats(0.05, 3.0), min_size=n, max_size=n))
    inc = draw(st.lists(st.floats(0.0, 10.0), min_size=n, max_size=n))
    jumps = draw(st.lists(st.sampled_from([0.0, 0.0, 1.5]), min_size=n + 1, max_size=n + 1))
    t = np.concatenate([[0.0], np.cumsum(dt)])
    v = np.zeros(n + 1)
    for k in range(n):
        v[k + 1] = v[k] + jumps[k] + inc[k]
    return CumulativeCurve(t, v, jumps)


@given(curves(), curves(), st.floats(0.0, 3.0), st.floats(0.0, 4.0))
def test_curve_algebra_stays_monotone(a, b, c, dt):
    out = (a + b.scale(c)).shift(dt)
    assert isinstance(out, CumulativeCurve)
    t = np.linspace(-1, 25, 400)
    vals = out(t)
    assert np.all(np.diff(vals) >= -1e-9)
    assert np.all(out.right(t) >= vals - 1e-9)


@given(curves(), st.floats(0.0, 5.0))
def test_hat_matches_definition(Q, q0):
    H = hat_extend(Q, q0)
    t = np.linspace(0.001, 20, 100)
    assert np.allclose(H(t), q0 + Q(t), atol=1e-12)
    assert H(0.0) == 0.0 and H(-1.0) == 0.0


# -- processors and networks ------------------------------------------------


def test_processor_validation():
    with pytest.raises(ValidationError):
        Processor("x", 0.0, 1.0, 1.0)
    with pytest.raises(ValidationError):
        Processor("x", 1.0, 1.0, 1.0, q0=-1.0)
    with pytest.raises(ValidationError):
        Processor("x", 1.0, 1.0, 1.0, rho0=[(0, 1, -1.0)])
    with pytest.raises(ValidationError):
        Processor("x", 1.0, 1.0, 1.0, rho0=[(0, 2, 1.0)])
    assert Processor("x", 3.0, 2.0, 1.0).T == 1.5


def test_cycle_rejected():
    procs = [Processor(e, 1, 1, 1) for e in "abc"]
    nodes = [Node("1", ("a",), ("b",)), Node("2", ("b",), ("c",)), Node("3", ("c",), ("a",))]
    with pytest.raises(ValidationError, match="cycle"):
        Network(procs, nodes)


def test_unknown_and_duplicate_arcs_rejected():
    procs = [Processor(e, 1, 1, 1) for e in "ab"]
    with pytest.raises(ValidationError):
        Network(procs, [Node("1", ("a",), ("z",))])
    with pytest.raises(ValidationError):
        Network(procs + [Processor("a", 1, 1, 1)], [])
    with pytest.raises(ValidationError):
        Network(procs, [Node("1", ("a",), ("b",)), Node("2", ("a",), ("b",))])


def test_seven_structure(seven):
    assert seven.source_arcs == ("a",)
    assert seven.sink_arcs == ("g",)
    assert sorted(seven.dispersive_nodes()) == ["1", "2"]
    assert seven.order.index("a") == 0 and seven.order[-1] == "g"


def test_seven_max_path_capacity(seven):
    # paths a-b-d-f-g (47), a-b-e-g (38.5), a-c-f-g (42)
    assert sorted(sum(seven[e].mu for e in p) for p in seven.paths()) == [38.5, 42.0, 47.0]
    assert seven.max_path_capacity() == 47.0


def test_grid_offsets(seven):
    grid = TimeGrid(10, 100)
    d = grid.deltas(seven)
    assert d["b"] == 20 and d["d"] == 5 and all(d[e] == 10 for e in "acefg")
    assert grid.t[0] == 0 and grid.t[-1] == 10


def test_ceil_ratio_snaps_roundoff():
    x = 1.0 / (3.0 * (0.3 / 45))
    assert x > 50
    assert ceil_ratio(x) == 50
    assert ceil_ratio(10.3) == 11


def test_grid_needs_intervals():
    with pytest.raises(ValidationError):
        TimeGrid(10, 0)


# -- heterogeneous arcs --------------------------------------------------------


def test_split_homogeneous_unchanged():
    (p,) = split_heterogeneous(2.0, [(0, 2, 2.0)], [(0, 2, 5.0)], id="a")
    assert (p.id, p.L, p.V, p.mu) == ("a", 2.0, 2.0, 5.0)


def test_split_speed_pieces():
    ps = split_heterogeneous(2.0, [(0, 1, 2.0), (1, 2, 1.0)], [(0, 2, 5.0)])
    assert [(p.L, p.V, p.mu) for p in ps] == [(1.0, 2.0, 5.0), (1.0, 1.0, 5.0)]


def test_split_rejects_nonpositive():
    with pytest.raises(ValidationError):
        split_heterogeneous(2.0, [(0, 2, 0.0)], [(0, 2, 5.0)])
    with pytest.raises(ValidationError):
        split_heterogeneous(2.0, [(0, 2, 1.0)], [(0, 1, 5.0), (1, 2, -1.0)])


def test_split_series_bottleneck():
    ps = split_heterogeneous(2.0, [(0, 2, 2.0)], [(0, 1, 6.0), (1, 2, 4.0)], id="p")
    assert len(ps) == 2
    nodes = [Node("j", (ps[0].id,), (ps[1].id,))]
    net = Network(ps, nodes)
    grid = TimeGrid(20, 400)
    st_ = propagate(net, {ps[0].id: cumulative_from_rate([(0, 20, 10.0)], 20)}, None, grid)
    W = st_.W[ps[1].id]
    rate = np.diff(W) / grid.h
    assert np.allclose(rate[-100:], 4.0, atol=1e-9)


def test_split_keeps_initial_data_local():
    ps = split_heterogeneous(2.0, [(0, 0.5, 1.0), (0.5, 2, 3.0)], [(0, 2, 5.0)], id="p", q0=2.0,
                             rho0=[(0.25, 1.0, 4.0)])
    assert ps[0].q0 == 2.0 and ps[1].q0 == 0.0
    assert ps[0].rho0.pieces == ((0.25, 0.5, 4.0),)
    assert ps[1].rho0.pieces == ((0.0, 0.5, 4.0),)


@st.composite
def profiles(draw):
    L = draw(st.floats(0.5, 5.0))
    k = draw(st.integers(1, 4))
    cuts = sorted(draw(st.lists(st.floats(0.05, 0.95), min_size=k - 1, max_size=k - 1, unique=True)))
    xs = [0.0] + [c * L for c in cuts] + [L]
    vals = draw(st.lists(st.sampled_from([1.0, 2.0, 3.0]), min_size=k, max_size=k))
    return L, [(a, b, v) for a, b, v in zip(xs, xs[1:], vals)]


@given(profiles(), st.data())
def test_split_partitions_arc(prof, data):
    L, Vp = prof
    mus = data.draw(st.sampled_from([4.0, 6.0]))
    mup = [(0.0, L / 2, mus), (L / 2, L, 5.0)]
    ps = split_heterogeneous(L, Vp, mup)
    assert sum(p.L for p in ps) == pytest.approx(L, abs=1e-12)
    # maximal joint constant pieces: cut points of both profiles, merged where equal
    cuts = sorted({a for a, _, _ in Vp} | {b for _, b, _ in Vp} | {0.0, L / 2, L})
    segs = []
    for a, b in zip(cuts, cuts[1:]):
        if b - a <= 1e-12:
            continue
        m = 0.5 * (a + b)
        key = (PiecewiseConstant(tuple(Vp))(m), PiecewiseConstant(tuple(mup))(m))
        if not segs or segs[-1] != key:
            segs.append(key)
    assert len(ps) == len(segs)
    assert [(p.V, p.mu) for p in ps] == segs
