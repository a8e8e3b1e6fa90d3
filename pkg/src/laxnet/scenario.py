"""Scenario files: network, inflows, grid, scheme and objective in one JSON
document. A scenario may inline its network or point at a network file
(resolved relative to the scenario, then among the bundled scenarios)."""

from __future__ import annotations

import copy
import csv
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from laxnet.fd import FdConfig
from laxnet.mip import OBJECTIVES, ObjectiveSpec
from laxnet.network import (
    CumulativeCurve,
    Network,
    Node,
    PiecewiseConstant,
    Processor,
    TimeGrid,
    ValidationError,
    cumulative_from_rate,
)
from laxnet.sim import AllocationSchedule

SCHEMES = ("lax", "fd", "fd-smoothed")


class ScenarioError(ValidationError):
    """Scenario file rejected; the message names the offending key path."""


def bundled_dir() -> Path:
    return Path(str(resources.files("laxnet") / "scenarios"))


def bundled_names() -> list[str]:
    return sorted(p.stem for p in bundled_dir().glob("*.json"))


def resolve(name_or_path: str | Path, base: Path | None = None) -> Path:
    p = Path(name_or_path)
    candidates = [p]
    if base is not None and not p.is_absolute():
        candidates.append(base / p)
    candidates += [bundled_dir() / p.name, bundled_dir() / f"{p.name}.json"]
    for c in candidates:
        if c.is_file():
            return c
    raise ScenarioError(f"scenario or network file not found: {name_or_path}")


def _load_json(path: Path) -> dict:
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    return data


def _num(d: dict, key: str, where: str, default=None, positive=False):
    if key not in d:
        if default is None:
            raise ScenarioError(f"{where}.{key}: missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{where}.{key}: expected a number, got {v!r}")
    if positive and not v > 0:
        raise ScenarioError(f"{where}.{key}: must be positive")
    return float(v)


def _pieces(obj, where: str) -> PiecewiseConstant:
    if obj is None:
        return PiecewiseConstant()
    if not isinstance(obj, list) or not all(isinstance(p, list) and len(p) == 3 for p in obj):
        raise ScenarioError(f"{where}: expected a list of [start, end, value] pieces")
    try:
        return PiecewiseConstant(tuple(tuple(float(x) for x in p) for p in obj))
    except (ValidationError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def parse_network(data: dict, where: str = "network") -> Network:
    procs_raw = data.get("processors")
    if not isinstance(procs_raw, list) or not procs_raw:
        raise ScenarioError(f"{where}.processors: expected a non-empty list")
    procs = []
    for k, p in enumerate(procs_raw):
        w = f"{where}.processors[{k}]"
        if not isinstance(p, dict) or "id" not in p:
            raise ScenarioError(f"{w}: expected an object with an id")
        try:
            procs.append(Processor(
                id=str(p["id"]),
                L=_num(p, "L", w, positive=True),
                V=_num(p, "V", w, positive=True),
                mu=_num(p, "mu", w, positive=True),
                q0=_num(p, "q0", w, 0.0),
                rho0=_pieces(p.get("rho0"), f"{w}.rho0"),
                Cq=None if p.get("Cq") is None else _num(p, "Cq", w),
                alpha_q=_num(p, "alpha_q", w, 0.0),
            ))
        except ScenarioError:
            raise
        except ValidationError as exc:
            raise ScenarioError(f"{w}: {exc}") from exc
    nodes = []
    for k, nd in enumerate(data.get("nodes", [])):
        w = f"{where}.nodes[{k}]"
        if not isinstance(nd, dict) or "id" not in nd:
            raise ScenarioError(f"{w}: expected an object with an id")
        nodes.append(Node(str(nd["id"]), tuple(map(str, nd.get("in", ()))), tuple(map(str, nd.get("out", ())))))
    try:
        return Network(procs, nodes)
    except ValidationError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


@dataclass
class ScenarioSpec:
    name: str
    net: Network
    rates: dict[str, PiecewiseConstant]
    grid: TimeGrid
    scheme: str = "lax"
    fd: FdConfig | None = None
    objective: ObjectiveSpec = field(default_factory=ObjectiveSpec)
    buffer_caps: dict[str, float] = field(default_factory=dict)
    allocations: AllocationSchedule | None = None
    supply: dict[str, float] = field(default_factory=dict)
    sweep: list[int] = field(default_factory=list)
    compare: dict[str, Any] = field(default_factory=dict)
    out: str | None = None
    raw: dict = field(default_factory=dict)

    @property
    def inflows(self) -> dict[str, CumulativeCurve]:
        return {e: cumulative_from_rate(r, self.grid.T) for e, r in self.rates.items()}

    def digest(self) -> str:
        """Short hash of the canonical scenario document."""
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def with_grid(self, N: int) -> "ScenarioSpec":
        spec = copy.copy(self)
        spec.grid = TimeGrid(self.grid.T, int(N), self.grid.t0)
        spec.raw = {**self.raw, "grid": {**self.raw.get("grid", {}), "N": int(N)}}
        return spec


def parse_scenario(data: dict, base: Path | None = None, name: str = "scenario") -> ScenarioSpec:
    raw = copy.deepcopy(data)
    netsrc = data.get("network")
    if isinstance(netsrc, str):
        net_path = resolve(netsrc, base)
        net_data = _load_json(net_path)
        net = parse_network(net_data, net_path.name)
        raw["network"] = net_data
    elif isinstance(netsrc, dict):
        net = parse_network(netsrc)
    elif "processors" in data:
        net = parse_network(data, "scenario")
    else:
        raise ScenarioError("network: missing (give a file name, an object, or inline processors)")

    rates = {}
    for e, r in (data.get("inflows") or {}).items():
        if e not in net.source_arcs:
            raise ScenarioError(f"inflows.{e}: not a source arc (sources: {list(net.source_arcs)})")
        rates[e] = _pieces(r, f"inflows.{e}")
        if rates[e].min_value() < 0:
            raise ScenarioError(f"inflows.{e}: negative rate")

    g = data.get("grid")
    if not isinstance(g, dict):
        raise ScenarioError("grid: expected an object with T and N")
    N = g.get("N")
    if not isinstance(N, int) or isinstance(N, bool) or N < 1:
        raise ScenarioError(f"grid.N: expected a positive integer, got {N!r}")
    T = _num(g, "T", "grid", positive=True)
    grid = TimeGrid(T, N, _num(g, "t0", "grid", 0.0))

    scheme = data.get("scheme", "lax")
    if scheme not in SCHEMES:
        raise ScenarioError(f"scheme: expected one of {SCHEMES}, got {scheme!r}")
    fd = None
    fdd = data.get("fd")
    if fdd is not None:
        if not isinstance(fdd, dict):
            raise ScenarioError("fd: expected an object")
        D = fdd.get("D", 1)
        if not (isinstance(D, int) or isinstance(D, dict)):
            raise ScenarioError("fd.D: expected an integer or a per-arc map")
        eps = fdd.get("epsilon")
        fd = FdConfig(dt=_num(fdd, "dt", "fd", positive=True), D=D,
                      epsilon=None if eps is None else _num(fdd, "epsilon", "fd", positive=True))

    od = data.get("objective") or {}
    kind = od.get("kind", "terminal_throughput")
    if kind not in OBJECTIVES:
        raise ScenarioError(f"objective.kind: expected one of {OBJECTIVES}, got {kind!r}")
    arcs = od.get("arcs")
    if arcs is not None:
        bad = [a for a in arcs if a not in net.processors]
        if bad:
            raise ScenarioError(f"objective.arcs: unknown arcs {bad}")
    objective = ObjectiveSpec(kind, bool(od.get("decide_inflow", False)),
                              tuple(arcs) if arcs else None, od.get("alpha"))

    caps = {}
    for e, c in (data.get("buffer_caps") or {}).items():
        if e not in net.processors:
            raise ScenarioError(f"buffer_caps.{e}: unknown arc")
        caps[e] = _num(data["buffer_caps"], e, "buffer_caps")

    alloc = None
    a = data.get("allocations")
    if isinstance(a, str):
        alloc = read_allocations(resolve(a, base), grid.T)
    elif isinstance(a, dict):
        alloc = AllocationSchedule({v: {e: _pieces(p, f"allocations.{v}.{e}") for e, p in arcs_.items()}
                                    for v, arcs_ in a.items()})
    elif a is not None:
        raise ScenarioError("allocations: expected a CSV file name or an object")
    if alloc is not None:
        unknown = set(alloc.rates) - set(net.nodes)
        if unknown:
            raise ScenarioError(f"allocations: unknown nodes {sorted(unknown)}")

    sweep = data.get("sweep", [])
    if not isinstance(sweep, list):
        raise ScenarioError("sweep: expected a list of N values")
    supply = {e: _num(data["supply"], e, "supply") for e in (data.get("supply") or {})}
    compare = data.get("compare") or {}
    if not isinstance(compare, dict):
        raise ScenarioError("compare: expected an object")
    return ScenarioSpec(name, net, rates, grid, scheme, fd, objective, caps, alloc, supply,
                        sweep, compare, data.get("out"), raw)


def load_scenario(name_or_path: str | Path) -> ScenarioSpec:
    path = resolve(name_or_path)
    return parse_scenario(_load_json(path), path.parent, path.stem)


def read_allocations(path, T: float) -> AllocationSchedule:
    """CSV with header ``t, node, arc, A``; '#' lines are comments."""
    rows = []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader, [])]
    if header[:4] != ["t", "node", "arc", "A"]:
        raise ScenarioError(f"{path}: expected header t,node,arc,A, got {header}")
    for k, r in enumerate(reader, start=2):
        if not r:
            continue
        try:
            rows.append((float(r[0]), r[1].strip(), r[2].strip(), float(r[3])))
        except (ValueError, IndexError) as exc:
            raise ScenarioError(f"{path}: row {k}: {exc}") from exc
    return AllocationSchedule.from_rows(rows, T)


def write_allocations(path, alloc: AllocationSchedule, grid: TimeGrid, net: Network, meta: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        w = csv.writer(fh)
        w.writerow(["t", "node", "arc", "A"])
        for t, v, e, a in alloc.to_rows(grid, net):
            w.writerow([f"{t:.12g}", v, e, f"{a:.12g}"])
