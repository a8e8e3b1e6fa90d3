"""Command-line front end.

    laxnet simulate --scenario seven_unconstrained --out out/
    laxnet optimize --scenario seven_buffers --export-mps model.mps
    laxnet sweep    --scenario seven_sweep --sweep 40,80,160,320
    laxnet compare  --scenario smoothing_case

Exit codes: 0 success, 2 validation error, 3 solver budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from laxnet import __version__
from laxnet.fd import FdConfig, fd_simulate
from laxnet.mip import build_mip, export_model, extract_solution
from laxnet.network import TimeGrid, ValidationError, is_integer_ratio
from laxnet.scenario import (
    ScenarioSpec,
    bundled_names,
    load_scenario,
    write_allocations,
)
from laxnet.sim import (
    AllocationSchedule,
    NetworkState,
    conservation_residual,
    mass_balance_residual,
    propagate,
    propagate_continuous,
    write_csv,
)
from laxnet.solve import SolverError, solve_mip

log = logging.getLogger("laxnet")

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3


class BudgetExhausted(Exception):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


def meta_line(spec: ScenarioSpec, **extra) -> str:
    parts = [f"laxnet {__version__}", f"scenario={spec.name}", f"spec={spec.digest()}"]
    parts += [f"{k}={v}" for k, v in extra.items()]
    return " ".join(parts)


def _alloc(spec: ScenarioSpec) -> AllocationSchedule:
    if spec.allocations is not None:
        return spec.allocations
    if spec.net.dispersive_nodes():
        log.info("no allocation rates given; splitting evenly at %s", spec.net.dispersive_nodes())
    return AllocationSchedule.uniform(spec.net)


def _fd_config(spec: ScenarioSpec, scheme: str) -> FdConfig:
    cfg = spec.fd
    if cfg is None:
        # one step per grid interval, as many cells as the CFL condition allows
        h = spec.grid.h
        D = {e: max(1, int(np.floor(p.L / (p.V * h) + 1e-9))) for e, p in spec.net.processors.items()}
        cfg = FdConfig(dt=h, D=D)
    if scheme == "fd-smoothed" and cfg.epsilon is None:
        raise ValidationError("scheme fd-smoothed needs fd.epsilon in the scenario")
    if scheme == "fd" and cfg.epsilon is not None:
        cfg = FdConfig(cfg.dt, cfg.D, None)
    return cfg


def _fd_state(spec, cfg, alloc) -> tuple[NetworkState, float]:
    res = fd_simulate(spec.net, spec.rates, alloc, cfg, spec.grid.T)
    grid = TimeGrid(spec.grid.T, len(res.times) - 1, spec.grid.t0)
    return NetworkState(grid, res.Q, res.W, res.q), res.mass_residual


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(spec: ScenarioSpec, out: Path, scheme: str | None = None) -> dict:
    scheme = scheme or spec.scheme
    out.mkdir(parents=True, exist_ok=True)
    alloc = _alloc(spec)
    if scheme == "lax":
        state = propagate(spec.net, spec.inflows, alloc, spec.grid)
        mass = mass_balance_residual(state, spec.net)
    else:
        state, mass = _fd_state(spec, _fd_config(spec, scheme), alloc)
    cons = conservation_residual(state, spec.net)
    write_csv(out / "simulate.csv", state, scheme, meta_line(spec, N=state.grid.N))
    summary = {
        "scheme": scheme,
        "N": state.grid.N,
        "throughput": {e: float(state.W[e][-1]) for e in spec.net.sink_arcs},
        "max_queue": {e: float(np.max(q)) for e, q in state.q.items()},
        "conservation_residual": cons,
        "mass_residual": mass,
    }
    _write_json(out / "simulate.json", summary)
    return summary


def cmd_optimize(spec: ScenarioSpec, out: Path, gap: float = 1e-9, time_budget: float | None = None,
                 export: Path | None = None, backend: str = "auto") -> dict:
    out.mkdir(parents=True, exist_ok=True)
    model = build_mip(spec.net, spec.grid, spec.inflows, spec.objective, spec.buffer_caps,
                      supply=spec.supply or None)
    if export is not None:
        export_model(model, export, "lp" if Path(export).suffix.lower() == ".lp" else "mps")
    t0 = time.perf_counter()
    res = solve_mip(model, gap, time_budget, backend)
    summary = {
        "status": res.status,
        "objective": None if res.x is None else res.objective,
        "bound": res.bound,
        "gap": None if res.x is None else res.gap,
        "nodes": res.nodes,
        "seconds": round(time.perf_counter() - t0, 3),
        "columns": model.n,
        "binaries": int(model.integer.sum()),
        "rows": model.m,
    }
    if res.x is not None:
        sol = extract_solution(model, res.x)
        meta = meta_line(spec, N=spec.grid.N, status=res.status)
        write_csv(out / "solution.csv", sol.state, "lax-mip", meta)
        write_allocations(out / "allocations.csv", sol.alloc, spec.grid, spec.net, meta)
        summary.update({
            "throughput": {e: float(sol.state.W[e][-1]) for e in (spec.objective.arcs or spec.net.sink_arcs)},
            "max_queue": {e: float(np.max(q)) for e, q in sol.queues.items()},
            "max_violation": sol.report.max_violation,
            "conservation_residual": conservation_residual(sol.state, spec.net),
            "mass_residual": mass_balance_residual(sol.state, spec.net),
        })
    _write_json(out / "optimize.json", summary)
    if res.status == "infeasible":
        raise ValidationError("optimization model is infeasible")
    if res.status == "budget":
        raise BudgetExhausted(f"solver budget exhausted (bound {res.bound:.9g})", summary)
    return summary


def _sweep_row(args) -> dict:
    spec, N, gap, time_budget, backend = args
    row = {"N": N, "h": None, "status": "rejected", "objective": None, "bound": None, "gap": None,
           "exact": None, "error_bound": None, "seconds": None, "reason": ""}
    try:
        if not isinstance(N, int) or N < 1:
            raise ValidationError(f"N must be a positive integer, got {N!r}")
        s = spec.with_grid(N)
        h = s.grid.h
        row["h"] = h
        row["exact"] = all(is_integer_ratio(p.L / (p.V * h)) for p in s.net.processors.values())
        row["error_bound"] = h * s.net.max_path_capacity()
        t0 = time.perf_counter()
        model = build_mip(s.net, s.grid, s.inflows, s.objective, s.buffer_caps, supply=s.supply or None)
        res = solve_mip(model, gap, time_budget, backend)
        row.update(status=res.status, bound=res.bound, seconds=round(time.perf_counter() - t0, 3))
        if res.x is not None:
            row.update(objective=res.objective, gap=res.gap)
    except (ValidationError, SolverError) as exc:
        row["status"] = "rejected" if isinstance(exc, ValidationError) else "failed"
        row["reason"] = str(exc)
    return row


def cmd_sweep(spec: ScenarioSpec, out: Path, Ns=None, gap: float = 1e-9, time_budget: float | None = None,
              workers: int = 1, backend: str = "auto") -> list[dict]:
    out.mkdir(parents=True, exist_ok=True)
    Ns = list(Ns if Ns is not None else spec.sweep)
    if not Ns:
        raise ValidationError("no N values to sweep (use --sweep or the scenario's sweep list)")
    jobs = [(spec, N, gap, time_budget, backend) for N in Ns]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    cols = ["N", "h", "status", "objective", "bound", "gap", "exact", "error_bound", "seconds", "reason"]
    with open(out / "sweep.csv", "w", newline="") as fh:
        fh.write(f"# {meta_line(spec)}\n")
        w = csv.DictWriter(fh, cols)
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        log.info("N=%s status=%s objective=%s seconds=%s", r["N"], r["status"], r["objective"], r["seconds"])
    if any(r["status"] == "budget" for r in rows):
        raise BudgetExhausted("solver budget exhausted on some sweep entries", rows)
    return rows


def cmd_compare(spec: ScenarioSpec, out: Path) -> list[dict]:
    """Lax and finite-difference runs against the exact grid-free solution."""
    out.mkdir(parents=True, exist_ok=True)
    alloc = _alloc(spec)
    exact = propagate_continuous(spec.net, spec.inflows, alloc)
    lax_grids = spec.compare.get("lax_grids", [spec.grid.N])
    fd_cfgs = spec.compare.get("fd")
    if fd_cfgs is None:
        fd_cfgs = [] if spec.fd is None else [{"dt": spec.fd.dt, "D": spec.fd.D, "epsilon": spec.fd.epsilon}]
    runs = [("lax", {"N": N}) for N in lax_grids] + [
        ("fd" if c.get("epsilon") is None else "fd-smoothed", c) for c in fd_cfgs]
    rows, curves = [], []
    prev: dict[tuple[str, str], float] = {}
    for scheme, cfg in runs:
        base = {"scheme": scheme, "N": cfg.get("N"), "dt": cfg.get("dt"), "D": cfg.get("D"),
                "epsilon": cfg.get("epsilon")}
        try:
            if scheme == "lax":
                grid = TimeGrid(spec.grid.T, int(cfg["N"]), spec.grid.t0)
                state = propagate(spec.net, spec.inflows, alloc, grid)
            else:
                fc = FdConfig(float(cfg["dt"]), cfg.get("D", 1), cfg.get("epsilon"))
                state, _ = _fd_state(spec, fc, alloc)
        except ValidationError as exc:
            rows.append({**base, "arc": "", "status": f"rejected: {exc}"})
            continue
        t = state.grid.t
        for e in spec.net.order:
            We, qe = exact[e].W(t), exact[e].q(t)
            sup = float(np.max(np.abs(state.W[e] - We)))
            key = (scheme, e)
            ratio = sup / prev[key] if prev.get(key) else None
            prev[key] = sup
            rows.append({**base, "arc": e, "status": "ok", "sup_gap": sup,
                         "terminal_gap": float(state.W[e][-1] - We[-1]),
                         "queue_max": float(np.max(state.q[e])), "exact_queue_max": float(np.max(qe)),
                         "refine_ratio": ratio})
            label = f"{scheme}:" + ",".join(f"{k}={v}" for k, v in cfg.items())
            curves += [(label, ti, e, w, qi, we, qx) for ti, w, qi, we, qx in zip(t, state.W[e], state.q[e], We, qe)]
    cols = ["scheme", "N", "dt", "D", "epsilon", "arc", "status", "sup_gap", "terminal_gap", "queue_max",
            "exact_queue_max", "refine_ratio"]
    with open(out / "compare.csv", "w", newline="") as fh:
        fh.write(f"# {meta_line(spec)}\n")
        w = csv.DictWriter(fh, cols, restval="")
        w.writeheader()
        w.writerows(rows)
    with open(out / "compare_curves.csv", "w", newline="") as fh:
        fh.write(f"# {meta_line(spec)}\n")
        w = csv.writer(fh)
        w.writerow(["config", "t", "arc", "W", "q", "W_exact", "q_exact"])
        for label, ti, e, wv, qv, we, qx in curves:
            w.writerow([label, f"{ti:.12g}", e, f"{wv:.12g}", f"{qv:.12g}", f"{we:.12g}", f"{qx:.12g}"])
    return rows


# ---------------------------------------------------------------------------
# argument handling


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="laxnet", description="Supply-chain network simulation and optimization.")
    p.add_argument("--version", action="version", version=f"laxnet {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--scenario", required=True, help="scenario file or bundled scenario name")
        sp.add_argument("--n", type=int, help="override the number of grid intervals")
        sp.add_argument("--out", type=Path, help="output directory (default: scenario 'out' or ./out)")

    def solver(sp):
        sp.add_argument("--gap", type=float, default=1e-9, help="relative optimality gap")
        sp.add_argument("--time-budget", type=float, default=None, help="seconds per MIP solve")
        sp.add_argument("--backend", choices=["auto", "simplex", "highs"], default="auto", help="LP engine")

    s = sub.add_parser("simulate", help="forward simulation, CSV of Q, W, q per arc")
    common(s)
    s.add_argument("--scheme", choices=["lax", "fd", "fd-smoothed"])
    o = sub.add_parser("optimize", help="solve the network MIP")
    common(o)
    solver(o)
    o.add_argument("--export-mps", type=Path, help="also write the model (.mps, or .lp for LP text)")
    w = sub.add_parser("sweep", help="solve the MIP over a list of grid sizes")
    common(w)
    solver(w)
    w.add_argument("--sweep", type=_int_list, help="comma-separated N values")
    w.add_argument("--workers", type=int, default=1)
    c = sub.add_parser("compare", help="lax and finite-difference runs against the exact solution")
    common(c)
    sub.add_parser("scenarios", help="list bundled scenarios")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "scenarios":
        print("\n".join(bundled_names()))
        return EXIT_OK
    try:
        spec = load_scenario(args.scenario)
        if args.n is not None:
            spec = spec.with_grid(args.n)
        out = args.out or Path(spec.out or "out")
        if args.command == "simulate":
            r = cmd_simulate(spec, out, args.scheme)
            print(f"simulated {spec.name} ({r['scheme']}, N={r['N']}): throughput "
                  + ", ".join(f"{e}={v:.9g}" for e, v in r["throughput"].items()))
        elif args.command == "optimize":
            r = cmd_optimize(spec, out, args.gap, args.time_budget, args.export_mps, args.backend)
            print(f"objective {r['objective']:.9g} status {r['status']} gap {r['gap']:.3g} "
                  + " ".join(f"W{e}={v:.9g}" for e, v in r["throughput"].items()))
        elif args.command == "sweep":
            rows = cmd_sweep(spec, out, args.sweep, args.gap, args.time_budget, args.workers, args.backend)
            for r in rows:
                print(f"N={r['N']} status={r['status']} objective={r['objective']} bound={r['error_bound']}"
                      + (f" reason={r['reason']}" if r["reason"] else ""))
        elif args.command == "compare":
            rows = cmd_compare(spec, out)
            for r in rows:
                if r["status"] != "ok":
                    print(f"{r['scheme']} {r['status']}")
                else:
                    print(f"{r['scheme']} N={r['N']} dt={r['dt']} D={r['D']} arc={r['arc']} "
                          f"sup_gap={r['sup_gap']:.3g} queue_max={r['queue_max']:.3g}")
    except BudgetExhausted as exc:
        print(f"laxnet: {exc}; partial results written", file=sys.stderr)
        return EXIT_BUDGET
    except (ValidationError, FileNotFoundError) as exc:
        print(f"laxnet: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
