import csv
import json

import pytest

from laxnet import cli
from laxnet.scenario import bundled_names, load_scenario
from laxnet.solve import MipResult


def write_scenario(path, **doc):
    path.write_text(json.dumps(doc))
    return str(path)


def read_rows(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


def test_scenarios_lists_bundled(capsys):
    assert cli.main(["scenarios"]) == 0
    listed = capsys.readouterr().out.split()
    assert listed == bundled_names() and "seven_sweep" in listed


def test_simulate_is_deterministic(tmp_path):
    for d in ("one", "two"):
        assert cli.main(["simulate", "--scenario", "seven_unconstrained", "--out", str(tmp_path / d)]) == 0
    a = (tmp_path / "one" / "simulate.csv").read_text()
    assert a == (tmp_path / "two" / "simulate.csv").read_text()
    spec = load_scenario("seven_unconstrained")
    assert a.splitlines()[0] == f"# laxnet {cli.__version__} scenario=seven_unconstrained spec={spec.digest()} N=100"


def test_zero_inflow_csv_is_zero(tmp_path):
    path = write_scenario(tmp_path / "z.json", network="seven.json", grid={"T": 5, "N": 50})
    assert cli.main(["simulate", "--scenario", path, "--out", str(tmp_path / "o")]) == 0
    _, rows = read_rows(tmp_path / "o" / "simulate.csv")
    assert len(rows) == 7 * 51
    assert all(float(r[k]) == 0.0 for r in rows for k in ("Q", "W", "q"))


def test_optimal_allocations_replay(tmp_path):
    out = tmp_path / "opt"
    assert cli.main(["optimize", "--scenario", "seven_unconstrained", "--out", str(out)]) == 0
    summary = json.loads((out / "optimize.json").read_text())
    assert summary["objective"] == pytest.approx(58.75, abs=1e-6)
    assert summary["conservation_residual"] <= 1e-9 and summary["mass_residual"] <= 1e-9
    path = write_scenario(tmp_path / "replay.json", network="seven.json", inflows={"a": [[0, 2, 37.5]]},
                          grid={"T": 10, "N": 100}, allocations=str(out / "allocations.csv"))
    assert cli.main(["simulate", "--scenario", path, "--out", str(tmp_path / "sim")]) == 0
    sim = json.loads((tmp_path / "sim" / "simulate.json").read_text())
    assert sim["throughput"]["g"] == pytest.approx(58.75, abs=1e-6)


def test_optimize_exports_model(tmp_path):
    mps = tmp_path / "m.mps"
    assert cli.main(["optimize", "--scenario", "seven_buffers", "--out", str(tmp_path), "--export-mps", str(mps)]) == 0
    text = mps.read_text()
    assert text.startswith("NAME") and text.rstrip().endswith("ENDATA")
    summary = json.loads((tmp_path / "optimize.json").read_text())
    assert summary["objective"] == pytest.approx(58.75, abs=1e-6)
    assert summary["max_queue"]["b"] <= 10 + 1e-9 and summary["max_queue"]["c"] <= 10 + 1e-9


def test_sweep_rejects_small_n_and_reports_bound(tmp_path, capsys):
    assert cli.main(["sweep", "--scenario", "seven_sweep", "--sweep", "0,320", "--out", str(tmp_path)]) == 0
    head, rows = read_rows(tmp_path / "sweep.csv")
    assert head.startswith("# laxnet ")
    bad, good = rows
    assert bad["status"] == "rejected" and "positive" in bad["reason"]
    assert good["status"] == "optimal" and good["exact"] == "True"
    assert float(good["error_bound"]) == pytest.approx(0.25 * 47)
    assert float(good["objective"]) == pytest.approx(450.0, abs=1e-6)


def test_compare_smoothing_case(tmp_path):
    assert cli.main(["compare", "--scenario", "smoothing_case", "--out", str(tmp_path)]) == 0
    head, rows = read_rows(tmp_path / "compare.csv")
    assert head.startswith("# laxnet ")
    by = {r["scheme"]: r for r in rows}
    assert float(by["lax"]["queue_max"]) == 0.0
    assert float(by["lax"]["sup_gap"]) <= 1e-9
    assert float(by["fd-smoothed"]["queue_max"]) == pytest.approx(7.0, rel=0.05)
    assert float(by["fd"]["queue_max"]) == 0.0
    _, curves = read_rows(tmp_path / "compare_curves.csv")
    assert {c["config"].split(":")[0] for c in curves} == {"lax", "fd", "fd-smoothed"}


def test_compare_surfaces_cfl_failure(tmp_path):
    path = write_scenario(tmp_path / "c.json", processors=[{"id": "a", "L": 2, "V": 2, "mu": 15}],
                          inflows={"a": [[0, 2, 37.5]]}, grid={"T": 10, "N": 100},
                          compare={"lax_grids": [100], "fd": [{"dt": 0.5, "D": 10}, {"dt": 0.1, "D": 10}]})
    assert cli.main(["compare", "--scenario", path, "--out", str(tmp_path / "o")]) == 0
    _, rows = read_rows(tmp_path / "o" / "compare.csv")
    statuses = [r["status"] for r in rows if r["scheme"] == "fd"]
    assert statuses[0].startswith("rejected") and "CFL" in statuses[0]
    assert statuses[1] == "ok"


def test_missing_scenario_exits_2(tmp_path, capsys):
    assert cli.main(["simulate", "--scenario", str(tmp_path / "nope.json")]) == 2
    assert "not found" in capsys.readouterr().err


def test_malformed_scenario_names_line(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "grid": {"T": 10,\n  "N": }\n}\n')
    assert cli.main(["simulate", "--scenario", str(p)]) == 2
    assert "bad.json:3:" in capsys.readouterr().err


def test_cfl_violation_exits_2(tmp_path, capsys):
    path = write_scenario(tmp_path / "fd.json", processors=[{"id": "a", "L": 2, "V": 2, "mu": 15}],
                          inflows={"a": [[0, 2, 37.5]]}, grid={"T": 10, "N": 20}, scheme="fd",
                          fd={"dt": 0.5, "D": 10})
    assert cli.main(["simulate", "--scenario", path, "--out", str(tmp_path / "o")]) == 2
    assert "CFL" in capsys.readouterr().err


def test_smoothed_scheme_needs_epsilon(tmp_path, capsys):
    assert cli.main(["simulate", "--scenario", "processor_a", "--scheme", "fd-smoothed",
                     "--out", str(tmp_path)]) == 2
    assert "epsilon" in capsys.readouterr().err


def test_fixed_inflow_over_cap_exits_2(tmp_path, capsys):
    path = write_scenario(tmp_path / "cap.json", network="seven.json", inflows={"a": [[0, 2, 37.5]]},
                          grid={"T": 10, "N": 50}, buffer_caps={"a": 1})
    assert cli.main(["optimize", "--scenario", path, "--out", str(tmp_path / "o")]) == 2
    assert "infeasible" in capsys.readouterr().err


def test_budget_exhaustion_exits_3(tmp_path, monkeypatch, capsys):
    # the bundled scenarios close at the root, so stand in for a solver that ran out of time
    def exhausted(lp, gap_tol=1e-9, time_budget=None, backend="auto", **kw):
        return MipResult("budget", None, float("nan"), 60.0, 0, [60.0], 0.0)

    monkeypatch.setattr(cli, "solve_mip", exhausted)
    assert cli.main(["optimize", "--scenario", "seven_unconstrained", "--time-budget", "0",
                     "--out", str(tmp_path)]) == 3
    assert "budget" in capsys.readouterr().err
    assert json.loads((tmp_path / "optimize.json").read_text())["status"] == "budget"
    assert cli.main(["sweep", "--scenario", "seven_sweep", "--sweep", "40", "--out", str(tmp_path)]) == 3
    _, rows = read_rows(tmp_path / "sweep.csv")
    assert rows[0]["status"] == "budget"


def test_grid_override(tmp_path):
    assert cli.main(["simulate", "--scenario", "processor_a", "--scheme", "lax", "--n", "40",
                     "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "simulate.json").read_text())["N"] == 40


def test_compare_processor_grids(tmp_path):
    assert cli.main(["compare", "--scenario", "processor_a", "--out", str(tmp_path)]) == 0
    _, rows = read_rows(tmp_path / "compare.csv")
    lax = {int(r["N"]): float(r["sup_gap"]) for r in rows if r["scheme"] == "lax"}
    assert lax[100] <= 1e-12 and lax[30] > 0
    coarse = [float(r["sup_gap"]) for r in rows if r["scheme"] == "fd" and r["D"] in ("1", "2", "4")]
    assert len(coarse) == 3 and max(coarse) / min(coarse) < 2.0


def test_alternative_wiring_is_not_the_bundled_value(tmp_path):
    # the other reading of the seven-arc figure ({d, e} merge, then {c, f}) gives 61, not 58.75
    from laxnet.mip import build_mip
    from oracles import reference_milp

    spec = load_scenario("seven_variant")
    r = cli.cmd_optimize(spec, tmp_path)
    ref, _ = reference_milp(build_mip(spec.net, spec.grid, spec.inflows, spec.objective))
    assert r["objective"] == pytest.approx(ref, abs=1e-6)
    assert r["objective"] == pytest.approx(61.0, abs=1e-6)
