import json
import math

import pytest

import scmcf


def test_power_law_values():
    G = scmcf.EnergyDensity.power_law(-2.0, 1.0)
    assert G.g(1.0) == pytest.approx(1.0)
    assert G.evaluate(1.0, 0) == pytest.approx(4.0 / 3.0)
    assert G.evaluate(2.0, 1) == pytest.approx(11.0 / 12.0)
    with pytest.raises(scmcf.DomainError):
        G.evaluate(-1.0)


def test_invalid_exponent_is_an_error():
    with pytest.raises(scmcf.Error):
        scmcf.EnergyDensity.power_law(1.0, 1.0)


def test_parabolicity_report():
    rep = scmcf.check_parabolicity(scmcf.EnergyDensity.power_law(2.0, 0.0), 0.1, 10.0)
    assert not rep.G_second_positive


def test_radial_reduction():
    one = scmcf.EnergyDensity.constant(1.0)
    assert scmcf.radial.extinction_time(one, 2 * math.pi, 1, 1.0) == pytest.approx(0.5, abs=1e-8)
    assert scmcf.radial.extinction_time(scmcf.EnergyDensity.power_law(-3.0, 1.0), 2 * math.pi, 1, 1.0) is None
    t, R, ext = scmcf.radial.solve(one, 2 * math.pi, 1, 1.0, 0.3, 0.1)
    assert ext is None
    assert R[-1] == pytest.approx(math.sqrt(0.4), abs=1e-6)


def test_circle_run_conserves_mass():
    G = scmcf.EnergyDensity.power_law(-1.0, 1.0)
    s = scmcf.build_circle(1.0, 128, 1.0, G)
    res = scmcf.run(s, t_end=0.05, dt=1e-3, monitor_every=5)
    rows = res["rows"]
    assert rows[0]["time"] == 0.0
    assert rows[-1]["time"] == pytest.approx(0.05)
    assert abs(rows[-1]["mass"] - rows[0]["mass"]) < 1e-12 * rows[0]["mass"]
    assert rows[-1]["energy"] < rows[0]["energy"]
    final = res["final_state"]
    assert len(final.points) == 128
    assert min(final.H) > 0.0


def test_self_intersection_event():
    G = scmcf.EnergyDensity.power_law(-1.0, 1.0)
    s = scmcf.build_self_intersection_scenario(G)
    assert scmcf.gap_function(s) == pytest.approx(0.02)
    res = scmcf.run(s, t_end=0.1, dt=1e-4, monitor_every=50, detect_self_intersection=True,
                    stop_on=["self_intersection"])
    types = [e["type"] for e in res["events"]]
    assert types == ["self_intersection"]
    assert 0.01 < res["events"][0]["t_event"] < 0.04


def test_run_config_exit_codes(tmp_path):
    cfg = {"scenario": "radial", "t_end": 0.02, "dt": 1e-4, "radial": {"N": 64},
           "output_dir": str(tmp_path / "out")}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert scmcf.run_config(str(path)) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert all(inv["passed"] for inv in summary["invariants"])

    cfg["density"] = {"kind": "power_law", "s": 2.0, "alpha": 0.0}
    path.write_text(json.dumps(cfg))
    assert scmcf.run_config(str(path)) == 1
