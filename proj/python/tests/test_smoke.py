import json
import math

import pytest

import hawkesmm as hm


def test_expsum_kernel():
    k = hm.ExpSumKernel([0.45, 0.45], [1.0, 1.0])
    assert len(k) == 2
    assert k(0.0) == pytest.approx(0.9)
    assert k.l1_norm() == pytest.approx(0.9)


def test_power_law_approximation_matches_moments():
    target = hm.PowerLawKernel(0.1, 0.7, 0.4, 0.01)
    approx = hm.approximate_power_law(target, 16)
    assert approx.at_zero() == pytest.approx(target.at_zero(), abs=1e-8)
    assert approx.l1_norm() == pytest.approx(target.l1_norm(), abs=1e-8)


def test_hamiltonian():
    spread, value = hm.hamiltonian_max(0.0, 1.0, 20.0)
    assert spread == pytest.approx(0.05)
    assert value == pytest.approx(0.05 * math.exp(-1.0))


def test_solve_small_grid():
    g = hm.GridSpec()
    g.kernel = hm.ExpSumKernel([0.9], [1.0])
    g.i_min, g.i_max = -4, 4
    g.c_max = [3.6]
    g.m_c = [5]
    sol = hm.solve(g, threads=1)
    s = hm.MarketState(0, [0.0], [0.0])
    assert sol.value(1.0, s) == 0.0
    assert math.isfinite(sol.value(0.0, s))
    ask, bid = sol.spreads(0.0, s)
    assert ask == pytest.approx(bid)
    assert sol.value(0.0, hm.MarketState(-4, [0.0], [0.0])) < sol.value(0.0, s)


def test_simulate_is_seeded():
    k = hm.ExpSumKernel([0.9], [1.0])
    s = hm.MarketState(0, [0.0], [0.0])
    a = hm.simulate_constant(0.1, k, 20.0, 0.0, 0.0, 100.0, 3, s)
    b = hm.simulate_constant(0.1, k, 20.0, 0.0, 0.0, 100.0, 3, s)
    assert a == b
    assert all(side in ("ask", "bid") for _, side, _ in a)


def test_run_stage_writes_files(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kernel": {"target": {"type": "expsum", "weights": [0.9], "rates": [1.0]}}}))
    hm.run_stage("kernel-approx", cfg, tmp_path / "out", 1)
    assert (tmp_path / "out" / "approx_report.csv").read_text().startswith("n,sup_err,l1_err")
    with pytest.raises(ValueError):
        hm.run_stage("nope", cfg, tmp_path / "out")


def test_config_error_maps_to_value_error(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"kernel": {"target": {"type": "powerlaw", "lam": 0.1, "alpha": 0.7,
                                                     "beta": 1.4, "eps": 0.01}}}))
    with pytest.raises(ValueError):
        hm.run_stage("kernel-approx", cfg, tmp_path / "out")
