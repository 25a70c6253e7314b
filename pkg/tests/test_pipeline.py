import math

import numpy as np
import pytest

from qetprep.approx import PolyApprox, choose_encoding, make_qsp_ready
from qetprep.errors import PreconditionError, WidthError
from qetprep.funclib import FunctionSpec
from qetprep.pipeline import (JobConfig, delta_budget, load_phases, load_poly, phases_report,
                              run_angles, run_approx, run_estimate, run_simulation,
                              run_tent_extension, target_values, tent)


def test_config_json_round_trip():
    cfg = JobConfig(FunctionSpec.gaussian(4.0), n=6, target_epsilon=1e-4, method="chebyshev")
    obj = cfg.to_json()
    obj["schema"] = "qetprep/1"
    again = JobConfig.from_json(obj)
    assert again == cfg


@pytest.mark.parametrize("bad", [{"target_epsilon": 0.0}, {"method": "pade"},
                                 {"aa_mode": "fixed-point"}, {"n": 0}])
def test_config_validation(bad):
    with pytest.raises(PreconditionError):
        JobConfig(FunctionSpec.tanh(), **bad)


def test_target_values_symmetric_order():
    spec = FunctionSpec.gaussian(2.0)
    enc = choose_encoding(spec)
    v = target_values(spec, enc, 2)
    # Register indices 0..3 encode s = 0, 1, -2, -1 on [-1, 1] with step 1/2.
    np.testing.assert_allclose(v, np.exp(-np.array([0.0, 0.25, 1.0, 0.25])))


def test_delta_budget():
    spec = FunctionSpec.tanh()
    d = delta_budget(spec, 1e-6)
    assert d == pytest.approx(1e-6 * 0.6411, rel=1e-3)


def test_identity_polynomial_gives_sine_state():
    P = make_qsp_ready(PolyApprox(np.array([0.0, 1.0]), "odd"))
    cfg = JobConfig(FunctionSpec.tanh(), n=4, degree=1)
    enc = choose_encoding(cfg.function)
    m = run_simulation(cfg, P, enc, trajectory=False)
    psi = np.array([complex(*v) for v in m["state"]])
    sine = np.sin(np.arange(16) / 16)
    assert abs(np.vdot(sine / np.linalg.norm(sine), psi / np.linalg.norm(psi))) == pytest.approx(
        1.0, abs=1e-12)
    assert m["final_amplitude"] != 0


def test_gaussian_simulation_bounds_ordered():
    cfg = JobConfig(FunctionSpec.gaussian(4.0), n=6, target_epsilon=1e-4)
    m = run_simulation(cfg)
    assert m["trace_distance"] <= m["practical_bound"] <= m["rigorous_bound"]
    assert m["trace_distance"] <= 1e-4
    assert m["good_probability"] == pytest.approx(1.0, abs=1e-9)
    probs = [t["good_probability"] for t in m["trajectory"]]
    assert len(probs) == m["plan"]["rounds"] + 1
    assert probs[-1] == pytest.approx(1.0, abs=1e-9)


def test_estimate_with_penalty_mode():
    cfg = JobConfig(FunctionSpec.tanh(), n=6, degree=33, aa_mode="estimate-with-penalty")
    m = run_simulation(cfg, trajectory=False)
    plan = m["plan"]
    assert plan["a_estimate"] == pytest.approx(m["success_amplitude"])
    assert m["good_probability"] >= (1 - plan["mismatch_penalty"]) ** 2 - 1e-12


def test_no_amplification_mode():
    cfg = JobConfig(FunctionSpec.tanh(), n=5, degree=33, aa_mode="none")
    m = run_simulation(cfg, trajectory=False)
    assert m["plan"]["rounds"] == 0
    assert m["good_probability"] == pytest.approx(m["success_amplitude"] ** 2, rel=1e-9)


def test_mixed_parity_pipeline():
    spec = FunctionSpec.gaussian(2.0, domain=(-0.3, 1.0))
    cfg = JobConfig(spec, n=5, method="chebyshev", target_epsilon=1e-3)
    m = run_simulation(cfg, trajectory=False)
    assert m["parity"] == "mixed" and m["ancillas"] == 4
    assert m["trace_distance"] <= 1e-3


def test_width_guard(monkeypatch):
    monkeypatch.setenv("QETPREP_MAX_WIDTH", "4")
    with pytest.raises(WidthError):
        run_simulation(JobConfig(FunctionSpec.tanh(), n=5, degree=5))


def test_fourier_mode_cannot_simulate():
    with pytest.raises(PreconditionError):
        run_simulation(JobConfig(FunctionSpec.cycloid(), method="fourier", degree=10))


def test_estimate_tanh_n32():
    cfg = JobConfig(FunctionSpec.tanh(), n=8, degree=33, estimate_n=32)
    est = run_estimate(cfg)
    assert est["rounds"] == 1
    assert est["resources"]["toffoli_equivalent"] == 97115
    assert len(est["comparison"]) == 3


def test_estimate_cycloid_fourier():
    cfg = JobConfig(FunctionSpec.cycloid(), method="fourier", degree=120, estimate_n=32,
                    target_epsilon=1e-3)
    est = run_estimate(cfg)
    assert est["rounds"] == 1
    assert est["resources"]["toffoli_equivalent"] == 734928


def test_poly_and_phase_serialisation():
    cfg = JobConfig(FunctionSpec.tanh(), n=4, degree=9)
    P, _, _ = run_approx(cfg)
    again = load_poly(P.to_json())
    np.testing.assert_array_equal(again.cheb_coeffs, P.cheb_coeffs)
    ps = run_angles(P)
    rep = phases_report(ps)
    np.testing.assert_array_equal(load_phases(rep).phases, ps.phases)


def test_tent_function():
    np.testing.assert_allclose(tent([0.0, 1 / 3, 1.0]), [0.0, 1 / 3, 0.0])


def test_tent_extension_n2():
    out = run_tent_extension(2)
    assert out["alpha"] == pytest.approx(7 / 3)
    np.testing.assert_allclose(out["intermediate"], [0.5, 0.5, 0, 0, 0, 0, 0.5, 0.5], atol=1e-14)
    assert out["trace_distance"] < 1e-8
    assert out["good_probability"] == pytest.approx(1.0, abs=1e-8)
    expected = tent(np.arange(4) / 3)
    np.testing.assert_allclose(out["expected"][:4], expected / np.linalg.norm(expected))
    assert math.isfinite(out["fit_error"]) and out["fit_error"] < 1e-8
