import math

import numpy as np
import pytest

from qetprep.circuits import Circuit, Gate, build_qet, build_usin
from qetprep.errors import WidthError
from qetprep.qsp import solve_phases
from qetprep.simulator import (MAX_WIDTH, StateVector, extract_block_diagonal,
                               max_width_from_env, run, run_batch, state_metrics, unitary)


def test_empty_circuit_leaves_state():
    s = StateVector(np.array([0.6, 0.8j]), 1)
    out = run(Circuit(1), s)
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)


def test_x_and_hadamards():
    assert run(Circuit(1, (Gate("X", (0,)),))).amplitudes[1] == 1.0
    hh = Circuit(2, (Gate("H", (0,)), Gate("H", (1,))))
    np.testing.assert_allclose(run(hh).amplitudes, np.full(4, 0.5), atol=1e-15)


def test_qubit_zero_is_most_significant():
    out = run(Circuit(3, (Gate("X", (0,)),)))
    assert out.amplitudes[4] == 1.0


def test_anti_controls_and_mcz():
    c = Circuit(2, (Gate("X", (1,), (0,), (0,)),))
    assert run(c).amplitudes[1] == 1.0
    mcz = Circuit(2, (Gate("H", (0,)), Gate("MCZ", (0, 1), ctrl_state=(1, 0))))
    np.testing.assert_allclose(run(mcz).amplitudes, [1 / math.sqrt(2), 0, -1 / math.sqrt(2), 0])


def test_comparator_is_permutation():
    gates = (Gate("H", (0,)), Gate("H", (1,)), Gate("COMPARATOR", (2,), (0, 1), threshold=1))
    out = run(Circuit(3, gates)).amplitudes.reshape(4, 2)
    np.testing.assert_allclose(np.abs(out[:, 1]) ** 2, [0, 0, 0.25, 0.25])


def test_norm_preserved_on_random_state():
    rng = np.random.default_rng(0)
    ps = solve_phases([0.0, 0.5, 0.0, 0.2])
    circ = build_qet(build_usin(5), ps)
    v = rng.normal(size=2**circ.width) + 1j * rng.normal(size=2**circ.width)
    out = run(circ, StateVector(v / np.linalg.norm(v), circ.width))
    assert out.norm == pytest.approx(1.0, abs=1e-12)


def test_batch_equals_single_runs():
    circ = build_qet(build_usin(2), solve_phases([0.0, 0.5, 0.0, 0.2]))
    U = unitary(circ)
    for k in (0, 5, 13):
        col = run(circ, StateVector.basis(circ.width, k)).amplitudes
        np.testing.assert_allclose(U[:, k], col, atol=1e-15)
    cols = np.eye(2**circ.width)[:, :3]
    np.testing.assert_allclose(run_batch(circ, cols), U[:, :3], atol=1e-15)


def test_block_diagonal_fast_path_equals_columns():
    circ = build_qet(build_usin(3), solve_phases([0.0, 0.5, 0.0, 0.2]))
    fast = extract_block_diagonal(circ, 3)
    U = unitary(circ)
    m = circ.width - 3
    idx = np.arange(8) * 2**m
    np.testing.assert_allclose(fast, U[idx, idx], atol=1e-14)


def test_block_diagonal_general_path():
    # A Hadamard on the register forces the column-by-column path.
    circ = Circuit(2, (Gate("H", (0,)),), n=1)
    np.testing.assert_allclose(extract_block_diagonal(circ, 1), [1 / math.sqrt(2), -1 / math.sqrt(2)])
    np.testing.assert_allclose(extract_block_diagonal(Circuit(3, n=2), 2), np.ones(4))


def test_usin_block_diagonal_n3():
    np.testing.assert_allclose(extract_block_diagonal(build_usin(3), 3, 1),
                               np.sin(np.arange(8) / 8), atol=1e-14)


def test_width_guards():
    with pytest.raises(WidthError):
        run(Circuit(MAX_WIDTH + 1))
    with pytest.raises(WidthError):
        unitary(Circuit(13))
    with pytest.raises(ValueError):
        run(Circuit(2), StateVector.zero(3))
    with pytest.raises(ValueError):
        extract_block_diagonal(Circuit(3), 1, 1)


def test_width_override_from_environment(monkeypatch):
    monkeypatch.delenv("QETPREP_MAX_WIDTH", raising=False)
    assert max_width_from_env(14) == 14
    monkeypatch.setenv("QETPREP_MAX_WIDTH", "5")
    assert max_width_from_env(14) == 5


def test_state_metrics():
    a = np.array([1.0, 1.0]) / math.sqrt(2)
    m = state_metrics(a, a)
    assert m["fidelity"] == pytest.approx(1.0) and m["trace_distance"] < 1e-15
    m = state_metrics(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert m["fidelity"] == 0.0 and m["trace_distance"] == pytest.approx(1.0)
    # Unnormalised input and a global phase do not matter.
    m = state_metrics(3j * a, a)
    assert m["trace_distance"] < 1e-15


def test_trace_distance_small_angle_is_accurate():
    eps = 1e-9
    a = np.array([1.0, 0.0])
    b = np.array([math.cos(eps), math.sin(eps)])
    assert state_metrics(b, a)["trace_distance"] == pytest.approx(eps, rel=1e-6)
