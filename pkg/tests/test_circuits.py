import json
import math
from collections import Counter

import numpy as np
import pytest

from qetprep.approx import PolyApprox
from qetprep.circuits import (Circuit, Gate, build_amplified, build_domain_extension,
                              build_phase_encoding, build_piecewise_flagged, build_qet,
                              build_usin, comparison_toffolis, concat, signal_values)
from qetprep.errors import PreconditionError
from qetprep.qsp import solve_mixed, solve_phases
from qetprep.simulator import extract_block_diagonal, run, unitary


def block(circ):
    return extract_block_diagonal(circ, circ.n)


def test_usin_examples():
    U = build_usin(2)
    diag = block(U)
    assert diag[0] == pytest.approx(0.0, abs=1e-15)
    assert diag[3].real == pytest.approx(0.6816388, abs=1e-7)
    np.testing.assert_allclose(diag, np.sin(np.arange(4) / 4), atol=1e-14)


def test_usin_is_diagonal_on_register():
    U = unitary(build_usin(3))
    M = U.reshape(8, 2, 8, 2)[:, 0, :, 0]
    np.testing.assert_allclose(M - np.diag(np.diag(M)), 0.0, atol=1e-15)


def test_usin_symmetric_values():
    np.testing.assert_allclose(block(build_usin(3, symmetric=True)),
                               signal_values(3, True), atol=1e-14)
    assert signal_values(3, True)[7] == pytest.approx(math.sin(-2 / 8))


def test_usin_inverse_and_range():
    U = build_usin(3)
    V = unitary(concat(U, U.inverse()))
    np.testing.assert_allclose(V, np.eye(16), atol=1e-13)
    with pytest.raises(PreconditionError):
        build_usin(0)
    with pytest.raises(PreconditionError):
        build_usin(17)


def test_qet_identity_polynomial_gives_sine():
    ps = solve_phases([0.0, 1.0 - 1e-9])
    circ = build_qet(build_usin(3), ps)
    np.testing.assert_allclose(block(circ), (1 - 1e-9) * np.sin(np.arange(8) / 8), atol=1e-12)
    assert circ.ancilla_count == 2


def test_qet_square_polynomial():
    # y^2 = (T0 + T2) / 2
    ps = solve_phases([0.5, 0.0, 0.5])
    circ = build_qet(build_usin(2), ps)
    np.testing.assert_allclose(block(circ), np.sin(np.arange(4) / 4) ** 2, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_qet_circuit_is_unitary(n):
    ps = solve_phases([0.0, 0.4, 0.0, 0.3])
    U = unitary(build_qet(build_usin(n), ps))
    np.testing.assert_allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-10)


def test_qet_census_definite_parity():
    d = 5
    ps = solve_phases(np.array([0.0, 0.3, 0.0, 0.2, 0.0, 0.1]))
    n = 4
    circ = build_qet(build_usin(n), ps)
    census = circ.census()
    # ceil(d/2) forward and floor(d/2) inverse sine encodings, each n CRY and one X.
    assert census["CRY"] == d * n
    assert census["CNOT"] == 2 * d
    assert census["RZ"] == d
    assert census["H"] == 2
    assert circ.tag_census()["usin"] == d * (n + 1)


def test_qet_mixed_parity_is_halved():
    P = PolyApprox(np.array([0.2, 0.3, -0.1, 0.2]), "mixed")
    pair = solve_mixed(P)
    circ = build_qet(build_usin(3), pair)
    assert circ.subnormalization == 0.5
    assert circ.ancilla_count == 3
    np.testing.assert_allclose(block(circ), 0.5 * P(np.sin(np.arange(8) / 8)), atol=1e-10)
    assert circ.census()["H"] == 4
    U = unitary(circ)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-10)


def test_qet_rejects_bad_pairs():
    e = solve_phases([0.5, 0.0, 0.3])
    with pytest.raises(PreconditionError):
        build_qet(build_usin(2), (e, e))


def test_phase_encoding():
    n, t = 3, 1.0
    U = unitary(build_phase_encoding(n, t))
    D = np.diag(U)
    xs = np.arange(8)
    # Control is the last qubit: index = 2x + c.
    np.testing.assert_allclose(D[2 * xs], 1.0, atol=1e-14)
    np.testing.assert_allclose(D[2 * xs + 1], np.exp(1j * t * xs / 8), atol=1e-14)
    assert D[2 * 5 + 1] == pytest.approx(np.exp(1j * 5 / 8))
    np.testing.assert_allclose(U - np.diag(D), 0.0, atol=1e-15)
    np.testing.assert_allclose(unitary(build_phase_encoding(n, 0.0)), np.eye(16), atol=1e-15)


def test_phase_encoding_custom_domain():
    D = np.diag(unitary(build_phase_encoding(2, 0.7, domain=(-1.0, 2.0))))
    xbar = -1.0 + 3.0 * np.arange(4) / 4
    np.testing.assert_allclose(D[2 * np.arange(4) + 1], np.exp(0.7j * xbar), atol=1e-14)


def test_piecewise_same_phases_matches_unflagged():
    ps = solve_phases([0.0, 0.5, 0.0, 0.2])
    n = 3
    flagged = build_piecewise_flagged(n, [3], [ps, ps])
    plain = build_qet(build_usin(n), ps)
    np.testing.assert_allclose(block(flagged), block(plain), atol=1e-12)


def test_piecewise_two_segments():
    n = 4
    scale = 0.45
    lin = PolyApprox(np.array([0.0, scale]), "mixed")
    rev = PolyApprox(np.array([scale, -scale]), "mixed")
    circ = build_piecewise_flagged(n, [7], [solve_mixed(lin), solve_mixed(rev)])
    y = np.sin(np.arange(16) / 16)
    expected = 0.5 * scale * np.where(np.arange(16) > 7, 1 - y, y)
    np.testing.assert_allclose(block(circ), expected, atol=1e-8)


def test_piecewise_ledger_and_validation():
    ps = solve_phases([0.0, 0.5])
    circ = build_piecewise_flagged(3, [2, 5], [ps, ps, ps])
    assert circ.ledger["comparison_toffolis"] == comparison_toffolis(2, 3)
    assert comparison_toffolis(2, 8) == 32
    with pytest.raises(PreconditionError):
        build_piecewise_flagged(3, [5, 2], [ps, ps, ps])
    with pytest.raises(PreconditionError):
        build_piecewise_flagged(3, [2], [ps])


def test_domain_extension_parameters():
    ext = build_domain_extension(2)
    assert ext.alpha == pytest.approx(7 / 3)
    assert ext.shift == pytest.approx(4 / 3)
    assert build_domain_extension(3).alpha == pytest.approx(15 / 7)
    np.testing.assert_allclose(ext.intermediate_state(), [0.5, 0.5, 0, 0, 0, 0, 0.5, 0.5])
    np.testing.assert_array_equal(ext.relabel(ext.embed(np.arange(4))), np.arange(4))


def test_amplified_zero_rounds_is_prep():
    ps = solve_phases([0.0, 0.5])
    prep = build_qet(build_usin(2), ps)
    amp = build_amplified(prep, 0, 0.0)
    assert amp.width == prep.width + 1
    assert amp.census()["RY"] == 1


@pytest.mark.parametrize("mixed", [False, True])
def test_amplified_census_per_round(mixed):
    n, k = 3, 2
    if mixed:
        phases = solve_mixed(PolyApprox(np.array([0.2, 0.3]), "mixed"))
    else:
        phases = solve_phases([0.0, 0.5])
    prep = build_qet(build_usin(n), phases)
    anc = prep.ancilla_count + 1
    assert anc == (4 if mixed else 3)
    base = build_amplified(prep, 0, 0.3).census()
    amp = build_amplified(prep, k, 0.3).census()
    per_round = Counter({key: (amp[key] - base.get(key, 0)) // k for key in amp})
    assert per_round[f"MCZ{anc}"] == 1
    assert per_round[f"MCZ{n + anc}"] == 1
    assert per_round["RY"] == 2
    # n register Hadamards on each side plus the QET Hadamards inside U and U^dagger.
    assert per_round["H"] == 2 * n + 2 * prep.census()["H"]
    assert per_round["CRY"] == 2 * prep.census()["CRY"]


def test_amplified_reaches_unit_amplitude():
    # Constant polynomial 0.5 on every register value: a = 0.5 needs one round and phi = 0.
    ps = solve_phases([0.5])
    prep = build_qet(build_usin(2), ps)
    amp = build_amplified(prep, 1, 0.0)
    psi = run(amp).project(amp.n)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("RY", (0,), param=float("nan"))
    with pytest.raises(ValueError):
        Gate("FOO", (0,))
    with pytest.raises(ValueError):
        Gate("X", (0,), (0,))
    with pytest.raises(ValueError):
        Circuit(2, (Gate("X", (2,)),))


def test_json_and_qasm_export():
    ps = solve_phases([0.0, 0.4, 0.0, 0.3])
    circ = build_piecewise_flagged(2, [1], [ps, ps])
    again = Circuit.from_json(json.loads(json.dumps(circ.to_json())))
    assert again == circ
    text = circ.to_qasm()
    lines = text.strip().splitlines()
    assert lines[0] == "OPENQASM 3.0;"
    assert lines[1] == f"qubit[{circ.width}] q;"
    assert len(lines) == 2 + len(circ)
    assert any(line.startswith("cmp_gt(1)") for line in lines)
    assert any("negctrl @ x" in line for line in lines)
