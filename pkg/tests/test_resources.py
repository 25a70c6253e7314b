import numpy as np
import pytest

from qetprep.circuits import build_amplified, build_qet, build_usin
from qetprep.qsp import PhaseSet
from qetprep.resources import (BLACK_BOX_ANCILLAS, GROVER_RUDOLPH_ANCILLAS, ResourceReport,
                               census_cost, comparison_table, count_fourier_pipeline,
                               count_qet_pipeline, format_table)


def dummy_phases(d):
    parity = "odd" if d % 2 else "even"
    return PhaseSet(np.full(d + 1, 0.1), "wx", parity, d)


def test_tanh_n32_golden_numbers():
    r = count_qet_pipeline(32, 33, 1, True)
    assert r.rotations == 6438
    assert r.toffolis == 545
    assert r.t_count == 30 * 6438
    assert r.toffoli_equivalent == 97115
    assert r.ancilla_qubits == 3


def test_degenerate_counts():
    r = count_qet_pipeline(8, 0, 0)
    assert (r.rotations, r.toffolis) == (1, 0)
    f = count_fourier_pipeline(8, 0, 0)
    assert f.toffoli_equivalent == 0


def test_rotations_scale_with_n():
    small = count_qet_pipeline(16, 33, 1).rotations
    large = count_qet_pipeline(32, 33, 1).rotations
    assert large / small == pytest.approx(2.0, rel=0.02)


def test_mixed_parity_uses_four_ancillas():
    assert count_qet_pipeline(8, 10, 1, False).ancilla_qubits == 4


def test_fourier_golden_number():
    f = count_fourier_pipeline(32, 120, 1)
    assert f.toffoli_equivalent == 60 * 120 * 34 * 3 + 16 * 33
    assert f.toffoli_equivalent == 734928
    assert f.breakdown["rotations_per_use_exact"] == 4 * (120 * 34 + 1)


def test_fourier_linear_in_degree():
    a = count_fourier_pipeline(10, 20, 1).toffoli_equivalent
    b = count_fourier_pipeline(10, 40, 1).toffoli_equivalent
    c = count_fourier_pipeline(10, 60, 1).toffoli_equivalent
    assert b - a == c - b


def test_negative_inputs_rejected():
    with pytest.raises(ValueError):
        count_qet_pipeline(-1, 3, 1)
    with pytest.raises(ValueError):
        count_fourier_pipeline(3, 3, -1)


def test_report_derived_fields():
    r = ResourceReport(3, 5, 3)
    assert r.t_count == 90 and r.toffoli_equivalent == 50
    assert r.to_json()["toffoli_equivalent"] == 50


@pytest.mark.parametrize("n", [1, 4, 10])
@pytest.mark.parametrize("d", [1, 2, 7, 40])
@pytest.mark.parametrize("R", [0, 1, 3])
def test_census_matches_formula_definite(n, d, R):
    circ = build_amplified(build_qet(build_usin(n), dummy_phases(d)), R, 0.3)
    formula = count_qet_pipeline(n, d, R, True)
    assert census_cost(circ) == {"rotations": formula.rotations, "toffolis": formula.toffolis}


@pytest.mark.parametrize("n", [1, 4, 10])
@pytest.mark.parametrize("d", [1, 2, 7, 40])
@pytest.mark.parametrize("R", [0, 1, 3])
def test_census_matches_formula_mixed(n, d, R):
    pair = (dummy_phases(d if d % 2 == 0 else d - 1), dummy_phases(d if d % 2 else d - 1))
    circ = build_amplified(build_qet(build_usin(n), pair), R, 0.3)
    formula = count_qet_pipeline(n, d, R, False)
    assert census_cost(circ) == {"rotations": formula.rotations, "toffolis": formula.toffolis}


def test_comparison_table_tanh():
    rows = {r["method"]: r for r in comparison_table("tanh-n32")}
    assert rows["qet"]["ancillas"] == 3
    assert rows["qet"]["display"] == "9.7e4"
    assert rows["black-box"]["toffolis"] == 3 * 23095
    assert rows["black-box"]["display"] == "6.9e4"
    assert rows["black-box"]["ancillas"] == BLACK_BOX_ANCILLAS == 216
    assert rows["grover-rudolph"]["toffolis"] == 8 * 23095 + 2 * 7784
    assert rows["grover-rudolph"]["display"] == "> 2.0e5"
    assert rows["grover-rudolph"]["ancillas"] == GROVER_RUDOLPH_ANCILLAS == 959


def test_comparison_table_cycloid_and_unknown():
    (row,) = comparison_table("cycloid-n32")
    assert row["display"] == "7.35e5"
    with pytest.raises(ValueError):
        comparison_table("sigmoid-n8")


def test_format_table_alignment():
    text = format_table(comparison_table("tanh-n32"))
    lines = text.splitlines()
    assert lines[0].startswith("method")
    assert set(lines[1]) <= {"-", " "}
    assert len(lines) == 5
