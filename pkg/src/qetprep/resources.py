"""Fault-tolerant cost arithmetic for the state-preparation pipelines."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .circuits import Circuit

T_PER_ROTATION = 30
T_PER_TOFFOLI = 2

# Published costs of competing constructions for the 32-qubit tanh example.
# They are inputs to the comparison table and are not derived here.
TANH_ORACLE_TOFFOLIS = 23095     # one reversible evaluation of tanh
ARCSIN_ORACLE_TOFFOLIS = 7784    # one reversible arcsin evaluation
TANH_ORACLE_ANCILLAS = 206       # work qubits of the tanh evaluation
ARCSIN_ORACLE_ANCILLAS = 135     # extra work qubits of the arcsin evaluation
BLACK_BOX_ORACLE_CALLS = 3
BLACK_BOX_EXTRA_ANCILLAS = 2 * 5 - 1 + 1   # 2 log2(n) - 1 work qubits plus the AA flag
BLACK_BOX_ANCILLAS = TANH_ORACLE_ANCILLAS + BLACK_BOX_EXTRA_ANCILLAS           # 216
GROVER_RUDOLPH_TANH_CALLS = 8      # four evaluations and their uncomputations
GROVER_RUDOLPH_ARCSIN_CALLS = 2
GROVER_RUDOLPH_ANCILLAS = 4 * TANH_ORACLE_ANCILLAS + ARCSIN_ORACLE_ANCILLAS    # 959


@dataclass
class ResourceReport:
    """Rotation and Toffoli ledger with the derived T and Toffoli-equivalent counts."""

    rotations: int
    toffolis: int
    ancilla_qubits: int
    breakdown: dict = field(default_factory=dict)
    t_count: int = 0
    toffoli_equivalent: int = 0

    def __post_init__(self):
        self.t_count = T_PER_ROTATION * self.rotations
        self.toffoli_equivalent = math.ceil(self.t_count / T_PER_TOFFOLI) + self.toffolis

    def to_json(self) -> dict:
        return asdict(self)


def _check_nonneg(**kw):
    for k, v in kw.items():
        if v < 0:
            raise ValueError(f"{k} must be >= 0")


def count_qet_pipeline(n: int, d: int, R: int, definite_parity: bool = True) -> ResourceReport:
    """Cost of ``R`` exact amplification rounds around the QET block encoding.

    Each of the ``2R + 1`` uses of the block costs ``d`` sine encodings
    (``n`` singly controlled ``RY``, booked as two rotations each) plus one
    ``RZ`` per step, and the amplification ``RY`` adds one more rotation per
    use.  Every round has two multi-controlled ``Z`` reflections.

    A mixed-parity polynomial needs an extra selector ancilla: two ``RZ`` per
    step, one doubly controlled sine encoding per use (``2n`` Toffolis) and
    one more control on each reflection.
    """
    _check_nonneg(n=n, d=d, R=R)
    uses = 2 * R + 1
    if definite_parity:
        per_step = 2 * n + 1
        refl_good = 1                 # Z over a1, a2, a4
        refl_init = 16 * (n + 2)      # Z over the register and three ancillas
        select = 0
        anc = 3
    else:
        per_step = 2 * n + 2
        refl_good = 48                # Z over a1, a2, a3, a4
        refl_init = 16 * (n + 3)
        select = 2 * n * uses
        anc = 4
    rotations = uses * (1 + d * per_step)
    toffolis = R * (refl_good + refl_init) + select
    breakdown = {
        "block_uses": uses,
        "rotations_per_step": per_step,
        "aa_rotations": uses,
        "reflection_toffolis": R * (refl_good + refl_init),
        "selector_toffolis": select,
    }
    return ResourceReport(rotations, toffolis, anc, breakdown)


def count_fourier_pipeline(n: int, d: int, R: int) -> ResourceReport:
    """Cost of a ``d``-term cosine series prepared through phase encodings.

    The ``rotations`` field holds ``(2R + 1) 4 d (n + 2)`` so that the
    Toffoli-equivalent reproduces ``60 d (n+2)(2R+1) + 16 (n+1) R``.  The
    breakdown also records the per-use count ``4 (d (n + 2) + 1)``.
    """
    _check_nonneg(n=n, d=d, R=R)
    uses = 2 * R + 1
    rotations = uses * 4 * d * (n + 2)
    toffolis = 16 * (n + 1) * R
    breakdown = {
        "block_uses": uses,
        "rotations_per_use_exact": 4 * (d * (n + 2) + 1),
        "reflection_toffolis": toffolis,
    }
    return ResourceReport(rotations, toffolis, 4, breakdown)


def census_cost(circuit: Circuit) -> dict:
    """Counts rotations and Toffolis gate by gate.

    Rules: an uncontrolled rotation is 1 rotation, a singly controlled one is
    2, and one with ``c >= 2`` controls is 2 rotations plus ``2(c - 1)``
    Toffolis for the control ladder.  A multi-controlled ``Z`` on ``q`` qubits
    (``k = q - 1`` controls) costs nothing for ``k <= 1``, one Toffoli for
    ``k = 2`` and ``16 k`` Toffolis beyond.  A comparator on ``n`` bits is
    booked at ``n`` Toffolis.  Clifford gates are free.
    """
    rot = tof = 0
    for g in circuit.gates:
        c = len(g.controls)
        if g.kind in ("RY", "RZ", "P"):
            if c == 0:
                rot += 1
            elif c == 1:
                rot += 2
            else:
                rot += 2
                tof += 2 * (c - 1)
        elif g.kind == "MCZ":
            k = len(g.targets) - 1
            tof += 0 if k <= 1 else (1 if k == 2 else 16 * k)
        elif g.kind == "COMPARATOR":
            tof += len(g.controls)
        elif g.kind == "X" and c >= 2:
            tof += 1 if c == 2 else 2 * (c - 1)
    return {"rotations": rot, "toffolis": tof}


SCENARIOS = ("tanh-n32", "cycloid-n32")


def comparison_table(scenario: str = "tanh-n32") -> list:
    """Rows ``{method, ancillas, toffolis, display}`` for a built-in scenario.

    Raises:
        ValueError: Unknown scenario.
    """
    if scenario == "tanh-n32":
        qet = count_qet_pipeline(32, 33, 1, True)
        bb = BLACK_BOX_ORACLE_CALLS * TANH_ORACLE_TOFFOLIS
        gr = (GROVER_RUDOLPH_TANH_CALLS * TANH_ORACLE_TOFFOLIS
              + GROVER_RUDOLPH_ARCSIN_CALLS * ARCSIN_ORACLE_TOFFOLIS)
        return [
            {"method": "black-box", "ancillas": BLACK_BOX_ANCILLAS, "toffolis": bb,
             "display": f"{bb / 1e4:.1f}e4"},
            {"method": "grover-rudolph", "ancillas": GROVER_RUDOLPH_ANCILLAS, "toffolis": gr,
             "display": f"> {math.floor(gr / 1e4) / 10:.1f}e5",
             "lower_bound": True},
            {"method": "qet", "ancillas": 3, "toffolis": qet.toffoli_equivalent,
             "display": f"{qet.toffoli_equivalent / 1e4:.1f}e4"},
        ]
    if scenario == "cycloid-n32":
        rep = count_fourier_pipeline(32, 120, 1)
        return [{"method": "fourier", "ancillas": rep.ancilla_qubits,
                 "toffolis": rep.toffoli_equivalent,
                 "display": f"{rep.toffoli_equivalent / 1e5:.2f}e5"}]
    raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")


def format_table(rows: list) -> str:
    """Aligned text rendering of :func:`comparison_table` rows."""
    header = ("method", "ancillas", "toffolis", "display")
    cells = [header] + [tuple(str(r[h]) for h in header) for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    lines = ["  ".join(c[i].ljust(widths[i]) for i in range(len(header))) for c in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
