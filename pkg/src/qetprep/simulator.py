"""Dense statevector simulation of :class:`~qetprep.circuits.Circuit` objects.

Amplitudes are stored as a complex array viewed with one axis per qubit
(qubit 0 first, i.e. most significant).  Controlled gates act on basic-index
views, so nothing is copied beyond the two target slices.  An optional
trailing batch axis lets many input columns be propagated at once.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuits import DIAGONAL, Circuit, Gate
from .errors import WidthError

MAX_WIDTH = 22
NORM_TOL = 1e-10


@dataclass
class StateVector:
    """A pure state on ``width`` qubits (flat amplitudes, qubit 0 most significant)."""

    amplitudes: np.ndarray
    width: int

    def __post_init__(self):
        if self.width > MAX_WIDTH:
            raise WidthError(f"width {self.width} exceeds the {MAX_WIDTH}-qubit guard")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.size != 2**self.width:
            raise ValueError("amplitude count does not match width")

    @classmethod
    def zero(cls, width: int) -> "StateVector":
        amp = np.zeros(2**width, dtype=complex)
        amp[0] = 1.0
        return cls(amp, width)

    @classmethod
    def basis(cls, width: int, index: int) -> "StateVector":
        amp = np.zeros(2**width, dtype=complex)
        amp[index] = 1.0
        return cls(amp, width)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def project(self, n: int) -> np.ndarray:
        """Register amplitudes with every ancilla in ``|0>`` (unnormalised)."""
        m = self.width - n
        return self.amplitudes.reshape(2**n, 2**m)[:, 0].copy()

    def to_json(self) -> list:
        return [[float(a.real), float(a.imag)] for a in self.amplitudes]


# Gate application -------------------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _matrix(g: Gate) -> np.ndarray:
    if g.kind == "H":
        return _H
    if g.kind == "RY":
        c, s = math.cos(g.param / 2), math.sin(g.param / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    raise ValueError(g.kind)


def _diag(g: Gate):
    if g.kind == "Z":
        return 1.0, -1.0
    if g.kind == "RZ":
        return np.exp(-0.5j * g.param), np.exp(0.5j * g.param)
    if g.kind == "P":
        return 1.0, np.exp(1j * g.param)
    raise ValueError(g.kind)


@lru_cache(maxsize=64)
def _comparator_perm(width: int, register: tuple, flag: int, threshold: int) -> np.ndarray:
    idx = np.arange(2**width)
    value = np.zeros_like(idx)
    for q in register:
        value = 2 * value + ((idx >> (width - 1 - q)) & 1)
    return np.where(value > threshold, idx ^ (1 << (width - 1 - flag)), idx)


def apply_gate(psi: np.ndarray, g: Gate, width: int) -> np.ndarray:
    """Applies ``g`` in place to ``psi`` of shape ``(2,) * width (+ (B,))``."""
    nd = psi.ndim
    if g.kind == "MCZ":
        idx = [slice(None)] * nd
        for q, v in zip(g.targets, g.ctrl_state):
            idx[q] = v
        psi[tuple(idx)] *= -1.0
        return psi
    if g.kind == "COMPARATOR":
        perm = _comparator_perm(width, g.controls, g.targets[0], int(g.threshold))
        flat = psi.reshape(2**width, -1)
        flat[...] = flat[perm]
        return psi
    base = [slice(None)] * nd
    for q, v in zip(g.controls, g.ctrl_state):
        base[q] = v
    t = g.targets[0]
    i0 = list(base)
    i0[t] = 0
    i1 = list(base)
    i1[t] = 1
    i0, i1 = tuple(i0), tuple(i1)
    if g.kind == "X":
        tmp = psi[i0].copy()
        psi[i0] = psi[i1]
        psi[i1] = tmp
    elif g.kind in DIAGONAL:
        d0, d1 = _diag(g)
        if d0 != 1.0:
            psi[i0] *= d0
        psi[i1] *= d1
    else:
        M = _matrix(g)
        v0 = psi[i0].copy()
        v1 = psi[i1].copy()
        psi[i0] = M[0, 0] * v0 + M[0, 1] * v1
        psi[i1] = M[1, 0] * v0 + M[1, 1] * v1
    return psi


def _evolve(circuit: Circuit, data: np.ndarray) -> np.ndarray:
    w = circuit.width
    batch = data.ndim == 2
    psi = data.reshape((2,) * w + ((data.shape[1],) if batch else ()))
    for g in circuit.gates:
        apply_gate(psi, g, w)
    return psi.reshape(data.shape)


def _check_width(width: int):
    if width > MAX_WIDTH:
        raise WidthError(f"width {width} exceeds the {MAX_WIDTH}-qubit guard")


def run(circuit: Circuit, initial: StateVector = None, check_norm: bool = True) -> StateVector:
    """Applies ``circuit`` gate by gate to ``initial`` (``|0...0>`` by default).

    Raises:
        WidthError: Width above the memory guard.
        ValueError: Initial state of a different width, or norm drift
            beyond ``1e-10``.
    """
    _check_width(circuit.width)
    if initial is None:
        initial = StateVector.zero(circuit.width)
    if initial.width != circuit.width:
        raise ValueError(f"state width {initial.width} != circuit width {circuit.width}")
    before = initial.norm
    out = _evolve(circuit, initial.amplitudes.copy())
    state = StateVector(out, circuit.width)
    if check_norm and abs(state.norm - before) > NORM_TOL:
        raise ValueError(f"norm drifted by {abs(state.norm - before):.2e}")
    return state


def run_batch(circuit: Circuit, columns: np.ndarray) -> np.ndarray:
    """Propagates the columns of a ``(2^width, B)`` array."""
    _check_width(circuit.width)
    data = np.array(columns, dtype=complex, copy=True)
    return _evolve(circuit, data)


def unitary(circuit: Circuit) -> np.ndarray:
    """Dense matrix of a small circuit (width at most 12)."""
    if circuit.width > 12:
        raise WidthError("dense unitary limited to 12 qubits")
    return run_batch(circuit, np.eye(2**circuit.width, dtype=complex))


def _register_diagonal(circuit: Circuit, n: int) -> bool:
    """True when no gate can move amplitude between register basis states."""
    for g in circuit.gates:
        if g.kind in ("MCZ", "COMPARATOR") or g.kind in DIAGONAL:
            continue
        if any(q < n for q in g.targets):
            return False
    return True


def extract_block_diagonal(circuit: Circuit, n: int, m: int = None) -> np.ndarray:
    """``<x, 0^m| U |x, 0^m>`` for every register value ``x``.

    When no gate acts non-diagonally on the register the circuit is run once
    on a uniform register superposition; otherwise all ``2^n`` columns are
    propagated together.
    """
    if m is None:
        m = circuit.width - n
    if circuit.width != n + m:
        raise ValueError("circuit width must equal n + m")
    _check_width(circuit.width)
    N, M = 2**n, 2**m
    if _register_diagonal(circuit, n):
        amp = np.zeros((N, M), dtype=complex)
        amp[:, 0] = 1.0
        out = _evolve(circuit, amp.reshape(-1)).reshape(N, M)
        return out[:, 0].copy()
    cols = np.zeros((N * M, N), dtype=complex)
    cols[np.arange(N) * M, np.arange(N)] = 1.0
    out = _evolve(circuit, cols)
    return out[np.arange(N) * M, np.arange(N)].copy()


def state_metrics(psi, target) -> dict:
    """Fidelity and pure-state trace distance between ``psi`` and ``target``.

    Both inputs are normalised first (``psi`` may be an unnormalised
    post-selected vector or a :class:`StateVector`).  The distance is computed
    as ``|| b - <a|b> a ||``, which equals ``sqrt(1 - F)`` without the
    cancellation of that formula near ``F = 1``.
    """
    a = np.asarray(target.amplitudes if isinstance(target, StateVector) else target,
                   dtype=complex).reshape(-1)
    b = np.asarray(psi.amplitudes if isinstance(psi, StateVector) else psi,
                   dtype=complex).reshape(-1)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    ov = np.vdot(a, b)
    fid = float(min(1.0, abs(ov) ** 2))
    dist = float(min(1.0, np.linalg.norm(b - ov * a)))
    return {"fidelity": fid, "trace_distance": dist}


def max_width_from_env(default: int) -> int:
    """Width guard for command-line simulation, overridable by ``QETPREP_MAX_WIDTH``."""
    value = os.environ.get("QETPREP_MAX_WIDTH")
    return int(value) if value else default
