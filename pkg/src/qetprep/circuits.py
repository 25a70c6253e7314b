"""Gate-level circuits for the sine block encoding, QET and amplitude amplification.

Qubit layout: the system register occupies qubits ``0 .. n-1`` with qubit 0
the most significant bit; ancillas follow (``a1`` sine ancilla, ``a2`` QET
ancilla, ``a3`` parity-combination ancilla, comparator flags, ``a4``
amplification ancilla).  The basis index of a computational state is
therefore ``x * 2^m + ancilla_bits``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import PreconditionError
from .qsp import ACCEPT_RESIDUAL, PhaseSet, to_circuit_convention

GATE_KINDS = ("H", "X", "Z", "RY", "RZ", "P", "MCZ", "COMPARATOR")
SELF_INVERSE = ("H", "X", "Z", "MCZ", "COMPARATOR")
DIAGONAL = ("Z", "RZ", "P", "MCZ")


@dataclass(frozen=True)
class Gate:
    """One gate.

    ``MCZ`` applies a ``-1`` phase to the basis states whose bits on
    ``targets`` equal ``ctrl_state`` (all zeros gives an anti-controlled Z).
    ``COMPARATOR`` flips the flag qubit ``targets[0]`` when the register formed
    by ``controls`` (most significant first) holds a value ``> threshold``.
    For every other kind ``controls`` are ordinary controls whose required
    values are ``ctrl_state`` (default all ones).
    """

    kind: str
    targets: tuple
    controls: tuple = ()
    ctrl_state: tuple = ()
    param: Optional[float] = None
    threshold: Optional[int] = None
    tag: str = ""

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        state = tuple(int(v) for v in self.ctrl_state)
        if self.kind == "MCZ":
            if not state:
                state = (0,) * len(self.targets)
            if len(state) != len(self.targets):
                raise ValueError("MCZ polarity mask must match its qubits")
        elif self.kind != "COMPARATOR":
            if not state:
                state = (1,) * len(self.controls)
            if len(state) != len(self.controls):
                raise ValueError("control state must match the controls")
        object.__setattr__(self, "ctrl_state", state)
        if self.kind in ("RY", "RZ", "P"):
            if self.param is None or not math.isfinite(self.param):
                raise ValueError("rotation angle must be finite")
        if self.kind == "COMPARATOR" and self.threshold is None:
            raise ValueError("comparator needs a threshold")
        qubits = self.qubits
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit in {self}")

    @property
    def qubits(self) -> tuple:
        return self.targets + self.controls

    @property
    def label(self) -> str:
        """Census label such as ``H``, ``CNOT``, ``CRY``, ``CCRY`` or ``MCZ4``."""
        if self.kind == "MCZ":
            return f"MCZ{len(self.targets)}"
        if self.kind == "COMPARATOR":
            return "COMPARATOR"
        c = len(self.controls)
        if self.kind == "X" and c == 1:
            return "CNOT"
        if self.kind == "X" and c == 2:
            return "CCX"
        prefix = "" if c == 0 else ("C" * c if c <= 2 else f"C{c}")
        return prefix + self.kind

    def inverse(self) -> "Gate":
        if self.kind in SELF_INVERSE:
            return self
        return replace(self, param=-self.param)

    def with_control(self, qubit: int, value: int = 1) -> "Gate":
        if self.kind == "MCZ":
            return replace(self, targets=self.targets + (qubit,),
                           ctrl_state=self.ctrl_state + (value,))
        if self.kind == "COMPARATOR":
            raise PreconditionError("comparators cannot be controlled")
        return replace(self, controls=self.controls + (qubit,),
                       ctrl_state=self.ctrl_state + (value,))

    def to_json(self) -> dict:
        out = {"kind": self.kind, "targets": list(self.targets)}
        if self.controls:
            out["controls"] = list(self.controls)
        if self.ctrl_state:
            out["ctrl_state"] = list(self.ctrl_state)
        if self.param is not None:
            out["param"] = float(self.param)
        if self.threshold is not None:
            out["threshold"] = int(self.threshold)
        if self.tag:
            out["tag"] = self.tag
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Gate":
        return cls(obj["kind"], tuple(obj["targets"]), tuple(obj.get("controls", ())),
                   tuple(obj.get("ctrl_state", ())), obj.get("param"), obj.get("threshold"),
                   obj.get("tag", ""))


@dataclass(frozen=True)
class Circuit:
    """An immutable gate list on ``width`` qubits.

    Attributes:
        width: Total number of qubits.
        gates: Gates in time order.
        n: Size of the system register (qubits ``0 .. n-1``).
        ancillas: Named ancilla roles mapped to qubit indices.
        subnormalization: Factor ``s`` such that the block encodes ``s * P``.
        ledger: Symbolic costs not visible in the gate list (comparator
            Toffolis, work qubits).
    """

    width: int
    gates: tuple = ()
    n: int = 0
    ancillas: dict = field(default_factory=dict)
    subnormalization: float = 1.0
    ledger: dict = field(default_factory=dict)

    def __post_init__(self):
        gates = tuple(self.gates)
        for g in gates:
            if any(q < 0 or q >= self.width for q in g.qubits):
                raise ValueError(f"gate {g.label} acts outside width {self.width}")
        object.__setattr__(self, "gates", gates)

    @property
    def ancilla_count(self) -> int:
        return self.width - self.n

    def __len__(self):
        return len(self.gates)

    def inverse(self) -> "Circuit":
        return replace(self, gates=tuple(g.inverse() for g in reversed(self.gates)))

    def widened(self, width: int) -> "Circuit":
        if width < self.width:
            raise ValueError("cannot shrink a circuit")
        return replace(self, width=width)

    def controlled(self, qubit: int, value: int = 1) -> "Circuit":
        """Adds a control on ``qubit`` to every gate (Hadamards are not allowed)."""
        if any(g.kind == "H" for g in self.gates):
            raise PreconditionError("controlled circuits with Hadamards are not supported")
        width = max(self.width, qubit + 1)
        return replace(self, width=width,
                       gates=tuple(g.with_control(qubit, value) for g in self.gates))

    def census(self) -> Counter:
        return Counter(g.label for g in self.gates)

    def tag_census(self) -> Counter:
        return Counter(g.tag for g in self.gates)

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "n": self.n,
            "ancillas": dict(self.ancillas),
            "subnormalization": self.subnormalization,
            "ledger": dict(self.ledger),
            "gates": [g.to_json() for g in self.gates],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Circuit":
        return cls(int(obj["width"]), tuple(Gate.from_json(g) for g in obj["gates"]),
                   int(obj.get("n", 0)), dict(obj.get("ancillas", {})),
                   float(obj.get("subnormalization", 1.0)), dict(obj.get("ledger", {})))

    def to_qasm(self) -> str:
        """OpenQASM-style text, one gate per line.

        Grammar::

            OPENQASM 3.0;
            qubit[<width>] q;
            <gate>[(<angle>)] [ctrl q[i], ... ;] q[j], ...;

        Controls are written with ``ctrl @`` modifiers and anti-controls with
        ``negctrl @``; angles are radians.  Two primitive extensions appear:
        ``mcz(<bits>)`` flips the sign of the basis state whose listed qubits
        equal ``<bits>``, and ``cmp_gt(<t>) <register>, <flag>`` flips the flag
        when the register value exceeds ``t``.
        """
        lines = ["OPENQASM 3.0;", f"qubit[{self.width}] q;"]
        for g in self.gates:
            if g.kind == "MCZ":
                mask = "".join(str(v) for v in g.ctrl_state)
                qs = ", ".join(f"q[{q}]" for q in g.targets)
                lines.append(f"mcz({mask}) {qs};")
                continue
            if g.kind == "COMPARATOR":
                reg = ", ".join(f"q[{q}]" for q in g.controls)
                lines.append(f"cmp_gt({g.threshold}) {reg}, q[{g.targets[0]}];")
                continue
            mods = "".join("negctrl @ " if v == 0 else "ctrl @ " for v in g.ctrl_state)
            name = {"H": "h", "X": "x", "Z": "z", "RY": "ry", "RZ": "rz", "P": "p"}[g.kind]
            if g.param is not None:
                name += f"({g.param!r})"
            qs = ", ".join(f"q[{q}]" for q in g.controls + g.targets)
            lines.append(f"{mods}{name} {qs};")
        return "\n".join(lines) + "\n"


def concat(*circuits: Circuit, **overrides) -> Circuit:
    """Sequential composition on the widest of the inputs."""
    width = max(c.width for c in circuits)
    gates = tuple(g for c in circuits for g in c.gates)
    base = circuits[-1]
    return replace(base, width=width, gates=gates, **overrides)


# Sine block encoding ----------------------------------------------------------------

def build_usin(n: int, symmetric: bool = False) -> Circuit:
    """Block encoding of ``sum_x sin(x / N) |x><x|`` on ``n + 1`` qubits.

    Each register bit of weight ``2^j`` controls ``RY(2^(1 - n + j))`` on the
    ancilla, so the total angle is ``2 x / N``; a final ``X`` turns
    ``cos(x/N)|0> + sin(x/N)|1>`` into ``<0|U|0> = sin(x/N)``.  With
    ``symmetric`` the register is read in two's complement and the angles are
    doubled, giving ``sin(2 s / N)`` for ``s`` in ``[-N/2, N/2)``.
    """
    if not 1 <= n <= 16:
        raise PreconditionError("n must lie in [1, 16]")
    anc = n
    gates = []
    for q in range(n - 1, -1, -1):
        j = n - 1 - q  # bit weight 2^j
        angle = 2.0 ** (1 - n + j)
        if symmetric:
            angle *= 2.0
            if q == 0:
                angle = -angle
        gates.append(Gate("RY", (anc,), (q,), param=angle, tag="usin"))
    gates.append(Gate("X", (anc,), tag="usin"))
    return Circuit(n + 1, tuple(gates), n, {"a1": anc}, ledger={"symmetric": symmetric})


def register_values(n: int, symmetric: bool = False) -> np.ndarray:
    """Integer encoded by each register index ``u`` (two's complement if symmetric)."""
    u = np.arange(2**n)
    if symmetric:
        return np.where(u >= 2 ** (n - 1), u - 2**n, u)
    return u


def signal_values(n: int, symmetric: bool = False) -> np.ndarray:
    """``y_u``: the value block-encoded by :func:`build_usin` for each register index."""
    N = 2**n
    v = register_values(n, symmetric)
    return np.sin((2.0 if symmetric else 1.0) * v / N)


# QET ----------------------------------------------------------------------------------

@dataclass
class _Branch:
    phases: np.ndarray  # reflection convention
    degree: int
    condition: tuple = ()  # ((qubit, value), ...)

    def angle_at(self, step: int) -> Optional[float]:
        d = self.degree
        if d == 0:
            return self.phases[0] if step == 1 else None
        if 1 <= step <= d:
            return self.phases[d - step]
        return None


def _as_reflection(ps: PhaseSet) -> PhaseSet:
    if not math.isnan(ps.residual) and ps.residual > ACCEPT_RESIDUAL:
        raise PreconditionError(f"phase set residual {ps.residual:.2e} above acceptance")
    return ps if ps.convention == "reflection" else to_circuit_convention(ps)


def _qet_gates(usin: Circuit, branches: Sequence[_Branch], a2: int,
               a3: Optional[int], selector: str) -> list:
    a1 = usin.ancillas["a1"]
    D = max(b.degree for b in branches)
    short = [b for b in branches if b.degree < D]
    if short and (a3 is None or any(b.degree != D - 1 for b in short)):
        raise PreconditionError("branch degrees must be D or D - 1 with a selector ancilla")
    if short:
        long_vals = {dict(b.condition)[a3] for b in branches if b.degree == D}
        if len(long_vals) != 1 or long_vals & {dict(b.condition)[a3] for b in short}:
            raise PreconditionError("the selector ancilla must separate long and short branches")
        long_val = long_vals.pop()
    fwd = list(usin.gates)
    bwd = [g.inverse() for g in reversed(usin.gates)]
    gates = []
    for step in range(1, max(D, 1) + 1):
        if D >= 1:
            u = fwd if step % 2 == 1 else bwd
            if step == D and short:
                u = [g.with_control(a3, long_val) for g in u]
            gates.extend(u)
        gates.append(Gate("X", (a2,), (a1,), (0,), tag="qet-proj"))
        angles = [b.angle_at(step) for b in branches]
        thetas = [0.0 if a is None else 2.0 * a for a in angles]
        if selector == "none":
            gates.append(Gate("RZ", (a2,), param=thetas[0], tag="qet-rot"))
        elif selector == "lcu":
            # Branch a3=0 gets s + t, branch a3=1 gets s - t.
            by_val = {dict(b.condition)[a3]: th for b, th in zip(branches, thetas)}
            s = 0.5 * (by_val[0] + by_val[1])
            t = 0.5 * (by_val[0] - by_val[1])
            gates.append(Gate("RZ", (a2,), param=s, tag="qet-rot"))
            gates.append(Gate("X", (a2,), (a3,), tag="qet-sel"))
            gates.append(Gate("RZ", (a2,), param=t, tag="qet-rot"))
            gates.append(Gate("X", (a2,), (a3,), tag="qet-sel"))
        else:
            for b, th in zip(branches, thetas):
                qs = tuple(q for q, _ in b.condition)
                vs = tuple(v for _, v in b.condition)
                gates.append(Gate("RZ", (a2,), qs, vs, param=th, tag="qet-rot"))
        gates.append(Gate("X", (a2,), (a1,), (0,), tag="qet-proj"))
    return gates


def _branches_for(phases, a3: Optional[int], extra=()):
    if isinstance(phases, PhaseSet):
        ps = _as_reflection(phases)
        return [_Branch(ps.phases, ps.degree, tuple(extra))]
    even, odd = phases
    if even.parity != "even" or odd.parity != "odd":
        raise PreconditionError("mixed parity needs an (even, odd) pair")
    e, o = _as_reflection(even), _as_reflection(odd)
    if abs(e.degree - o.degree) != 1:
        raise PreconditionError("even and odd parts must have adjacent degrees")
    return [_Branch(e.phases, e.degree, tuple(extra) + ((a3, 0),)),
            _Branch(o.phases, o.degree, tuple(extra) + ((a3, 1),))]


def build_qet(usin: Circuit, phases) -> Circuit:
    """Eigenvalue transformation of the sine block encoding.

    Args:
        usin: Output of :func:`build_usin`.
        phases: A definite-parity :class:`PhaseSet` (either convention), or an
            ``(even, odd)`` pair for a mixed-parity polynomial.

    Returns:
        A circuit whose block ``<x, 0|U|x, 0>`` equals ``P(y_x)`` for definite
        parity and ``P(y_x) / 2`` for mixed parity (``subnormalization``).
    """
    n = usin.n
    a1 = usin.ancillas["a1"]
    a2 = usin.width
    mixed = not isinstance(phases, PhaseSet)
    a3 = a2 + 1 if mixed else None
    width = a2 + (2 if mixed else 1)
    branches = _branches_for(phases, a3)
    gates = [Gate("H", (a2,), tag="qet-h")]
    if mixed:
        gates.append(Gate("H", (a3,), tag="qet-h"))
    gates += _qet_gates(usin, branches, a2, a3, "lcu" if mixed else "none")
    gates.append(Gate("H", (a2,), tag="qet-h"))
    if mixed:
        gates.append(Gate("H", (a3,), tag="qet-h"))
    anc = {"a1": a1, "a2": a2}
    if mixed:
        anc["a3"] = a3
    degree = max(b.degree for b in branches)
    if mixed:
        parity = "mixed"
    else:
        parity = "odd" if degree % 2 else "even"
    ledger = {"degree": degree, "parity": parity,
              "symmetric": bool(usin.ledger.get("symmetric", False))}
    return Circuit(width, tuple(gates), n, anc, 0.5 if mixed else 1.0, ledger)


def build_piecewise_flagged(n: int, thresholds: Sequence[int], phase_sets: Sequence,
                            symmetric: bool = False) -> Circuit:
    """Different QET polynomials on the segments cut out by comparator flags.

    Flags form a thermometer code: flag ``i`` is set when ``x > thresholds[i]``.
    Segment ``j`` (``x`` in ``(t_{j-1}, t_j]``) selects its rotations by the
    flag pattern ``f_j = 1, f_{j+1} = 0``.  All segments must share the same
    parity structure and degrees.

    Args:
        n: Register size.
        thresholds: Strictly increasing integer thresholds.
        phase_sets: ``len(thresholds) + 1`` PhaseSets or ``(even, odd)`` pairs.
    """
    k = len(thresholds)
    if k < 1 or len(phase_sets) != k + 1:
        raise PreconditionError("need k >= 1 thresholds and k + 1 phase sets")
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise PreconditionError("thresholds must be strictly increasing")
    usin = build_usin(n, symmetric)
    a1 = usin.ancillas["a1"]
    a2 = n + 1
    mixed = not isinstance(phase_sets[0], PhaseSet)
    a3 = n + 2 if mixed else None
    flag0 = n + (3 if mixed else 2)
    flags = [flag0 + i for i in range(k)]
    width = flag0 + k
    branches = []
    for j, ps in enumerate(phase_sets):
        cond = []
        if j > 0:
            cond.append((flags[j - 1], 1))
        if j < k:
            cond.append((flags[j], 0))
        branches += _branches_for(ps, a3, cond)
    reg = tuple(range(n))
    comps = [Gate("COMPARATOR", (f,), reg, threshold=int(t), tag="compare")
             for f, t in zip(flags, thresholds)]
    gates = list(comps)
    gates.append(Gate("H", (a2,), tag="qet-h"))
    if mixed:
        gates.append(Gate("H", (a3,), tag="qet-h"))
    gates += _qet_gates(usin, branches, a2, a3, "flags")
    gates.append(Gate("H", (a2,), tag="qet-h"))
    if mixed:
        gates.append(Gate("H", (a3,), tag="qet-h"))
    gates += list(reversed(comps))
    anc = {"a1": a1, "a2": a2}
    if mixed:
        anc["a3"] = a3
    for i, f in enumerate(flags):
        anc[f"flag{i}"] = f
    ledger = {"comparison_toffolis": 2 * k * n, "flag_qubits": k, "work_qubits": n}
    return Circuit(width, tuple(gates), n, anc, 0.5 if mixed else 1.0, ledger)


def comparison_toffolis(k: int, n: int) -> int:
    """Toffoli cost booked for ``k`` compute-and-uncompute comparisons on ``n`` bits."""
    return 2 * k * n


# Controlled phase encoding -------------------------------------------------------------

def build_phase_encoding(n: int, t: float, domain=(0.0, 1.0)) -> Circuit:
    """``|0><0| (x) I + |1><1| (x) e^{i A t}`` with ``A = sum_x xbar |x><x|``.

    ``xbar = a + (b - a) x / N``.  The control is qubit ``n``.  Each register
    bit carries a controlled ``RZ``; a phase gate on the control restores the
    global phase of the ``|1>`` branch so the encoding is exact.
    """
    if not 1 <= n <= 16:
        raise PreconditionError("n must lie in [1, 16]")
    a, b = domain
    N = 2**n
    ctrl = n
    gates = []
    total = 0.0
    for q in range(n):
        w = 2 ** (n - 1 - q)
        theta = t * (b - a) * w / N
        total += theta
        gates.append(Gate("RZ", (q,), (ctrl,), param=theta, tag="phase-enc"))
    gates.append(Gate("P", (ctrl,), param=0.5 * total + a * t, tag="phase-enc"))
    return Circuit(n + 1, tuple(gates), n, {"control": ctrl})


# Domain extension ---------------------------------------------------------------------

@dataclass(frozen=True)
class DomainExtension:
    """Parameters of the widened-domain construction for a function with a kink.

    The register grows by one bit; points with ``xbar > threshold`` are moved
    to ``x + 2^n`` where the extended function is evaluated at ``xbar + shift``.

    Attributes:
        n: Original register size.
        alpha: Right end of the widened domain, ``(2^(n+1) - 1) / (2^n - 1)``.
        shift: Offset ``2^n / (2^n - 1)`` applied to moved points.
        threshold: Cut position in function units (``[0, 1]`` domain).
        cut_index: Largest original index kept in place.
    """

    n: int
    alpha: float
    shift: float
    threshold: float
    cut_index: int

    def xbar(self, x):
        return np.asarray(x) / (2**self.n - 1)

    def embed(self, x):
        x = np.asarray(x)
        return np.where(x > self.cut_index, x + 2**self.n, x)

    def relabel(self, xp):
        xp = np.asarray(xp)
        return np.where(xp >= 2**self.n, xp - 2**self.n, xp)

    def xbar_wide(self, xp):
        return self.alpha * np.asarray(xp) / (2 ** (self.n + 1) - 1)

    def intermediate_state(self) -> np.ndarray:
        N = 2**self.n
        psi = np.zeros(2 * N)
        psi[self.embed(np.arange(N))] = 1.0 / math.sqrt(N)
        return psi


def build_domain_extension(n: int, threshold: float = 1.0 / 3.0) -> DomainExtension:
    """Widened-domain parameters for a kink at ``threshold`` on the grid ``x / (2^n - 1)``."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    N = 2**n
    cut = int(math.floor(threshold * (N - 1) + 1e-9))
    return DomainExtension(n, (2 * N - 1) / (N - 1), N / (N - 1), threshold, cut)


# Amplitude amplification ----------------------------------------------------------------

def hadamard_prep(n: int, width: int) -> Circuit:
    return Circuit(width, tuple(Gate("H", (q,), tag="prep") for q in range(n)), n)


def build_amplified(prep: Circuit, rounds: int, phi: float,
                    state_prep: Optional[Circuit] = None) -> Circuit:
    """Exact amplitude amplification around a block encoding.

    The prepared state is ``U' V |0>`` with ``V`` = ``state_prep`` (Hadamards
    on the register by default) and ``U' = RY(phi)_{a4} (x) prep``.  Each round
    applies the good-state reflection (anti-controlled Z over every ancilla and
    ``a4``), ``U'^dagger``, ``V^dagger``, the initial-state reflection
    (anti-controlled Z over all qubits), ``V`` and ``U'`` again.  After ``k``
    rounds the good-subspace amplitude is ``(-1)^k T_{2k+1}(a cos(phi/2))``.
    """
    if rounds < 0:
        raise PreconditionError("rounds must be >= 0")
    a4 = prep.width
    width = prep.width + 1
    V = state_prep if state_prep is not None else hadamard_prep(prep.n, prep.width)
    ry = Gate("RY", (a4,), param=phi, tag="aa-ry")
    ry_inv = ry.inverse()
    good = tuple(range(prep.n, width))
    gates = list(V.gates) + [ry] + list(prep.gates)
    inv_prep = [g.inverse() for g in reversed(prep.gates)]
    inv_V = [g.inverse() for g in reversed(V.gates)]
    for _ in range(rounds):
        gates.append(Gate("MCZ", good, ctrl_state=(0,) * len(good), tag="aa-good"))
        gates += [ry_inv] + inv_prep + inv_V
        gates.append(Gate("MCZ", tuple(range(width)), ctrl_state=(0,) * width, tag="aa-init"))
        gates += list(V.gates) + [ry] + list(prep.gates)
    anc = dict(prep.ancillas)
    anc["a4"] = a4
    ledger = dict(prep.ledger)
    ledger.update({"rounds": rounds, "phi": phi})
    return Circuit(width, tuple(gates), prep.n, anc, prep.subnormalization, ledger)
