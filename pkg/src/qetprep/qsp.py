"""Quantum signal processing phase factors.

Two conventions are used.

``wx``: ``U(y) = e^{i phi_0 Z} prod_{j=1}^{d} W(y) e^{i phi_j Z}`` with the
signal rotation ``W(y) = [[y, i s], [i s, y]]``, ``s = sqrt(1 - y^2)``, and
``d + 1`` phases.  The solver works here with symmetric phase vectors.

``reflection``: ``U(y) = e^{i psi_1 Z} R(y) e^{i psi_2 Z} R(y) ... e^{i psi_d Z} R(y)``
with the Hermitian reflection ``R(y) = [[y, s], [s, -y]]`` that the sine block
encoding provides, and ``d`` phases (one phase when ``d = 0``).  These are the
angles consumed by the circuit builder.

In both cases the realised polynomial is ``Re U(y)[0, 0]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import optimize

from .approx import PolyApprox
from .errors import PhaseSolverError, PreconditionError

ACCEPT_RESIDUAL = 1e-10
SUP_LIMIT = 1.0 + 1e-12


@dataclass
class PhaseSet:
    """Phase factors realising a definite-parity polynomial.

    Attributes:
        phases: Angles in radians.
        convention: ``wx`` or ``reflection``.
        parity: ``even`` or ``odd``.
        degree: Polynomial degree ``d``.
        residual: Max deviation from the target at the verification points.
        target: Chebyshev coefficients of the target polynomial.
        meta: Solver diagnostics.
    """

    phases: np.ndarray
    convention: str
    parity: str
    degree: int
    residual: float = float("nan")
    target: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.phases = np.asarray(self.phases, dtype=float)
        if self.convention not in ("wx", "reflection"):
            raise ValueError(f"unknown convention {self.convention!r}")
        expected = self.degree + 1 if self.convention == "wx" else max(self.degree, 1)
        if len(self.phases) != expected:
            raise ValueError(f"{self.convention} phases for degree {self.degree} "
                             f"need length {expected}, got {len(self.phases)}")
        if self.parity not in ("even", "odd") or self.degree % 2 != (self.parity == "odd"):
            raise ValueError("parity must be even/odd and agree with the degree")

    def realized(self, y):
        return realized(self, y)

    def to_json(self) -> dict:
        out = {
            "phases": [float(p) for p in self.phases],
            "convention": self.convention,
            "parity": self.parity,
            "degree": self.degree,
            "residual": self.residual,
        }
        if self.target is not None:
            out["target_cheb"] = [float(c) for c in self.target]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PhaseSet":
        target = obj.get("target_cheb")
        return cls(np.asarray(obj["phases"], dtype=float), obj["convention"], obj["parity"],
                   int(obj["degree"]), float(obj.get("residual", float("nan"))),
                   None if target is None else np.asarray(target, dtype=float))


# Matrix products -------------------------------------------------------------------

def _rz(phi):
    return np.array([[np.exp(1j * phi), 0.0], [0.0, np.exp(-1j * phi)]])


def _signal(y, convention):
    y = np.asarray(y, dtype=float)
    s = np.sqrt(np.clip(1.0 - y * y, 0.0, None))
    M = np.empty(y.shape + (2, 2), dtype=complex)
    if convention == "wx":
        M[..., 0, 0] = y
        M[..., 1, 1] = y
        M[..., 0, 1] = 1j * s
        M[..., 1, 0] = 1j * s
    else:
        M[..., 0, 0] = y
        M[..., 1, 1] = -y
        M[..., 0, 1] = s
        M[..., 1, 0] = s
    return M


def qsp_matrix(phases, y, convention: Optional[str] = None):
    """The QSP unitary at ``y`` (scalar or array; arrays give shape ``(m, 2, 2)``).

    Args:
        phases: A :class:`PhaseSet` or a raw phase vector.
        y: Signal value(s) in ``[-1, 1]``.
        convention: Required for raw vectors; taken from the PhaseSet otherwise.
            An empty raw vector gives the identity.
    """
    if isinstance(phases, PhaseSet):
        convention = phases.convention
        phis = phases.phases
        degree = phases.degree
    else:
        phis = np.asarray(phases, dtype=float)
        convention = convention or "wx"
        degree = len(phis) - 1 if convention == "wx" else len(phis)
    yy = np.asarray(y, dtype=float)
    W = _signal(yy, convention)
    U = np.broadcast_to(np.eye(2, dtype=complex), yy.shape + (2, 2)).copy()
    if len(phis) == 0:
        return U
    if convention == "wx":
        U = U @ _rz(phis[0])
        for phi in phis[1:]:
            U = U @ W @ _rz(phi)
    elif degree == 0:
        U = U @ _rz(phis[0])
    else:
        for psi in phis:
            U = U @ _rz(psi) @ W
    return U


def realized(phases, y):
    """``Re U(y)[0, 0]`` for a :class:`PhaseSet` (vectorised over ``y``)."""
    return qsp_matrix(phases, y)[..., 0, 0].real


# Convention conversion --------------------------------------------------------------

def to_circuit_convention(ps: PhaseSet) -> PhaseSet:
    """Converts symmetric ``wx`` phases to the reflection convention.

    Uses ``W = i e^{-i pi/4 Z} R e^{-i pi/4 Z}``; the boundary phases merge into
    the first reflection phase because only the ``(0, 0)`` entry matters.
    """
    if ps.convention != "wx":
        raise PreconditionError("expected wx convention")
    phi = ps.phases
    d = ps.degree
    if d == 0:
        psi = phi.copy()
    else:
        psi = np.empty(d)
        psi[0] = phi[0] + phi[d] + (d - 1) * math.pi / 2
        psi[1:] = phi[1:d] - math.pi / 2
    return PhaseSet(psi, "reflection", ps.parity, d, ps.residual, ps.target, dict(ps.meta))


def from_circuit_convention(ps: PhaseSet) -> PhaseSet:
    """Inverse of :func:`to_circuit_convention`, returning symmetric ``wx`` phases."""
    if ps.convention != "reflection":
        raise PreconditionError("expected reflection convention")
    psi = ps.phases
    d = ps.degree
    if d == 0:
        phi = psi.copy()
    else:
        phi = np.empty(d + 1)
        phi[0] = phi[d] = 0.5 * (psi[0] - (d - 1) * math.pi / 2)
        phi[1:d] = psi[1:] + math.pi / 2
    return PhaseSet(phi, "wx", ps.parity, d, ps.residual, ps.target, dict(ps.meta))


# Solver --------------------------------------------------------------------------------

def _full(red, d):
    if d % 2 == 1:
        return np.concatenate([red, red[::-1]])
    return np.concatenate([red, red[-2::-1]])


def _value_and_jacobian(phi, ys):
    """``Re U00`` and its derivative with respect to each wx phase."""
    d = len(phi) - 1
    m = len(ys)
    W = _signal(ys, "wx")
    ez = [np.exp(1j * p) for p in phi]
    left = np.empty((d + 1, m, 2, 2), dtype=complex)
    cur = np.broadcast_to(np.eye(2, dtype=complex), (m, 2, 2)).copy()
    for j in range(d + 1):
        left[j] = cur
        cur = cur @ _rz(phi[j])
        if j < d:
            cur = cur @ W
    u00 = cur[:, 0, 0]
    right = np.empty((d + 1, m, 2, 2), dtype=complex)
    cur = np.broadcast_to(np.eye(2, dtype=complex), (m, 2, 2)).copy()
    for j in range(d, -1, -1):
        right[j] = cur
        cur = _rz(phi[j]) @ cur
        if j > 0:
            cur = W @ cur
    # d/dphi_j inserts i Z e^{i phi_j Z}, which is diagonal.
    jac = (left[:, :, 0, 0] * (1j * np.array(ez))[:, None] * right[:, :, 0, 0]
           - left[:, :, 0, 1] * (1j * np.conj(ez))[:, None] * right[:, :, 1, 0])
    return u00.real, jac.real.T


def _reduce(jac, d, dt):
    red = jac[:, :dt].copy()
    if d % 2 == 1:
        red += jac[:, dt:][:, ::-1]
    else:
        red[:, : dt - 1] += jac[:, dt:][:, ::-1]
    return red


def verification_points(d: int) -> np.ndarray:
    m = 4 * d + 1
    return np.cos(math.pi * (np.arange(m) + 0.5) / m)


def _residual(phi, cheb, d):
    ys = verification_points(max(d, 1))
    return float(np.max(np.abs(realized(PhaseSet(phi, "wx", "odd" if d % 2 else "even", d), ys)
                               - C.chebval(ys, cheb))))


def solve_phases(P, degree: Optional[int] = None, seed: int = 0, tol: float = 1e-14,
                 max_iter: int = 60, restarts: int = 8) -> PhaseSet:
    """Finds symmetric ``wx`` phases whose ``Re U00`` equals ``P``.

    Newton iteration on the independent half of a symmetric phase vector,
    matched at ``ceil((d + 1) / 2)`` positive Chebyshev nodes and started from
    ``(pi/4, 0, ..., 0, pi/4)`` (which realises the zero polynomial).  On
    stagnation a Levenberg-Marquardt least-squares search is restarted from
    jittered points.

    Args:
        P: A definite-parity :class:`PolyApprox` or raw Chebyshev coefficients.
        degree: Degree to solve at; defaults to the polynomial degree (it may
            be larger, the leading coefficients then being zero).
        seed: Seed for the jittered restarts.

    Raises:
        PreconditionError: Mixed parity or ``sup |P| > 1 - 1e-9``.
        PhaseSolverError: Residual above ``1e-10`` after all attempts.
    """
    if isinstance(P, PolyApprox):
        cheb = P.cheb_coeffs.copy()
        parity = P.parity
        sup = P.sup_norm
    else:
        cheb = np.asarray(P, dtype=float).copy()
        odd_part = np.any(cheb[1::2] != 0)
        even_part = np.any(cheb[0::2] != 0)
        if odd_part and even_part:
            parity = "mixed"
        else:
            parity = "odd" if odd_part else "even"
        sup = PolyApprox(cheb, parity).sup_norm if parity != "mixed" else float("inf")
    if parity == "mixed":
        raise PreconditionError("QSP phases need a definite-parity polynomial")
    d_poly = int(np.flatnonzero(cheb)[-1]) if np.any(cheb) else (1 if parity == "odd" else 0)
    d = d_poly if degree is None else int(degree)
    if d < d_poly or d % 2 != (parity == "odd"):
        raise PreconditionError(f"degree {d} incompatible with polynomial of degree "
                                f"{d_poly} and parity {parity}")
    if sup > SUP_LIMIT:
        raise PreconditionError(f"sup |P| = {sup:.12f} exceeds 1; rescale first")
    cheb = np.pad(cheb, (0, max(0, d + 1 - len(cheb))))[: d + 1]

    if d == 0:
        phi = np.array([math.acos(cheb[0])])
        res = _residual(phi, cheb, 0)
        return _accept(phi, parity, 0, res, cheb, {"method": "closed-form"})

    dt = (d + 2) // 2
    k = np.arange(1, dt + 1)
    ys = np.cos((2 * k - 1) * math.pi / (4 * dt))
    fy = C.chebval(ys, cheb)

    red = np.zeros(dt)
    red[0] = math.pi / 4
    err = float("inf")
    iters = 0
    for iters in range(1, max_iter + 1):
        val, jac = _value_and_jacobian(_full(red, d), ys)
        F = val - fy
        err = float(np.max(np.abs(F)))
        if err < tol:
            break
        try:
            step = np.linalg.solve(_reduce(jac, d, dt), F)
        except np.linalg.LinAlgError:
            break
        red = red - step
    phi = _full(red, d)
    res = _residual(phi, cheb, d)
    meta = {"method": "newton", "iterations": iters}
    if res <= ACCEPT_RESIDUAL:
        return _accept(phi, parity, d, res, cheb, meta)

    best_phi, best_res = phi, res
    rng = np.random.default_rng(seed)
    for attempt in range(restarts):
        start = np.zeros(dt)
        start[0] = math.pi / 4
        start = start + rng.normal(scale=0.1 / (1 + attempt), size=dt)

        def fun(r):
            return _value_and_jacobian(_full(r, d), ys)[0] - fy

        def jac_fn(r):
            return _reduce(_value_and_jacobian(_full(r, d), ys)[1], d, dt)

        sol = optimize.least_squares(fun, start, jac=jac_fn, method="lm",
                                     xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * dt)
        phi = _full(sol.x, d)
        res = _residual(phi, cheb, d)
        if res < best_res:
            best_phi, best_res = phi, res
        if res <= ACCEPT_RESIDUAL:
            return _accept(phi, parity, d, res, cheb, {"method": "levenberg-marquardt",
                                                        "restarts": attempt + 1})
    raise PhaseSolverError(f"phase solver stagnated at residual {best_res:.3e}", best_res)


def _accept(phi, parity, d, res, cheb, meta):
    return PhaseSet(phi, "wx", parity, d, res, cheb, meta)


def solve_mixed(P: PolyApprox, seed: int = 0) -> tuple:
    """Solves the even and odd parts of a mixed polynomial separately.

    The two parts are solved at degrees ``D`` and ``D - 1`` (in some order)
    where ``D`` is the degree of ``P``, as required by the linear-combination
    circuit.  Returns ``(even_set, odd_set)`` in the ``wx`` convention.
    """
    D = max(P.degree, 1)
    de = D if D % 2 == 0 else D - 1
    do = D if D % 2 == 1 else D - 1
    even = solve_phases(P.part("even"), degree=de, seed=seed)
    odd = solve_phases(P.part("odd"), degree=do, seed=seed)
    return even, odd
