"""Norms, filling fractions, error bounds and amplitude-amplification planning."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.stats import unitary_group

from .errors import DegenerateFunctionError, PreconditionError
from .funclib import FunctionSpec, evaluate


@dataclass
class FillingStats:
    """Discretised and continuous filling fractions of a function.

    Attributes:
        two_norm_N: ``sqrt((b - a) / N * sum |f(xbar)|^2)``.
        filling_N: ``two_norm_N / sqrt((b - a) max^2)``.
        filling_inf: Continuous counterpart from the integral of ``|f|^2``.
        N: Number of grid points.
        max_abs: ``max |f|`` used for the normalisation.
    """

    two_norm_N: float
    filling_N: float
    filling_inf: float
    N: int
    max_abs: float

    def to_json(self) -> dict:
        return asdict(self)


def grid_points(domain, N: int) -> np.ndarray:
    """Left-endpoint grid ``xbar = a + (b - a) x / N`` for ``x = 0 .. N-1``."""
    a, b = domain
    return a + (b - a) * np.arange(N) / N


def filling_fraction(f, N: int, domain=None, max_abs: Optional[float] = None,
                     continuous: bool = True) -> FillingStats:
    """Filling fractions of ``f`` on the ``N``-point grid and in the continuum limit.

    Args:
        f: A :class:`FunctionSpec` or a vectorised callable (then ``domain``
            is required).
        N: Number of grid points (``2^n``).
        domain: Interval for callables.
        max_abs: Normalising maximum; defaults to the spec's value or a dense
            scan of the callable.
        continuous: Also compute ``filling_inf`` by adaptive quadrature.

    Raises:
        DegenerateFunctionError: If ``max |f| = 0``.
    """
    if N < 2:
        raise PreconditionError("N must be at least 2")
    if isinstance(f, FunctionSpec):
        domain = f.domain
        m = f.max_abs if max_abs is None else max_abs
        func = lambda x: evaluate(f, x)  # noqa: E731
    else:
        if domain is None:
            raise PreconditionError("domain required for callables")
        func = f
        m = max_abs
        if m is None:
            m = float(np.max(np.abs(func(np.linspace(domain[0], domain[1], 100_001)))))
    if m == 0:
        raise DegenerateFunctionError("function vanishes on its domain")
    a, b = float(domain[0]), float(domain[1])
    vals = np.asarray(func(grid_points((a, b), N)), dtype=float)
    two_norm = math.sqrt((b - a) / N * float(np.sum(vals * vals)))
    fill_n = two_norm / math.sqrt((b - a) * m * m)
    fill_inf = float("nan")
    if continuous:
        integral, _ = integrate.quad(lambda x: float(func(x)) ** 2, a, b,
                                     epsabs=0.0, epsrel=1e-12, limit=400)
        fill_inf = math.sqrt(integral / ((b - a) * m * m))
    return FillingStats(two_norm, fill_n, fill_inf, int(N), float(m))


def filling_lower_bounds(kind: str, beta: float, N: Optional[int] = None) -> dict:
    """Analytic lower bounds on the filling fraction of Gaussians and Kaiser windows.

    ``cont_bound`` follows from ``f(x) >= 1 - beta x^2 / 2`` on ``[-1, 1]``.
    ``disc_bound`` applies to any ``f_tilde`` within ``1/4`` of ``f`` at the grid
    points: on ``I = [-1/sqrt(beta), 1/sqrt(beta)]`` one has
    ``f_tilde >= 1/4`` while ``max |f_tilde| <= 5/4``, so
    ``F^2 >= |I cap grid| / (25 N)``.  The grid always contains ``0`` and, for
    ``N >= 2 sqrt(beta)``, at least ``N r / 2`` points of ``I`` (``r`` its
    half-width), which gives the explicit constant ``c = 1/sqrt(50)`` in
    ``c (beta + 1)^(-1/4)``.  ``disc_bound_grid`` is the count-based value for
    the given ``N``.
    """
    if kind not in ("gaussian", "kaiser"):
        raise ValueError("kind must be gaussian or kaiser")
    if beta < 0:
        raise PreconditionError("beta must be >= 0")
    branches = []
    if beta <= 2:
        branches.append(1 / math.sqrt(2))
    if beta >= 2:
        branches.append((2 * beta) ** -0.25)
    out = {"cont_bound": max(branches),
           "disc_bound": (beta + 1) ** -0.25 / math.sqrt(50.0)}
    if N is not None:
        if N < math.sqrt(beta):
            raise PreconditionError("discrete bound needs N >= sqrt(beta)")
        r = 1.0 if beta <= 1 else 1 / math.sqrt(beta)
        xs = grid_points((-1.0, 1.0), N)
        count = int(np.sum(np.abs(xs) <= r + 1e-15))
        out["disc_bound_grid"] = math.sqrt(count / (25.0 * N))
    return out


def riemann_bounds(f, N: int, scheme: str = "left", domain=None) -> dict:
    """Riemann sum, integral, error and the standard error bound.

    ``left``: ``(b-a)^2 / (2N) max|f'|``; ``midpoint``: ``(b-a)^3 / (24 N^2) max|f''|``.
    Derivative maxima are estimated with finite differences on a
    ``10^5``-point grid, so the bound is itself an estimate.

    Raises:
        ArithmeticError: If the derivative estimate is not finite.
    """
    if isinstance(f, FunctionSpec):
        domain = f.domain
        func = lambda x: evaluate(f, x)  # noqa: E731
    else:
        func = f
    a, b = float(domain[0]), float(domain[1])
    h = (b - a) / N
    if scheme == "left":
        xs = a + h * np.arange(N)
    elif scheme == "midpoint":
        xs = a + h * (np.arange(N) + 0.5)
    else:
        raise ValueError("scheme must be left or midpoint")
    total = h * float(np.sum(func(xs)))
    integral, _ = integrate.quad(lambda x: float(func(x)), a, b, epsabs=1e-14,
                                 epsrel=1e-13, limit=400)
    dense = np.linspace(a, b, 100_001)
    vals = np.asarray(func(dense), dtype=float)
    d1 = np.gradient(vals, dense, edge_order=2)
    if scheme == "left":
        mx = float(np.max(np.abs(d1)))
        bound = (b - a) ** 2 / (2 * N) * mx
    else:
        d2 = np.gradient(d1, dense, edge_order=2)
        mx = float(np.max(np.abs(d2)))
        bound = (b - a) ** 3 / (24 * N * N) * mx
    if not math.isfinite(bound):
        raise ArithmeticError("derivative estimate failed")
    return {"sum": total, "integral": integral, "error": abs(total - integral),
            "bound": bound, "derivative_max": mx}


# Trace distances ---------------------------------------------------------------------

def trace_distance_rigorous(delta: float, F_f: float, F_ftilde: float) -> float:
    """``delta / min(F_f, F_ftilde)``: distance guaranteed by a sup-norm error ``delta``."""
    if F_f <= 0 or F_ftilde <= 0 or delta < 0:
        raise PreconditionError("need positive filling fractions and delta >= 0")
    return delta / min(F_f, F_ftilde)


def delta_for_epsilon(epsilon: float, F_f: float, F_ftilde: float) -> float:
    """Inverse of :func:`trace_distance_rigorous`: ``epsilon * min(F_f, F_ftilde)``."""
    return epsilon * min(F_f, F_ftilde)


def vector_trace_distance(u, v) -> float:
    """Pure-state distance between the normalised vectors ``u`` and ``v``."""
    a = np.asarray(u, dtype=complex).reshape(-1)
    b = np.asarray(v, dtype=complex).reshape(-1)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise DegenerateFunctionError("zero vector")
    a, b = a / na, b / nb
    return float(min(1.0, np.linalg.norm(b - np.vdot(a, b) * a)))


def trace_distance_practical(f_values, ftilde_values, weights=None) -> float:
    """Distance from the grid inner product ``sum f f_tilde / (N_f N_ftilde)``.

    With ``weights`` (quadrature weights) the same formula gives the
    integral form used for large ``N``.
    """
    f = np.asarray(f_values, dtype=float)
    g = np.asarray(ftilde_values, dtype=float)
    if weights is not None:
        w = np.sqrt(np.asarray(weights, dtype=float))
        f, g = f * w, g * w
    return vector_trace_distance(f, g)


def practical_integral_distance(f: Callable, ftilde: Callable, domain, points: int = 4001) -> float:
    """Continuum version of :func:`trace_distance_practical` (Gauss-Legendre)."""
    x, w = np.polynomial.legendre.leggauss(points)
    a, b = domain
    xs = a + (b - a) * (x + 1) / 2
    return trace_distance_practical(f(xs), ftilde(xs), w)


# Amplitude amplification -------------------------------------------------------------

@dataclass
class AAPlan:
    """Parameters of exact amplitude amplification.

    Attributes:
        amplitude: Amplitude ``a`` the plan is designed for.
        rounds: Number of rounds ``k``.
        theta: ``pi / (4k + 2)``.
        phi: ``RY`` angle with ``cos(phi / 2) = sin(theta) / a``.
        mismatch_penalty: ``(2k+1)(2k+2)|a_estimate - a|^2`` (0 without an estimate).
        a_estimate: The amplitude actually realised, if different from ``a``.
    """

    amplitude: float
    rounds: int
    theta: float
    phi: float
    mismatch_penalty: float = 0.0
    a_estimate: Optional[float] = None

    def to_json(self) -> dict:
        return asdict(self)


def plan_exact_aa(a: float, a_estimate: Optional[float] = None) -> AAPlan:
    """Rounds and ``RY`` angle that take amplitude ``a`` exactly to 1.

    Args:
        a: Amplitude of the good state, ``0 < a <= 1``.
        a_estimate: Amplitude the plan will really act on; the final amplitude
            is then at least ``1 - mismatch_penalty``.

    Raises:
        PreconditionError: ``a`` outside ``(0, 1]`` or ``a_estimate > 2a``.
    """
    if not 0 < a <= 1:
        raise PreconditionError("amplitude must lie in (0, 1]")
    if a_estimate is not None and a_estimate > 2 * a:
        raise PreconditionError("a_estimate must not exceed 2a")
    raw = math.pi / (4 * math.asin(a)) - 0.5
    k = max(0, math.ceil(raw - 1e-9))
    theta = math.pi / (4 * k + 2)
    ratio = min(1.0, math.sin(theta) / a)
    phi = 0.0 if ratio > 1 - 1e-12 else 2 * math.acos(ratio)
    penalty = 0.0
    if a_estimate is not None:
        penalty = (2 * k + 1) * (2 * k + 2) * (a_estimate - a) ** 2
    return AAPlan(a, k, theta, phi, penalty, a_estimate)


def success_amplitude(P, stats: FillingStats, mixed_parity: bool = False) -> float:
    """Amplitude of the good state after ``U_f H^n`` on ``|0>``.

    ``stats`` must describe the block-encoded values ``P(y_x)`` themselves
    (including any uniform down-scaling), so the amplitude is
    ``s * ||P||_N / sqrt(N) = s * F^[N] * max|P|`` with ``s = 1`` for definite
    parity and ``1/2`` for the mixed-parity combination.
    """
    sub = 0.5 if mixed_parity else 1.0
    return sub * stats.filling_N * stats.max_abs


def chebyshev_t(n: int, x):
    """``T_n(x)`` evaluated stably for ``|x| <= 1`` and beyond."""
    return np.polynomial.chebyshev.chebval(x, [0] * n + [1])


def _random_instance(a: float, rng, dim: int = 8):
    U = unitary_group.rvs(dim, random_state=rng)
    u = U[:, 0]
    w = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    w -= np.vdot(u, w) * u
    w /= np.linalg.norm(w)
    v = a * u + math.sqrt(max(0.0, 1 - a * a)) * w
    Pi = np.outer(v, v.conj())
    return U, Pi, v


def aa_chebyshev_identities(a: float, k: int, rng=None, dim: int = 8) -> dict:
    """Checks both Chebyshev identities of plain amplitude amplification.

    Builds a Haar-random unitary on ``log2(dim)`` qubits and a rank-one
    projector with ``Pi U |0> = a |psi>``, then compares
    ``Pi W^k U |0>`` with ``T_{2k+1}(a) |psi>`` and
    ``<0|U^dag (2 Pi - I) W^k U |0>`` with ``T_{2k+2}(a)``.
    """
    rng = np.random.default_rng(rng)
    U, Pi, psi = _random_instance(a, rng, dim)
    I = np.eye(dim)
    e0 = I[:, 0]
    W = U @ (2 * np.outer(e0, e0) - I) @ U.conj().T @ (2 * Pi - I)
    Wk = np.linalg.matrix_power(W, k)
    lhs1 = Pi @ Wk @ U @ e0
    rhs1 = chebyshev_t(2 * k + 1, a) * psi
    lhs2 = e0 @ U.conj().T @ (2 * Pi - I) @ Wk @ U @ e0
    rhs2 = chebyshev_t(2 * k + 2, a)
    return {"err_odd": float(np.linalg.norm(lhs1 - rhs1)), "err_even": float(abs(lhs2 - rhs2))}


def exact_aa_amplitude(plan: AAPlan, a_true: Optional[float] = None, rng=None,
                       dim: int = 8) -> float:
    """Matrix-level amplitude ``c`` with ``(|0><0| (x) Pi) W'^k U' |0,0> = c |0, psi>``.

    ``U' = RY(phi) (x) U`` and ``W' = U'(2|0><0| - I)U'^dag (I - 2 |0><0| (x) Pi)``.
    ``a_true`` (default ``plan.amplitude``) is the amplitude actually realised
    by the random instance.
    """
    rng = np.random.default_rng(rng)
    a = plan.amplitude if a_true is None else a_true
    U, Pi, psi = _random_instance(a, rng, dim)
    c, s = math.cos(plan.phi / 2), math.sin(plan.phi / 2)
    R = np.array([[c, -s], [s, c]])
    Up = np.kron(R, U)
    big = 2 * dim
    I = np.eye(big)
    zero = np.zeros(big)
    zero[0] = 1.0
    P0 = np.zeros((2, 2))
    P0[0, 0] = 1.0
    Pip = np.kron(P0, Pi)
    Wp = Up @ (2 * np.outer(zero, zero) - I) @ Up.conj().T @ (I - 2 * Pip)
    out = Pip @ np.linalg.matrix_power(Wp, plan.rounds) @ Up @ zero
    target = np.kron(np.array([1.0, 0.0]), psi)
    return float(np.vdot(target, out).real)
