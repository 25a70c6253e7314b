"""Polynomial approximations of the encoded target ``h_hat(y)``.

The block encoding exposes ``y = sin(x / N)`` (or ``sin(2 s / N)`` for the
symmetric two's-complement register), so the function that the eigenvalue
transformation has to realise is

    h(y) = f(x0 + c * arcsin(y)),     h_hat = h / max|f|,

with ``x0 = a, c = b - a`` for a generic domain and ``x0 = (a + b) / 2,
c = (b - a) / 2`` for the symmetric one.  This module builds such polynomials
by Taylor composition with the arcsin series, by Chebyshev interpolation or
by a linear-programming minimax fit, and measures their errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import optimize

from .errors import CompositionError, ConvergenceError, PreconditionError
from .funclib import FunctionSpec, evaluate, taylor_coeffs

SIN1 = math.sin(1.0)
NU = 1.0 - SIN1
SUP_MARGINAL = 1.01


@dataclass
class PolyApprox:
    """A real polynomial stored in the Chebyshev basis.

    Attributes:
        cheb_coeffs: Chebyshev coefficients (canonical storage).
        parity: ``even``, ``odd`` or ``mixed``.
        interval: Working interval ``(y_lo, y_hi)`` inside ``[-1, 1]``.
        linf_error: Measured ``max |P / scale - h_hat|`` on the interval.
        sup_norm: ``max |P|`` on ``[-1, 1]``.
        scale: Uniform factor by which the polynomial was shrunk relative to
            the approximant of ``h_hat``.  Trace distances do not depend on it.
        method: How the polynomial was obtained.
        meta: Free-form diagnostics (series bound, requested degree, ...).
    """

    cheb_coeffs: np.ndarray
    parity: str = "mixed"
    interval: tuple = (-1.0, 1.0)
    linf_error: float = float("nan")
    sup_norm: float = float("nan")
    scale: float = 1.0
    method: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.cheb_coeffs = np.asarray(self.cheb_coeffs, dtype=float)
        if self.cheb_coeffs.ndim != 1 or self.cheb_coeffs.size == 0:
            raise ValueError("cheb_coeffs must be a non-empty vector")
        if self.parity not in ("even", "odd", "mixed"):
            raise ValueError(f"bad parity {self.parity!r}")
        if self.parity != "mixed":
            drop = 1 if self.parity == "even" else 0
            self.cheb_coeffs[drop::2] = 0.0
        self.interval = (float(self.interval[0]), float(self.interval[1]))
        if math.isnan(self.sup_norm):
            self.sup_norm = sup_norm(self.cheb_coeffs)

    @classmethod
    def from_monomial(cls, coeffs, **kwargs) -> "PolyApprox":
        return cls(C.poly2cheb(np.asarray(coeffs, dtype=float)), **kwargs)

    @property
    def monomial_coeffs(self) -> np.ndarray:
        return C.cheb2poly(self.cheb_coeffs)

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.cheb_coeffs)
        return int(nz[-1]) if nz.size else 0

    @property
    def qsp_ready(self) -> bool:
        return bool(self.sup_norm <= 1.0)

    def __call__(self, y):
        return C.chebval(y, self.cheb_coeffs)

    def scaled(self, factor: float) -> "PolyApprox":
        """Returns ``factor * P`` with the scale bookkeeping updated."""
        return PolyApprox(
            self.cheb_coeffs * factor, self.parity, self.interval, self.linf_error,
            self.sup_norm * abs(factor), self.scale * factor, self.method, dict(self.meta),
        )

    def part(self, which: str) -> "PolyApprox":
        """The even or odd part as its own definite-parity polynomial."""
        c = self.cheb_coeffs.copy()
        c[(1 if which == "even" else 0)::2] = 0.0
        if which == "even":
            c = c[: 2 * ((len(c) - 1) // 2) + 1]
        return PolyApprox(c, which, self.interval, float("nan"), float("nan"),
                          self.scale, self.method + f"[{which}]")

    def to_json(self) -> dict:
        return {
            "coeffs": [float(v) for v in self.monomial_coeffs],
            "cheb_coeffs": [float(v) for v in self.cheb_coeffs],
            "degree": self.degree,
            "parity": self.parity,
            "interval": list(self.interval),
            "linf_error": self.linf_error,
            "sup_norm": self.sup_norm,
            "scale": self.scale,
            "method": self.method,
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PolyApprox":
        if "cheb_coeffs" in obj:
            cheb = np.asarray(obj["cheb_coeffs"], dtype=float)
        else:
            cheb = C.poly2cheb(np.asarray(obj["coeffs"], dtype=float))
        return cls(cheb, obj.get("parity", "mixed"), tuple(obj.get("interval", (-1, 1))),
                   float(obj.get("linf_error", float("nan"))),
                   float(obj.get("sup_norm", float("nan"))), float(obj.get("scale", 1.0)),
                   obj.get("method", ""), dict(obj.get("meta", {})))


def sup_norm(cheb_coeffs, lo: float = -1.0, hi: float = 1.0) -> float:
    """``max |P|`` on ``[lo, hi]``: dense Chebyshev-spaced scan plus local refinement."""
    c = np.asarray(cheb_coeffs, dtype=float)
    m = 16 * len(c) + 4001
    ys = lo + (hi - lo) * 0.5 * (1.0 - np.cos(np.linspace(0.0, math.pi, m)))
    vals = np.abs(C.chebval(ys, c))
    i = int(np.argmax(vals))
    best = float(vals[i])
    a, b = ys[max(i - 1, 0)], ys[min(i + 1, m - 1)]
    if b > a:
        res = optimize.minimize_scalar(lambda t: -abs(C.chebval(t, c)), bounds=(a, b),
                                       method="bounded", options={"xatol": 1e-15})
        best = max(best, -float(res.fun))
    return best


# Series composition --------------------------------------------------------------

def arcsin_coeffs(num_terms: int, exact: bool = False):
    """Taylor coefficients of ``arcsin(y)`` up to ``y^(num_terms - 1)``."""
    out = [Fraction(0)] * num_terms if exact else np.zeros(num_terms)
    r = Fraction(1) if exact else 1.0
    ell = 0
    while 2 * ell + 1 < num_terms:
        if ell > 0:
            r = r * (2 * ell - 1) / (2 * ell)
        out[2 * ell + 1] = r / (2 * ell + 1)
        ell += 1
    return out


def compose_with_arcsin(series, half_width: float, num_terms: int, exact: bool = False,
                        x_scale: Optional[float] = None) -> PolyApprox:
    """Coefficients of ``g(y) = f(x0 + (2 b / pi) arcsin y)`` from the series of ``f``.

    Args:
        series: Taylor coefficients ``a_k`` of ``f`` around ``x0``.
        half_width: ``b`` in the composition, so the argument spans
            ``x0 +- b`` as ``y`` runs over ``[-1, 1]``.
        num_terms: Number ``T`` of output coefficients (degree ``T - 1``).
        exact: Use rational arithmetic for the composition (slow; for small
            ``T`` and cross-checks).  The float path is accurate because every
            power of the arcsin series has nonnegative coefficients.
        x_scale: Override for the arcsin multiplier ``2 b / pi``.

    Returns:
        A mixed/definite ``PolyApprox`` on ``[-1, 1]`` whose ``meta`` records
        ``B = sum |a_k| b^k`` and ``l1 = sum |c_k|``.

    Raises:
        CompositionError: If ``sum |c_k|`` exceeds ten times ``B``.
    """
    T = int(num_terms)
    if T < 1:
        raise ValueError("num_terms must be >= 1")
    a = list(series)[:T]
    a = a + [0.0] * (T - len(a))
    s = 2.0 * half_width / math.pi if x_scale is None else x_scale
    if exact:
        sq = Fraction(s)
        u = [sq * v for v in arcsin_coeffs(T, exact=True)]
        power = [Fraction(1)] + [Fraction(0)] * (T - 1)
        out = [Fraction(0)] * T
        for k in range(T):
            ak = Fraction(a[k])
            for j in range(T):
                out[j] += ak * power[j]
            power = _mul_trunc_exact(power, u, T)
        coeffs = np.array([float(v) for v in out])
    else:
        u = s * arcsin_coeffs(T)
        power = np.zeros(T)
        power[0] = 1.0
        coeffs = np.zeros(T)
        for k in range(T):
            coeffs += a[k] * power
            power = np.convolve(power, u)[:T]
    bound = float(sum(abs(float(ak)) * half_width ** k for k, ak in enumerate(a)))
    l1 = float(np.sum(np.abs(coeffs)))
    if l1 > 10.0 * bound * (1 + 1e-12) + 1e-300:
        raise CompositionError(f"sum |c_k| = {l1:.3e} exceeds 10 B = {10 * bound:.3e}")
    parity = _detect_parity(coeffs)
    poly = PolyApprox.from_monomial(coeffs, parity=parity, method="taylor")
    poly.meta.update({"B": bound, "l1": l1, "num_terms": T})
    return poly


def _mul_trunc_exact(p, q, T):
    out = [Fraction(0)] * T
    for i, pi in enumerate(p):
        if pi == 0:
            continue
        for j in range(T - i):
            if q[j] != 0:
                out[i + j] += pi * q[j]
    return out


def _detect_parity(coeffs, tol: float = 0.0) -> str:
    c = np.asarray(coeffs, dtype=float)
    scale = max(float(np.max(np.abs(c))), 1e-300)
    if np.all(np.abs(c[1::2]) <= tol * scale):
        return "even"
    if np.all(np.abs(c[0::2]) <= tol * scale):
        return "odd"
    return "mixed"


def truncation_bound(B: float, nu: float, T: int) -> float:
    """Truncation error ``B (1 - nu)^T`` of a ``T``-term composed series on ``[-1+nu, 1-nu]``."""
    if not (0 < nu <= 1) or T < 1 or B <= 0:
        raise PreconditionError("need 0 < nu <= 1, T >= 1, B > 0")
    return B * (1.0 - nu) ** T


def truncation_terms(B: float, nu: float, delta: float) -> int:
    """Smallest ``T >= ln(B / delta) / nu`` (at least 1)."""
    return max(1, math.ceil(math.log(B / delta) / nu))


def degree_bound_gaussian(beta: float, delta: float) -> int:
    """Sufficient degree for ``exp(-beta arcsin(y)^2 / 2)`` on ``[-sin 1, sin 1]``."""
    if beta < 0 or delta <= 0:
        raise PreconditionError("need beta >= 0 and delta > 0")
    return max(0, math.ceil((beta * math.pi**2 / 8 + math.log(1 / delta)) / NU - 1))


def degree_bound_kaiser(beta: float, delta: float) -> int:
    """Sufficient degree for the Kaiser window composed with ``sin`` on ``[-sin 1, sin 1]``."""
    if beta < 0 or delta <= 0:
        raise PreconditionError("need beta >= 0 and delta > 0")
    return max(0, math.ceil((beta + math.log(1 / delta)) / NU - 1))


# Encodings and targets ------------------------------------------------------------

@dataclass(frozen=True)
class Encoding:
    """How register values map to ``y`` and back to function arguments.

    Attributes:
        symmetric: Two's-complement register with ``y = sin(2 s / N)``.
        x0: Function argument at ``y = 0``.
        c: Multiplier so that ``x = x0 + c * arcsin(y)``.
        interval: Range of ``y`` reached by the register.
        parity: Parity of ``h`` in ``y`` (``mixed`` when none).
    """

    symmetric: bool
    x0: float
    c: float
    interval: tuple
    parity: str

    @property
    def half_width(self) -> float:
        """``b`` of the arcsin composition: ``2 b / pi = c``."""
        return 0.5 * math.pi * self.c

    def to_json(self) -> dict:
        return {"symmetric": self.symmetric, "x0": self.x0, "c": self.c,
                "interval": list(self.interval), "parity": self.parity}


def choose_encoding(spec: FunctionSpec, parity_mode: str = "auto") -> Encoding:
    """Picks the register encoding and the parity of the polynomial to build.

    Declared even/odd functions use the symmetric encoding.  Otherwise the
    generic encoding is used and ``h`` is tested numerically for parity (for
    example ``tanh`` on ``[0, 1]`` gives the odd ``tanh(arcsin y)``).
    """
    if parity_mode not in ("auto", "definite", "mixed"):
        raise ValueError(f"bad parity mode {parity_mode!r}")
    a, b = spec.domain
    if spec.parity in ("even", "odd") and parity_mode != "mixed":
        return Encoding(True, spec.center, 0.5 * (b - a), (-SIN1, SIN1), spec.parity)
    parity = "mixed"
    if parity_mode != "mixed" and spec.kind != "cycloid":
        ys = np.linspace(0.0, 1.0, 257)
        try:
            hp = evaluate(spec, a + (b - a) * np.arcsin(ys), extend=True)
            hm = evaluate(spec, a - (b - a) * np.arcsin(ys), extend=True)
        except (ValueError, ArithmeticError):
            hp = hm = None
        if hp is not None:
            tol = 1e-12 * max(1.0, float(np.max(np.abs(hp))))
            if np.max(np.abs(hp + hm)) <= tol:
                parity = "odd"
            elif np.max(np.abs(hp - hm)) <= tol:
                parity = "even"
    if parity_mode == "definite" and parity == "mixed":
        raise PreconditionError("function has no definite parity under the encoding")
    return Encoding(False, a, b - a, (0.0, SIN1), parity)


def target_function(spec: FunctionSpec, enc: Encoding) -> Callable:
    """``h_hat(y) = f(x0 + c arcsin y) / max|f|``, evaluable on ``[-1, 1]`` when possible."""
    m = spec.max_abs

    def h_hat(y):
        return evaluate(spec, enc.x0 + enc.c * np.arcsin(np.asarray(y, dtype=float)),
                        extend=True) / m

    return h_hat


def measure_linf(P: PolyApprox, target: Callable, grid: int = 100_001,
                 interval: Optional[tuple] = None) -> float:
    """``max |P(y) / scale - target(y)|`` over a uniform grid on the working interval."""
    if grid < 1000:
        raise PreconditionError("grid must have at least 1000 points")
    lo, hi = P.interval if interval is None else interval
    ys = np.linspace(lo, hi, grid)
    return float(np.max(np.abs(P(ys) / P.scale - target(ys))))


# Fitting ---------------------------------------------------------------------------

def _finish(P: PolyApprox, target, grid=200_001) -> PolyApprox:
    P.linf_error = measure_linf(P, target, grid)
    if 1.0 < P.sup_norm <= SUP_MARGINAL:
        P = P.scaled((1.0 - 1e-8) / P.sup_norm)
        P.sup_norm = min(P.sup_norm, 1.0 - 1e-8)
    P.meta["qsp_ready"] = P.qsp_ready
    return P


def taylor_approx(spec: FunctionSpec, enc: Encoding, degree: int) -> PolyApprox:
    """Degree-``degree`` truncation of the composed Taylor series, normalised by ``max|f|``."""
    series = taylor_coeffs(spec, enc.x0, degree + 1)
    comp = compose_with_arcsin(series, enc.half_width, degree + 1)
    coeffs = comp.monomial_coeffs / spec.max_abs
    parity = enc.parity if enc.parity != "mixed" else _detect_parity(coeffs)
    P = PolyApprox.from_monomial(coeffs, parity=parity, interval=enc.interval, method="taylor",
                                 meta={"B": comp.meta["B"] / spec.max_abs,
                                       "l1": comp.meta["l1"] / spec.max_abs})
    return _finish(P, target_function(spec, enc))


def fit_chebyshev(target: Callable, degree: int, parity: str = "mixed",
                  interval: tuple = (-1.0, 1.0), fit_domain: Optional[tuple] = None) -> PolyApprox:
    """Chebyshev interpolation of ``target`` with the requested parity.

    The target is sampled at the ``degree + 1`` Chebyshev points of
    ``fit_domain`` and the coefficients of the wrong parity are discarded.
    By default ``fit_domain`` is the working interval, widened to be symmetric
    about 0 for definite parity.  Interpolating on all of ``[-1, 1]`` converges
    slowly because ``arcsin`` has branch points at ``+-1``.  The measured L-inf error
    on ``interval`` and the sup norm on ``[-1, 1]`` are recorded; a sup norm in
    ``(1, 1.01]`` is shrunk to ``1 - 1e-8``.  Larger overshoots leave the
    result flagged as not QSP-ready.
    """
    d = int(degree)
    if fit_domain is None:
        if parity == "mixed":
            fit_domain = interval
        else:
            r = max(abs(interval[0]), abs(interval[1]))
            fit_domain = (-r, r)
    lo, hi = fit_domain
    series = C.Chebyshev.interpolate(lambda y: np.asarray(target(y), dtype=float), d,
                                     domain=[lo, hi])
    cheb = series.convert(domain=[-1, 1], kind=C.Chebyshev).coef
    cheb = np.pad(cheb, (0, max(0, d + 1 - len(cheb))))
    P = PolyApprox(cheb, parity, interval, method="chebyshev", meta={"requested_degree": d})
    return _finish(P, target)


def fit_minimax(target: Callable, degree: int, parity: str = "mixed",
                interval: tuple = (0.0, SIN1), bound: float = 1.0 - 1e-6,
                work_points: int = 2000, box_points: int = 2000,
                points=None) -> PolyApprox:
    """Discrete minimax fit with a global bound, solved as a linear program.

    Minimises ``max |P(y_i) - target(y_i)|`` over Chebyshev-spaced points of
    ``interval`` subject to ``|P(z_j)| <= bound`` on a grid of ``[-1, 1]``.
    Only the target values on the working interval are used.  Passing
    ``points`` fits at those abscissae instead, e.g. at the signal values of
    a register grid when nothing between them matters.
    """
    d = int(degree)
    ks = np.arange(d + 1)
    if parity == "even":
        ks = ks[ks % 2 == 0]
    elif parity == "odd":
        ks = ks[ks % 2 == 1]
    lo, hi = interval
    if points is None:
        yw = lo + (hi - lo) * 0.5 * (1 - np.cos(np.linspace(0, math.pi, work_points)))
    else:
        yw = np.asarray(points, dtype=float)
    zb = np.cos(np.linspace(0, math.pi, box_points))
    Aw = np.cos(np.outer(np.arccos(yw), ks))
    Ab = np.cos(np.outer(np.arccos(zb), ks))
    fw = np.asarray(target(yw), dtype=float)
    nv = len(ks)
    ones_w = np.ones((len(yw), 1))
    zeros_b = np.zeros((len(zb), 1))
    A_ub = np.vstack([
        np.hstack([Aw, -ones_w]), np.hstack([-Aw, -ones_w]),
        np.hstack([Ab, zeros_b]), np.hstack([-Ab, zeros_b]),
    ])
    b_ub = np.concatenate([fw, -fw, np.full(len(zb), bound), np.full(len(zb), bound)])
    cost = np.zeros(nv + 1)
    cost[-1] = 1.0
    res = optimize.linprog(cost, A_ub=A_ub, b_ub=b_ub,
                           bounds=[(None, None)] * nv + [(0, None)], method="highs")
    if res.status != 0:
        raise ConvergenceError(f"minimax linear program failed: {res.message}")
    cheb = np.zeros(d + 1)
    cheb[ks] = res.x[:nv]
    P = PolyApprox(cheb, parity, interval, method="minimax",
                   meta={"requested_degree": d, "lp_error": float(res.x[-1]), "bound": bound})
    if points is not None:
        P.linf_error = float(res.x[-1])
        P.meta["qsp_ready"] = P.qsp_ready
        return P
    return _finish(P, target)


def approximate(spec: FunctionSpec, method: str = "taylor", degree: Optional[int] = None,
                delta: Optional[float] = None, parity_mode: str = "auto",
                max_degree: int = 400, minimax_bound: float = 1.25) -> tuple:
    """Builds the polynomial for ``spec`` and returns ``(PolyApprox, Encoding)``.

    Either ``degree`` is given, or the smallest degree whose measured error is
    at most ``delta`` is searched for.  The chebyshev method falls back to the
    bounded minimax fit when the interpolant exceeds ``minimax_bound`` on
    ``[-1, 1]``.  Minimax fits may exceed 1 on ``[-1, 1]``
    by up to ``minimax_bound``; a target that peaks at the edge of the working
    interval cannot be fitted accurately under a bound of exactly 1.  Use
    :func:`make_qsp_ready` afterwards to shrink the result.

    Raises:
        ConvergenceError: If no degree up to ``max_degree`` reaches ``delta``.
    """
    enc = choose_encoding(spec, parity_mode)
    target = target_function(spec, enc)

    def build(d):
        if method == "taylor":
            return taylor_approx(spec, enc, d)
        if method == "chebyshev":
            if enc.parity == "mixed":
                return fit_minimax(target, d, "mixed", enc.interval, minimax_bound)
            P = fit_chebyshev(target, d, enc.parity, enc.interval)
            if P.sup_norm > minimax_bound:
                # The interpolant grows too fast outside the working interval.
                P = fit_minimax(target, d, enc.parity, enc.interval, minimax_bound)
                P.meta["fallback"] = "minimax"
            return P
        if method == "minimax":
            return fit_minimax(target, d, enc.parity, enc.interval, minimax_bound)
        raise ValueError(f"unknown method {method!r}")

    if degree is not None:
        return build(int(degree)), enc
    if delta is None:
        raise ValueError("either degree or delta is required")
    step = 1 if enc.parity == "mixed" else 2
    start = {"even": 0, "odd": 1}.get(enc.parity, 0)
    candidates = list(range(start, max_degree + 1, step))
    # Doubling then bisection over the candidate degrees; the error is
    # assumed to decrease with the degree.
    cache = {}

    def ok(i):
        if i not in cache:
            cache[i] = build(candidates[i])
        return cache[i].linf_error <= delta

    lo, hi = -1, 0
    while not ok(hi):
        lo = hi
        if hi == len(candidates) - 1:
            raise ConvergenceError(f"no degree <= {max_degree} reaches delta={delta}",
                                   cache[hi].linf_error)
        hi = min(2 * hi + 1, len(candidates) - 1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return cache[hi], enc


def make_qsp_ready(P: PolyApprox, margin: float = 1e-6) -> PolyApprox:
    """Uniformly shrinks ``P`` so that ``sup |P| <= 1 - margin``."""
    if P.sup_norm <= 1.0 - margin:
        return P
    Q = P.scaled((1.0 - margin) / P.sup_norm)
    Q.meta["qsp_ready"] = True
    return Q
