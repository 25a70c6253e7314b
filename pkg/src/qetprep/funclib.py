"""Target amplitude functions: definitions, evaluation and Taylor data.

A :class:`FunctionSpec` describes a real function ``f`` on a closed interval
``[a, b]`` together with parity metadata.  Supported kinds are ``tanh``,
``gaussian`` (``exp(-beta x^2 / 2)``), ``kaiser`` (the Kaiser window
``I0(beta sqrt(1 - x^2)) / I0(beta)``), ``cycloid`` and user-supplied
polynomial ``series`` around a center point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import optimize, special

from .errors import ConvergenceError, DomainError

KINDS = ("tanh", "gaussian", "kaiser", "cycloid", "series")
PARITIES = ("even", "odd", "none")

_I0_REL_CUTOFF = 1e-17
_CYCLOID_TOL = 1e-12


@dataclass(frozen=True)
class FunctionSpec:
    """A target amplitude function on a closed interval.

    Attributes:
        kind: One of ``tanh``, ``gaussian``, ``kaiser``, ``cycloid``, ``series``.
        params: Kind-specific parameters (``beta`` for gaussian/kaiser,
            ``coeffs`` and ``center`` for series).
        domain: The interval ``(a, b)`` in function units.
        parity: ``even``, ``odd`` or ``none`` about the domain center.
        max_abs: ``max |f|`` over the domain.  Computed on construction when
            not supplied.
    """

    kind: str
    params: dict = field(default_factory=dict)
    domain: tuple = (0.0, 1.0)
    parity: str = "none"
    max_abs: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")
        if self.parity not in PARITIES:
            raise ValueError(f"unknown parity {self.parity!r}")
        a, b = float(self.domain[0]), float(self.domain[1])
        if not a < b:
            raise ValueError("domain must satisfy a < b")
        object.__setattr__(self, "domain", (a, b))
        object.__setattr__(self, "params", dict(self.params))
        if self.kind in ("gaussian", "kaiser"):
            if float(self.params.get("beta", -1.0)) < 0:
                raise ValueError(f"{self.kind} requires beta >= 0")
        if self.kind == "kaiser" and (a < -1.0 or b > 1.0):
            raise ValueError("kaiser window is defined on [-1, 1]")
        if self.kind == "cycloid" and (a < 0.0 or b > 2 * math.pi + 1e-12):
            raise ValueError("cycloid is defined on [0, 2 pi]")
        if self.kind == "series":
            if len(self.params.get("coeffs", ())) == 0:
                raise ValueError("series requires at least one coefficient")
            self.params.setdefault("center", 0.0)
        if self.max_abs is None:
            object.__setattr__(self, "max_abs", _compute_max_abs(self))

    @property
    def center(self) -> float:
        return 0.5 * (self.domain[0] + self.domain[1])

    @property
    def width(self) -> float:
        return self.domain[1] - self.domain[0]

    def __call__(self, x):
        return evaluate(self, x)

    # Convenience constructors -------------------------------------------------

    @classmethod
    def tanh(cls, domain=(0.0, 1.0)):
        parity = "odd" if math.isclose(domain[0], -domain[1]) else "none"
        return cls("tanh", {}, tuple(domain), parity)

    @classmethod
    def gaussian(cls, beta, domain=(-1.0, 1.0)):
        parity = "even" if math.isclose(domain[0], -domain[1]) else "none"
        return cls("gaussian", {"beta": float(beta)}, tuple(domain), parity)

    @classmethod
    def kaiser(cls, beta, domain=(-1.0, 1.0)):
        parity = "even" if math.isclose(domain[0], -domain[1]) else "none"
        return cls("kaiser", {"beta": float(beta)}, tuple(domain), parity)

    @classmethod
    def cycloid(cls):
        return cls("cycloid", {}, (0.0, 2 * math.pi), "none", max_abs=1.0)

    @classmethod
    def series(cls, coeffs, center=0.0, domain=(-1.0, 1.0), parity="none"):
        return cls(
            "series",
            {"coeffs": [float(c) for c in coeffs], "center": float(center)},
            tuple(domain),
            parity,
        )

    # Serialization ------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "domain": [self.domain[0], self.domain[1]],
            "parity": self.parity,
            "max_abs": self.max_abs,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FunctionSpec":
        return cls(
            kind=obj["kind"],
            params=dict(obj.get("params", {})),
            domain=tuple(obj.get("domain", (0.0, 1.0))),
            parity=obj.get("parity", "none"),
            max_abs=obj.get("max_abs"),
        )


def evaluate(spec: FunctionSpec, x, extend: bool = False):
    """Evaluates ``f(x)``.

    Args:
        spec: The function.
        x: Scalar or array of points.
        extend: Allow points outside the declared domain where the formula
            extends analytically (all kinds except the cycloid).  Used by the
            fitting code, which samples the composed target on ``[-1, 1]``.

    Returns:
        A float for scalar input, otherwise an array.

    Raises:
        DomainError: If a point lies outside ``[a, b]`` and ``extend`` is off.
    """
    xs = np.asarray(x, dtype=float)
    a, b = spec.domain
    slack = 1e-12 * max(1.0, b - a)
    if not extend or spec.kind == "cycloid":
        if np.any(xs < a - slack) or np.any(xs > b + slack):
            raise DomainError(f"point outside [{a}, {b}]")
        if spec.kind == "cycloid":
            xs = np.clip(xs, a, b)
    if spec.kind == "tanh":
        out = np.tanh(xs)
    elif spec.kind == "gaussian":
        out = np.exp(-0.5 * spec.params["beta"] * xs * xs)
    elif spec.kind == "kaiser":
        out = _kaiser(xs, spec.params["beta"])
    elif spec.kind == "cycloid":
        out = 0.5 * (1.0 - np.cos(cycloid_phase(xs)))
    else:
        coeffs = np.asarray(spec.params["coeffs"], dtype=float)
        out = np.polynomial.polynomial.polyval(xs - spec.params["center"], coeffs)
    if np.ndim(out) == 0:
        return float(out)
    return out


def bessel_i0(z):
    """Modified Bessel function ``I0`` by direct power-series summation.

    The series ``sum_k (z^2/4)^k / (k!)^2`` is summed until the next term falls
    below ``1e-17`` relative to the partial sum.

    Raises:
        DomainError: For negative ``z``.
        OverflowError: When the result exceeds double precision.
    """
    zs = np.asarray(z, dtype=float)
    if np.any(zs < 0):
        raise DomainError("bessel_i0 requires z >= 0")
    q = 0.25 * zs * zs
    term = np.ones_like(zs)
    total = np.ones_like(zs)
    k = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            k += 1
            term = term * q / (k * k)
            total = total + term
            if not np.all(np.isfinite(total)):
                raise OverflowError("bessel_i0 overflow")
            if np.all(term <= _I0_REL_CUTOFF * total):
                break
    if total.ndim == 0:
        return float(total)
    return total


def _kaiser(xs, beta):
    xs = np.asarray(xs, dtype=float)
    norm = bessel_i0(beta)
    s = 1.0 - xs * xs
    inside = s >= 0
    out = np.empty_like(xs)
    out[inside] = bessel_i0(beta * np.sqrt(s[inside])) / norm
    # Outside [-1, 1] the window continues analytically as J0.
    out[~inside] = special.j0(beta * np.sqrt(-s[~inside])) / norm
    return out


def cycloid_phase(x):
    """Inverts ``x = t - sin t`` on ``[0, 2 pi]``.

    Bracketed bisection (the map is monotone) followed by Newton polishing.

    Raises:
        ConvergenceError: If the final residual exceeds ``1e-12``.
    """
    xs = np.asarray(x, dtype=float)
    lo = np.zeros_like(xs)
    hi = np.full_like(xs, 2 * math.pi)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = mid - np.sin(mid) < xs
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    t = 0.5 * (lo + hi)
    for _ in range(2):
        slope = 1.0 - np.cos(t)
        safe = slope > 1e-8
        step = np.where(safe, (t - np.sin(t) - xs) / np.where(safe, slope, 1.0), 0.0)
        t = np.clip(t - step, 0.0, 2 * math.pi)
    residual = float(np.max(np.abs(t - np.sin(t) - xs), initial=0.0))
    if residual > _CYCLOID_TOL:
        raise ConvergenceError("cycloid inversion did not converge", residual)
    if t.ndim == 0:
        return float(t)
    return t


@dataclass
class FourierSeries:
    """Cosine series ``sum_k c_k cos(2 pi k (x - a) / (b - a))`` on ``[a, b]``.

    Attributes:
        coeffs: Coefficients ``c_0 .. c_d``.
        domain: The period interval.
        grid_size: Quadrature points used to compute the coefficients.
        coarse: True when the grid had fewer than 8 points per coefficient.
    """

    coeffs: np.ndarray
    domain: tuple = (0.0, 2 * math.pi)
    grid_size: int = 0
    coarse: bool = False

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        a, b = self.domain
        theta = 2 * math.pi * (np.asarray(x, dtype=float) - a) / (b - a)
        # cos(k theta) = T_k(cos theta)
        return np.polynomial.chebyshev.chebval(np.cos(theta), self.coeffs)

    def to_json(self) -> dict:
        return {
            "kind": "fourier-cosine",
            "coeffs": [float(c) for c in self.coeffs],
            "degree": self.degree,
            "domain": list(self.domain),
            "grid_size": self.grid_size,
            "coarse": self.coarse,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(np.asarray(obj["coeffs"], dtype=float), tuple(obj["domain"]),
                   int(obj.get("grid_size", 0)), bool(obj.get("coarse", False)))


def cosine_series(func, domain, num_terms: int, grid_size: int = 2**16) -> FourierSeries:
    """Cosine-series coefficients of ``func`` by the periodic trapezoidal rule."""
    if num_terms < 1:
        raise ValueError("num_terms must be >= 1")
    a, b = float(domain[0]), float(domain[1])
    theta = 2 * math.pi * np.arange(grid_size) / grid_size
    samples = np.asarray(func(a + (b - a) * theta / (2 * math.pi)), dtype=float)
    coeffs = np.empty(num_terms + 1)
    for k in range(num_terms + 1):
        coeffs[k] = 2.0 * np.mean(samples * np.cos(k * theta))
    coeffs[0] *= 0.5
    return FourierSeries(coeffs, (a, b), grid_size, grid_size < 8 * num_terms)


def cycloid_fourier_coeffs(num_terms: int, grid_size: int = 2**16) -> FourierSeries:
    """Cosine series ``c_0 .. c_d`` (``d = num_terms``) of the cycloid on ``[0, 2 pi]``."""
    spec = FunctionSpec.cycloid()
    return cosine_series(lambda x: evaluate(spec, x), spec.domain, num_terms, grid_size)


def fourier_l2_error(series: FourierSeries, func=None, grid_size: int = 2**16) -> float:
    """Root-mean-square reconstruction error over one period.

    Computed as ``sqrt(mean((f - S)^2))`` on a midpoint grid, which is the L2
    norm normalised by the period length.  ``func`` defaults to the cycloid.
    """
    if func is None:
        spec = FunctionSpec.cycloid()
        func = lambda x: evaluate(spec, x)  # noqa: E731
    a, b = series.domain
    xs = a + (b - a) * (np.arange(grid_size) + 0.5) / grid_size
    err = np.asarray(func(xs)) - series(xs)
    return float(np.sqrt(np.mean(err * err)))


# Maximum magnitude -------------------------------------------------------------

def _compute_max_abs(spec: FunctionSpec, grid: int = 100_001) -> float:
    a, b = spec.domain
    xs = np.linspace(a, b, grid)
    vals = np.abs(evaluate(spec, xs))
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda t: -abs(evaluate(spec, t)), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-14 * max(1.0, b - a)},
        )
        best = max(best, -float(res.fun))
    return best


# Taylor coefficients -----------------------------------------------------------

def taylor_coeffs(spec: FunctionSpec, x0: float, num_terms: int) -> np.ndarray:
    """First ``num_terms`` Taylor coefficients ``a_k`` of ``f`` around ``x0``.

    Raises:
        ValueError: For kinds without a closed-form series (cycloid) or a
            Kaiser expansion point other than 0.
    """
    T = int(num_terms)
    if T < 1:
        raise ValueError("num_terms must be >= 1")
    if spec.kind == "tanh":
        return _tanh_taylor(x0, T)
    if spec.kind == "gaussian":
        beta = spec.params["beta"]
        k = np.arange(T)
        even = np.zeros(T)
        even[::2] = np.array([(-beta / 2) ** j / math.factorial(j) for j in range(0, (T + 1) // 2)])
        if x0 == 0.0:
            return even
        lin = np.array([(-beta * x0) ** j / math.factorial(j) for j in k])
        return math.exp(-beta * x0 * x0 / 2) * np.convolve(lin, even)[:T]
    if spec.kind == "kaiser":
        if x0 != 0.0:
            raise ValueError("kaiser Taylor data is only available around 0")
        return _kaiser_taylor(spec.params["beta"], T)
    if spec.kind == "series":
        return _shift_poly(np.asarray(spec.params["coeffs"], dtype=float),
                           x0 - spec.params["center"], T)
    raise ValueError(f"no Taylor series available for kind {spec.kind!r}")


def _tanh_taylor(x0, T):
    # t' = 1 - t^2  gives  (k+1) t_{k+1} = [k == 0] - sum_{i+j=k} t_i t_j.
    if x0 == 0.0:
        t = [Fraction(0)] * T
        for k in range(T - 1):
            conv = sum((t[i] * t[k - i] for i in range(k + 1)), Fraction(0))
            t[k + 1] = ((1 if k == 0 else 0) - conv) / (k + 1)
        return np.array([float(v) for v in t])
    t = np.zeros(T)
    t[0] = math.tanh(x0)
    for k in range(T - 1):
        conv = float(np.dot(t[: k + 1], t[k::-1]))
        t[k + 1] = ((1.0 if k == 0 else 0.0) - conv) / (k + 1)
    return t


def _kaiser_taylor(beta, T):
    out = np.zeros(T)
    if beta == 0.0:
        out[0] = 1.0
        return out
    log_q = 2.0 * math.log(beta / 2.0)
    log_norm = math.log(bessel_i0(beta))
    kmax_extra = int(2 * beta) + 80
    for j in range(0, (T + 1) // 2):
        ks = np.arange(j, j + kmax_extra)
        logs = (ks * log_q - special.gammaln(j + 1) - special.gammaln(ks - j + 1)
                - special.gammaln(ks + 1) - log_norm)
        out[2 * j] = (-1) ** j * float(np.sum(np.exp(logs)))
    return out


def _shift_poly(coeffs, shift, T):
    """Coefficients of ``p(shift + t)`` in powers of ``t``, padded to ``T``."""
    d = len(coeffs)
    out = np.zeros(max(T, d))
    for k, c in enumerate(coeffs):
        for j in range(k + 1):
            out[j] += c * math.comb(k, j) * shift ** (k - j)
    return out[:T]
