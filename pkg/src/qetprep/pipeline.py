"""End-to-end orchestration: approximation, phases, circuits, simulation, costs."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analysis, circuits, resources
from .approx import (PolyApprox, approximate, choose_encoding, fit_minimax,
                     make_qsp_ready)
from .errors import PreconditionError, WidthError
from .funclib import FourierSeries, FunctionSpec, cosine_series, evaluate, fourier_l2_error
from .qsp import PhaseSet, solve_mixed, solve_phases
from .simulator import extract_block_diagonal, max_width_from_env, run

METHODS = ("taylor", "chebyshev", "minimax", "fourier")
AA_MODES = ("exact", "estimate-with-penalty", "none")
SIMULATE_MAX_N = 14
QSP_MARGIN = 1e-6


@dataclass
class JobConfig:
    """Everything one pipeline run needs.

    Attributes:
        function: Target function.
        n: Register size for simulation.
        target_epsilon: Trace-distance budget used for automatic degree selection.
        method: ``taylor``, ``chebyshev``, ``minimax`` or ``fourier``.
        degree: Fixed polynomial degree (or number of Fourier terms); chosen
            from ``target_epsilon`` when omitted.
        parity_mode: ``auto``, ``definite`` or ``mixed``.
        aa_mode: ``exact`` plans with the exact grid amplitude,
            ``estimate-with-penalty`` with the continuum filling fraction,
            ``none`` skips amplification.
        estimate_n: Register size used for cost estimates (defaults to ``n``).
        seed: Seed for the phase solver restarts.
        outputs: Optional file names keyed by artefact.
    """

    function: FunctionSpec
    n: int = 8
    target_epsilon: float = 1e-6
    method: str = "taylor"
    degree: Optional[int] = None
    parity_mode: str = "auto"
    aa_mode: str = "exact"
    estimate_n: Optional[int] = None
    seed: int = 0
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.target_epsilon < 0.5:
            raise PreconditionError("target_epsilon must lie in (0, 0.5)")
        if self.method not in METHODS:
            raise PreconditionError(f"method must be one of {METHODS}")
        if self.aa_mode not in AA_MODES:
            raise PreconditionError(f"aa_mode must be one of {AA_MODES}")
        if self.n < 1:
            raise PreconditionError("n must be >= 1")

    @classmethod
    def from_json(cls, obj: dict) -> "JobConfig":
        obj = dict(obj)
        obj.pop("schema", None)
        fn = obj.pop("function")
        spec = fn if isinstance(fn, FunctionSpec) else FunctionSpec.from_json(fn)
        return cls(spec, **obj)

    def to_json(self) -> dict:
        return {
            "function": self.function.to_json(),
            "n": self.n,
            "target_epsilon": self.target_epsilon,
            "method": self.method,
            "degree": self.degree,
            "parity_mode": self.parity_mode,
            "aa_mode": self.aa_mode,
            "estimate_n": self.estimate_n,
            "seed": self.seed,
            "outputs": dict(self.outputs),
        }


# Approximation -------------------------------------------------------------------------

def target_values(spec: FunctionSpec, enc, n: int) -> np.ndarray:
    """``f(xbar) / max|f|`` in register-index order for the chosen encoding."""
    N = 2**n
    a, b = spec.domain
    v = circuits.register_values(n, enc.symmetric)
    xbar = (0.5 * (a + b) if enc.symmetric else a) + (b - a) * v / N
    return evaluate(spec, xbar) / spec.max_abs


def delta_budget(spec: FunctionSpec, epsilon: float, n: Optional[int] = None) -> float:
    """Sup-norm error that keeps the trace distance below ``epsilon``.

    With ``F`` the filling fraction of ``f`` the approximant has filling at
    least ``F - delta``, so ``delta / (F - delta) <= epsilon`` is enough.
    """
    stats = analysis.filling_fraction(spec, 2 ** (n or 10))
    F = stats.filling_inf
    if n is not None:
        F = min(F, stats.filling_N)
    return epsilon * F / (1 + epsilon)


def run_approx(cfg: JobConfig):
    """Builds the approximant for ``cfg``.

    Returns:
        ``(approximant, encoding, report)``; the approximant is a QSP-ready
        :class:`PolyApprox`, or a :class:`FourierSeries` in Fourier mode
        (encoding ``None``).
    """
    spec = cfg.function
    if cfg.method == "fourier":
        terms = cfg.degree if cfg.degree is not None else 120
        series = cosine_series(lambda x: evaluate(spec, x), spec.domain, terms)
        l2 = fourier_l2_error(series, lambda x: evaluate(spec, x))
        fill = analysis.filling_fraction(series, 2**16, spec.domain)
        report = {"method": "fourier", "degree": series.degree, "l2_error": l2,
                  "filling_inf": fill.filling_inf, "filling_N": fill.filling_N,
                  "max_abs": fill.max_abs}
        return series, None, report
    if cfg.degree is not None:
        P, enc = approximate(spec, cfg.method, degree=cfg.degree, parity_mode=cfg.parity_mode)
        delta = None
    else:
        delta = delta_budget(spec, cfg.target_epsilon, cfg.n)
        P, enc = approximate(spec, cfg.method, delta=delta, parity_mode=cfg.parity_mode)
    raw_sup = P.sup_norm
    P = make_qsp_ready(P, QSP_MARGIN)
    report = {"method": cfg.method, "degree": P.degree, "parity": P.parity,
              "linf_error": P.linf_error, "delta_budget": delta, "sup_before": raw_sup,
              "sup_norm": P.sup_norm, "scale": P.scale, "encoding": enc.to_json()}
    return P, enc, report


def run_angles(P: PolyApprox, seed: int = 0):
    """Phase factors for ``P``: one :class:`PhaseSet`, or ``(even, odd)`` when mixed."""
    if P.parity == "mixed":
        return solve_mixed(P, seed=seed)
    return solve_phases(P, seed=seed)


def phases_report(phases) -> dict:
    sets = phases if isinstance(phases, tuple) else (phases,)
    return {"sets": [ps.to_json() for ps in sets],
            "max_residual": max(ps.residual for ps in sets)}


# Simulation ----------------------------------------------------------------------------

def build_block(P: PolyApprox, phases, enc, n: int) -> circuits.Circuit:
    return circuits.build_qet(circuits.build_usin(n, enc.symmetric), phases)


def amplitude_of(P: PolyApprox, enc, n: int) -> float:
    """Exact good-state amplitude of ``U_f H^n |0>`` from the grid values of ``P``."""
    vals = P(circuits.signal_values(n, enc.symmetric))
    stats = analysis.FillingStats(
        float(np.linalg.norm(vals) / math.sqrt(2**n)),
        float(np.linalg.norm(vals) / math.sqrt(2**n) / np.max(np.abs(vals))),
        float("nan"), 2**n, float(np.max(np.abs(vals))))
    return analysis.success_amplitude(P, stats, P.parity == "mixed")


def plan_for(cfg: JobConfig, P: PolyApprox, enc, n: int):
    """Amplification plan and the amplitude it acts on."""
    a_true = amplitude_of(P, enc, n)
    if cfg.aa_mode == "none":
        return analysis.AAPlan(a_true, 0, math.pi / 2, 0.0), a_true
    if cfg.aa_mode == "exact":
        return analysis.plan_exact_aa(min(1.0, a_true)), a_true
    sub = 0.5 if P.parity == "mixed" else 1.0
    F_inf = analysis.filling_fraction(cfg.function, 2**n).filling_inf
    a_design = min(1.0, sub * abs(P.scale) * F_inf)
    return analysis.plan_exact_aa(a_design, a_estimate=a_true), a_true


def _good_amplitude(circuit: circuits.Circuit, n: int, ref: np.ndarray):
    state = run(circuit)
    psi = state.project(n)
    return psi, float(np.vdot(ref, psi).real)


def run_simulation(cfg: JobConfig, P: Optional[PolyApprox] = None, enc=None, phases=None,
                   trajectory: bool = True) -> dict:
    """Simulates the full preparation circuit and compares it with the exact state.

    Reports the measured trace distance together with the practical bound
    ``D(f, P) + D(P, simulated)`` and the rigorous bound
    ``(delta + eta) / min(F_f, F_P)``, where ``delta`` is the approximation
    error and ``eta`` the largest deviation of the simulated block from ``P``.

    Raises:
        WidthError: ``n`` above the simulation guard (``QETPREP_MAX_WIDTH``
            overrides it).
    """
    n = cfg.n
    if cfg.method == "fourier":
        raise PreconditionError("Fourier mode supports approx and estimate only")
    limit = max_width_from_env(SIMULATE_MAX_N)
    if n > limit:
        raise WidthError(f"n={n} exceeds the simulation guard {limit}")
    t0 = time.perf_counter()
    if P is None:
        P, enc, _ = run_approx(cfg)
    if enc is None:
        enc = choose_encoding(cfg.function, cfg.parity_mode)
    if phases is None:
        phases = run_angles(P, cfg.seed)
    block = build_block(P, phases, enc, n)
    sub = block.subnormalization
    ys = circuits.signal_values(n, enc.symmetric)
    f_hat = target_values(cfg.function, enc, n)
    p_vals = P(ys)
    p_hat = p_vals / P.scale
    diag = extract_block_diagonal(block, n)
    eta = float(np.max(np.abs(diag / sub - p_vals))) / abs(P.scale)

    plan, a_true = plan_for(cfg, P, enc, n)
    amplified = circuits.build_amplified(block, plan.rounds, plan.phi)
    ref = f_hat / np.linalg.norm(f_hat)
    psi, signed = _good_amplitude(amplified, n, ref)
    good_prob = float(np.vdot(psi, psi).real)

    measured = analysis.vector_trace_distance(f_hat, psi)
    d_fp = analysis.vector_trace_distance(f_hat, p_hat)
    d_ps = analysis.vector_trace_distance(p_hat, psi)
    practical = d_fp + d_ps
    F_f = float(np.linalg.norm(f_hat) / math.sqrt(2**n))
    F_p = float(np.linalg.norm(p_hat) / math.sqrt(2**n))
    delta = max(P.linf_error, float(np.max(np.abs(p_hat - f_hat))))
    rigorous = analysis.trace_distance_rigorous(delta + eta, F_f, F_p)
    fid = float(abs(np.vdot(ref, psi / np.linalg.norm(psi))) ** 2)

    traj = []
    if trajectory:
        for k in range(plan.rounds + 1):
            circ = amplified if k == plan.rounds else circuits.build_amplified(block, k, plan.phi)
            p_k, s_k = _good_amplitude(circ, n, ref)
            traj.append({"round": k, "amplitude": s_k,
                         "good_probability": float(np.vdot(p_k, p_k).real)})

    return {
        "n": n,
        "degree": P.degree,
        "parity": P.parity,
        "width": amplified.width,
        "ancillas": amplified.ancilla_count,
        "gate_count": len(amplified.gates),
        "subnormalization": sub,
        "scale": P.scale,
        "success_amplitude": a_true,
        "plan": plan.to_json(),
        "final_amplitude": signed,
        "good_probability": good_prob,
        "fidelity": fid,
        "trace_distance": measured,
        "practical_bound": practical,
        "practical_grid_term": d_fp,
        "rigorous_bound": rigorous,
        "delta": delta,
        "eta": eta,
        "filling_f": F_f,
        "filling_ftilde": F_p,
        "trajectory": traj,
        "state": [[float(v.real), float(v.imag)] for v in psi],
        "target": [float(v) for v in ref],
        "register_values": [int(v) for v in circuits.register_values(n, enc.symmetric)],
        "seconds": time.perf_counter() - t0,
    }


# Estimates -----------------------------------------------------------------------------

def run_estimate(cfg: JobConfig, approx_report: Optional[dict] = None) -> dict:
    """Formula-level costs at ``estimate_n`` with the rounds planned from ``F^[inf]``."""
    n = cfg.estimate_n or cfg.n
    if approx_report is None:
        _, _, approx_report = run_approx(cfg)
    d = int(approx_report["degree"])
    if cfg.method == "fourier":
        a = min(1.0, approx_report["filling_inf"])
        R = analysis.plan_exact_aa(a).rounds
        rep = resources.count_fourier_pipeline(n, d, R)
        table = resources.comparison_table("cycloid-n32") if n == 32 else []
    else:
        definite = approx_report["parity"] != "mixed"
        sub = 1.0 if definite else 0.5
        F_inf = analysis.filling_fraction(cfg.function, 2**12).filling_inf
        a = min(1.0, sub * abs(approx_report["scale"]) * F_inf)
        R = analysis.plan_exact_aa(a).rounds
        rep = resources.count_qet_pipeline(n, d, R, definite)
        table = (resources.comparison_table("tanh-n32")
                 if cfg.function.kind == "tanh" and n == 32 and d == 33 else [])
    return {"n": n, "degree": d, "rounds": R, "amplitude_estimate": a,
            "resources": rep.to_json(), "comparison": table}


# Domain extension ----------------------------------------------------------------------

def tent(x):
    """``x`` up to ``1/3`` and ``(1 - x) / 2`` beyond: a function with a kink."""
    x = np.asarray(x, dtype=float)
    return np.where(x <= 1 / 3, x, 0.5 * (1 - x))


def tent_extended(x, ext):
    """Smooth stand-in for :func:`tent` on the widened domain of ``ext``.

    Equal to the left branch up to the last kept grid point, to the shifted
    right branch ``(alpha - x) / 2`` from the first moved grid point on, and
    joined in between by a cubic with matching values and slopes.
    """
    x = np.asarray(x, dtype=float)
    M = 2**ext.n - 1
    lo = ext.cut_index / M
    hi = ext.shift + (ext.cut_index + 1) / M
    y0, y1, m0, m1 = lo, 0.5 * (ext.alpha - hi), 1.0, -0.5
    h = hi - lo
    t = (x - lo) / h
    cubic = ((2 * t**3 - 3 * t**2 + 1) * y0 + (t**3 - 2 * t**2 + t) * h * m0
             + (-2 * t**3 + 3 * t**2) * y1 + (t**3 - t**2) * h * m1)
    right = 0.5 * (ext.alpha - x)
    return np.where(x <= lo, x, np.where(x >= hi, right, cubic))


def run_tent_extension(n: int = 2, degree: Optional[int] = None) -> dict:
    """Prepares the tent state through the widened-domain construction.

    A mixed-parity polynomial in ``y = sin(x' / 2^(n+1))`` matches the smooth
    extension at the ``2^(n+1)`` points of the widened grid (minimax fit with
    a global bound).  Interpolating ``2^(n+1)`` values while staying below 1
    on all of ``[-1, 1]`` needs headroom, hence the default degree
    ``2^(n+2) + 1``.  The initial state is the uniform
    superposition over the ``n`` low bits followed by a comparator that sets
    the top bit for points right of the kink.  After amplification the
    comparator is applied again, which relabels the state back to ``n`` bits.
    """
    ext = circuits.build_domain_extension(n)
    m = n + 1
    Nw = 2**m
    # xbar' = x' / (2^n - 1) on the wide grid, i.e. arcsin(y) scaled by Nw / (2^n - 1).
    c = Nw / (2**n - 1)
    vmax = float(np.max(tent_extended(np.linspace(0, ext.alpha, 20001), ext)))
    target = lambda y: tent_extended(c * np.arcsin(np.asarray(y)), ext) / vmax  # noqa: E731
    if degree is None:
        degree = 2 * Nw + 1
    ys_wide = circuits.signal_values(m)
    P = fit_minimax(target, degree, "mixed", (0.0, math.sin(ext.alpha / c)), 1.0 - 1e-3,
                    points=ys_wide)
    P = make_qsp_ready(P, QSP_MARGIN)
    even, odd = solve_mixed(P)
    block = circuits.build_qet(circuits.build_usin(m), (even, odd))
    reg_low = tuple(range(1, m))
    prep_gates = [circuits.Gate("H", (q,), tag="prep") for q in reg_low]
    prep_gates.append(circuits.Gate("COMPARATOR", (0,), reg_low, threshold=ext.cut_index,
                                    tag="compare"))
    V = circuits.Circuit(block.width, tuple(prep_gates), m)
    vals = P(circuits.signal_values(m)) * block.subnormalization
    used = ext.embed(np.arange(2**n))
    a = float(np.linalg.norm(vals[used]) / math.sqrt(2**n))
    plan = analysis.plan_exact_aa(a)
    amp = circuits.build_amplified(block, plan.rounds, plan.phi, state_prep=V)
    uncompute = circuits.Circuit(amp.width, (prep_gates[-1],), m)
    full = circuits.concat(amp, uncompute)
    psi = run(full).project(m)
    target_state = tent(np.arange(2**n) / (2**n - 1))
    expected = np.zeros(Nw)
    expected[: 2**n] = target_state / np.linalg.norm(target_state)
    intermediate = run(circuits.Circuit(m, tuple(prep_gates), m)).amplitudes
    return {
        "alpha": ext.alpha,
        "degree": P.degree,
        "fit_error": float(np.max(np.abs(P(ys_wide) / P.scale - target(ys_wide)))),
        "intermediate": [float(v.real) for v in intermediate],
        "plan": plan.to_json(),
        "state": [float(v.real) for v in psi],
        "expected": [float(v) for v in expected],
        "trace_distance": analysis.vector_trace_distance(expected, psi),
        "good_probability": float(np.vdot(psi, psi).real),
    }


def load_poly(obj: dict):
    if obj.get("kind") == "fourier-cosine":
        return FourierSeries.from_json(obj)
    return PolyApprox.from_json(obj)


def load_phases(obj: dict):
    sets = [PhaseSet.from_json(s) for s in obj["sets"]]
    return sets[0] if len(sets) == 1 else tuple(sets)

