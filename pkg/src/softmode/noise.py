"""Added force noise of a phase-quadrature measurement.

Three levels of approximation are provided:

* :func:`s_ff_full` -- the general expression built from the output
  transfer functions (any effective detuning, any ω).
* :func:`s_ff_resonant` -- Δ̃ = 0 and κ ≫ ω, written with the soft-mode
  susceptibility χ̃_m.
* :func:`s_ff_no_qoc` -- the conventional result without quadratic coupling.

Every spectrum is dimensionless (force in units of sqrt(ħ m ω_m γ_m)); see
:func:`softmode.params.to_si_spectrum`. The split into backaction and shot
noise assigns the amplitude-input channel to backaction and the
phase-input channel to shot noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from softmode.constants import HBAR, K_B
from softmode.errors import BracketError, DivergentSensitivity, NonConvergence, ParameterError, UnphysicalSoftMode, UnstableSystem
from softmode.params import EffectiveDetuning, SystemParams, derive_scalars
from softmode.stability import classify_state
from softmode.steady_state import SteadyState, solve_steady_state

FULL = "Full"
RESONANT = "Resonant"
NO_QOC = "NoQoc"

# evaluation-frequency tracker: ω = sqrt(ω_m ω̃_m) re-evaluated per steady state
SOFT_MODE = "soft-mode"

Frequency = Union[float, str]


def _abs2(z):
    return z.real * z.real + z.imag * z.imag


@dataclass(frozen=True)
class TransferFunctions:
    p_x: complex
    p_p: complex
    p_xi: complex
    d: complex


@dataclass(frozen=True)
class NoiseBreakdown:
    """Dimensionless added-noise budget at one analysis frequency."""

    omega: float
    thermal: float
    backaction: float
    shot: float
    total: float
    formula: str

    @classmethod
    def from_terms(cls, omega, thermal, backaction, shot, formula):
        return cls(
            omega=float(omega),
            thermal=float(thermal),
            backaction=float(backaction),
            shot=float(shot),
            total=float(thermal + backaction + shot),
            formula=formula,
        )


def resolve_frequency(omega: Frequency, params: SystemParams, ss: SteadyState) -> float:
    """Numeric ω for a fixed value or the ``SOFT_MODE`` tracker."""
    if isinstance(omega, str):
        if omega != SOFT_MODE:
            raise ParameterError("omega", f"unknown frequency tracker {omega!r}")
        if not ss.physical:
            raise UnphysicalSoftMode("soft-mode resonance undefined for ω̃_m <= 0", state=ss)
        return math.sqrt(params.omega_m * ss.omega_m_eff)
    return float(omega)


def susceptibility(omega, omega_m: float, gamma_m: float, omega_m_eff: float | None = None):
    """χ̃_m(ω) = ω_m / (ω² + iγ_m ω - ω_m ω̃_m); bare χ_m when ω̃_m = ω_m."""
    if omega_m_eff is None:
        omega_m_eff = omega_m
    omega = np.asarray(omega, dtype=float)
    out = omega_m / (omega * omega - omega_m * omega_m_eff + 1j * gamma_m * omega)
    return out[()] if out.ndim == 0 else out


def thermal_noise(params: SystemParams) -> float:
    """Flat thermal contribution 2 k_B T / (ħ ω_m)."""
    return 2.0 * K_B * params.temperature / (HBAR * params.omega_m)


def transfer_functions(params: SystemParams, ss: SteadyState, omega) -> TransferFunctions:
    """P_x, P_p, P_ξ and D of the output phase quadrature at ``omega``.

    Accepts scalar or array ``omega`` (rad/s).
    """
    w = np.asarray(omega, dtype=float)
    wm, gam, k = params.omega_m, params.gamma_m, params.kappa
    g, d = ss.g_eff, ss.delta_eff
    xq, pq = ss.x_quad, ss.p_quad
    root2k = math.sqrt(2.0 * k)

    mech = w * w + 1j * gam * w - wm * ss.omega_m_eff
    cav = k - 1j * w
    p_x = -root2k * (wm * g * g * xq * xq + d * mech)
    p_p = -root2k * (wm * g * g * xq * pq - cav * mech)
    p_xi = g * wm * math.sqrt(gam) * (cav * xq + pq * d)
    den = (cav * cav + d * d) * mech + 2.0 * g * g * ss.photon_number * d * wm

    def _out(z):
        z = np.asarray(z, dtype=complex)
        return complex(z) if z.ndim == 0 else z

    return TransferFunctions(p_x=_out(p_x), p_p=_out(p_p), p_xi=_out(p_xi), d=_out(den))


def _require_stable(params: SystemParams, ss: SteadyState):
    report = classify_state(params, ss)
    if not report.stable:
        raise UnstableSystem(f"steady state is {report.status}; spectrum undefined", report=report)


def s_ff_full(params: SystemParams, ss: SteadyState, omega: Frequency, check_stability: bool = True) -> NoiseBreakdown:
    """General added-force-noise spectral density.

    backaction = |P_x|² / (2|P_ξ|²), shot = |P_p - D/sqrt(2κ)|² / (2|P_ξ|²).

    Raises:
        UnstableSystem: the steady state is not strictly stable.
        DivergentSensitivity: P_ξ(ω) = 0, the output carries no force signal.
    """
    if check_stability:
        _require_stable(params, ss)
    w = resolve_frequency(omega, params, ss)
    tf = transfer_functions(params, ss, w)
    signal = 2.0 * _abs2(tf.p_xi)
    if signal == 0 or not math.isfinite(signal):
        raise DivergentSensitivity(f"no force signal in the output at ω = {w:.6g} rad/s")
    backaction = _abs2(tf.p_x) / signal
    shot = _abs2(tf.p_p - tf.d / math.sqrt(2.0 * params.kappa)) / signal
    return NoiseBreakdown.from_terms(w, thermal_noise(params), backaction, shot, FULL)


def _zeta(params: SystemParams, ss: SteadyState) -> float:
    zeta = derive_scalars(params, ss.photon_number).zeta
    if zeta <= 0:
        raise DivergentSensitivity("zero measurement rate (no drive): shot noise diverges")
    return zeta


def s_ff_resonant(params: SystemParams, ss: SteadyState, omega: Frequency) -> NoiseBreakdown:
    """Spectrum at zero effective detuning in the κ ≫ ω limit.

    backaction = (ζ/2γ_m) (ω_m/ω̃_m)², shot = (ω̃_m/ω_m)² / (2ζγ_m |χ̃_m|²),
    with ζ = 4 g_l² I / κ.
    """
    mode = params.detuning_mode
    if not (isinstance(mode, EffectiveDetuning) and mode.delta_eff == 0):
        raise ParameterError("detuning_mode", "resonant formula requires EffectiveDetuning(0)")
    if not ss.physical:
        raise UnphysicalSoftMode("resonant formula needs ω̃_m > 0", state=ss)
    w = resolve_frequency(omega, params, ss)
    zeta = _zeta(params, ss)
    gam = params.gamma_m
    ratio = ss.omega_m_eff / params.omega_m
    chi2 = _abs2(susceptibility(w, params.omega_m, gam, ss.omega_m_eff))
    backaction = zeta / (2.0 * gam) / (ratio * ratio)
    shot = ratio * ratio / (2.0 * zeta * gam * chi2)
    return NoiseBreakdown.from_terms(w, thermal_noise(params), backaction, shot, RESONANT)


def s_ff_no_qoc(params: SystemParams, ss: SteadyState, omega: float) -> NoiseBreakdown:
    """Conventional spectrum ζ/2γ_m + 1/(2ζγ_m|χ_m|²) plus the thermal floor.

    Uses the bare susceptibility and ignores g_q entirely; it equals
    :func:`s_ff_resonant` when g_q = 0.
    """
    w = float(omega)
    zeta = _zeta(params, ss)
    gam = params.gamma_m
    chi2 = _abs2(susceptibility(w, params.omega_m, gam))
    return NoiseBreakdown.from_terms(
        w, thermal_noise(params), zeta / (2.0 * gam), 1.0 / (2.0 * zeta * gam * chi2), NO_QOC
    )


def sql_bound(params: SystemParams, omega: float, omega_m_eff: float | None = None) -> float:
    """Lower bound 1/(γ_m |χ̃_m(ω)|) on backaction + shot noise.

    With ``omega_m_eff`` omitted (bare ω_m) this is the standard quantum
    limit, equal to 1 at ω = ω_m.
    """
    chi = susceptibility(omega, params.omega_m, params.gamma_m, omega_m_eff)
    return 1.0 / (params.gamma_m * abs(chi))


# --- power optimisation -----------------------------------------------------

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-8, max_iter: int = 500):
    """Minimise a unimodal ``f`` on [lo, hi]; returns (x_min, f_min).

    Stops once the bracket is narrower than ``tol`` (absolute).
    """
    a, b = lo, hi
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


@dataclass(frozen=True)
class OptimalPower:
    """Result of :func:`optimal_power`.

    ``constrained`` is set when the minimum sits against the edge of the
    stable, physical region rather than at an interior turning point.
    """

    power: float
    total: float
    breakdown: NoiseBreakdown
    steady_state: SteadyState
    constrained: bool = False


def _noise_at_power(params: SystemParams, power: float, omega: Frequency, formula: str):
    trial = params.replace(power=power)
    try:
        ss = solve_steady_state(trial)
        if formula == FULL:
            bd = s_ff_full(trial, ss, omega)
        else:
            if not classify_state(trial, ss).stable:
                return None
            bd = s_ff_resonant(trial, ss, omega)
    except (UnphysicalSoftMode, UnstableSystem, NonConvergence, DivergentSensitivity):
        return None
    return bd, ss


def optimal_power(
    params: SystemParams,
    omega: Frequency,
    p_range: tuple[float, float],
    formula: str = RESONANT,
    rel_tol: float = 1e-8,
    scan_points: int = 64,
) -> OptimalPower:
    """Input power minimising the total added noise at ``omega``.

    ``omega`` is a fixed value in rad/s or ``SOFT_MODE`` to track
    sqrt(ω_m ω̃_m(P)). The steady state is re-solved at every trial power.
    A coarse log scan locates the basin, then golden-section search in
    log-power refines it to ``rel_tol`` relative.

    Raises:
        BracketError: the minimum over ``p_range`` is at an end point of the
            range (no interior minimum), or no point in the range is stable.
    """
    p_lo, p_hi = (float(p) for p in p_range)
    if not (0 < p_lo < p_hi):
        raise BracketError(f"invalid power bracket ({p_lo!r}, {p_hi!r})")
    if formula not in (FULL, RESONANT):
        raise ParameterError("formula", f"expected {FULL!r} or {RESONANT!r}")

    def total_at(log_p):
        res = _noise_at_power(params, math.exp(log_p), omega, formula)
        return math.inf if res is None else res[0].total

    logs = np.linspace(math.log(p_lo), math.log(p_hi), scan_points)
    vals = np.array([total_at(x) for x in logs])
    if not np.any(np.isfinite(vals)):
        raise BracketError("no stable, physical point inside the power bracket")
    k = int(np.argmin(vals))
    if k == 0 or (k == scan_points - 1):
        raise BracketError(
            f"minimum at the {'lower' if k == 0 else 'upper'} end of the power bracket; widen it"
        )
    x_opt, _ = golden_section(total_at, logs[k - 1], logs[k + 1], tol=rel_tol)
    p_opt = math.exp(x_opt)
    res = _noise_at_power(params, p_opt, omega, formula)
    if res is None:
        raise BracketError("minimiser landed outside the stable region")
    bd, ss = res
    step = math.exp(10 * rel_tol)
    constrained = (
        _noise_at_power(params, p_opt * step, omega, formula) is None
        or _noise_at_power(params, p_opt / step, omega, formula) is None
    )
    return OptimalPower(power=p_opt, total=bd.total, breakdown=bd, steady_state=ss, constrained=constrained)
