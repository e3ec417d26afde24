"""Mean-field steady state of the driven cavity + oscillator.

The two coupled conditions are

    x_s = -g_l I / (ω_m + 2 g_q I)
    c_s = ε / (κ + i Δ̃),   Δ̃ = Δ + g_l x_s + g_q x_s²

with I = |c_s|² and ⟨x²⟩ replaced by x_s² (mean-field). In bare-detuning
mode they close into the scalar equation I (κ² + Δ̃(I)²) = ε² which can
have up to several roots; in effective-detuning mode Δ̃ is pinned and the
solution is explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from softmode.errors import NonConvergence, UnphysicalSoftMode
from softmode.params import BareDetuning, EffectiveDetuning, SystemParams

SQRT2 = math.sqrt(2.0)

DAMPING = 0.5
MAX_ITER = 100_000
REL_TOL = 1e-13
SCAN_POINTS = 4096
_ROOT_RTOL = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class SteadyState:
    """Self-consistent mean-field solution.

    ``delta`` is the bare detuning consistent with this state; in
    effective-detuning mode it is backed out from Δ̃ and x_s.
    """

    x_s: float
    c_s: complex
    photon_number: float
    omega_m_eff: float
    g_eff: float
    delta_eff: float
    delta: float
    x_quad: float
    p_quad: float
    iterations: int = 0

    @property
    def physical(self) -> bool:
        return self.omega_m_eff > 0


def _assemble(params: SystemParams, photon_number: float, c_s: complex, delta: float, iterations=0) -> SteadyState:
    w_eff = params.omega_m + 2.0 * params.g_q * photon_number
    x_s = -params.g_l * photon_number / w_eff if photon_number != 0 else 0.0
    g_eff = params.g_l + 2.0 * params.g_q * x_s
    delta_eff = delta + params.g_l * x_s + params.g_q * x_s * x_s
    return SteadyState(
        x_s=x_s,
        c_s=c_s,
        photon_number=photon_number,
        omega_m_eff=w_eff,
        g_eff=g_eff,
        delta_eff=delta_eff,
        delta=delta,
        x_quad=SQRT2 * c_s.real,
        p_quad=SQRT2 * c_s.imag,
        iterations=iterations,
    )


def _effective_state(params: SystemParams) -> SteadyState:
    d_eff = params.detuning_mode.delta_eff
    eps = params.epsilon
    kappa = params.kappa
    photon_number = eps * eps / (kappa * kappa + d_eff * d_eff)
    c_s = eps / complex(kappa, d_eff)
    w_eff = params.omega_m + 2.0 * params.g_q * photon_number
    if photon_number == 0:
        x_s = 0.0
    elif w_eff == 0:
        x_s = -math.inf
    else:
        x_s = -params.g_l * photon_number / w_eff
    # back out the bare detuning so that Δ̃ comes out exactly as pinned
    delta = d_eff - params.g_l * x_s - params.g_q * x_s * x_s
    return SteadyState(
        x_s=x_s,
        c_s=c_s,
        photon_number=photon_number,
        omega_m_eff=w_eff,
        g_eff=params.g_l + 2.0 * params.g_q * x_s,
        delta_eff=d_eff,
        delta=delta,
        x_quad=SQRT2 * c_s.real,
        p_quad=SQRT2 * c_s.imag,
    )


def _effective_detuning(params: SystemParams, photon_number):
    """Δ̃ as a function of I in bare mode (vectorised)."""
    w_eff = params.omega_m + 2.0 * params.g_q * photon_number
    x_s = -params.g_l * photon_number / w_eff
    return params.detuning_mode.delta + params.g_l * x_s + params.g_q * x_s * x_s


def _scaled_residual(params: SystemParams, photon_number, eps2: float):
    """I (κ² + Δ̃²)/ε² - 1; zero at a self-consistent photon number."""
    d_eff = _effective_detuning(params, photon_number)
    return photon_number * (params.kappa**2 + d_eff * d_eff) / eps2 - 1.0


def _displacement(params: SystemParams, photon_number):
    return -params.g_l * photon_number / (params.omega_m + 2.0 * params.g_q * photon_number)


def _state_from_displacement(params: SystemParams, x_s: float, iterations=0) -> SteadyState:
    # build everything from x_s so the field equation holds to rounding
    delta = params.detuning_mode.delta
    d_eff = delta + params.g_l * x_s + params.g_q * x_s * x_s
    c_s = params.epsilon / complex(params.kappa, d_eff)
    photon_number = c_s.real**2 + c_s.imag**2
    return SteadyState(
        x_s=x_s,
        c_s=c_s,
        photon_number=photon_number,
        omega_m_eff=params.omega_m + 2.0 * params.g_q * photon_number,
        g_eff=params.g_l + 2.0 * params.g_q * x_s,
        delta_eff=d_eff,
        delta=delta,
        x_quad=SQRT2 * c_s.real,
        p_quad=SQRT2 * c_s.imag,
        iterations=iterations,
    )


def _displacement_residual(params: SystemParams, x_s: float) -> float:
    """x ω_m + I(x) (g_l + 2 g_q x), with I(x) from the field equation.

    Between grid nodes on one side of the pole it changes sign exactly where
    the photon-number residual does, but it stays well conditioned when
    ω̃_m is small and Δ̃ depends steeply on I.
    """
    d_eff = params.detuning_mode.delta + params.g_l * x_s + params.g_q * x_s * x_s
    photon_number = params.epsilon**2 / (params.kappa**2 + d_eff * d_eff)
    return x_s * params.omega_m + photon_number * (params.g_l + 2.0 * params.g_q * x_s)


def _refine(params: SystemParams, i_lo: float, i_hi: float) -> float:
    """Displacement of the root bracketed by photon numbers [i_lo, i_hi]."""
    x_lo, x_hi = sorted((_displacement(params, i_lo), _displacement(params, i_hi)))
    f_lo = _displacement_residual(params, x_lo)
    f_hi = _displacement_residual(params, x_hi)
    if f_lo == 0.0:
        return x_lo
    if f_hi == 0.0:
        return x_hi
    if f_lo * f_hi > 0:
        # rounding at the bracket ends hid the sign change; solve in I instead
        i_root = brentq(
            lambda i: _scaled_residual(params, i, params.epsilon**2), i_lo, i_hi, xtol=1e-300, rtol=_ROOT_RTOL
        )
        return _displacement(params, i_root)
    return brentq(
        lambda x: _displacement_residual(params, x), x_lo, x_hi, xtol=1e-300, rtol=_ROOT_RTOL, maxiter=500
    )


def _bracket_roots(params: SystemParams, grid: np.ndarray, eps2: float) -> list[float]:
    """Displacements of every root bracketed by sign changes on ``grid`` (photon numbers)."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = _scaled_residual(params, grid, eps2)
    roots = []
    finite = np.isfinite(vals)
    for k in range(len(grid) - 1):
        if not (finite[k] and finite[k + 1]):
            continue
        a, b = vals[k], vals[k + 1]
        if a == 0.0:
            roots.append(float(_displacement(params, grid[k])))
        elif a * b < 0:
            roots.append(float(_refine(params, float(grid[k]), float(grid[k + 1]))))
    if finite[-1] and vals[-1] == 0.0:
        roots.append(float(_displacement(params, grid[-1])))
    return roots


def _scan_grid(params: SystemParams, i_max: float, n: int = SCAN_POINTS) -> np.ndarray:
    grid = np.concatenate(([0.0], np.geomspace(i_max * 1e-12, i_max, n)))
    if params.g_q < 0:
        pole = params.omega_m / (2.0 * -params.g_q)
        # the residual is +inf at the pole; flank it so no bracket spans it
        flanks = [pole * (1.0 - 1e-12), pole * (1.0 + 1e-12)]
        grid = np.concatenate((grid, [f for f in flanks if grid[0] < f < grid[-1]]))
        grid = np.unique(grid[grid != pole])
    return grid


def find_all_branches(params: SystemParams, i_max: float | None = None) -> list[SteadyState]:
    """Every self-consistent steady state with photon number in [0, i_max].

    Roots are bracketed by sign changes of the scalar residual on a dense
    log grid and refined by Brent's method, then returned sorted by photon
    number. Roots with non-positive effective frequency are included; check
    ``SteadyState.physical``.

    ``i_max`` defaults to ε²/κ², an upper bound for any bare-mode root.
    """
    if isinstance(params.detuning_mode, EffectiveDetuning):
        return [_effective_state(params)]
    eps = params.epsilon
    if eps == 0:
        return [_assemble(params, 0.0, 0j, params.detuning_mode.delta)]
    eps2 = eps * eps
    if i_max is None:
        i_max = eps2 / params.kappa**2
    if not i_max > 0:
        raise ValueError("i_max must be > 0")
    roots = _bracket_roots(params, _scan_grid(params, i_max), eps2)
    states = [_state_from_displacement(params, x) for x in roots]
    return sorted(states, key=lambda st: st.photon_number)


def _fixed_point(params: SystemParams, eps2: float) -> tuple[float, int]:
    kappa2 = params.kappa**2
    current = eps2 / kappa2
    for it in range(1, MAX_ITER + 1):
        d_eff = _effective_detuning(params, current)
        mapped = eps2 / (kappa2 + d_eff * d_eff)
        nxt = (1.0 - DAMPING) * current + DAMPING * mapped
        if not math.isfinite(nxt):
            break
        if abs(nxt - current) <= REL_TOL * abs(nxt):
            return nxt, it
        current = nxt
    raise NonConvergence(f"steady-state iteration did not converge in {MAX_ITER} steps")


def _lowest_physical(states: list[SteadyState]) -> SteadyState | None:
    for state in states:
        if state.physical:
            return state
    return None


def solve_steady_state(params: SystemParams) -> SteadyState:
    """Mean-field steady state for ``params``.

    Effective-detuning mode is explicit: I = ε²/(κ² + Δ̃²). Bare mode uses
    damped fixed-point iteration on I; if several roots coexist the one
    with the smallest photon number (the branch reached by ramping the
    power up from zero) is returned. When iteration stalls the dense
    root scan of :func:`find_all_branches` is used instead.

    Raises:
        UnphysicalSoftMode: ω̃_m <= 0 at the solution.
        NonConvergence: no self-consistent root could be located.
    """
    if isinstance(params.detuning_mode, EffectiveDetuning):
        state = _effective_state(params)
    else:
        state = _solve_bare(params)
    if not state.physical:
        raise UnphysicalSoftMode(
            f"effective mechanical frequency {state.omega_m_eff:.6g} rad/s <= 0 "
            f"(power {params.power:.6g} W, g_q/g_l {params.g_q / params.g_l if params.g_l else float('nan'):.6g})",
            state=state,
        )
    return state


def _solve_bare(params: SystemParams) -> SteadyState:
    eps = params.epsilon
    if eps == 0:
        return _assemble(params, 0.0, 0j, params.detuning_mode.delta)
    eps2 = eps * eps
    try:
        photon_number, iterations = _fixed_point(params, eps2)
    except NonConvergence:
        branches = find_all_branches(params)
        if not branches:
            raise
        state = _lowest_physical(branches)
        return state if state is not None else branches[0]

    # a lower branch may coexist below the iterate; prefer it
    lower_limit = photon_number * (1.0 - 1e-9)
    if lower_limit > 0:
        lower = _bracket_roots(params, _scan_grid(params, lower_limit, 512), eps2)
        candidates = sorted(
            (_state_from_displacement(params, x, iterations) for x in lower), key=lambda st: st.photon_number
        )
        state = _lowest_physical(candidates)
        if state is not None:
            return state
    return _state_from_displacement(params, _displacement(params, photon_number), iterations)


def steady_state_residual(params: SystemParams, candidate: SteadyState) -> tuple[float, float]:
    """Relative residuals of the displacement and field equations.

    r1 = |x_s ω̃_m + g_l I| / max(|x_s ω̃_m|, g_l I)
    r2 = |c_s (κ + iΔ̃) - ε| / max(ε, |c_s (κ + iΔ̃)|)

    with I = |c_s|², ω̃_m = ω_m + 2 g_q I and Δ̃ recomputed from x_s (bare
    mode) or taken from the pinned value (effective mode). 0/0 counts as 0.
    """
    c_s = complex(candidate.c_s)
    photon_number = c_s.real**2 + c_s.imag**2
    x_s = candidate.x_s
    w_eff = params.omega_m + 2.0 * params.g_q * photon_number

    lhs = x_s * w_eff
    rhs = -params.g_l * photon_number
    scale = max(abs(lhs), abs(rhs))
    r1 = abs(lhs - rhs) / scale if scale > 0 else 0.0

    if isinstance(params.detuning_mode, BareDetuning):
        d_eff = params.detuning_mode.delta + params.g_l * x_s + params.g_q * x_s * x_s
    else:
        d_eff = params.detuning_mode.delta_eff
    drive = c_s * complex(params.kappa, d_eff)
    eps = params.epsilon
    scale = max(eps, abs(drive))
    r2 = abs(drive - eps) / scale if scale > 0 else 0.0
    return r1, r2
