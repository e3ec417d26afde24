"""Linear stability of the fluctuation dynamics.

The drift matrix acts on (δx, δp, δX, δP). Its characteristic polynomial
is expanded in closed form so the Routh-Hurwitz test works on exact
coefficients; numerical eigenvalues serve as the independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from softmode.errors import NonConvergence, UnphysicalSoftMode
from softmode.params import SystemParams
from softmode.steady_state import SteadyState, solve_steady_state

STABLE = "stable"
UNSTABLE = "unstable"
UNPHYSICAL = "unphysical"
MARGINAL = "marginal"
UNRESOLVED = "unresolved"

MARGIN_FRACTION = 1e-6


def build_drift_matrix(params: SystemParams, ss: SteadyState) -> np.ndarray:
    """4x4 drift matrix over (δx, δp, δX, δP), entries in rad/s."""
    g = ss.g_eff
    xq, pq = ss.x_quad, ss.p_quad
    d, k = ss.delta_eff, params.kappa
    return np.array(
        [
            [0.0, params.omega_m, 0.0, 0.0],
            [-ss.omega_m_eff, -params.gamma_m, -g * xq, -g * pq],
            [g * pq, 0.0, -k, d],
            [-g * xq, 0.0, -d, -k],
        ]
    )


def characteristic_polynomial(params: SystemParams, ss: SteadyState) -> np.ndarray:
    """Coefficients (a0, a1, a2, a3, a4) of det(sI - M), lowest order first.

    a0 = ω_m [(κ² + Δ̃²) ω̃_m - Δ̃ G̃² (X_s² + P_s²)]
    a1 = γ_m (κ² + Δ̃²) + 2κ ω_m ω̃_m
    a2 = κ² + Δ̃² + 2κγ_m + ω_m ω̃_m
    a3 = 2κ + γ_m
    """
    w, wt, gam = params.omega_m, ss.omega_m_eff, params.gamma_m
    k, d, g = params.kappa, ss.delta_eff, ss.g_eff
    lorentz = k * k + d * d
    quad_sq = ss.x_quad**2 + ss.p_quad**2
    a0 = w * (lorentz * wt - d * g * g * quad_sq)
    a1 = gam * lorentz + 2.0 * k * w * wt
    a2 = lorentz + 2.0 * k * gam + w * wt
    a3 = 2.0 * k + gam
    return np.array([a0, a1, a2, a3, 1.0])


def routh_hurwitz(char_poly) -> bool:
    """Quartic Routh-Hurwitz test for a monic polynomial (a0..a4, a4 = 1).

    True iff every root has negative real part:
    a0, a1, a2, a3 > 0 and a3 a2 a1 - a1² - a3² a0 > 0.
    """
    coeffs = [float(c) for c in char_poly]
    if len(coeffs) != 5:
        raise ValueError("expected five coefficients a0..a4")
    if not all(math.isfinite(c) for c in coeffs):
        raise ValueError(f"non-finite coefficient in {coeffs}")
    a0, a1, a2, a3, a4 = coeffs
    if a4 != 1.0:
        raise ValueError("polynomial must be monic (a4 = 1)")
    if min(a0, a1, a2, a3) <= 0:
        return False
    return a3 * a2 * a1 - a1 * a1 - a3 * a3 * a0 > 0


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of :func:`classify`.

    ``status`` is one of stable / unstable / unphysical / marginal /
    unresolved. For unresolved points the numeric fields are None.
    """

    status: str
    routh_hurwitz_stable: bool
    eigen_stable: bool
    physical: bool
    char_poly: np.ndarray | None = None
    max_real_part: float | None = None
    margin: float | None = None
    steady_state: SteadyState | None = None
    message: str = ""

    @property
    def stable(self) -> bool:
        return self.status == STABLE


def stability_margin(params: SystemParams) -> float:
    """Half-width of the band around Re(s) = 0 reported as marginal."""
    return MARGIN_FRACTION * min(params.kappa, params.gamma_m)


def classify_state(params: SystemParams, ss: SteadyState) -> StabilityReport:
    """Classify an already solved steady state."""
    poly = characteristic_polynomial(params, ss)
    drift = build_drift_matrix(params, ss)
    if np.all(np.isfinite(drift)):
        max_re = float(np.max(np.linalg.eigvals(drift).real))
    else:
        max_re = math.nan
    margin = stability_margin(params)
    if not ss.physical:
        return StabilityReport(
            status=UNPHYSICAL,
            routh_hurwitz_stable=False,
            eigen_stable=False,
            physical=False,
            char_poly=poly,
            max_real_part=max_re,
            margin=margin,
            steady_state=ss,
        )
    try:
        rh = routh_hurwitz(poly)
    except ValueError:
        rh = False
    eig = max_re < 0
    if abs(max_re) <= margin:
        status = MARGINAL
    else:
        status = STABLE if rh else UNSTABLE
    return StabilityReport(
        status=status,
        routh_hurwitz_stable=rh,
        eigen_stable=eig,
        physical=True,
        char_poly=poly,
        max_real_part=max_re,
        margin=margin,
        steady_state=ss,
    )


def classify(params: SystemParams) -> StabilityReport:
    """Solve the steady state and classify its linear stability.

    An unphysical soft mode (ω̃_m <= 0) is reported with both stability
    flags False; a steady state that cannot be found is reported as
    unresolved rather than unstable.
    """
    try:
        ss = solve_steady_state(params)
    except UnphysicalSoftMode as err:
        return classify_state(params, err.state)
    except NonConvergence as err:
        return StabilityReport(
            status=UNRESOLVED,
            routh_hurwitz_stable=False,
            eigen_stable=False,
            physical=False,
            message=str(err),
        )
    return classify_state(params, ss)
