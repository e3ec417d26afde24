"""System parameters, derived drive scalars and SI unit bookkeeping.

All angular frequencies are stored in rad/s. The parameter-file helpers at
the bottom accept the conventional ``*_hz`` values (ω/2π) and convert.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

from softmode.constants import C_LIGHT, HBAR, TWO_PI
from softmode.errors import ParameterError


@dataclass(frozen=True)
class BareDetuning:
    """Laser-cavity detuning Δ = ω_c - ω_p; the steady state is self-consistent."""

    delta: float = 0.0


@dataclass(frozen=True)
class EffectiveDetuning:
    """Pins the displacement-corrected detuning Δ̃ (rad/s) directly."""

    delta_eff: float = 0.0


DetuningMode = BareDetuning | EffectiveDetuning


@dataclass(frozen=True)
class SystemParams:
    """Physical inputs of the cavity + oscillator system.

    Attributes:
        omega_m: mechanical angular frequency (rad/s)
        gamma_m: mechanical damping rate (rad/s)
        g_l: linear optomechanical coupling (rad/s), non-negative
        g_q: quadratic optomechanical coupling (rad/s); negative softens the spring
        kappa: cavity amplitude decay rate (rad/s)
        power: input laser power (W)
        wavelength: pump wavelength (m)
        temperature: bath temperature (K)
        detuning_mode: ``BareDetuning`` or ``EffectiveDetuning``
        mass: effective mass (kg), only needed for SI conversion
    """

    omega_m: float
    gamma_m: float
    g_l: float
    g_q: float
    kappa: float
    power: float
    wavelength: float
    temperature: float = 0.0
    detuning_mode: DetuningMode = field(default_factory=EffectiveDetuning)
    mass: float | None = None

    def __post_init__(self):
        for name in ("omega_m", "gamma_m", "g_l", "g_q", "kappa", "power", "wavelength", "temperature"):
            value = getattr(self, name)
            if not isinstance(value, numbers.Real) or not math.isfinite(value):
                raise ParameterError(name, f"must be a finite number, got {value!r}")
        for name in ("omega_m", "gamma_m", "kappa", "wavelength"):
            if getattr(self, name) <= 0:
                raise ParameterError(name, "must be > 0")
        for name in ("power", "temperature", "g_l"):
            if getattr(self, name) < 0:
                raise ParameterError(name, "must be >= 0")
        if not isinstance(self.detuning_mode, (BareDetuning, EffectiveDetuning)):
            raise ParameterError("detuning_mode", f"unsupported mode {self.detuning_mode!r}")
        detuning = (
            self.detuning_mode.delta
            if isinstance(self.detuning_mode, BareDetuning)
            else self.detuning_mode.delta_eff
        )
        if not math.isfinite(detuning):
            raise ParameterError("detuning", "must be finite")
        if self.mass is not None and not (math.isfinite(self.mass) and self.mass > 0):
            raise ParameterError("mass", "must be > 0 when given")

    @property
    def omega_p(self) -> float:
        """Pump angular frequency 2πc/λ."""
        return TWO_PI * C_LIGHT / self.wavelength

    @property
    def epsilon(self) -> float:
        """Pump amplitude sqrt(2Pκ/(ħω_p)) in rad/s."""
        return math.sqrt(2.0 * self.power * self.kappa / (HBAR * self.omega_p))

    @property
    def gq_over_gl(self) -> float:
        if self.g_l == 0:
            raise ParameterError("g_l", "ratio g_q/g_l undefined for g_l = 0")
        return self.g_q / self.g_l

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def with_ratio(self, gq_over_gl: float) -> "SystemParams":
        """Copy with g_q set from the ratio g_q/g_l."""
        return replace(self, g_q=gq_over_gl * self.g_l)


@dataclass(frozen=True)
class DerivedScalars:
    epsilon: float  # rad/s
    photon_number_nominal: float  # ε²/κ²
    zeta: float  # 4 g_l² I / κ, rad/s


def derive_scalars(params: SystemParams, photon_number: float | None = None) -> DerivedScalars:
    """Pump amplitude, nominal photon number and measurement rate ζ.

    ζ is evaluated with ``photon_number`` (defaults to the nominal ε²/κ²), so
    detuned steady states can pass their own intracavity photon number.
    """
    eps = params.epsilon
    nominal = eps * eps / (params.kappa * params.kappa)
    if photon_number is None:
        photon_number = nominal
    if not (math.isfinite(photon_number) and photon_number >= 0):
        raise ParameterError("photon_number", "must be finite and >= 0")
    zeta = 4.0 * params.g_l**2 * photon_number / params.kappa
    return DerivedScalars(epsilon=eps, photon_number_nominal=nominal, zeta=zeta)


def _force_scale_sq(params: SystemParams) -> float:
    if params.mass is None:
        raise ParameterError("mass", "mass required for SI conversion")
    return HBAR * params.mass * params.omega_m * params.gamma_m


def to_si_spectrum(s_ff: float, params: SystemParams) -> float:
    """Dimensionless force-noise spectrum -> N²/Hz (factor ħ m ω_m γ_m)."""
    return _force_scale_sq(params) * s_ff


def normalize_force(f_si: float, params: SystemParams) -> float:
    """Force in newtons -> dimensionless force F / sqrt(ħ m ω_m γ_m)."""
    return f_si / math.sqrt(_force_scale_sq(params))


def reference_params(
    power: float = 10e-6,
    gq_over_gl: float = 0.0,
    temperature: float = 0.0,
    detuning_mode: DetuningMode | None = None,
    mass: float | None = None,
) -> SystemParams:
    """Reference parameter set: ω_m/2π = 10 MHz, γ_m/2π = 100 Hz,
    g_l/2π = 215 Hz, κ/2π = 500 MHz, λ = 810 nm, Δ̃ = 0."""
    g_l = TWO_PI * 215.0
    return SystemParams(
        omega_m=TWO_PI * 10e6,
        gamma_m=TWO_PI * 100.0,
        g_l=g_l,
        g_q=gq_over_gl * g_l,
        kappa=TWO_PI * 500e6,
        power=power,
        wavelength=810e-9,
        temperature=temperature,
        detuning_mode=detuning_mode if detuning_mode is not None else EffectiveDetuning(0.0),
        mass=mass,
    )


# --- flat key = value parameter files -------------------------------------

PARAM_KEYS = (
    "omega_m_hz",
    "gamma_m_hz",
    "g_l_hz",
    "g_q_over_g_l",
    "g_q_hz",
    "kappa_hz",
    "power_uw",
    "wavelength_nm",
    "temperature_k",
    "detuning_mode",
    "detuning_hz",
    "mass_kg",
)


def parse_param_text(text: str, source: str = "<string>") -> dict[str, str]:
    """Parse ``key = value`` lines into a lower-cased key dict.

    Blank lines and ``#`` comments are ignored; unknown keys raise.
    """
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{source}:{lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in PARAM_KEYS:
            raise ParameterError(key, f"unknown parameter key ({source}:{lineno})")
        entries[key] = value
    return entries


def read_param_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ParameterError("config", f"cannot read parameter file {str(path)!r}")
    return parse_param_text(path.read_text(), source=str(path))


def _as_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParameterError(key, f"not a number: {value!r}") from None


def apply_entries(base: SystemParams, entries: Mapping[str, str]) -> SystemParams:
    """Apply parsed parameter-file entries on top of ``base``.

    Frequencies in the file are ordinary frequencies (Hz) and are converted
    to rad/s here. ``g_q_over_g_l`` is resolved after ``g_l_hz``.
    """
    entries = {k.lower(): v for k, v in entries.items()}
    unknown = set(entries) - set(PARAM_KEYS)
    if unknown:
        key = sorted(unknown)[0]
        raise ParameterError(key, "unknown parameter key")
    if "g_q_over_g_l" in entries and "g_q_hz" in entries:
        raise ParameterError("g_q_hz", "give either g_q_hz or g_q_over_g_l, not both")

    hz_fields = {
        "omega_m_hz": "omega_m",
        "gamma_m_hz": "gamma_m",
        "g_l_hz": "g_l",
        "g_q_hz": "g_q",
        "kappa_hz": "kappa",
    }
    changes: dict = {}
    for key, attr in hz_fields.items():
        if key in entries:
            changes[attr] = TWO_PI * _as_float(key, entries[key])
    if "power_uw" in entries:
        changes["power"] = _as_float("power_uw", entries["power_uw"]) * 1e-6
    if "wavelength_nm" in entries:
        changes["wavelength"] = _as_float("wavelength_nm", entries["wavelength_nm"]) * 1e-9
    if "temperature_k" in entries:
        changes["temperature"] = _as_float("temperature_k", entries["temperature_k"])
    if "mass_kg" in entries:
        changes["mass"] = _as_float("mass_kg", entries["mass_kg"])

    mode = base.detuning_mode
    if "detuning_mode" in entries or "detuning_hz" in entries:
        if "detuning_mode" in entries:
            kind = entries["detuning_mode"].strip().lower()
        else:
            kind = "bare" if isinstance(mode, BareDetuning) else "effective"
        if "detuning_hz" in entries:
            value = TWO_PI * _as_float("detuning_hz", entries["detuning_hz"])
        else:
            value = mode.delta if isinstance(mode, BareDetuning) else mode.delta_eff
        if kind == "bare":
            mode = BareDetuning(value)
        elif kind == "effective":
            mode = EffectiveDetuning(value)
        else:
            raise ParameterError("detuning_mode", f"expected 'bare' or 'effective', got {kind!r}")
        changes["detuning_mode"] = mode

    params = replace(base, **{k: v for k, v in changes.items() if k != "g_q"})
    if "g_q" in changes:
        params = replace(params, g_q=changes["g_q"])
    elif "g_q_over_g_l" in entries:
        params = replace(params, g_q=_as_float("g_q_over_g_l", entries["g_q_over_g_l"]) * params.g_l)
    elif "g_l" in changes and base.g_l != 0:
        # keep the ratio when only g_l moves
        params = replace(params, g_q=base.g_q / base.g_l * params.g_l)
    return params


def format_param_text(params: SystemParams) -> str:
    """Inverse of :func:`apply_entries`, for writing parameter files."""
    mode = params.detuning_mode
    if isinstance(mode, BareDetuning):
        kind, det = "bare", mode.delta
    else:
        kind, det = "effective", mode.delta_eff
    lines = [
        f"omega_m_hz = {params.omega_m / TWO_PI!r}",
        f"gamma_m_hz = {params.gamma_m / TWO_PI!r}",
        f"g_l_hz = {params.g_l / TWO_PI!r}",
        f"g_q_hz = {params.g_q / TWO_PI!r}",
        f"kappa_hz = {params.kappa / TWO_PI!r}",
        f"power_uW = {params.power * 1e6!r}",
        f"wavelength_nm = {params.wavelength * 1e9!r}",
        f"temperature_K = {params.temperature!r}",
        f"detuning_mode = {kind}",
        f"detuning_hz = {det / TWO_PI!r}",
    ]
    if params.mass is not None:
        lines.append(f"mass_kg = {params.mass!r}")
    return "\n".join(lines) + "\n"
