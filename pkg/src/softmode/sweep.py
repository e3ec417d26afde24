"""1D/2D parameter sweeps producing plot-ready tables.

Three sweep kinds are supported: noise spectrum versus analysis frequency,
noise budget versus input power, and a (power x g_q/g_l) map of total
noise or stability status. Points that are not strictly stable are kept
as rows carrying a status string and empty numeric cells.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import IO, Any

import numpy as np

from softmode.errors import DivergentSensitivity, ParameterError, UnstableSystem
from softmode.noise import FULL, RESONANT, SOFT_MODE, Frequency, s_ff_full, s_ff_resonant
from softmode.params import BareDetuning, SystemParams, reference_params
from softmode.stability import STABLE, classify

FREQUENCY = "frequency"
POWER = "power"
MAP = "map"

DIVERGENT = "divergent"

BREAKDOWN_COLUMNS = ["thermal", "backaction", "shot", "total"]


@dataclass(frozen=True)
class Axis:
    """Grid axis; node k is start + k (stop - start)/(n - 1), in log10 for log scale.

    Nodes are nested under n -> 2n - 1 refinement, bit for bit.
    """

    name: str
    start: float
    stop: float
    n_points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.n_points < 2:
            raise ParameterError(self.name, "n_points must be >= 2")
        if not self.start < self.stop:
            raise ParameterError(self.name, f"empty range [{self.start!r}, {self.stop!r}]")
        if self.scale not in ("linear", "log"):
            raise ParameterError(self.name, f"scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and self.start <= 0:
            raise ParameterError(self.name, "log scale requires start > 0")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            lo, hi = math.log10(self.start), math.log10(self.stop)
        else:
            lo, hi = self.start, self.stop
        step = (hi - lo) / (self.n_points - 1)
        nodes = lo + np.arange(self.n_points) * step
        nodes[-1] = hi
        if self.scale == "log":
            nodes = 10.0**nodes
            nodes[0], nodes[-1] = self.start, self.stop
        return nodes


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    axis1: Axis
    base: SystemParams
    axis2: Axis | None = None
    eval_frequency: Frequency = SOFT_MODE
    formula: str = RESONANT
    with_noise: bool = True

    def __post_init__(self):
        if self.kind not in (FREQUENCY, POWER, MAP):
            raise ParameterError("kind", f"unknown sweep kind {self.kind!r}")
        if (self.kind == MAP) != (self.axis2 is not None):
            raise ParameterError("axis2", "a second axis is required for (and only for) map sweeps")
        if self.formula not in (FULL, RESONANT):
            raise ParameterError("formula", f"expected {FULL!r} or {RESONANT!r}")
        if self.kind in (POWER, MAP) and self.axis1.start <= 0:
            raise ParameterError("power", "power axis must be > 0 (shot noise diverges at zero drive)")

    def replace(self, **changes) -> "SweepSpec":
        return replace(self, **changes)


@dataclass
class SweepResult:
    kind: str
    columns: list[str]
    rows: list[dict[str, Any]]
    metadata: dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        """Column as a float array; missing values become NaN."""
        return np.array([math.nan if r.get(name) is None else r[name] for r in self.rows], dtype=float)

    def statuses(self) -> list[str]:
        return [r.get("status", STABLE) for r in self.rows]

    def to_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(row.get(c)) for c in self.columns])

    def to_json(self, fh: IO[str]) -> None:
        # timestamp stays in memory only; file output must be reproducible
        meta = {k: v for k, v in self.metadata.items() if k != "timestamp"}
        doc = {"kind": self.kind, "columns": self.columns, "metadata": meta, "rows": [_json_row(r) for r in self.rows]}
        json.dump(doc, fh, indent=1)
        fh.write("\n")

    def csv_text(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _json_row(row):
    # 17 significant digits, written as JSON numbers
    return {k: (float(f"{v:.17g}") if isinstance(v, float) and math.isfinite(v) else v) for k, v in row.items()}


def params_metadata(params: SystemParams) -> dict[str, Any]:
    meta = asdict(params)
    mode = params.detuning_mode
    meta["detuning_mode"] = (
        {"kind": "bare", "delta": mode.delta}
        if isinstance(mode, BareDetuning)
        else {"kind": "effective", "delta_eff": mode.delta_eff}
    )
    return meta


def _metadata(spec: SweepSpec) -> dict[str, Any]:
    return {
        "base": params_metadata(spec.base),
        "formula": spec.formula,
        "eval_frequency": spec.eval_frequency,
        "axes": [asdict(a) for a in (spec.axis1, spec.axis2) if a is not None],
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }


def _breakdown(params, ss, omega, formula):
    if formula == FULL:
        return s_ff_full(params, ss, omega, check_stability=False)
    return s_ff_resonant(params, ss, omega)


def evaluate_point(params: SystemParams, omega: Frequency, formula: str = RESONANT, with_noise: bool = True) -> dict:
    """Status and (if stable) noise budget for one parameter point."""
    report = classify(params)
    row: dict[str, Any] = {"status": report.status}
    ss = report.steady_state
    row["omega_m_eff"] = ss.omega_m_eff if ss is not None else None
    if report.status != STABLE or not with_noise:
        return row
    try:
        bd = _breakdown(params, ss, omega, formula)
    except DivergentSensitivity:
        row["status"] = DIVERGENT
        return row
    row["omega_rad_s"] = bd.omega
    row.update({c: getattr(bd, c) for c in BREAKDOWN_COLUMNS})
    row["formula"] = bd.formula
    return row


SPECTRUM_COLUMNS = ["omega_rad_s", "omega_over_omega_m", "thermal", "backaction", "shot", "total", "formula"]


def run_frequency_sweep(spec: SweepSpec) -> SweepResult:
    """Noise budget versus analysis frequency at fixed parameters.

    Raises:
        UnstableSystem: the base point is not strictly stable (report attached).
    """
    if spec.kind != FREQUENCY:
        raise ParameterError("kind", "run_frequency_sweep needs a frequency sweep")
    params = spec.base
    report = classify(params)
    if report.status != STABLE:
        raise UnstableSystem(f"base point is {report.status}; frequency sweep rejected", report=report)
    ss = report.steady_state
    rows = []
    for w in spec.axis1.values():
        bd = _breakdown(params, ss, float(w), spec.formula)
        rows.append(
            {
                "omega_rad_s": bd.omega,
                "omega_over_omega_m": bd.omega / params.omega_m,
                "thermal": bd.thermal,
                "backaction": bd.backaction,
                "shot": bd.shot,
                "total": bd.total,
                "formula": bd.formula,
            }
        )
    meta = _metadata(spec)
    meta["omega_m_eff"] = ss.omega_m_eff
    return SweepResult(FREQUENCY, list(SPECTRUM_COLUMNS), rows, meta)


POWER_COLUMNS = ["power", "status", "omega_rad_s", "omega_m_eff", "thermal", "backaction", "shot", "total", "formula"]


def run_power_sweep(spec: SweepSpec) -> SweepResult:
    """Noise budget versus input power (log or linear axis)."""
    if spec.kind != POWER:
        raise ParameterError("kind", "run_power_sweep needs a power sweep")
    rows = []
    for p in spec.axis1.values():
        row = {"power": float(p)}
        row.update(evaluate_point(spec.base.replace(power=float(p)), spec.eval_frequency, spec.formula))
        rows.append(row)
    return SweepResult(POWER, list(POWER_COLUMNS), rows, _metadata(spec))


MAP_COLUMNS = ["power", "gq_over_gl", "status", "omega_rad_s", "omega_m_eff", "thermal", "backaction", "shot", "total"]
STATUS_MAP_COLUMNS = ["power", "gq_over_gl", "status"]


def run_map(spec: SweepSpec) -> SweepResult:
    """Total noise (or status only) over power x g_q/g_l.

    Rows are ordered power-major. Sub-SQL points are those with total < 1.
    """
    if spec.kind != MAP:
        raise ParameterError("kind", "run_map needs a map sweep")
    rows = []
    ratios = spec.axis2.values()
    for p in spec.axis1.values():
        at_power = spec.base.replace(power=float(p))
        for r in ratios:
            row = {"power": float(p), "gq_over_gl": float(r)}
            row.update(evaluate_point(at_power.with_ratio(float(r)), spec.eval_frequency, spec.formula, spec.with_noise))
            rows.append(row)
    columns = MAP_COLUMNS if spec.with_noise else STATUS_MAP_COLUMNS
    return SweepResult(MAP, list(columns), rows, _metadata(spec))


def run(spec: SweepSpec) -> SweepResult:
    return {FREQUENCY: run_frequency_sweep, POWER: run_power_sweep, MAP: run_map}[spec.kind](spec)


# --- figure presets -----------------------------------------------------------


def preset(name: str) -> SweepSpec:
    """Built-in sweeps on the reference parameter set.

    fig2: spectrum over ω in [0.2, 1.6] ω_m (2000 points) at P = 10 µW.
    fig3: noise budget over P in [0.1 µW, 1 mW] (400 log points) at the
        soft-mode resonance.
    fig4: 200 x 200 map over P in [0.1 µW, 1 mW] and g_q/g_l in [-1, 0].
    """
    base = reference_params(power=10e-6)
    if name == "fig2":
        return SweepSpec(
            FREQUENCY, Axis("omega", 0.2 * base.omega_m, 1.6 * base.omega_m, 2000), base, eval_frequency=base.omega_m
        )
    if name == "fig3":
        return SweepSpec(POWER, Axis("power", 1e-7, 1e-3, 400, "log"), base)
    if name == "fig4":
        return SweepSpec(
            MAP, Axis("power", 1e-7, 1e-3, 200, "log"), base, axis2=Axis("gq_over_gl", -1.0, 0.0, 200)
        )
    raise ParameterError("preset", f"unknown preset {name!r} (choose from {', '.join(PRESET_NAMES)})")


PRESET_NAMES = ("fig2", "fig3", "fig4")
