"""Quasi-phase-matching design: periods, SHG temperature tuning, concurrences.

Units: wavelengths and periods in micrometres, temperatures in degrees C,
wave vectors in rad/um, crystal length in mm, d coefficients in pm/V.

Model: collinear plane-wave undepleted SHG with ideal 50% duty-cycle poling,
so only odd orders exist and d_eff = 2 d / (m pi).
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import TextIO

import numpy as np
from scipy.optimize import brentq, minimize_scalar

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, InvalidArgumentError, NoSolutionError, OutOfRangeError

DATASET_ENV = "CVCONCUR_DATASET"
DEFAULT_DATASET = "rta_model.toml"
AXES = ("y", "z")
QPM_LABELS = ("yzy", "zzz", "yyy")
# d element used by default for each interaction (yyy: the d33 of a crystal rotated by 90 degrees)
D_KEY = {"yzy": "d24", "zzz": "d33", "yyy": "d33"}


@dataclass(frozen=True)
class SellmeierAxis:
    """n0^2 = A + sum_i B_i / (1 - C_i / lam^2) - D lam^2;  dn/dT = sum_k dndT[k] / lam^k."""

    A: float
    B: tuple[float, ...] = ()
    C: tuple[float, ...] = ()
    D: float = 0.0
    dndT: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "B", tuple(float(b) for b in self.B))
        object.__setattr__(self, "C", tuple(float(c) for c in self.C))
        object.__setattr__(self, "dndT", tuple(float(a) for a in self.dndT))
        if len(self.B) != len(self.C):
            raise ConfigError("Sellmeier B and C lists differ in length")

    def n0(self, lam):
        lam2 = np.asarray(lam, dtype=float) ** 2
        nsq = self.A - self.D * lam2
        for b, c in zip(self.B, self.C):
            nsq = nsq + b / (1.0 - c / lam2)
        with np.errstate(invalid="ignore"):
            return np.sqrt(nsq)

    def thermo(self, lam):
        lam = np.asarray(lam, dtype=float)
        return sum(a * lam ** (-k) for k, a in enumerate(self.dndT)) if self.dndT else 0.0 * lam


@dataclass(frozen=True)
class SellmeierSet:
    name: str
    axes: dict
    wavelength_range: tuple[float, float]
    temperature_range: tuple[float, float]
    t_ref: float = 25.0
    citation: str = ""
    d: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.wavelength_range
        tlo, thi = self.temperature_range
        if not (lo < hi and tlo < thi):
            raise ConfigError("validity ranges must be non-empty")
        missing = set(AXES) - set(self.axes)
        if missing:
            raise ConfigError(f"dataset lacks axes {sorted(missing)}")
        lam = np.linspace(lo, hi, 41)
        for name in AXES:
            for temp in np.linspace(tlo, thi, 11):
                n = self.axes[name].n0(lam) + self.axes[name].thermo(lam) * (temp - self.t_ref)
                if not np.all(np.isfinite(n)) or np.any(n <= 1.0):
                    raise ConfigError(f"axis {name}: n <= 1 or undefined inside the validity range")

    def check(self, lam: float | None = None, temp: float | None = None):
        if lam is not None:
            lo, hi = self.wavelength_range
            if not lo <= lam <= hi:
                raise OutOfRangeError(f"wavelength {lam:g} um outside validity range [{lo:g}, {hi:g}]")
        if temp is not None:
            lo, hi = self.temperature_range
            if not lo <= temp <= hi:
                raise OutOfRangeError(f"temperature {temp:g} C outside validity range [{lo:g}, {hi:g}]")


def refractive_index(s: SellmeierSet, axis: str, lam: float, temp: float) -> float:
    if axis not in AXES:
        raise InvalidArgumentError(f"axis must be one of {AXES}")
    s.check(lam, temp)
    ax = s.axes[axis]
    return float(ax.n0(lam) + ax.thermo(lam) * (temp - s.t_ref))


# --- dataset files ----------------------------------------------------------------------

_MATERIAL_KEYS = {"name", "citation", "reference_temperature_C", "wavelength_range_um", "temperature_range_C"}
_AXIS_KEYS = {"A", "B", "C", "D", "dndT"}
_NONLINEAR_KEYS = {"d24", "d33", "d32", "d31", "d15"}


def _reject_unknown(table: dict, allowed: set, where: str):
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in [{where}]: {sorted(unknown)}")


def parse_dataset(text: str) -> SellmeierSet:
    """Parse the TOML dataset format (see ``data/rta_model.toml`` for the layout)."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"dataset is not valid TOML: {exc}") from exc
    _reject_unknown(doc, {"material", "axis", "nonlinear"}, "top level")
    mat = doc.get("material")
    if mat is None:
        raise ConfigError("dataset lacks [material]")
    _reject_unknown(mat, _MATERIAL_KEYS, "material")
    axes_doc = doc.get("axis", {})
    _reject_unknown(axes_doc, set(AXES), "axis")
    axes = {}
    for name, table in axes_doc.items():
        _reject_unknown(table, _AXIS_KEYS, f"axis.{name}")
        if "A" not in table:
            raise ConfigError(f"[axis.{name}] lacks A")
        axes[name] = SellmeierAxis(
            A=float(table["A"]),
            B=tuple(table.get("B", ())),
            C=tuple(table.get("C", ())),
            D=float(table.get("D", 0.0)),
            dndT=tuple(table.get("dndT", ())),
        )
    nonlinear = doc.get("nonlinear", {})
    _reject_unknown(nonlinear, _NONLINEAR_KEYS, "nonlinear")
    try:
        wl = tuple(float(v) for v in mat["wavelength_range_um"])
        tr = tuple(float(v) for v in mat["temperature_range_C"])
    except KeyError as exc:
        raise ConfigError(f"[material] lacks {exc}") from exc
    return SellmeierSet(
        name=str(mat.get("name", "")),
        axes=axes,
        wavelength_range=wl,
        temperature_range=tr,
        t_ref=float(mat.get("reference_temperature_C", 25.0)),
        citation=str(mat.get("citation", "")),
        d={k: float(v) for k, v in nonlinear.items()},
    )


def load_dataset(path: str | os.PathLike | None = None) -> SellmeierSet:
    """Load a dataset file; default is $CVCONCUR_DATASET, then the bundled RTA-class model."""
    if path is None:
        path = os.environ.get(DATASET_ENV)
    if path is None:
        text = resources.files("cvconcur.data").joinpath(DEFAULT_DATASET).read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read dataset {path}: {exc}") from exc
    return parse_dataset(text)


# --- interactions and phase mismatch ----------------------------------------------------


@dataclass(frozen=True)
class QpmInteraction:
    label: str
    wavelength: float = 1.064
    order: int = 1
    d: float = 1.0

    def __post_init__(self):
        if self.label not in QPM_LABELS:
            raise InvalidArgumentError(f"QPM interaction must be one of {QPM_LABELS}")
        if self.order < 1 or self.order % 2 == 0:
            raise InvalidArgumentError("QPM order must be an odd positive integer")
        if not self.wavelength > 0:
            raise InvalidArgumentError("wavelength must be positive")

    @property
    def d_eff(self) -> float:
        return 2.0 * self.d / (self.order * math.pi)

    @classmethod
    def from_dataset(cls, s: SellmeierSet, label: str, order: int = 1, wavelength: float = 1.064, d: float | None = None):
        if d is None:
            d = s.d.get(D_KEY.get(label, ""), 1.0)
        return cls(label, wavelength, order, d)


def _bare_mismatch(s: SellmeierSet, q: QpmInteraction, temp: float) -> float:
    lam = q.wavelength
    s.check(lam, temp)
    s.check(lam / 2)
    pump, sig, idl = q.label

    def k(axis, wl):
        ax = s.axes[axis]
        return 2 * math.pi * float(ax.n0(wl) + ax.thermo(wl) * (temp - s.t_ref)) / wl

    return k(pump, lam / 2) - k(sig, lam) - k(idl, lam)


def delta_k(s: SellmeierSet, q: QpmInteraction, period: float, temp: float) -> float:
    """k_SH - k_1 - k_2 - 2 pi m / period, rad/um."""
    if not period > 0:
        raise InvalidArgumentError("period must be positive")
    return _bare_mismatch(s, q, temp) - 2 * math.pi * q.order / period


def qpm_period(s: SellmeierSet, q: QpmInteraction, temp: float) -> float:
    bare = _bare_mismatch(s, q, temp)
    if bare <= 0:
        raise NoSolutionError(f"{q.label}: bare mismatch {bare:.4g} rad/um is not positive; no QPM period")
    return q.order * (2 * math.pi / bare)


# --- tuning curves -----------------------------------------------------------------------


def _sinc(x):
    return np.sinc(np.asarray(x) / math.pi)


def sidelobe_x(lobe: int) -> float:
    """Position x of the |lobe|-th maximum of sinc^2(x), signed like ``lobe`` (x = 0 for lobe 0)."""
    if lobe == 0:
        return 0.0
    n = abs(lobe)
    x = brentq(lambda v: math.tan(v) - v, n * math.pi + 1e-9, n * math.pi + math.pi / 2 - 1e-9)
    return math.copysign(x, lobe)


@dataclass(frozen=True)
class Peak:
    temperature: float
    lobe: int
    value: float


@dataclass(frozen=True)
class TuningCurve:
    temperatures: np.ndarray
    power: np.ndarray  # d_eff^2 L^2 sinc^2(dk L / 2), (pm/V)^2 mm^2
    peaks: tuple[Peak, ...]
    length: float
    period: float
    interaction: QpmInteraction

    @property
    def peak_power(self) -> float:
        return self.interaction.d_eff**2 * self.length**2

    @property
    def normalized(self) -> np.ndarray:
        return self.power / self.peak_power

    @property
    def main_peak(self) -> Peak | None:
        mains = [p for p in self.peaks if p.lobe == 0]
        return max(mains, key=lambda p: p.value) if mains else None


def shg_power(s, q: QpmInteraction, period: float, length: float, temp) -> np.ndarray:
    temps = np.atleast_1d(np.asarray(temp, dtype=float))
    dk = np.array([delta_k(s, q, period, t) for t in temps])
    return q.d_eff**2 * length**2 * _sinc(dk * length * 1e3 / 2) ** 2


def _lobe_index(dk: float, length: float) -> int:
    x = dk * length * 1e3 / 2
    return int(math.copysign(math.floor(abs(x) / math.pi), x)) if x else 0


def shg_curve(s: SellmeierSet, q: QpmInteraction, period: float, length: float, t_range, steps: int) -> TuningCurve:
    """Sampled SHG efficiency versus temperature, with lobe maxima located."""
    if steps < 2:
        raise InvalidArgumentError("steps must be >= 2")
    if not length > 0:
        raise InvalidArgumentError("crystal length must be positive")
    t0, t1 = t_range
    s.check(temp=t0)
    s.check(temp=t1)
    temps = np.linspace(t0, t1, steps)
    power = shg_power(s, q, period, length, temps)
    peaks = []
    for i in range(1, steps - 1):
        if power[i] > power[i - 1] and power[i] >= power[i + 1]:
            y0, y1, y2 = power[i - 1 : i + 2]
            denom = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
            shift = min(max(shift, -0.5), 0.5)
            h = temps[1] - temps[0]
            t_peak = temps[i] + shift * h
            value = y1 - 0.25 * (y0 - y2) * shift
            peaks.append(Peak(float(t_peak), _lobe_index(delta_k(s, q, period, t_peak), length), float(value)))
    return TuningCurve(temps, power, tuple(peaks), float(length), float(period), q)


def fwhm(curve: TuningCurve) -> float:
    """Full width at half maximum of the main lobe, by linear interpolation."""
    y = curve.power
    t = curve.temperatures
    main = curve.main_peak
    if main is None:
        raise NoSolutionError("curve has no main lobe inside the sampled range")
    i = int(np.argmin(np.abs(t - main.temperature)))
    half = 0.5 * main.value
    lo = i
    while lo > 0 and y[lo] >= half:
        lo -= 1
    hi = i
    while hi < len(y) - 1 and y[hi] >= half:
        hi += 1
    if y[lo] >= half or y[hi] >= half:
        raise NoSolutionError("main lobe is cut by the sampled range")
    left = t[lo] + (half - y[lo]) * (t[lo + 1] - t[lo]) / (y[lo + 1] - y[lo])
    right = t[hi - 1] + (half - y[hi - 1]) * (t[hi] - t[hi - 1]) / (y[hi] - y[hi - 1])
    return float(right - left)


def write_curve_csv(curve: TuningCurve, stream: TextIO | None = None) -> str:
    """CSV ``temperature_C,power_normalized`` (peak-normalised to the Delta k = 0 value)."""
    buf = io.StringIO()
    buf.write("temperature_C,power_normalized\n")
    for t, p in zip(curve.temperatures, curve.normalized):
        buf.write(f"{t:.12g},{p:.12g}\n")
    for pk in curve.peaks:
        buf.write(f"#peak {pk.temperature:.12g},{pk.lobe},{pk.value / curve.peak_power:.12g}\n")
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def peak_ratio(q1: QpmInteraction, q2: QpmInteraction) -> float:
    """(d_eff(q1) / d_eff(q2))^2 = (m2 d1 / (m1 d2))^2."""
    if q1.d == 0 or q2.d == 0:
        raise InvalidArgumentError("d coefficients must be nonzero")
    return (q2.order * q1.d / (q1.order * q2.d)) ** 2


# --- concurrence search ------------------------------------------------------------------


def lobe_temperature(s, q, period, length, lobe, t_range) -> float | None:
    """Temperature of the given lobe maximum, or None if it lies outside t_range.

    Assumes Delta k is monotonic in T over the range.
    """
    target = 2 * sidelobe_x(lobe) / (length * 1e3)
    f = lambda t: delta_k(s, q, period, t) - target
    a, b = t_range
    fa, fb = f(a), f(b)
    if fa == 0:
        return float(a)
    if fa * fb > 0:
        return None
    return float(brentq(f, a, b, xtol=1e-10, rtol=1e-14))


@dataclass(frozen=True)
class Concurrence:
    period: float
    temperature: float
    lobes: tuple[int, int]
    efficiency: float
    mismatch: float  # |T1 - T2| at the reported period, deg C


def find_concurrences(
    s: SellmeierSet,
    q1: QpmInteraction,
    q2: QpmInteraction,
    period_range,
    t_range,
    lobe_depth: int = 0,
    length: float = 10.0,
    grid: int = 401,
    t_tol: float = 0.5,
) -> list[Concurrence]:
    """Periods at which a lobe maximum of q1 and one of q2 fall at the same temperature.

    Scans the period on a uniform grid, tracks each lobe's temperature, and
    refines every crossing (or near miss within ``t_tol``) of a lobe pair.
    Sorted by combined efficiency, the product of both SHG powers.
    """
    p0, p1 = period_range
    if not (0 < p0 < p1):
        raise InvalidArgumentError("period range must be positive and non-empty")
    if t_range[0] >= t_range[1]:
        raise InvalidArgumentError("temperature range is empty")
    if lobe_depth < 0:
        raise InvalidArgumentError("lobe depth must be >= 0")
    s.check(temp=t_range[0])
    s.check(temp=t_range[1])
    periods = np.linspace(p0, p1, grid)
    lobes = range(-lobe_depth, lobe_depth + 1)

    def track(q, lobe):
        return np.array([
            np.nan if (v := lobe_temperature(s, q, p, length, lobe, t_range)) is None else v for p in periods
        ])

    tracks1 = {lb: track(q1, lb) for lb in lobes}
    tracks2 = {lb: track(q2, lb) for lb in lobes}
    found = []
    for l1 in lobes:
        for l2 in lobes:
            diff = tracks1[l1] - tracks2[l2]

            def gap(p, l1=l1, l2=l2):
                a = lobe_temperature(s, q1, p, length, l1, t_range)
                b = lobe_temperature(s, q2, p, length, l2, t_range)
                return None if a is None or b is None else a - b

            candidates = []
            for i in range(grid - 1):
                d0, d1 = diff[i], diff[i + 1]
                if np.isnan(d0) or np.isnan(d1):
                    continue
                if d0 == 0:
                    candidates.append(periods[i])
                elif d0 * d1 < 0:
                    candidates.append(brentq(lambda p: gap(p), periods[i], periods[i + 1], xtol=1e-12))
            # near misses: local minima of |diff| that never change sign
            absd = np.abs(diff)
            for i in range(1, grid - 1):
                if np.isnan(absd[i - 1 : i + 2]).any():
                    continue
                if absd[i] <= absd[i - 1] and absd[i] <= absd[i + 1] and absd[i] <= t_tol:
                    if diff[i - 1] * diff[i + 1] > 0 and diff[i] != 0:
                        res = minimize_scalar(
                            lambda p: abs(gap(p)), bounds=(periods[i - 1], periods[i + 1]), method="bounded",
                            options={"xatol": 1e-10},
                        )
                        candidates.append(float(res.x))
            for p in candidates:
                a = lobe_temperature(s, q1, p, length, l1, t_range)
                b = lobe_temperature(s, q2, p, length, l2, t_range)
                if a is None or b is None or abs(a - b) > t_tol:
                    continue
                t = 0.5 * (a + b)
                eff = float(shg_power(s, q1, p, length, t)[0] * shg_power(s, q2, p, length, t)[0])
                found.append(Concurrence(float(p), float(t), (l1, l2), eff, float(abs(a - b))))
    found.sort(key=lambda c: (-c.efficiency, c.period, c.lobes))
    return found
