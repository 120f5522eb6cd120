"""Electric field -> Stark shift -> photodetector voltage, and the
transmission-factor calibration.

Fields are in V/cm, shifts in MHz, polarizability in MHz cm^2 / V^2 and the
EIT slope beta in V/MHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .errors import (DegenerateAbscissa, FlatSpectrum, InsufficientData,
                     LinearizationInvalid, SignMismatch)

#: Scalar polarizability of 57D5/2, mj=1/2 (MHz cm^2 V^-2).
ALPHA_57D52 = -3426.5
#: Electrode spacing of the reference vapor cell, cm.
PLATE_SEPARATION_CM = 1.8
AC_COEFFICIENT = math.sqrt(2.0)
DC_COEFFICIENT = 1.0
LINEARIZATION_RATIO = 0.1

_MHZ = 2 * math.pi * 1e6  # rad/s per MHz


@dataclass(frozen=True)
class FieldScenario:
    e_dc: float
    a_sig: float
    f_sig: float
    phi_sig: float = 0.0
    alpha: float = ALPHA_57D52
    beta: float = 1e-3

    def __post_init__(self):
        if self.e_dc < 0 or self.a_sig < 0:
            raise ValueError("e_dc and a_sig must be >= 0")
        if not self.f_sig > 0:
            raise ValueError("f_sig must be > 0")

    @property
    def linearization_valid(self) -> bool:
        return self.a_sig <= LINEARIZATION_RATIO * self.e_dc


@dataclass(frozen=True)
class ElectrodeGeometry:
    plate_separation_d: float = PLATE_SEPARATION_CM
    effective_voltage_coefficient_c: float = AC_COEFFICIENT

    def __post_init__(self):
        if not self.plate_separation_d > 0:
            raise ValueError("plate separation must be > 0")
        if not self.effective_voltage_coefficient_c > 0:
            raise ValueError("voltage coefficient must be > 0")


@dataclass
class CalibrationFit:
    factor_f: float
    fit_points: list = field(default_factory=list)
    residual_rms: float = 0.0

    def report(self) -> str:
        return (f"factor_f = {self.factor_f!r}\n"
                f"residual_rms_v_per_cm = {self.residual_rms!r}\n"
                f"n_points = {len(self.fit_points)}\n")


def total_field(t, scenario: FieldScenario):
    return scenario.e_dc + scenario.a_sig * np.cos(
        2 * np.pi * scenario.f_sig * np.asarray(t) + scenario.phi_sig)


def stark_shift(e, alpha=ALPHA_57D52):
    """Quadratic Stark shift -alpha e^2 / 2 in MHz."""
    return -0.5 * alpha * np.asarray(e) ** 2


def linearized_shift(t, scenario: FieldScenario):
    """DC-biased shift to first order in the signal amplitude.

    The dropped term is -(alpha/2) a_sig^2 cos^2(...), so the error against
    ``stark_shift(total_field(t))`` never exceeds |alpha| a_sig^2 / 2.
    """
    if not scenario.linearization_valid:
        raise LinearizationInvalid(
            f"a_sig={scenario.a_sig} V/cm exceeds {LINEARIZATION_RATIO} * "
            f"e_dc={scenario.e_dc} V/cm")
    a = scenario.alpha
    phase = 2 * np.pi * scenario.f_sig * np.asarray(t) + scenario.phi_sig
    return -0.5 * a * scenario.e_dc ** 2 \
        - a * scenario.e_dc * scenario.a_sig * np.cos(phase)


def pd_voltage(shift, beta, noise_sample=0.0):
    return beta * np.asarray(shift) + noise_sample


def e_read(voltage, geometry: ElectrodeGeometry):
    """Nominal field V / (C d) from the generator voltage."""
    if np.any(np.asarray(voltage) < 0):
        raise ValueError("voltage must be >= 0")
    return np.asarray(voltage) / (geometry.effective_voltage_coefficient_c
                                  * geometry.plate_separation_d)


def field_from_shift(shift, alpha=ALPHA_57D52):
    """Invert the quadratic Stark shift: sqrt(-2 shift / alpha)."""
    arg = -2.0 * np.asarray(shift, dtype=float) / alpha
    if np.any(arg < 0):
        raise SignMismatch(
            f"shift sign inconsistent with alpha={alpha}: -2*shift/alpha < 0")
    out = np.sqrt(arg)
    return float(out) if out.ndim == 0 else out


def calibrate_factor(points) -> CalibrationFit:
    """Least-squares slope through the origin of e_exp against e_read."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise InsufficientData(f"need >= 2 calibration points, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.all(x == x[0]):
        raise DegenerateAbscissa("all e_read values are equal")
    f = float(np.dot(x, y) / np.dot(x, x))
    resid = y - f * x
    return CalibrationFit(f, pts, float(np.sqrt(np.mean(resid ** 2))))


# -- EIT slope ---------------------------------------------------------------

def _lock_hamiltonian(drive, detuning_mhz):
    return dynamics.build_hamiltonian(
        drive.omega_p, drive.omega_c0, drive.delta_p,
        drive.delta_c + detuning_mhz * _MHZ)


def eit_scan(drive: dynamics.DriveProfile, detunings_mhz, gain: float = 1.0):
    """Transmission-proportional ordinate, ``-gain * Im(rho_ge)``, of the
    steady state with the coupling laser held ON, versus extra coupling
    detuning in MHz (added to ``drive.delta_c``)."""
    out = []
    for d in np.atleast_1d(detunings_mhz):
        rho = dynamics.steady_state(_lock_hamiltonian(drive, d),
                                    drive.gamma_e, drive.gamma_r)
        out.append(-gain * rho[dynamics.G, dynamics.E].imag)
    return np.array(out)


def eit_slope(drive: dynamics.DriveProfile, lock_point_mhz: float,
              gain: float = 1.0) -> float:
    """d(ordinate)/d(detuning) in V/MHz at ``lock_point_mhz``, from linear
    response of the steady state (no finite differencing)."""
    H = _lock_hamiltonian(drive, lock_point_mhz)
    dH = np.zeros((3, 3), dtype=complex)
    dH[dynamics.R, dynamics.R] = -_MHZ  # dH / d(delta_c in MHz)
    _, drho = dynamics.steady_state_sensitivity(H, dH, drive.gamma_e,
                                                drive.gamma_r)
    return float(-gain * drho[dynamics.G, dynamics.E].imag)


@dataclass
class BetaEstimate:
    beta: float
    lock_point_mhz: float
    detunings_mhz: np.ndarray
    ordinate: np.ndarray


def estimate_beta(drive: dynamics.DriveProfile, scan_range: float,
                  n_points: int, lock_point_mhz: float,
                  gain: float = 1.0) -> BetaEstimate:
    """EIT slope at a lock point, plus the surrounding scan for inspection.

    ``scan_range`` is the full width (MHz) of the scan centred on zero extra
    detuning.  Raises FlatSpectrum at an extremum.
    """
    if n_points < 3:
        raise ValueError("n_points must be >= 3")
    if abs(lock_point_mhz) > scan_range / 2:
        raise ValueError("lock point outside the scan range")
    det = np.linspace(-scan_range / 2, scan_range / 2, n_points)
    ordinate = eit_scan(drive, det, gain)
    beta = eit_slope(drive, lock_point_mhz, gain)
    if abs(beta) < 1e-12:
        raise FlatSpectrum(f"slope {beta:.3g} V/MHz at {lock_point_mhz} MHz")
    return BetaEstimate(beta, lock_point_mhz, det, ordinate)
