"""Digital dual-phase lock-in amplifier.

The input is split into two mixers, one fed with the reference and one with
the reference shifted by 90 degrees.  Each product goes through a cascade of
identical first-order low-pass sections.  The outputs are X and Y, and
R = |X + iY|, theta = atan2(Y, X).

Both outputs are scaled by ``MIXER_GAIN`` = 2 so that a tone
A cos(2 pi f_ref t + phi) reads R = A and theta = phi - ref_phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import (GridMismatch, NyquistViolation, RecordTooShort,
                     ReferenceMismatch)
from .signal_chain import ChopperConfig, apply_chop
from .traces import SampledTrace

COSINE_REF = "cosine"
SQUARE_FUNDAMENTAL_REF = "square-fundamental"
MIXER_GAIN = 2.0


@dataclass(frozen=True)
class LockInConfig:
    """Lock-in settings.

    ``ref_waveform="square-fundamental"`` means the reference is the
    fundamental of a 50 % TTL square wave that goes high at phase 0, which
    lags a cosine by 90 degrees.
    """

    f_ref: float
    lpf_time_constant: float
    ref_phase: float = 0.0
    ref_waveform: str = COSINE_REF
    lpf_order: int = 1
    output_decimation: int = 1

    def __post_init__(self):
        if not self.f_ref > 0:
            raise ValueError("f_ref must be > 0")
        if not self.lpf_time_constant > 0:
            raise ValueError("lpf_time_constant must be > 0")
        if self.lpf_order < 1 or self.output_decimation < 1:
            raise ValueError("lpf_order and output_decimation must be >= 1")
        if self.ref_waveform not in (COSINE_REF, SQUARE_FUNDAMENTAL_REF):
            raise ValueError(f"unknown ref_waveform {self.ref_waveform!r}")
        if not self.cutoff < self.f_ref / 2:
            raise ValueError(
                f"LPF cutoff {self.cutoff:.4g} Hz must sit below f_ref/2")

    @property
    def cutoff(self) -> float:
        return 1.0 / (2 * math.pi * self.lpf_time_constant)

    @property
    def effective_phase(self) -> float:
        if self.ref_waveform == SQUARE_FUNDAMENTAL_REF:
            return self.ref_phase - math.pi / 2
        return self.ref_phase


@dataclass
class DemodOutput:
    x: np.ndarray
    y: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    sample_rate: float
    t0: float = 0.0
    decimation: int = 1

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.x)) / self.sample_rate

    def trace(self, name: str = "x") -> SampledTrace:
        return SampledTrace(getattr(self, name), self.sample_rate, self.t0)


def make_reference(n: int, rate: float, t0: float, config: LockInConfig):
    """Unit quadrature pair cos(2 pi f t + phi), sin(2 pi f t + phi)."""
    t = t0 + np.arange(n) / rate
    phase = 2 * np.pi * config.f_ref * t + config.effective_phase
    return (SampledTrace(np.cos(phase), rate, t0),
            SampledTrace(np.sin(phase), rate, t0))


def mix(signal: SampledTrace, reference: SampledTrace) -> SampledTrace:
    if not signal.same_grid(reference):
        raise GridMismatch("signal and reference are on different time grids")
    return signal.with_samples(signal.samples * reference.samples)


def _lowpass_array(x: np.ndarray, a: float, order: int) -> np.ndarray:
    b_coef = [1.0 - a]
    a_coef = [1.0, -a]
    y = x
    for _ in range(order):
        # state seeded with the first sample: y[-1] = y_in[0]
        zi = np.array([a * y[0]])
        y, _ = sps.lfilter(b_coef, a_coef, y, zi=zi)
    return y


def lowpass(trace: SampledTrace, tau: float, order: int = 1) -> SampledTrace:
    """Cascade of ``order`` first-order sections y[n] = a y[n-1] + (1-a) x[n],
    a = exp(-dt/tau), each with its state set to its first input sample."""
    if not tau > 0 or order < 1:
        raise ValueError("tau must be > 0 and order >= 1")
    a = math.exp(-trace.dt / tau)
    return trace.with_samples(_lowpass_array(trace.samples, a, order))


def lowpass_magnitude(f, tau: float, order: int, rate: float):
    """|H(f)| of the discrete cascade used by :func:`lowpass`."""
    a = math.exp(-1.0 / (rate * tau))
    z = np.exp(-2j * np.pi * np.asarray(f, dtype=float) / rate)
    return np.abs((1 - a) / (1 - a * z)) ** order


def folded_noise_scale() -> float:
    """Each output channel's noise PSD relative to the gain-free folded
    spectrum: a mixer gain c gives (c^2 / 2) * [S(fc-f) + S(fc+f)] / 2."""
    return MIXER_GAIN ** 2 / 2


def demodulate(signal: SampledTrace, config: LockInConfig) -> DemodOutput:
    """X/Y/R/theta of ``signal`` against the internal reference."""
    rate = signal.sample_rate
    if not config.f_ref < rate / 2:
        raise NyquistViolation(f"f_ref={config.f_ref} Hz not below {rate / 2} Hz")
    if signal.duration < 10 * config.lpf_time_constant:
        raise RecordTooShort(
            f"record {signal.duration:g} s shorter than 10 tau "
            f"({10 * config.lpf_time_constant:g} s)")
    ref, ref_90 = make_reference(len(signal), rate, signal.t0, config)
    a = math.exp(-1.0 / (rate * config.lpf_time_constant))
    s = signal.samples
    x = MIXER_GAIN * _lowpass_array(s * ref.samples, a, config.lpf_order)
    # quadrature arm mixes with the reference advanced by 90 deg, -sin(...)
    y = -MIXER_GAIN * _lowpass_array(s * ref_90.samples, a, config.lpf_order)
    dec = config.output_decimation
    x = x[::dec]
    y = y[::dec]
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)
    return DemodOutput(x, y, r, theta, rate / dec, signal.t0, dec)


def oca_pipeline(atomic_signal: SampledTrace, chop: ChopperConfig,
                 lia: LockInConfig,
                 pd_noise: SampledTrace | None = None) -> DemodOutput:
    """Chop the atomic response, add the (unchopped) detector noise, demodulate.

    The optical chopper only modulates what the atoms produce; noise from the
    photodetector and cabling enters after it and is passed separately.
    """
    if not math.isclose(lia.f_ref, chop.f_chop, rel_tol=1e-12):
        raise ReferenceMismatch(
            f"lock-in reference {lia.f_ref} Hz != chopper {chop.f_chop} Hz")
    pd = apply_chop(atomic_signal, chop)
    if pd_noise is not None:
        pd = pd + pd_noise
    return demodulate(pd, lia)
