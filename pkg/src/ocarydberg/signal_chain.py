"""1/f noise synthesis, optical-chopper modulation and the closed-form
chop/demodulate spectrum algebra.

Gain bookkeeping
----------------
The closed-form algebra keeps only the chopper's fundamental and drops every
gain factor.  Read as power spectra, that is the same as a power-preserving
modulation: the baseband signal comes back at full strength while unmodulated
noise is folded with weight 1/2.  A real optical chopper (0 <= m(t) <= 1) or a
unit cosine keeps only part of the signal power.  ``chop_efficiency`` is that
fraction (|c1|^2 / 2 for a fundamental phasor c1): 1/2 for the unit cosine,
2/pi^2 for a 50 % square wave.  ``predicted_enhancement_db`` takes it as an
optional argument; the default of 1 reproduces the idealised law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (BadFrequencyOrder, BadLength, GridMismatch,
                     NyquistViolation)
from .traces import SampledTrace, Spectrum

SQUARE = "square"
COSINE = "fundamental-cosine"
WAVEFORMS = (SQUARE, COSINE)


@dataclass(frozen=True)
class NoiseModel:
    """One-sided PSD k / max(|f|, f_min) + white_floor.

    ``f_min_regularization=None`` clamps at the lowest nonzero bin of the
    synthesized record.
    """

    k: float = 0.0
    white_floor: float = 0.0
    f_min_regularization: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.k < 0 or self.white_floor < 0:
            raise ValueError("k and white_floor must be >= 0")
        if self.f_min_regularization is not None and not self.f_min_regularization > 0:
            raise ValueError("f_min_regularization must be > 0")

    def psd(self, f, f_min=None):
        f_min = self.f_min_regularization if f_min is None else f_min
        f = np.abs(np.asarray(f, dtype=float))
        return self.k / np.maximum(f, f_min) + self.white_floor


@dataclass(frozen=True)
class ChopperConfig:
    f_chop: float
    duty: float = 0.5
    waveform: str = SQUARE

    def __post_init__(self):
        if not self.f_chop > 0:
            raise ValueError("f_chop must be > 0")
        if not 0 < self.duty <= 1:
            raise ValueError("duty must be in (0, 1]")
        if self.waveform not in WAVEFORMS:
            raise ValueError(f"waveform must be one of {WAVEFORMS}")


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def synth_one_over_f(n: int, rate: float, model: NoiseModel) -> SampledTrace:
    """Gaussian noise whose one-sided PSD is ``model.psd`` by construction.

    Each positive-frequency bin gets an independent complex Gaussian scaled
    to the target density; the DC bin is zero, so the record mean is exactly
    zero.
    """
    if n < 256 or not _is_pow2(n):
        raise BadLength(f"n must be a power of two >= 256, got {n}")
    rng = np.random.default_rng(model.seed)
    freqs = np.fft.rfftfreq(n, 1.0 / rate)
    f_min = model.f_min_regularization or freqs[1]
    target = model.psd(freqs, f_min)
    target[0] = 0.0

    spec = np.empty(len(freqs), dtype=complex)
    spec.real = rng.standard_normal(len(freqs))
    spec.imag = rng.standard_normal(len(freqs))
    spec /= math.sqrt(2.0)
    spec[-1] = spec[-1].real * math.sqrt(2.0)  # Nyquist bin is real
    spec *= np.sqrt(target * n * rate / 2.0)
    return SampledTrace(np.fft.irfft(spec, n), rate)


def chop_waveform(times, chop: ChopperConfig) -> np.ndarray:
    """Modulation m(t): {0, 1} square wave ON for the first ``duty`` of each
    period, or cos(2 pi f_chop t)."""
    t = np.asarray(times, dtype=float)
    if chop.waveform == COSINE:
        return np.cos(2 * np.pi * chop.f_chop * t)
    return (np.mod(t * chop.f_chop, 1.0) < chop.duty).astype(float)


def apply_chop(trace: SampledTrace, chop: ChopperConfig) -> SampledTrace:
    if not chop.f_chop < trace.sample_rate / 2:
        raise NyquistViolation(
            f"f_chop={chop.f_chop} Hz not below Nyquist {trace.sample_rate / 2} Hz")
    return trace.with_samples(trace.samples * chop_waveform(trace.times, chop))


def square_fundamental_amplitude(duty: float) -> float:
    """Amplitude of the fundamental of a continuous {0,1} square wave."""
    return 2.0 * math.sin(math.pi * duty) / math.pi


def chop_phasor(chop: ChopperConfig, rate: float | None = None) -> complex:
    """Complex fundamental c1 with m(t) ~ ... + Re(c1 exp(i 2 pi f_chop t)).

    For a square wave sampled at an integer number of samples per period the
    sampled waveform's exact DFT coefficient is returned (sampling shifts the
    phase by half a sample and alters the amplitude slightly); otherwise the
    continuous-time value.
    """
    if chop.waveform == COSINE:
        return 1.0 + 0.0j
    if rate is not None:
        spp = rate / chop.f_chop
        n_per = round(spp)
        if abs(spp - n_per) < 1e-9 and n_per >= 2:
            t = np.arange(n_per) / rate
            m = chop_waveform(t, chop)
            return complex(2.0 / n_per * np.sum(m * np.exp(-2j * np.pi * np.arange(n_per) / n_per)))
    return square_fundamental_amplitude(chop.duty) * complex(
        math.cos(math.pi * chop.duty), -math.sin(math.pi * chop.duty))


def chop_efficiency(chop: ChopperConfig, rate: float | None = None) -> float:
    """Fraction of baseband signal power kept by chop + synchronous demodulation,
    relative to the gain-free (power-preserving) idealisation."""
    return abs(chop_phasor(chop, rate)) ** 2 / 2.0


def predicted_demod_spectrum(signal_psd: Spectrum, noise_psd: Spectrum,
                             f_chop: float) -> Spectrum:
    """Baseband spectrum after chop + demodulation in the gain-free picture:

        S_de(f) = S_s(f) + [S_n(|f - f_chop|) + S_n(f + f_chop)] / 2

    ``noise_psd`` must share the signal grid and extend past
    ``max(f) + f_chop``; values between bins are linearly interpolated.
    """
    fs = signal_psd.freqs
    fn = noise_psd.freqs
    if len(fn) < len(fs) or not np.allclose(fn[:len(fs)], fs, rtol=0, atol=1e-9 * max(1.0, fs[-1])):
        raise GridMismatch("noise grid does not match the signal grid")
    if fn[-1] < fs[-1] + f_chop - 1e-9:
        raise GridMismatch(
            f"noise spectrum ends at {fn[-1]} Hz, need {fs[-1] + f_chop} Hz")
    lower = np.interp(np.abs(fs - f_chop), fn, noise_psd.psd)
    upper = np.interp(fs + f_chop, fn, noise_psd.psd)
    psd = signal_psd.psd + 0.5 * (lower + upper)
    return Spectrum(fs.copy(), psd, signal_psd.enbw, signal_psd.window_name,
                    signal_psd.n_averages)


def folded_noise_psd(k: float, white_floor: float, f, f_chop: float):
    """Closed-form noise term of the demodulated spectrum for 1/f + white noise."""
    f = np.asarray(f, dtype=float)
    return 0.5 * k * (1 / np.abs(f_chop - f) + 1 / (f_chop + f)) + white_floor


def predicted_enhancement_db(k: float, white_floor: float, f_s: float,
                             f_chop: float, efficiency: float = 1.0) -> float:
    """Sensitivity gain of the chopped path over the direct path at ``f_s``.

    10 log10 of direct noise density (k/f_s + w) over the folded density,
    plus 10 log10(efficiency) for the signal power the chopper discards.
    """
    if not 0 < f_s < f_chop:
        raise BadFrequencyOrder(f"need 0 < f_s < f_chop, got f_s={f_s}, f_chop={f_chop}")
    if not efficiency > 0:
        raise ValueError("efficiency must be > 0")
    direct = k / f_s + white_floor
    oca = float(folded_noise_psd(k, white_floor, f_s, f_chop))
    if direct == 0 and oca == 0:
        return 10 * math.log10(efficiency)
    return 10 * math.log10(direct / oca) + 10 * math.log10(efficiency)
