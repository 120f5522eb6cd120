"""PSD estimation, RBW bookkeeping and sensitivity extraction."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy import signal

from .errors import (BadOverlap, FrequencyMismatch, PeakNotFound,
                     SegmentTooLong, SignalOutOfRange, UnachievableRbw)
from .traces import SampledTrace, Spectrum

DEFAULT_WINDOW = "hann"
MAX_SEGMENT = 2 ** 22


def window_enbw_bins(window: str, n: int) -> float:
    """Equivalent noise bandwidth of an n-point window in units of bins."""
    w = signal.get_window(window, n)
    return float(n * np.sum(w ** 2) / np.sum(w) ** 2)


def psd_welch(trace: SampledTrace, segment_len: int, overlap: float = 0.5,
              window: str = DEFAULT_WINDOW, detrend="constant") -> Spectrum:
    """Averaged modified periodogram, one-sided, density-scaled.

    Each segment has its mean removed by default (``detrend="constant"``) so
    the large DC Stark offset does not leak into low bins.
    """
    if segment_len > len(trace):
        raise SegmentTooLong(f"segment_len={segment_len} > trace length {len(trace)}")
    if segment_len < 2 or segment_len & (segment_len - 1):
        raise ValueError(f"segment_len must be a power of two, got {segment_len}")
    if not 0 <= overlap <= 0.9:
        raise BadOverlap(f"overlap must lie in [0, 0.9], got {overlap}")
    noverlap = int(round(overlap * segment_len))
    freqs, psd = signal.welch(trace.samples, fs=trace.sample_rate, window=window,
                              nperseg=segment_len, noverlap=noverlap,
                              detrend=detrend, scaling="density",
                              return_onesided=True)
    step = segment_len - noverlap
    n_avg = 1 + (len(trace) - segment_len) // step
    enbw = window_enbw_bins(window, segment_len) * trace.sample_rate / segment_len
    return Spectrum(freqs, psd, enbw, window, n_avg)


@dataclass(frozen=True)
class RbwConfig:
    segment_len: int
    enbw: float
    bin_width: float


def rbw_to_config(rbw: float, rate: float, window: str = DEFAULT_WINDOW,
                  max_segment: int = MAX_SEGMENT) -> RbwConfig:
    """Smallest power-of-two segment whose window ENBW does not exceed ``rbw``.

    Hann has an ENBW of 1.5 bins, so the segment is at least 1.5 rate / rbw.
    """
    n = 2
    while n <= max_segment:
        enbw = window_enbw_bins(window, n) * rate / n
        if enbw <= rbw:
            return RbwConfig(n, enbw, rate / n)
        n *= 2
    raise UnachievableRbw(
        f"RBW {rbw} Hz needs a segment longer than {max_segment} at {rate} Hz")


@dataclass(frozen=True)
class SensitivityReport:
    f_sig: float
    signal_asd: float
    noise_floor_asd: float
    sensitivity: float
    snr_db: float
    rbw: float
    peak_found: bool = True

    CSV_FIELDS = ("f_sig", "signal_asd", "noise_floor_asd", "sensitivity",
                  "snr_db", "rbw", "peak_found")

    def csv_row(self) -> list[str]:
        d = asdict(self)
        return [repr(d[k]) if k != "peak_found" else str(d[k]).lower()
                for k in self.CSV_FIELDS]

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in zip(self.CSV_FIELDS, self.csv_row()))


def sensitivity_report(spec: Spectrum, f_sig: float, transduction_gain: float,
                       exclusion_halfwidth: float,
                       floor_halfwidth: float | None = None) -> SensitivityReport:
    """Tone level and noise floor around ``f_sig``, referred to the field.

    The signal is the largest PSD bin within one ENBW of ``f_sig``.  The floor
    is the lower median of the PSD over bins with
    ``exclusion_halfwidth < |f - f_sig| <= floor_halfwidth`` (DC excluded), so
    both reported densities are square roots of actual PSD bins.  Dividing by
    ``transduction_gain`` (volts per V/cm) converts to field units.
    """
    if not transduction_gain > 0:
        raise ValueError("transduction_gain must be > 0")
    f = spec.freqs
    if not f[0] < f_sig < f[-1]:
        raise SignalOutOfRange(f"f_sig={f_sig} Hz outside [{f[0]}, {f[-1]}] Hz")
    if floor_halfwidth is None:
        floor_halfwidth = 4 * exclusion_halfwidth
    dist = np.abs(f - f_sig)

    peak_sel = dist <= max(spec.enbw, spec.bin_width)
    peak_psd = float(np.max(spec.psd[peak_sel]))

    floor_sel = (dist > exclusion_halfwidth) & (dist <= floor_halfwidth) & (f > 0)
    vals = np.sort(spec.psd[floor_sel])
    if len(vals) < 3:
        raise ValueError(
            f"only {len(vals)} floor bins around {f_sig} Hz; widen floor_halfwidth")
    floor_psd = float(vals[(len(vals) - 1) // 2])

    signal_asd = math.sqrt(peak_psd) / transduction_gain
    floor_asd = math.sqrt(floor_psd) / transduction_gain
    if floor_asd > 0 and signal_asd > 0:
        snr_db = 20 * math.log10(signal_asd / floor_asd)
    elif signal_asd > 0:
        snr_db = math.inf
    else:
        snr_db = -math.inf
    found = snr_db >= 3.0
    if not found:
        warnings.warn(f"no tone 3 dB above the floor at {f_sig} Hz "
                      f"(SNR {snr_db:.2f} dB)", PeakNotFound, stacklevel=2)
    return SensitivityReport(float(f_sig), signal_asd, floor_asd, floor_asd,
                             snr_db, spec.enbw, found)


def enhancement_db(with_oca: SensitivityReport,
                   without_oca: SensitivityReport) -> float:
    """20 log10 of the sensitivity ratio; positive when chopping helps."""
    if not math.isclose(with_oca.f_sig, without_oca.f_sig, rel_tol=1e-9):
        raise FrequencyMismatch(
            f"reports at {with_oca.f_sig} Hz and {without_oca.f_sig} Hz")
    return 20 * math.log10(without_oca.sensitivity / with_oca.sensitivity)
