"""Containers passed between the signal-chain, lock-in and spectral modules."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class SampledTrace:
    """Uniformly sampled real series starting at ``t0`` seconds."""

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", s)
        if s.ndim != 1 or len(s) < 2:
            raise ValueError("a trace needs at least 2 samples")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        if not np.all(np.isfinite(s)):
            raise ValueError("trace contains non-finite samples")

    def __len__(self):
        return len(self.samples)

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.samples)) / self.sample_rate

    def with_samples(self, samples) -> "SampledTrace":
        return replace(self, samples=samples)

    def same_grid(self, other: "SampledTrace") -> bool:
        return (len(self) == len(other) and self.sample_rate == other.sample_rate
                and self.t0 == other.t0)

    def __add__(self, other):
        if isinstance(other, SampledTrace):
            if not self.same_grid(other):
                raise ValueError("cannot add traces on different grids")
            other = other.samples
        return self.with_samples(self.samples + other)


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectral density on a uniform ascending grid."""

    freqs: np.ndarray
    psd: np.ndarray
    enbw: float
    window_name: str = "hann"
    n_averages: int = 1

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        p = np.asarray(self.psd, dtype=float)
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "psd", p)
        if f.shape != p.shape:
            raise ValueError("freqs and psd lengths differ")
        if len(f) and f[0] < 0:
            raise ValueError("frequencies must start at >= 0")
        if np.any(p < 0):
            raise ValueError("psd must be non-negative")
        if not self.enbw > 0:
            raise ValueError("enbw must be > 0")

    @property
    def bin_width(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    @property
    def asd(self) -> np.ndarray:
        return np.sqrt(self.psd)
