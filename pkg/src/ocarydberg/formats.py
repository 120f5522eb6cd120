"""Readers and writers for traces, trajectories, spectra, lock-in output and
calibration tables.

Floats are written with ``repr`` (shortest round-trip form) so a CSV read
back reproduces the exact doubles.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .dynamics import Trajectory
from .errors import OcaError
from .lockin import DemodOutput
from .spectral import SensitivityReport
from .traces import SampledTrace, Spectrum

TRACE_MAGIC = b"OCAT"
TRACE_VERSION = 1
_HEADER = struct.Struct("<4sIdQ")  # 24 bytes


class FileFormatError(OcaError, ValueError):
    """Malformed input file; message carries the path and line number."""


def _fmt(values) -> list[str]:
    return [repr(v) for v in np.asarray(values, dtype=float).tolist()]


def _write_rows(path, header, columns, comments=()):
    path = Path(path)
    with path.open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(zip(*[_fmt(c) for c in columns]))


def _read_rows(path, expected):
    path = Path(path)
    comments, header, rows = [], None, []
    with path.open(newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            fields = [f.strip() for f in line.split(",")]
            if header is None:
                if fields != list(expected):
                    raise FileFormatError(
                        f"{path}:{lineno}: expected header {','.join(expected)}, "
                        f"got {line!r}")
                header = fields
                continue
            if len(fields) != len(expected):
                raise FileFormatError(
                    f"{path}:{lineno}: expected {len(expected)} columns, got {len(fields)}")
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: {exc}") from None
    if header is None:
        raise FileFormatError(f"{path}: missing header row")
    return comments, np.array(rows, dtype=float).reshape(-1, len(expected))


# -- traces --------------------------------------------------------------------

def write_trace_csv(path, trace: SampledTrace) -> None:
    _write_rows(path, ["time_s", "value"], [trace.times, trace.samples])


def read_trace_csv(path) -> SampledTrace:
    _, data = _read_rows(path, ["time_s", "value"])
    t = data[:, 0]
    if len(t) < 2:
        raise FileFormatError(f"{path}: need at least 2 samples")
    rate = (len(t) - 1) / (t[-1] - t[0])
    return SampledTrace(data[:, 1], rate, t[0])


def write_trace_bin(path, trace: SampledTrace) -> None:
    """Little-endian container: 'OCAT', u32 version, f64 rate, u64 length,
    then the samples as f64.  ``t0`` is not stored."""
    with Path(path).open("wb") as fh:
        fh.write(_HEADER.pack(TRACE_MAGIC, TRACE_VERSION,
                              float(trace.sample_rate), len(trace)))
        fh.write(np.asarray(trace.samples, dtype="<f8").tobytes())


def read_trace_bin(path) -> SampledTrace:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FileFormatError(f"{path}: truncated header")
    magic, version, rate, n = _HEADER.unpack_from(raw)
    if magic != TRACE_MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    if version != TRACE_VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    body = raw[_HEADER.size:]
    if len(body) != 8 * n:
        raise FileFormatError(f"{path}: expected {n} samples, found {len(body) // 8}")
    return SampledTrace(np.frombuffer(body, dtype="<f8").copy(), rate)


# -- trajectories --------------------------------------------------------------

TRAJECTORY_COLUMNS = ["time_s", "rho_gg", "rho_ee", "rho_rr", "re_rho_er", "im_rho_er"]


def write_trajectory_csv(path, traj: Trajectory) -> None:
    s = traj.states
    _write_rows(path, TRAJECTORY_COLUMNS,
                [traj.times, s[:, 0, 0].real, s[:, 1, 1].real, s[:, 2, 2].real,
                 s[:, 1, 2].real, s[:, 1, 2].imag])


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    _, data = _read_rows(path, TRAJECTORY_COLUMNS)
    return {name: data[:, i] for i, name in enumerate(TRAJECTORY_COLUMNS)}


# -- spectra / lock-in ---------------------------------------------------------

def write_spectrum_csv(path, spec: Spectrum) -> None:
    _write_rows(path, ["freq_hz", "psd"], [spec.freqs, spec.psd],
                comments=[f"enbw = {spec.enbw!r}", f"window = {spec.window_name}",
                          f"n_averages = {spec.n_averages}"])


def read_spectrum_csv(path) -> Spectrum:
    comments, data = _read_rows(path, ["freq_hz", "psd"])
    meta = dict(c.split(" = ", 1) for c in comments if " = " in c)
    return Spectrum(data[:, 0], data[:, 1], float(meta["enbw"]),
                    meta.get("window", "hann"), int(meta.get("n_averages", 1)))


def write_demod_csv(path, out: DemodOutput) -> None:
    _write_rows(path, ["time_s", "x", "y", "r", "theta"],
                [out.times, out.x, out.y, out.r, out.theta],
                comments=[f"decimation = {out.decimation}"])


# -- reports / calibration -----------------------------------------------------

def write_sensitivity_csv(path, reports: list[SensitivityReport], labels=None) -> None:
    labels = labels or [""] * len(reports)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", *SensitivityReport.CSV_FIELDS])
        for lab, rep in zip(labels, reports):
            w.writerow([lab, *rep.csv_row()])


CALIBRATION_COLUMNS = ["voltage_v", "measured_shift_mhz"]


def read_calibration_csv(path):
    _, data = _read_rows(path, CALIBRATION_COLUMNS)
    return data[:, 0], data[:, 1]


def write_calibration_csv(path, voltages, shifts) -> None:
    _write_rows(path, CALIBRATION_COLUMNS, [voltages, shifts])
