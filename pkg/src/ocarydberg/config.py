"""Scenario configuration: YAML <-> dataclasses, with field-path diagnostics."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigInvalid
from .field import ALPHA_57D52, AC_COEFFICIENT, PLATE_SEPARATION_CM, LINEARIZATION_RATIO
from .signal_chain import SQUARE, WAVEFORMS

MODES = ("direct", "oca", "both")

# Four ULF test tones with their DC bias (mV), analyzer RBW (Hz) and
# transmission factor, as used for the reference measurements.
PAPER_FREQUENCIES = (7.0, 33.0, 66.0, 132.0)
PAPER_DC_BIAS_MV = (590.0, 590.0, 580.0, 680.0)
PAPER_RBW_HZ = (1.0, 3.0, 3.0, 3.0)
PAPER_CALIBRATION_F = (0.9975, 0.9568, 0.9832, 0.9304)


@dataclass
class FieldSection:
    e_dc: float = 0.58 / PLATE_SEPARATION_CM
    a_sig: float = 0.9832 * 0.005 / (AC_COEFFICIENT * PLATE_SEPARATION_CM)
    f_sig: float = 66.0
    phi_sig: float = 0.0
    alpha: float = ALPHA_57D52
    beta: float = 1e-3


@dataclass
class GeometrySection:
    plate_separation_d: float = PLATE_SEPARATION_CM
    effective_voltage_coefficient_c: float = AC_COEFFICIENT


@dataclass
class NoiseSection:
    # k chosen so the direct-path 7 Hz floor is 1/f dominated (~450 uV/cm/rtHz
    # with beta = 1 mV/MHz); not a measured value.
    k: float = 1.8e-6
    white_floor: float = 1e-12
    f_min_regularization: float | None = None
    seed: int = 1


@dataclass
class ChopperSection:
    f_chop: float = 2048.0
    duty: float = 0.5
    waveform: str = SQUARE


@dataclass
class LockinSection:
    lpf_time_constant: float = 1.0 / (2 * math.pi * 400.0)
    lpf_order: int = 4
    output_decimation: int = 2
    ref_phase: float = 0.0
    ref_waveform: str = "cosine"
    f_ref: float | None = None          # None: follow chopper.f_chop
    align_to_chopper: bool = True       # add the chop fundamental's phase


@dataclass
class AcquisitionSection:
    sample_rate: float = 16384.0
    duration: float = 64.0


@dataclass
class AnalysisSection:
    rbw: float = 3.0
    exclusion_halfwidth: float = 6.0
    floor_halfwidth: float = 18.0
    overlap: float = 0.5
    window: str = "hann"


@dataclass
class SuiteSection:
    frequencies_hz: list = field(default_factory=lambda: list(PAPER_FREQUENCIES))
    dc_bias_mv: list = field(default_factory=lambda: list(PAPER_DC_BIAS_MV))
    rbw_hz: list = field(default_factory=lambda: list(PAPER_RBW_HZ))
    calibration_f: list = field(default_factory=lambda: list(PAPER_CALIBRATION_F))
    signal_voltage_v: float = 0.005
    dc_coefficient: float = 1.0


@dataclass
class OutputSection:
    save_traces: bool = True
    save_demod_csv: bool = False    # full-rate X/Y/R/theta table; large


@dataclass
class DynamicsSection:
    # time-scaled parameter set (kHz-range rates) so that a T/200 step is
    # stable for the explicit integrator
    omega_p: float = 0.0
    omega_c0: float = 2 * math.pi * 10e3
    f_chop: float = 1000.0
    duty: float = 0.5
    gamma_e: float = 0.0
    gamma_r: float = 1e4
    delta_p: float = 0.0
    delta_c: float = 0.0
    t_end: float = 5e-3
    dt: float = 1e-6
    initial_state: str = "e"


@dataclass
class ScenarioConfig:
    scenario_name: str = "oca-66hz"
    mode: str = "both"
    field: FieldSection = dataclasses.field(default_factory=FieldSection)
    geometry: GeometrySection = dataclasses.field(default_factory=GeometrySection)
    noise: NoiseSection = dataclasses.field(default_factory=NoiseSection)
    chopper: ChopperSection = dataclasses.field(default_factory=ChopperSection)
    lockin: LockinSection = dataclasses.field(default_factory=LockinSection)
    acquisition: AcquisitionSection = dataclasses.field(default_factory=AcquisitionSection)
    analysis: AnalysisSection = dataclasses.field(default_factory=AnalysisSection)
    suite: SuiteSection = dataclasses.field(default_factory=SuiteSection)
    output: OutputSection = dataclasses.field(default_factory=OutputSection)
    dynamics: DynamicsSection = dataclasses.field(default_factory=DynamicsSection)

    @property
    def n_samples(self) -> int:
        return int(round(self.acquisition.sample_rate * self.acquisition.duration))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def _coerce(path, value, ftype):
    """Convert a YAML scalar to the annotated field type."""
    t = ftype if isinstance(ftype, str) else getattr(ftype, "__name__", str(ftype))
    optional = "None" in t
    if value is None:
        if optional:
            return None
        raise ConfigInvalid(path, "value required")
    try:
        if t.startswith("float"):
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if t.startswith("int"):
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if t.startswith("bool"):
            if isinstance(value, str):
                low = value.lower()
                if low in ("true", "yes", "1"):
                    return True
                if low in ("false", "no", "0"):
                    return False
                raise TypeError
            if not isinstance(value, bool):
                raise TypeError
            return value
        if t.startswith("str"):
            return str(value)
        if t.startswith("list"):
            if not isinstance(value, (list, tuple)):
                raise TypeError
            return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigInvalid(path, f"cannot interpret {value!r} as {t}") from None
    return value


def _build(cls, data, prefix):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigInvalid(prefix or "<root>", "expected a mapping")
    kwargs = {}
    fields = {f.name: f for f in dataclasses.fields(cls)}
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in fields:
            raise ConfigInvalid(path, "unknown key")
        f = fields[key]
        if dataclasses.is_dataclass(f.default_factory if f.default_factory is not dataclasses.MISSING else None):
            kwargs[key] = _build(f.default_factory, value, path)
        else:
            kwargs[key] = _coerce(path, value, f.type)
    return cls(**kwargs)


def from_dict(data: dict) -> ScenarioConfig:
    cfg = _build(ScenarioConfig, data, "")
    validate(cfg)
    return cfg


def load(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigInvalid(str(path), f"cannot read: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigInvalid(str(path), f"YAML error: {exc}") from None
    return from_dict(data or {})


def dump(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(cfg.to_yaml())


def apply_overrides(cfg: ScenarioConfig, overrides: list[str]) -> ScenarioConfig:
    """Apply ``section.key=value`` strings (values parsed as YAML)."""
    data = cfg.to_dict()
    for item in overrides:
        if "=" not in item:
            raise ConfigInvalid(item, "override must look like section.key=value")
        dotted, raw = item.split("=", 1)
        parts = dotted.strip().split(".")
        node = data
        for p in parts[:-1]:
            if not isinstance(node.get(p), dict):
                raise ConfigInvalid(dotted, "unknown section")
            node = node[p]
        if parts[-1] not in node:
            raise ConfigInvalid(dotted, "unknown key")
        node[parts[-1]] = yaml.safe_load(raw)
    return from_dict(data)


def _is_pow2(n):
    return n > 0 and n & (n - 1) == 0


def validate(cfg: ScenarioConfig) -> None:
    """Cross-field checks; raises ConfigInvalid naming the offending field."""
    if cfg.mode not in MODES:
        raise ConfigInvalid("mode", f"must be one of {MODES}")
    fs, acq, an = cfg.field, cfg.acquisition, cfg.analysis
    if fs.e_dc <= 0:
        raise ConfigInvalid("field.e_dc", "DC bias field must be > 0")
    if fs.a_sig < 0:
        raise ConfigInvalid("field.a_sig", "must be >= 0")
    if fs.f_sig <= 0:
        raise ConfigInvalid("field.f_sig", "must be > 0")
    if fs.beta == 0:
        raise ConfigInvalid("field.beta", "EIT slope must be nonzero")
    if fs.a_sig > LINEARIZATION_RATIO * fs.e_dc:
        raise ConfigInvalid("field.a_sig", f"exceeds {LINEARIZATION_RATIO} * e_dc")
    if cfg.geometry.plate_separation_d <= 0:
        raise ConfigInvalid("geometry.plate_separation_d", "must be > 0")
    if cfg.geometry.effective_voltage_coefficient_c <= 0:
        raise ConfigInvalid("geometry.effective_voltage_coefficient_c", "must be > 0")
    if cfg.noise.k < 0:
        raise ConfigInvalid("noise.k", "must be >= 0")
    if cfg.noise.white_floor < 0:
        raise ConfigInvalid("noise.white_floor", "must be >= 0")
    if acq.sample_rate <= 0:
        raise ConfigInvalid("acquisition.sample_rate", "must be > 0")
    n = cfg.n_samples
    if abs(n - acq.sample_rate * acq.duration) > 1e-6 or not _is_pow2(n) or n < 256:
        raise ConfigInvalid("acquisition.duration",
                            "sample_rate * duration must be a power of two >= 256")
    if an.rbw <= 0:
        raise ConfigInvalid("analysis.rbw", "must be > 0")
    if acq.duration < 10 / an.rbw:
        raise ConfigInvalid("acquisition.duration", f"must be >= 10 / rbw = {10 / an.rbw} s")
    if not 0 <= an.overlap <= 0.9:
        raise ConfigInvalid("analysis.overlap", "must lie in [0, 0.9]")
    if an.exclusion_halfwidth < 0 or an.floor_halfwidth <= an.exclusion_halfwidth:
        raise ConfigInvalid("analysis.floor_halfwidth", "must exceed exclusion_halfwidth")
    if fs.f_sig >= acq.sample_rate / 2:
        raise ConfigInvalid("field.f_sig", "must be below Nyquist")
    ch, li = cfg.chopper, cfg.lockin
    if ch.waveform not in WAVEFORMS:
        raise ConfigInvalid("chopper.waveform", f"must be one of {WAVEFORMS}")
    if not 0 < ch.duty <= 1:
        raise ConfigInvalid("chopper.duty", "must lie in (0, 1]")
    if cfg.mode in ("oca", "both"):
        if not fs.f_sig < ch.f_chop < acq.sample_rate / 2:
            raise ConfigInvalid("chopper.f_chop", "need f_sig < f_chop < sample_rate / 2")
        if li.f_ref is not None and not math.isclose(li.f_ref, ch.f_chop):
            raise ConfigInvalid("lockin.f_ref", "must equal chopper.f_chop")
        if li.lpf_time_constant <= 0:
            raise ConfigInvalid("lockin.lpf_time_constant", "must be > 0")
        if 1 / (2 * math.pi * li.lpf_time_constant) >= ch.f_chop / 2:
            raise ConfigInvalid("lockin.lpf_time_constant", "LPF cutoff must be below f_chop / 2")
        if li.lpf_order < 1:
            raise ConfigInvalid("lockin.lpf_order", "must be >= 1")
        if li.output_decimation < 1:
            raise ConfigInvalid("lockin.output_decimation", "must be >= 1")
        if ch.f_chop >= acq.sample_rate / (2 * li.output_decimation):
            raise ConfigInvalid("lockin.output_decimation",
                                "decimated Nyquist must stay above f_chop")
        if li.ref_waveform not in ("cosine", "square-fundamental"):
            raise ConfigInvalid("lockin.ref_waveform", "must be cosine or square-fundamental")
    su = cfg.suite
    lens = {len(su.frequencies_hz), len(su.dc_bias_mv), len(su.rbw_hz), len(su.calibration_f)}
    if len(lens) != 1:
        raise ConfigInvalid("suite", "frequencies_hz, dc_bias_mv, rbw_hz and "
                                     "calibration_f must have equal lengths")
    if cfg.output is None:
        raise ConfigInvalid("output", "missing")


def default_config() -> ScenarioConfig:
    cfg = ScenarioConfig()
    validate(cfg)
    return cfg


def resolve(data: Any) -> ScenarioConfig:
    """Accept a ScenarioConfig, a mapping or a path."""
    if isinstance(data, ScenarioConfig):
        return data
    if isinstance(data, dict):
        return from_dict(data)
    return load(data)
