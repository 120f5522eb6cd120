"""Scenario runner: field -> PD voltage -> 1/f noise -> (chop -> lock-in) ->
spectrum -> sensitivity, plus the dynamics demo and calibration front-ends."""

from __future__ import annotations

import cmath
import csv
import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import dynamics, formats
from .config import ScenarioConfig
from .errors import PeakNotFound
from .field import (CalibrationFit, ElectrodeGeometry, FieldScenario,
                    calibrate_factor, e_read, field_from_shift, linearized_shift,
                    pd_voltage)
from .lockin import DemodOutput, LockInConfig, lowpass_magnitude, oca_pipeline
from .signal_chain import (ChopperConfig, NoiseModel, chop_phasor,
                           predicted_enhancement_db, synth_one_over_f)
from .spectral import (SensitivityReport, enhancement_db, psd_welch,
                       rbw_to_config, sensitivity_report)
from .traces import SampledTrace, Spectrum

log = logging.getLogger(__name__)


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    traces: dict = field(default_factory=dict)
    spectra: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)
    demod: DemodOutput | None = None
    transduction_gain: dict = field(default_factory=dict)
    chop_efficiency: float | None = None
    predicted_enhancement_db: float | None = None
    ideal_enhancement_db: float | None = None

    @property
    def enhancement_db(self) -> float | None:
        if "direct" in self.reports and "oca" in self.reports:
            return enhancement_db(self.reports["oca"], self.reports["direct"])
        return None


def build_lockin(cfg: ScenarioConfig) -> LockInConfig:
    """Lock-in settings with the reference phase locked to the chopper's
    fundamental, so the demodulated signal lands in X."""
    li, ch = cfg.lockin, cfg.chopper
    chop = ChopperConfig(ch.f_chop, ch.duty, ch.waveform)
    phase = li.ref_phase
    if li.align_to_chopper:
        phase += cmath.phase(chop_phasor(chop, cfg.acquisition.sample_rate))
    return LockInConfig(f_ref=li.f_ref if li.f_ref is not None else ch.f_chop,
                        lpf_time_constant=li.lpf_time_constant,
                        ref_phase=phase, ref_waveform=li.ref_waveform,
                        lpf_order=li.lpf_order,
                        output_decimation=li.output_decimation)


def oca_signal_gain(cfg: ScenarioConfig) -> float:
    """Amplitude gain of a baseband tone at f_sig through chop + lock-in X,
    relative to the unchopped PD voltage."""
    ch, li = cfg.chopper, cfg.lockin
    lia = build_lockin(cfg)
    c1 = chop_phasor(ChopperConfig(ch.f_chop, ch.duty, ch.waveform),
                     cfg.acquisition.sample_rate)
    projection = abs(c1) * math.cos(cmath.phase(c1) - lia.effective_phase)
    h = float(lowpass_magnitude(cfg.field.f_sig, li.lpf_time_constant,
                                li.lpf_order, cfg.acquisition.sample_rate))
    return abs(projection) * h


def _spectrum(trace: SampledTrace, cfg: ScenarioConfig) -> Spectrum:
    an = cfg.analysis
    seg = rbw_to_config(an.rbw, trace.sample_rate, an.window).segment_len
    return psd_welch(trace, seg, an.overlap, an.window)


def _report(spec, cfg, gain):
    an = cfg.analysis
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PeakNotFound)
        rep = sensitivity_report(spec, cfg.field.f_sig, gain,
                                 an.exclusion_halfwidth, an.floor_halfwidth)
    if not rep.peak_found:
        log.warning("%s: no tone 3 dB above the floor at %g Hz",
                    cfg.scenario_name, cfg.field.f_sig)
    return rep


def run_scenario(cfg) -> ScenarioResult:
    """Simulate one scenario and extract sensitivities for the chosen mode(s).

    Both paths share one noise realization, so their difference reflects the
    processing rather than the seed.
    """
    cfg = cfgmod.resolve(cfg)
    cfgmod.validate(cfg)
    acq, fsec = cfg.acquisition, cfg.field
    rate, n = acq.sample_rate, cfg.n_samples
    scen = FieldScenario(fsec.e_dc, fsec.a_sig, fsec.f_sig, fsec.phi_sig,
                         fsec.alpha, fsec.beta)
    t = np.arange(n) / rate
    atomic = SampledTrace(pd_voltage(linearized_shift(t, scen), scen.beta), rate)
    ns = cfg.noise
    noise = synth_one_over_f(n, rate, NoiseModel(ns.k, ns.white_floor,
                                                 ns.f_min_regularization, ns.seed))
    res = ScenarioResult(cfg)
    base_gain = abs(scen.beta * scen.alpha) * scen.e_dc

    if cfg.mode in ("direct", "both"):
        pd = atomic + noise
        spec = _spectrum(pd, cfg)
        res.traces["direct_pd"] = pd
        res.spectra["direct"] = spec
        res.transduction_gain["direct"] = base_gain
        res.reports["direct"] = _report(spec, cfg, base_gain)

    if cfg.mode in ("oca", "both"):
        ch = cfg.chopper
        chop = ChopperConfig(ch.f_chop, ch.duty, ch.waveform)
        out = oca_pipeline(atomic, chop, build_lockin(cfg), noise)
        x = out.trace("x")
        spec = _spectrum(x, cfg)
        gain = base_gain * oca_signal_gain(cfg)
        res.demod = out
        res.traces["oca_x"] = x
        res.spectra["oca"] = spec
        res.transduction_gain["oca"] = gain
        res.reports["oca"] = _report(spec, cfg, gain)
        eff = abs(chop_phasor(chop, rate)) ** 2 / 2
        res.chop_efficiency = eff
        res.predicted_enhancement_db = predicted_enhancement_db(
            ns.k, ns.white_floor, fsec.f_sig, ch.f_chop, eff)
        res.ideal_enhancement_db = predicted_enhancement_db(
            ns.k, ns.white_floor, fsec.f_sig, ch.f_chop)
    return res


# -- artifacts -------------------------------------------------------------------

def make_run_dir(out_root, name: str, timestamp: str | None = None) -> Path:
    stamp = timestamp or datetime.now().strftime("%Y%m%dT%H%M%S")
    path = Path(out_root) / f"{name}_{stamp}"
    suffix = 1
    while path.exists():
        path = Path(out_root) / f"{name}_{stamp}-{suffix}"
        suffix += 1
    path.mkdir(parents=True)
    return path


def write_index(run_dir: Path) -> None:
    files = sorted(p.relative_to(run_dir).as_posix()
                   for p in run_dir.rglob("*") if p.is_file() and p.name != "index.txt")
    (run_dir / "index.txt").write_text("".join(f"{f}\n" for f in files))


def write_scenario_artifacts(res: ScenarioResult, run_dir: Path, tag: str = "") -> None:
    run_dir = Path(run_dir)
    for sub in ("traces", "spectra", "reports"):
        (run_dir / sub).mkdir(parents=True, exist_ok=True)
    prefix = f"{tag}_" if tag else ""
    if res.config.output.save_traces:
        for name, tr in res.traces.items():
            formats.write_trace_bin(run_dir / "traces" / f"{prefix}{name}.ocat", tr)
    if res.config.output.save_demod_csv and res.demod is not None:
        formats.write_demod_csv(run_dir / "traces" / f"{prefix}demod.csv", res.demod)
    for name, spec in res.spectra.items():
        formats.write_spectrum_csv(run_dir / "spectra" / f"{prefix}{name}.csv", spec)
    labels = list(res.reports)
    formats.write_sensitivity_csv(run_dir / "reports" / f"{prefix}sensitivity.csv",
                                  [res.reports[k] for k in labels], labels)
    with (run_dir / "reports" / f"{prefix}sensitivity.txt").open("w") as fh:
        fh.write(f"scenario = {res.config.scenario_name}\n")
        for k in labels:
            fh.write(f"\n[{k}]\n")
            fh.write(f"transduction_gain = {res.transduction_gain[k]!r}\n")
            fh.write(res.reports[k].to_text())
        if res.enhancement_db is not None:
            fh.write("\n[comparison]\n")
            fh.write(f"enhancement_db = {res.enhancement_db!r}\n")
            fh.write(f"predicted_enhancement_db = {res.predicted_enhancement_db!r}\n")
            fh.write(f"ideal_enhancement_db = {res.ideal_enhancement_db!r}\n")
            fh.write(f"chop_efficiency = {res.chop_efficiency!r}\n")


# -- paper suite -------------------------------------------------------------------

COMPARISON_FIELDS = ("f_sig", "sensitivity_direct", "sensitivity_oca", "enhancement_db",
                     "predicted_enhancement_db", "ideal_enhancement_db",
                     "dc_bias", "calibration_f", "rbw")


@dataclass
class ComparisonRow:
    f_sig: float
    sensitivity_direct: float
    sensitivity_oca: float
    enhancement_db: float
    predicted_enhancement_db: float
    ideal_enhancement_db: float
    dc_bias: float
    calibration_f: float
    rbw: float


@dataclass
class ComparisonReport:
    rows: list
    results: list = field(default_factory=list, repr=False)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COMPARISON_FIELDS)
            for r in self.rows:
                w.writerow([repr(float(getattr(r, k))) for k in COMPARISON_FIELDS])

    def to_text(self) -> str:
        lines = [f"{'f_sig/Hz':>8} {'direct':>12} {'OCA':>12} {'gain/dB':>8} "
                 f"{'pred/dB':>8} {'ideal/dB':>8} {'bias/mV':>8} {'F':>7} {'RBW/Hz':>6}",
                 f"{'':>8} {'uV/cm/rtHz':>12} {'uV/cm/rtHz':>12}"]
        for r in self.rows:
            lines.append(
                f"{r.f_sig:8.1f} {r.sensitivity_direct * 1e6:12.2f} "
                f"{r.sensitivity_oca * 1e6:12.2f} {r.enhancement_db:8.2f} "
                f"{r.predicted_enhancement_db:8.2f} {r.ideal_enhancement_db:8.2f} "
                f"{r.dc_bias * 1e3:8.1f} {r.calibration_f:7.4f} {r.rbw:6.2f}")
        return "\n".join(lines) + "\n"


def suite_configs(base) -> list[ScenarioConfig]:
    """One mode=both scenario per suite frequency.

    The DC bias voltage becomes e_dc through V/(C d) with C = 1; the signal
    generator voltage becomes a_sig = F * V/(C d) with the geometry's AC
    coefficient.  Spectral windows scale with each frequency's RBW.
    """
    base = cfgmod.resolve(base)
    su = base.suite
    out = []
    dc_geom = ElectrodeGeometry(base.geometry.plate_separation_d, su.dc_coefficient)
    ac_geom = ElectrodeGeometry(base.geometry.plate_separation_d,
                                base.geometry.effective_voltage_coefficient_c)
    for i, (f, bias, rbw, F) in enumerate(zip(su.frequencies_hz, su.dc_bias_mv,
                                               su.rbw_hz, su.calibration_f)):
        c = dataclasses.replace(base)
        scale = rbw / base.analysis.rbw
        c.scenario_name = f"{base.scenario_name}-f{f:g}"
        c.mode = "both"
        c.field = dataclasses.replace(
            base.field, f_sig=float(f),
            e_dc=float(e_read(bias * 1e-3, dc_geom)),
            a_sig=float(F * e_read(su.signal_voltage_v, ac_geom)))
        c.analysis = dataclasses.replace(
            base.analysis, rbw=float(rbw),
            exclusion_halfwidth=base.analysis.exclusion_halfwidth * scale,
            floor_halfwidth=base.analysis.floor_halfwidth * scale)
        c.noise = dataclasses.replace(base.noise, seed=base.noise.seed + i)
        cfgmod.validate(c)
        out.append(c)
    return out


def run_paper_suite(base) -> ComparisonReport:
    base = cfgmod.resolve(base)
    rows, results = [], []
    for c, bias, F in zip(suite_configs(base), base.suite.dc_bias_mv,
                          base.suite.calibration_f):
        log.info("suite: running %s", c.scenario_name)
        res = run_scenario(c)
        results.append(res)
        rows.append(ComparisonRow(
            f_sig=c.field.f_sig,
            sensitivity_direct=res.reports["direct"].sensitivity,
            sensitivity_oca=res.reports["oca"].sensitivity,
            enhancement_db=res.enhancement_db,
            predicted_enhancement_db=res.predicted_enhancement_db,
            ideal_enhancement_db=res.ideal_enhancement_db,
            dc_bias=bias * 1e-3, calibration_f=F, rbw=c.analysis.rbw))
    return ComparisonReport(rows, results)


def write_suite_artifacts(report: ComparisonReport, run_dir: Path) -> None:
    run_dir = Path(run_dir)
    for res in report.results:
        tag = f"f{res.config.field.f_sig:05.1f}".replace(".", "p")
        write_scenario_artifacts(res, run_dir, tag)
    report.to_csv(run_dir / "comparison.csv")
    (run_dir / "comparison.txt").write_text(report.to_text())


# -- dynamics demo ---------------------------------------------------------------------

@dataclass
class DynamicsSummary:
    on_phase_max_dev: float
    off_phase_max_dev: float
    on_oracle_exact: bool
    off_oracle_exact: bool
    off_phase_end_rho_rr: list
    depleted: bool | None
    depletion_ratio: float | None
    n_points: int

    def to_text(self) -> str:
        rr = ", ".join(repr(float(v)) for v in self.off_phase_end_rho_rr)
        return (f"on_phase_max_dev = {self.on_phase_max_dev!r}\n"
                f"on_oracle_exact = {str(self.on_oracle_exact).lower()}\n"
                f"off_phase_max_dev = {self.off_phase_max_dev!r}\n"
                f"off_oracle_exact = {str(self.off_oracle_exact).lower()}\n"
                f"off_phase_end_rho_rr = [{rr}]\n"
                f"depleted = {self.depleted if self.depleted is None else str(self.depleted).lower()}\n"
                f"depletion_ratio = {self.depletion_ratio!r}\n"
                f"n_points = {self.n_points}\n")


def drive_from_section(sec) -> dynamics.DriveProfile:
    return dynamics.DriveProfile(omega_p=sec.omega_p, omega_c0=sec.omega_c0,
                                 f_chop=sec.f_chop, gamma_e=sec.gamma_e,
                                 gamma_r=sec.gamma_r, duty=sec.duty,
                                 delta_p=sec.delta_p, delta_c=sec.delta_c)


def run_dynamics_demo(drive: dynamics.DriveProfile, t_end: float, dt: float,
                      rho0=None):
    """Evolve the chopped ladder and overlay the analytic phase solutions.

    ON phases are compared with decay-free e-r Rabi rotation started from the
    numerical state at the phase start; OFF phases with the closed-form decay
    cascade.  Each comparison is flagged exact only when the model it assumes
    applies (no probe, no detuning, and for ON phases no decay).
    """
    if rho0 is None:
        rho0 = dynamics.basis_state("e")
    elif isinstance(rho0, str):
        rho0 = dynamics.basis_state(rho0)
    traj = dynamics.evolve(rho0, drive, t_end, dt)
    t, states = traj.times, traj.states
    on_dev, off_dev, off_end = 0.0, 0.0, []
    edges = dynamics._chop_edges(drive, t_end)
    for a, b in zip(edges[:-1], edges[1:]):
        idx = np.nonzero((t >= a) & (t <= b))[0]
        start = states[idx[0]]
        tau = t[idx] - a
        if dynamics.chopped_rabi(0.5 * (a + b), drive) != 0.0:
            model = dynamics.two_level_rabi(start, drive.omega_c0, tau)
            on_dev = max(on_dev, float(np.max(np.abs(states[idx, 2, 2].real - model))))
        else:
            rr, ee, er = dynamics.analytic_off_phase(start, drive.gamma_e,
                                                     drive.gamma_r, tau)
            dev = max(np.max(np.abs(states[idx, 2, 2].real - rr)),
                      np.max(np.abs(states[idx, 1, 1].real - ee)),
                      np.max(np.abs(states[idx, 1, 2] - er)))
            off_dev = max(off_dev, float(dev))
            off_end.append(float(states[idx[-1], 2, 2].real))
    no_probe = drive.omega_p == 0 and drive.delta_p == 0 and drive.delta_c == 0
    try:
        verdict = dynamics.depletion_check(drive)
        depleted, ratio = verdict.depleted, verdict.ratio
    except Exception:  # ZeroDecayRate
        depleted, ratio = None, None
    summary = DynamicsSummary(on_dev, off_dev,
                              no_probe and drive.gamma_e == 0 and drive.gamma_r == 0,
                              no_probe, off_end, depleted, ratio, len(traj))
    return traj, summary


# -- calibration ----------------------------------------------------------------------

def calibrate(points_file, geometry: ElectrodeGeometry, alpha: float) -> CalibrationFit:
    """Fit the transmission factor from a (voltage_v, measured_shift_mhz) CSV."""
    volts, shifts = formats.read_calibration_csv(points_file)
    e_exp = field_from_shift(shifts, alpha)
    e_rd = e_read(volts, geometry)
    return calibrate_factor(list(zip(np.atleast_1d(e_rd), np.atleast_1d(e_exp))))


# -- closed-form tables ------------------------------------------------------------------

def predict_table(cfg, frequencies=None) -> list[tuple[float, float, float]]:
    """(f_s, ideal dB, dB with the configured chopper's efficiency) rows."""
    cfg = cfgmod.resolve(cfg)
    ch = cfg.chopper
    eff = abs(chop_phasor(ChopperConfig(ch.f_chop, ch.duty, ch.waveform),
                          cfg.acquisition.sample_rate)) ** 2 / 2
    freqs = frequencies or cfg.suite.frequencies_hz
    return [(float(f),
             predicted_enhancement_db(cfg.noise.k, cfg.noise.white_floor, f, ch.f_chop),
             predicted_enhancement_db(cfg.noise.k, cfg.noise.white_floor, f, ch.f_chop, eff))
            for f in freqs]


def sweep_dc_bias(cfg, biases_mv) -> list[tuple[float, ScenarioResult]]:
    """Rerun the scenario at several DC bias voltages (C = 1)."""
    cfg = cfgmod.resolve(cfg)
    geom = ElectrodeGeometry(cfg.geometry.plate_separation_d, cfg.suite.dc_coefficient)
    out = []
    for b in biases_mv:
        c = dataclasses.replace(cfg, field=dataclasses.replace(
            cfg.field, e_dc=float(e_read(b * 1e-3, geom))))
        out.append((float(b), run_scenario(c)))
    return out
