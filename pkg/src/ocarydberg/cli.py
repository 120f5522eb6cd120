"""Command-line front end.

Exit codes: 0 success, 1 configuration/input error, 2 runtime error,
3 self-test failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import config as cfgmod
from . import formats, harness
from .errors import ConfigInvalid, OcaError
from .field import ElectrodeGeometry

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_SELFTEST = 0, 1, 2, 3

log = logging.getLogger("ocarydberg")


def _global_args(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", type=Path, default=d, help="scenario YAML file")
    p.add_argument("--seed", type=int, default=d, help="noise seed override")
    p.add_argument("--out", type=Path, default=d, help="output root directory")
    p.add_argument("--mode", choices=cfgmod.MODES, default=d)
    p.add_argument("--set", dest="overrides", action="append", default=d,
                   metavar="SECTION.KEY=VALUE", help="override a config value")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ocarydberg",
        description="Optical-chopping Rydberg ULF electrometry simulator")
    _global_args(ap, suppress=False)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="run one scenario")
    _global_args(sp, suppress=True)

    sp = sub.add_parser("suite", help="7/33/66/132 Hz direct-vs-OCA comparison")
    _global_args(sp, suppress=True)

    sp = sub.add_parser("dynamics", help="chopped three-level dynamics vs analytic phases")
    _global_args(sp, suppress=True)

    sp = sub.add_parser("calibrate", help="fit the transmission factor F")
    _global_args(sp, suppress=True)
    sp.add_argument("points", type=Path, help="CSV with voltage_v,measured_shift_mhz")
    sp.add_argument("--plate-separation-cm", type=float, default=None)
    sp.add_argument("--coefficient", type=float, default=None,
                    help="effective voltage coefficient C (1 for DC, sqrt(2) for AC)")

    sp = sub.add_parser("predict", help="closed-form enhancement table")
    _global_args(sp, suppress=True)
    sp.add_argument("--freq", type=float, action="append", help="signal frequency, Hz")

    sp = sub.add_parser("sweep", help="sensitivity versus DC bias")
    _global_args(sp, suppress=True)
    sp.add_argument("--bias-mv", type=float, action="append", required=True)

    sp = sub.add_parser("selftest", help="quick internal consistency checks")
    _global_args(sp, suppress=True)
    return ap


def load_config(args) -> cfgmod.ScenarioConfig:
    cfg = cfgmod.load(args.config) if args.config else cfgmod.default_config()
    overrides = list(args.overrides or [])
    if args.seed is not None:
        overrides.append(f"noise.seed={args.seed}")
    if args.mode is not None:
        overrides.append(f"mode={args.mode}")
    return cfgmod.apply_overrides(cfg, overrides) if overrides else cfg


def _run_dir(args, cfg, name):
    root = args.out or Path("runs")
    d = harness.make_run_dir(root, name)
    cfgmod.dump(cfg, d / "config.yaml")
    return d


def cmd_simulate(args, cfg):
    res = harness.run_scenario(cfg)
    d = _run_dir(args, cfg, cfg.scenario_name)
    harness.write_scenario_artifacts(res, d)
    harness.write_index(d)
    for k, rep in res.reports.items():
        print(f"{k:>6}: sensitivity {rep.sensitivity * 1e6:.2f} uV/cm/rtHz, "
              f"SNR {rep.snr_db:.1f} dB")
    if res.enhancement_db is not None:
        print(f"enhancement {res.enhancement_db:.2f} dB "
              f"(closed form {res.predicted_enhancement_db:.2f} dB)")
    print(f"artifacts: {d}")


def cmd_suite(args, cfg):
    rep = harness.run_paper_suite(cfg)
    d = _run_dir(args, cfg, cfg.scenario_name + "-suite")
    harness.write_suite_artifacts(rep, d)
    harness.write_index(d)
    print(rep.to_text(), end="")
    print(f"artifacts: {d}")


def cmd_dynamics(args, cfg):
    sec = cfg.dynamics
    drive = harness.drive_from_section(sec)
    traj, summary = harness.run_dynamics_demo(drive, sec.t_end, sec.dt, sec.initial_state)
    d = _run_dir(args, cfg, cfg.scenario_name + "-dynamics")
    formats.write_trajectory_csv(d / "trajectory.csv", traj)
    (d / "summary.txt").write_text(summary.to_text())
    harness.write_index(d)
    print(summary.to_text(), end="")
    print(f"artifacts: {d}")


def cmd_calibrate(args, cfg):
    g = cfg.geometry
    geom = ElectrodeGeometry(
        args.plate_separation_cm or g.plate_separation_d,
        args.coefficient or g.effective_voltage_coefficient_c)
    fit = harness.calibrate(args.points, geom, cfg.field.alpha)
    text = fit.report()
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "calibration.txt").write_text(text)
    print(text, end="")


def cmd_predict(args, cfg):
    print(f"{'f_s/Hz':>8} {'ideal/dB':>9} {'chopper/dB':>11}")
    for f, ideal, real in harness.predict_table(cfg, args.freq):
        print(f"{f:8.2f} {ideal:9.2f} {real:11.2f}")


def cmd_sweep(args, cfg):
    rows = harness.sweep_dc_bias(cfg, args.bias_mv)
    print(f"{'bias/mV':>8} {'direct':>10} {'OCA':>10} {'gain/dB':>8}")
    def cell(rep):
        return f"{rep.sensitivity * 1e6:10.2f}" if rep else f"{'-':>10}"

    for b, res in rows:
        gain = res.enhancement_db
        gain_s = f"{gain:8.2f}" if gain is not None else f"{'-':>8}"
        print(f"{b:8.1f} {cell(res.reports.get('direct'))} "
              f"{cell(res.reports.get('oca'))} {gain_s}")


def cmd_selftest(args, cfg):
    from . import selftest
    results = selftest.run_all()
    ok = True
    for name, passed, detail in results:
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    return EXIT_OK if ok else EXIT_SELFTEST


COMMANDS = {"simulate": cmd_simulate, "suite": cmd_suite, "dynamics": cmd_dynamics,
            "calibrate": cmd_calibrate, "predict": cmd_predict, "sweep": cmd_sweep,
            "selftest": cmd_selftest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rc = COMMANDS[args.command](args, cfg)
    except (ConfigInvalid, formats.FileFormatError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OcaError, ValueError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return rc or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
