"""Fast consistency checks behind ``ocarydberg selftest``.

Each check returns ``(name, passed, detail)``.  These are reduced versions of
the test-suite acceptance checks, sized to finish in a few seconds.
"""

from __future__ import annotations

import math

import numpy as np

from . import dynamics, field, lockin, signal_chain
from .traces import SampledTrace


def _trace_preservation():
    d = dynamics.DriveProfile(omega_p=2 * math.pi * 2e3, omega_c0=2 * math.pi * 5e3,
                              f_chop=1e3, gamma_e=5e4, gamma_r=1e4)
    tr = dynamics.evolve(dynamics.basis_state("g"), d, 10 / d.f_chop, d.period / 200)
    drift = float(np.max(np.abs(np.trace(tr.states, axis1=1, axis2=2) - 1)))
    herm = float(np.max(np.abs(tr.states - tr.states.conj().transpose(0, 2, 1))))
    return "trace/hermiticity", drift <= 1e-9 and herm <= 1e-10, \
        f"trace drift {drift:.2e}, hermiticity {herm:.2e}"


def _rabi_oracle():
    w = 2 * math.pi * 1e4
    d = dynamics.DriveProfile(0.0, w, 1e3, 0.0, 0.0, duty=1.0)
    tr = dynamics.evolve(dynamics.basis_state("e"), d, 4 * math.pi / w, 0.01 / w)
    dev = float(np.max(np.abs(tr.population("r") - dynamics.analytic_on_phase(tr.times, w)[1])))
    return "on-phase Rabi oracle", dev <= 1e-6, f"max deviation {dev:.2e}"


def _cascade():
    rho = dynamics.pure_state([0.3, 0.5, 0.8])
    worst = max(abs(dynamics.off_phase_integral_residual(rho, g * 1e4, 1e4, 3e-4))
                for g in (0.1, 1 - 1e-6, 1.0, 1 + 1e-6, 10))
    return "off-phase integral form", worst <= 1e-8, f"max residual {worst:.2e}"


def _lockin():
    rate, f, amp, phi = 100e3, 1e3, 0.7, 0.4
    cfg = lockin.LockInConfig(f_ref=f, lpf_time_constant=5e-3, lpf_order=2)
    t = np.arange(int(0.2 * rate)) / rate
    out = lockin.demodulate(SampledTrace(amp * np.cos(2 * np.pi * f * t + phi), rate), cfg)
    settled = out.times >= 10 * cfg.lpf_time_constant
    r_err = float(np.max(np.abs(out.r[settled] / amp - 1)))
    th_err = float(np.degrees(np.max(np.abs(out.theta[settled] - phi))))
    return "lock-in R/theta", r_err <= 5e-3 and th_err <= 0.5, \
        f"R error {r_err:.2e}, theta error {th_err:.3f} deg"


def _stark():
    e = np.array([0.1, 0.5, 1.0])
    back = field.field_from_shift(field.stark_shift(e))
    err = float(np.max(np.abs(back / e - 1)))
    return "Stark round trip", err <= 1e-12, f"relative error {err:.1e}"


def _enhancement_order():
    vals = [signal_chain.predicted_enhancement_db(1e-6, 0.0, f, 2048.0)
            for f in (7, 33, 66, 132)]
    ok = all(a > b for a, b in zip(vals, vals[1:]))
    return "enhancement ordering", ok, ", ".join(f"{v:.2f} dB" for v in vals)


CHECKS = (_trace_preservation, _rabi_oracle, _cascade, _lockin, _stark,
          _enhancement_order)


def run_all():
    return [check() for check in CHECKS]
