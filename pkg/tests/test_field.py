import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocarydberg import field
from ocarydberg.dynamics import DriveProfile
from ocarydberg.errors import (DegenerateAbscissa, FlatSpectrum,
                               InsufficientData, LinearizationInvalid,
                               SignMismatch)
from ocarydberg.field import ElectrodeGeometry, FieldScenario



def test_stark_shift_hand_value():
    # -(-3426.5)/2 * 1^2
    assert field.stark_shift(1.0) == pytest.approx(1713.25)
    assert field.stark_shift(0.0) == 0.0


def test_e_read_geometry():
    assert field.e_read(0.6, ElectrodeGeometry(1.8, 1.0)) == pytest.approx(1 / 3)
    assert field.e_read(0.6, ElectrodeGeometry(1.8, math.sqrt(2))) == pytest.approx(0.2357022604)
    with pytest.raises(ValueError):
        field.e_read(-1.0, ElectrodeGeometry())


def test_pd_voltage_scaling():
    assert field.pd_voltage(10.0, 1e-3) == pytest.approx(0.01)
    assert field.pd_voltage(10.0, 1e-3, noise_sample=0.5) == pytest.approx(0.51)


def test_field_from_shift_sign_mismatch():
    with pytest.raises(SignMismatch):
        field.field_from_shift(-1.0)  # alpha < 0 requires a positive shift


@settings(max_examples=50, deadline=None)
@given(e=st.just(0.0) | st.floats(1e-100, 50), alpha=st.floats(-1e4, -1e-2))
def test_stark_round_trip(e, alpha):
    back = field.field_from_shift(field.stark_shift(e, alpha), alpha)
    assert back == pytest.approx(e, rel=1e-12)


def test_linearized_shift_first_order_terms():
    s = FieldScenario(e_dc=0.3, a_sig=0.01, f_sig=7.0)
    t = np.array([0.0, 1 / 28])  # cos = 1, cos = 0
    shift = field.linearized_shift(t, s)
    a = field.ALPHA_57D52
    assert shift[0] == pytest.approx(-0.5 * a * 0.09 - a * 0.3 * 0.01)
    assert shift[1] == pytest.approx(-0.5 * a * 0.09)


def test_linearization_guard():
    s = FieldScenario(e_dc=0.1, a_sig=0.02, f_sig=7.0)
    assert not s.linearization_valid
    with pytest.raises(LinearizationInvalid):
        field.linearized_shift(0.0, s)


@settings(max_examples=30, deadline=None)
@given(e_dc=st.floats(0.01, 1.0), frac=st.floats(0, 0.1), phi=st.floats(-3.2, 3.2))
def test_linearization_error_bound(e_dc, frac, phi):
    s = FieldScenario(e_dc=e_dc, a_sig=frac * e_dc, f_sig=33.0, phi_sig=phi)
    t = np.linspace(0, 1 / 33, 401)
    err = np.abs(field.stark_shift(field.total_field(t, s), s.alpha)
                 - field.linearized_shift(t, s))
    bound = 0.5 * abs(s.alpha) * s.a_sig ** 2
    assert np.all(err <= bound * (1 + 1e-9) + 1e-12)


def test_calibrate_factor_exact_line():
    x = np.array([0.1, 0.2, 0.4])
    fit = field.calibrate_factor(zip(x, 0.95 * x))
    assert fit.factor_f == pytest.approx(0.95, rel=1e-14)
    assert fit.residual_rms < 1e-15
    assert "factor_f" in fit.report()


def test_calibrate_factor_errors():
    with pytest.raises(InsufficientData):
        field.calibrate_factor([(0.1, 0.1)])
    with pytest.raises(DegenerateAbscissa):
        field.calibrate_factor([(0.1, 0.1), (0.1, 0.2)])


def _eit_drive():
    return DriveProfile(omega_p=2 * math.pi * 1e6, omega_c0=2 * math.pi * 5e6,
                        f_chop=1e3, gamma_e=2 * math.pi * 5.2e6, gamma_r=1e4)


def test_eit_scan_symmetric_peak():
    d = _eit_drive()
    det = np.linspace(-5, 5, 41)
    y = field.eit_scan(d, det)
    np.testing.assert_allclose(y, y[::-1], rtol=1e-9, atol=1e-15)
    assert np.argmax(y) == 20


def test_eit_slope_matches_finite_difference():
    d = _eit_drive()
    h = 1e-4
    fd = (field.eit_scan(d, -2.38 + h) - field.eit_scan(d, -2.38 - h))[0] / (2 * h)
    assert field.eit_slope(d, -2.38) == pytest.approx(fd, rel=1e-6)
    # antisymmetric about line centre
    assert field.eit_slope(d, 2.38) == pytest.approx(-field.eit_slope(d, -2.38), rel=1e-9)


def test_estimate_beta_flat_at_centre():
    d = _eit_drive()
    with pytest.raises(FlatSpectrum):
        field.estimate_beta(d, 10.0, 21, 0.0)
    est = field.estimate_beta(d, 10.0, 21, -2.38, gain=2.0)
    assert est.beta == pytest.approx(2 * field.eit_slope(d, -2.38))
    assert len(est.ordinate) == 21


@settings(max_examples=40, deadline=None)
@given(e=st.floats(-10, 10), k=st.floats(-10, 10))
def test_stark_even_quadratic(e, k):
    assert field.stark_shift(k * e) == pytest.approx(k * k * field.stark_shift(e),
                                                      rel=1e-12, abs=1e-300)
    assert field.stark_shift(-e) == field.stark_shift(e)


@settings(max_examples=40, deadline=None)
@given(s=st.floats(0.01, 100), seed=st.integers(0, 2 ** 31))
def test_calibration_scale_equivariance(s, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.01, 1.0, 6)
    y = 0.97 * x + rng.normal(0, 1e-3, 6)
    f1 = field.calibrate_factor(zip(x, y)).factor_f
    f2 = field.calibrate_factor(zip(x, s * y)).factor_f
    assert f2 == pytest.approx(s * f1, rel=1e-13)


def test_calibration_identity_and_paper_factor():
    x = np.linspace(0.05, 0.5, 8)
    assert field.calibrate_factor(zip(x, x)).factor_f == pytest.approx(1.0, rel=1e-15)
    assert field.calibrate_factor(zip(x, 0.9832 * x)).factor_f == pytest.approx(0.9832, rel=1e-14)


def test_field_from_shift_examples():
    assert field.field_from_shift(0.0) == 0.0
    assert field.field_from_shift(1713.25) == pytest.approx(1.0, rel=1e-15)
    for e in (0.1, 0.5, 1.0):
        assert field.field_from_shift(field.stark_shift(e)) == pytest.approx(e, rel=1e-12)
