import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocarydberg import signal_chain as sc
from ocarydberg.errors import (BadFrequencyOrder, BadLength, GridMismatch,
                               NyquistViolation)
from ocarydberg.spectral import psd_welch
from ocarydberg.traces import SampledTrace, Spectrum


def test_synth_rejects_bad_lengths():
    for n in (1000, 128, 0):
        with pytest.raises(BadLength):
            sc.synth_one_over_f(n, 1000.0, sc.NoiseModel(1.0))


def test_synth_reproducible_and_zero_mean():
    m = sc.NoiseModel(k=1e-3, white_floor=1e-6, seed=7)
    a = sc.synth_one_over_f(4096, 1000.0, m)
    b = sc.synth_one_over_f(4096, 1000.0, m)
    c = sc.synth_one_over_f(4096, 1000.0, sc.NoiseModel(k=1e-3, white_floor=1e-6, seed=8))
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.allclose(a.samples, c.samples)
    assert abs(a.samples.mean()) < 1e-15


def test_white_noise_variance_and_level():
    # one-sided density w over [0, rate/2] integrates to variance w * rate / 2
    w, rate, n = 1e-6, 1000.0, 2 ** 16
    tr = sc.synth_one_over_f(n, rate, sc.NoiseModel(white_floor=w, seed=3))
    assert tr.samples.var() == pytest.approx(w * rate / 2, rel=0.03)
    spec = psd_welch(tr, 1024)
    band = (spec.freqs > 5) & (spec.freqs < 495)
    assert spec.psd[band].mean() == pytest.approx(w, rel=0.03)


def test_noise_model_psd_regularised():
    m = sc.NoiseModel(k=2.0, white_floor=0.5, f_min_regularization=0.1)
    np.testing.assert_allclose(m.psd([0.0, 0.05, 1.0, -4.0]), [20.5, 20.5, 2.5, 1.0])


def test_chop_waveform_levels():
    ch = sc.ChopperConfig(f_chop=10.0, duty=0.25)
    t = np.array([0.0, 0.02, 0.03, 0.09, 0.1])
    np.testing.assert_array_equal(sc.chop_waveform(t, ch), [1, 1, 0, 0, 1])
    cos = sc.ChopperConfig(10.0, waveform="fundamental-cosine")
    np.testing.assert_allclose(sc.chop_waveform([0.0, 0.05], cos), [1, -1])


def test_apply_chop_nyquist():
    tr = SampledTrace(np.ones(100), 100.0)
    with pytest.raises(NyquistViolation):
        sc.apply_chop(tr, sc.ChopperConfig(60.0))


def test_square_phasor_continuous():
    # c1 = (2/T) int_0^{T/2} exp(-i w t) dt = -2i/pi
    c1 = sc.chop_phasor(sc.ChopperConfig(1.0))
    assert c1.real == pytest.approx(0.0, abs=1e-15)
    assert c1.imag == pytest.approx(-2 / math.pi)
    assert sc.chop_efficiency(sc.ChopperConfig(1.0)) == pytest.approx(2 / math.pi ** 2)
    assert sc.chop_efficiency(sc.ChopperConfig(1.0, waveform="fundamental-cosine")) == 0.5


def test_square_phasor_sampled_eight_per_period():
    # samples 1,1,1,1,0,0,0,0: c1 = (2/8) sum_{k<4} exp(-i pi k / 4)
    c1 = sc.chop_phasor(sc.ChopperConfig(1.0), rate=8.0)
    expected = 0.25 * sum(np.exp(-1j * np.pi * k / 4) for k in range(4))
    assert c1 == pytest.approx(complex(expected), abs=1e-15)
    assert c1 == pytest.approx(0.25 - 0.60355339j, abs=1e-8)


@pytest.mark.parametrize("duty", [0.25, 0.5, 0.75])  # whole samples at 16 per period
def test_square_chop_sidebands_dft(duty):
    # DFT of a chopped tone: lines at f_chop +/- f_s of |c1| A / 2
    rate, n, fc, fs, amp = 16384.0, 16384, 1024.0, 16.0, 0.7
    tone = SampledTrace(amp * np.cos(2 * np.pi * fs * np.arange(n) / rate), rate)
    ch = sc.ChopperConfig(fc, duty)
    X = np.fft.rfft(sc.apply_chop(tone, ch).samples) * 2 / n
    c1 = sc.chop_phasor(ch, rate)
    for f in (fc - fs, fc + fs):
        assert abs(X[int(f)]) == pytest.approx(abs(c1) * amp / 2, rel=1e-9)
    # and the continuous-time amplitude within a fraction of a percent
    assert abs(c1) == pytest.approx(sc.square_fundamental_amplitude(duty), rel=0.01)


def test_predicted_demod_spectrum_white():
    f = np.linspace(0, 100, 101)
    fn = np.linspace(0, 400, 401)
    sig = Spectrum(f, np.zeros_like(f), 1.0)
    noise = Spectrum(fn, np.full_like(fn, 3.0), 1.0)
    out = sc.predicted_demod_spectrum(sig, noise, 200.0)
    np.testing.assert_allclose(out.psd, 3.0)
    with pytest.raises(GridMismatch):
        sc.predicted_demod_spectrum(sig, noise, 350.0)
    with pytest.raises(GridMismatch):
        sc.predicted_demod_spectrum(sig, Spectrum(fn + 0.5, noise.psd, 1.0), 200.0)


def test_predicted_demod_spectrum_matches_closed_form():
    k, w, fc = 2e-3, 1e-7, 500.0
    f = np.arange(1.0, 101.0)
    fn = np.arange(1.0, 701.0)
    sig = Spectrum(f, np.zeros_like(f), 1.0)
    noise = Spectrum(fn, k / fn + w, 1.0)
    out = sc.predicted_demod_spectrum(sig, noise, fc)
    np.testing.assert_allclose(out.psd, sc.folded_noise_psd(k, w, f, fc), rtol=1e-12)


def test_folded_noise_at_dc():
    assert sc.folded_noise_psd(1.0, 0.25, 0.0, 100.0) == pytest.approx(0.01 + 0.25)


def test_predicted_enhancement_hand_value():
    # direct 1/10 over folded 0.5 (1/990 + 1/1010)
    expected = 10 * math.log10(0.1 / (0.5 * (1 / 990 + 1 / 1010)))
    assert sc.predicted_enhancement_db(1.0, 0.0, 10.0, 1000.0) == pytest.approx(expected)
    assert expected == pytest.approx(19.99957, abs=1e-4)
    assert sc.predicted_enhancement_db(0.0, 1.0, 10.0, 1000.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(BadFrequencyOrder):
        sc.predicted_enhancement_db(1.0, 0.0, 1000.0, 1000.0)


@settings(max_examples=50, deadline=None)
@given(k=st.floats(1e-9, 1.0), w=st.floats(0, 1e-3), f1=st.floats(0.5, 400),
       df=st.floats(0.1, 400), eff=st.floats(0.01, 1.0))
def test_enhancement_decreasing_and_efficiency_additive(k, w, f1, df, eff):
    fc = 1000.0
    f2 = min(f1 + df, 999.0)
    a = sc.predicted_enhancement_db(k, w, f1, fc)
    b = sc.predicted_enhancement_db(k, w, f2, fc)
    assert b <= a + 1e-9
    assert sc.predicted_enhancement_db(k, w, f1, fc, eff) == pytest.approx(
        a + 10 * math.log10(eff), abs=1e-9)


def test_parseval_variance_matches_target_integral():
    # variance = integral of the regularised target PSD (20 seeds)
    n, rate = 2 ** 14, 1024.0
    m = dict(k=1e-3, white_floor=1e-6)
    df = rate / n
    f = np.fft.rfftfreq(n, 1 / rate)[1:]
    target = sc.NoiseModel(**m).psd(f, df)
    target[-1] /= 2  # Nyquist bin carries half weight
    expected = np.sum(target) * df
    var = np.mean([sc.synth_one_over_f(n, rate, sc.NoiseModel(**m, seed=s)).samples.var()
                   for s in range(20)])
    assert var == pytest.approx(expected, rel=0.10)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-1e3, 1e3), b=st.floats(-1e3, 1e3), seed=st.integers(0, 2 ** 31),
       duty=st.floats(0.05, 1.0), cosine=st.booleans())
def test_chop_linearity(a, b, seed, duty, cosine):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=256), rng.normal(size=256)
    ch = sc.ChopperConfig(50.0, duty, "fundamental-cosine" if cosine else "square")
    tr = lambda v: SampledTrace(v, 1000.0)
    lhs = sc.apply_chop(tr(a * x + b * y), ch).samples
    rhs = a * sc.apply_chop(tr(x), ch).samples + b * sc.apply_chop(tr(y), ch).samples
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-9)


def test_square_chop_of_ones_has_half_mean():
    out = sc.apply_chop(SampledTrace(np.ones(4096), 4096.0), sc.ChopperConfig(64.0))
    assert out.samples.mean() == 0.5


def test_enhancement_pure_one_over_f_limit():
    # white_floor = 0, f_s << f_chop: ~10 log10(f_chop / f_s)
    assert sc.predicted_enhancement_db(1.0, 0.0, 1.0, 1e5) == pytest.approx(50.0, abs=1e-3)


@settings(max_examples=50, deadline=None)
@given(k=st.floats(1e-12, 10), fc=st.floats(10, 1e5), frac=st.floats(1e-4, 0.5))
def test_enhancement_nonnegative_below_half_chop(k, fc, frac):
    assert sc.predicted_enhancement_db(k, 0.0, frac * fc, fc) >= -1e-12
