import numpy as np
import pytest

from gaitphase.dsp import (
    BandpassSpec, FilterConfigError, bandpass, lowpass, normalize_maxabs,
)
from gaitphase.signals import SampledSignal

FS = 1000.0


def _sine(freq_hz, duration_s=5.0, amplitude=1.0, fs=FS):
    t = np.arange(int(duration_s * fs)) / fs
    return SampledSignal(amplitude * np.sin(2 * np.pi * freq_hz * t), fs)


def _tone_amplitude(sig, freq_hz):
    """Amplitude of the freq_hz component over the middle of the signal,
    away from filter edge transients."""
    n = len(sig)
    seg = sig.samples[n // 4: 3 * n // 4]
    t = np.arange(n // 4, 3 * n // 4) / sig.sample_rate_hz
    return 2.0 * abs(np.mean(seg * np.exp(-2j * np.pi * freq_hz * t)))


class TestBandpass:
    @pytest.mark.parametrize("freq", [50.0, 100.0, 200.0])
    def test_passband_unity_gain(self, freq):
        out = bandpass(_sine(freq), BandpassSpec())
        assert 0.95 <= _tone_amplitude(out, freq) <= 1.05

    @pytest.mark.parametrize("freq", [2.0, 450.0])
    def test_stopband_attenuation(self, freq):
        out = bandpass(_sine(freq), BandpassSpec())
        gain = _tone_amplitude(out, freq)
        assert 20 * np.log10(max(gain, 1e-300)) <= -20.0

    def test_dc_removed(self):
        sig = _sine(50.0)
        shifted = sig.with_samples(sig.samples + 3.0)
        out = bandpass(shifted, BandpassSpec())
        mid = out.samples[len(out) // 4: 3 * len(out) // 4]
        assert abs(np.mean(mid)) < 1e-3

    def _phase_lag_samples(self, sig, out, freq):
        """Phase difference of the freq component, in samples."""
        n = len(sig)
        sl = slice(n // 4, 3 * n // 4)
        t = np.arange(n)[sl] / sig.sample_rate_hz
        probe = np.exp(-2j * np.pi * freq * t)
        dphi = np.angle(np.mean(out.samples[sl] * probe)
                        / np.mean(sig.samples[sl] * probe))
        return dphi / (2 * np.pi * freq) * sig.sample_rate_hz

    def test_zero_phase_no_peak_shift(self):
        sig = _sine(50.0)
        out = bandpass(sig, BandpassSpec())
        assert abs(self._phase_lag_samples(sig, out, 50.0)) <= 1.0

    def test_linearity(self):
        rng = np.random.default_rng(11)
        a = SampledSignal(rng.standard_normal(4000), FS)
        b = SampledSignal(rng.standard_normal(4000), FS)
        spec = BandpassSpec()
        lhs = bandpass(a.with_samples(2.0 * a.samples + b.samples), spec).samples
        rhs = 2.0 * bandpass(a, spec).samples + bandpass(b, spec).samples
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_high_cut_above_nyquist_rejected(self):
        with pytest.raises(FilterConfigError, match="Nyquist"):
            bandpass(_sine(50.0, fs=500.0), BandpassSpec(10.0, 300.0))

    def test_inverted_band_rejected(self):
        with pytest.raises(FilterConfigError):
            BandpassSpec(300.0, 10.0).validate(FS)

    def test_single_pass_shifts_phase(self):
        # near the 10 Hz band edge the one-way filter shifts phase hard
        sig = _sine(15.0)
        out = bandpass(sig, BandpassSpec(zero_phase=False))
        assert abs(self._phase_lag_samples(sig, out, 15.0)) > 1.0


class TestLowpass:
    def test_preserves_slow_component(self):
        t = np.arange(5000) / FS
        slow = np.sin(2 * np.pi * 1.0 * t)
        noisy = slow + 0.5 * np.sin(2 * np.pi * 100.0 * t)
        out = lowpass(SampledSignal(noisy, FS), cut_hz=6.0)
        assert np.corrcoef(out.samples, slow)[0, 1] > 0.99

    def test_constant_unchanged(self):
        sig = SampledSignal(np.full(2000, 7.5), FS)
        out = lowpass(sig, cut_hz=6.0)
        np.testing.assert_allclose(out.samples, 7.5, atol=1e-6)

    def test_cut_above_nyquist_rejected(self):
        with pytest.raises(FilterConfigError):
            lowpass(SampledSignal(np.ones(100), FS), cut_hz=600.0)


class TestNormalize:
    def test_simple(self):
        out = normalize_maxabs(SampledSignal(np.array([2.0, -4.0, 1.0]), FS))
        np.testing.assert_array_equal(out.samples, [0.5, -1.0, 0.25])

    def test_idempotent(self):
        sig = SampledSignal(np.array([0.3, -0.9, 0.1]), FS)
        once = normalize_maxabs(sig)
        twice = normalize_maxabs(once)
        np.testing.assert_array_equal(once.samples, twice.samples)

    def test_scale_invariant(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(500)
        a = normalize_maxabs(SampledSignal(x, FS)).samples
        b = normalize_maxabs(SampledSignal(8.0 * x, FS)).samples
        np.testing.assert_array_equal(a, b)

    def test_unit_peak(self):
        rng = np.random.default_rng(4)
        out = normalize_maxabs(SampledSignal(rng.standard_normal(500), FS))
        assert np.max(np.abs(out.samples)) == 1.0

    def test_zero_signal_rejected(self):
        with pytest.raises(ValueError, match="zero signal"):
            normalize_maxabs(SampledSignal(np.zeros(10), FS))
