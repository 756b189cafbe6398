import numpy as np
import pytest

from gaitphase.labeling import (
    MAX, MIN, ExtremaList, PhaseSeries, detect_extrema, label_phases,
)
from gaitphase.signals import SampledSignal

FS = 1000.0


def _knee_like(freq_hz=1.0, duration_s=5.0, fs=FS):
    t = np.arange(int(duration_s * fs)) / fs
    return SampledSignal(30.0 - 25.0 * np.cos(2 * np.pi * freq_hz * t), fs)


class TestExtremaList:
    def test_rejects_non_increasing(self):
        with pytest.raises(ValueError, match="increasing"):
            ExtremaList(np.array([10, 10]), np.array([MAX, MIN]))

    def test_rejects_non_alternating(self):
        with pytest.raises(ValueError, match="alternate"):
            ExtremaList(np.array([10, 20]), np.array([MAX, MAX]))

    def test_rejects_ragged(self):
        with pytest.raises(ValueError, match="parallel"):
            ExtremaList(np.array([10, 20]), np.array([MAX]))


class TestDetectExtrema:
    def test_cosine_extrema_positions(self):
        ext = detect_extrema(_knee_like())
        # 30 - 25 cos(2 pi t): maxima at t = 0.5, 1.5, ... minima at 1, 2, ...
        maxima = ext.indices[ext.kinds == MAX]
        minima = ext.indices[ext.kinds == MIN]
        assert maxima.size == 5 and minima.size >= 4
        np.testing.assert_allclose(maxima, [500, 1500, 2500, 3500, 4500], atol=2)
        for m in minima:
            assert min(abs(m - k) for k in (1000, 2000, 3000, 4000)) <= 2

    def test_alternating(self):
        ext = detect_extrema(_knee_like())
        assert np.all(ext.kinds[1:] != ext.kinds[:-1])

    def test_small_ripple_ignored(self):
        base = _knee_like()
        t = np.arange(len(base)) / FS
        ripple = base.with_samples(base.samples + 1.0 * np.sin(2 * np.pi * 13.0 * t))
        clean = detect_extrema(base)
        noisy = detect_extrema(ripple)
        assert len(noisy) == len(clean)
        np.testing.assert_allclose(noisy.indices, clean.indices, atol=40)

    def test_constant_signal_rejected(self):
        sig = SampledSignal(np.full(5000, 30.0), FS)
        with pytest.raises(ValueError, match="no gait cycles"):
            detect_extrema(sig)

    def test_short_signal_rejected(self):
        with pytest.raises(ValueError, match="shorter"):
            detect_extrema(SampledSignal(np.sin(np.arange(100) / 10.0), FS))

    def test_separation_respected(self):
        ext = detect_extrema(_knee_like(), min_separation_ms=400.0)
        assert np.all(np.diff(ext.indices) >= 400)

    def test_bad_parameters(self):
        sig = _knee_like()
        with pytest.raises(ValueError):
            detect_extrema(sig, min_prominence=0.0)
        with pytest.raises(ValueError):
            detect_extrema(sig, min_separation_ms=0.0)


class TestLabelPhases:
    def test_toggles_at_each_extremum(self):
        sig = _knee_like()
        ext = detect_extrema(sig)
        phases = label_phases(sig, ext)
        labels = phases.labels
        toggles = np.flatnonzero(np.diff(labels.astype(np.int32)) != 0) + 1
        np.testing.assert_array_equal(toggles, ext.indices[ext.indices > 0])

    def test_max_starts_stance(self):
        sig = _knee_like()
        ext = detect_extrema(sig)
        phases = label_phases(sig, ext, convention="max_starts_stance")
        for ix, kind in zip(ext.indices, ext.kinds):
            assert phases.labels[ix] == (1 if kind == MAX else 0)

    def test_opposite_convention_flips(self):
        sig = _knee_like()
        ext = detect_extrema(sig)
        a = label_phases(sig, ext, convention="max_starts_stance").labels
        b = label_phases(sig, ext, convention="min_starts_stance").labels
        np.testing.assert_array_equal(a, 1 - b)

    def test_leading_segment_complements_first(self):
        sig = _knee_like()
        ext = ExtremaList(np.array([500]), np.array([MAX]))
        labels = label_phases(sig, ext).labels
        assert np.all(labels[:500] == 0) and np.all(labels[500:] == 1)

    def test_roughly_balanced_duty_cycle(self):
        sig = _knee_like()
        phases = label_phases(sig, detect_extrema(sig))
        frac = float(np.mean(phases.labels))
        assert 0.4 < frac < 0.6

    def test_unknown_convention(self):
        sig = _knee_like()
        ext = detect_extrema(sig)
        with pytest.raises(ValueError, match="convention"):
            label_phases(sig, ext, convention="sideways")

    def test_phase_series_validates_labels(self):
        with pytest.raises(ValueError, match="0 or 1"):
            PhaseSeries(np.array([0, 2], dtype=np.int8))
