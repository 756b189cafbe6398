import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gaitphase.labeling import PhaseSeries
from gaitphase.signals import SampledSignal
from gaitphase.windowing import (
    CSV_HEADER, FeatureMatrix, ScalerParams, WindowSpec, apply_scaler,
    features, fit_scaler, segment,
)

FS = 1000.0


def naive_features(window):
    """Loop transcription of the four feature definitions."""
    x = [float(v) for v in window]
    n = len(x)
    zc = 0.0
    for a, b in zip(x, x[1:]):
        zc += abs(np.sign(a) - np.sign(b))
    zc /= 2.0
    mav = sum(abs(v) for v in x) / n
    mean = sum(x) / n
    sigma = (sum((v - mean) ** 2 for v in x) / n) ** 0.5
    mad = sum(abs(v - mean) for v in x) / n
    return zc, mav, sigma, mad


finite_windows = arrays(
    np.float64,
    st.integers(min_value=2, max_value=200),
    elements=st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
)

# zero or comfortably normal magnitudes: power-of-two scaling is only
# bit-exact while no intermediate falls into the subnormal range
normal_windows = arrays(
    np.float64,
    st.integers(min_value=2, max_value=200),
    elements=st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).map(
        lambda v: 0.0 if abs(v) < 1e-3 else v
    ),
)


class TestFeatures:
    def test_alternating_signs(self):
        fv = features([1.0, -1.0, 1.0, -1.0])
        assert (fv.zc, fv.mav, fv.sigma, fv.mad) == (3.0, 1.0, 1.0, 1.0)

    def test_constant_window(self):
        fv = features([5.0, 5.0, 5.0, 5.0])
        assert (fv.zc, fv.mav, fv.sigma, fv.mad) == (0.0, 5.0, 0.0, 0.0)

    def test_zero_sample_breaks_crossing(self):
        # sgn(0) = 0: the pair (+, 0) contributes a half crossing
        assert features([1.0, 0.0, -1.0]).zc == 1.0

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            w = rng.standard_normal(rng.integers(2, 400))
            fv = features(w)
            np.testing.assert_allclose(
                (fv.zc, fv.mav, fv.sigma, fv.mad), naive_features(w), atol=1e-12
            )

    def test_too_short(self):
        with pytest.raises(ValueError, match="at least 2"):
            features([1.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            features([1.0, np.nan])

    @given(finite_windows)
    @settings(max_examples=100, deadline=None)
    def test_mad_bounded_by_sigma(self, w):
        fv = features(w)
        assert fv.mad <= fv.sigma + 1e-9

    @given(finite_windows)
    @settings(max_examples=100, deadline=None)
    def test_zc_scale_invariant(self, w):
        # positive scaling never moves a sample across zero
        assert features(3.0 * w).zc == features(w).zc

    @given(normal_windows, st.sampled_from([0.5, 2.0, 1024.0]))
    @settings(max_examples=100, deadline=None)
    def test_positive_homogeneity_power_of_two(self, w, c):
        # power-of-two scaling is exact in binary floating point, so the
        # amplitude features must scale with no tolerance at all
        a = features(w)
        b = features(c * w)
        assert (b.mav, b.sigma, b.mad) == (c * a.mav, c * a.sigma, c * a.mad)


def _signal_and_phases(n=2000, seed=5):
    rng = np.random.default_rng(seed)
    emg = SampledSignal(rng.standard_normal(n), FS)
    labels = (np.arange(n) // 500) % 2
    return emg, PhaseSeries(labels.astype(np.int8))


class TestSegment:
    def test_window_count_no_delay(self):
        emg, phases = _signal_and_phases()
        fm = segment(emg, phases, WindowSpec(300.0, 0.0, 25.0), subject_id=3)
        # starts 0, 25, ..., 1700 -> 69 windows, none dropped at delay 0
        assert fm.n_rows == 69
        assert np.all(fm.subject == 3)

    def test_delay_drops_tail_windows(self):
        emg, phases = _signal_and_phases()
        base = segment(emg, phases, WindowSpec(300.0, 0.0, 25.0))
        delayed = segment(emg, phases, WindowSpec(300.0, 100.0, 25.0))
        assert delayed.n_rows == base.n_rows - 4
        np.testing.assert_array_equal(delayed.X, base.X[: delayed.n_rows])

    def test_delay_shifts_labels(self):
        emg, phases = _signal_and_phases()
        fm = segment(emg, phases, WindowSpec(300.0, 40.0, 25.0))
        ends = np.round(fm.end_ms).astype(int)
        np.testing.assert_array_equal(fm.y, phases.labels[ends + 40])

    def test_end_ms_matches_window_end(self):
        emg, phases = _signal_and_phases()
        fm = segment(emg, phases, WindowSpec(50.0, 0.0, 25.0))
        assert fm.end_ms[0] == 49.0
        assert np.all(np.diff(fm.end_ms) == 25.0)

    def test_window_longer_than_signal(self):
        emg, phases = _signal_and_phases(n=100)
        with pytest.raises(ValueError, match="longer than signal"):
            segment(emg, phases, WindowSpec(300.0, 0.0, 25.0))

    def test_misaligned_phases(self):
        emg, _ = _signal_and_phases()
        _, phases = _signal_and_phases(n=1999)
        with pytest.raises(ValueError, match="aligned"):
            segment(emg, phases, WindowSpec(300.0, 0.0, 25.0))

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            WindowSpec(0.0)
        with pytest.raises(ValueError):
            WindowSpec(300.0, -1.0)


class TestFeatureMatrix:
    def _make(self, subjects):
        n = len(subjects)
        return FeatureMatrix(
            X=np.arange(4 * n, dtype=np.float64).reshape(n, 4),
            y=(np.arange(n) % 2).astype(np.int8),
            subject=np.asarray(subjects, dtype=np.int32),
            end_ms=np.arange(n, dtype=np.float64),
        )

    def test_for_subjects(self):
        fm = self._make([1, 2, 1, 3])
        sub = fm.for_subjects([1, 3])
        assert sub.subjects() == [1, 3]
        np.testing.assert_array_equal(sub.X, fm.X[[0, 2, 3]])

    def test_concat_roundtrip(self):
        fm = self._make([1, 1, 2, 2])
        back = FeatureMatrix.concat([fm.for_subjects([1]), fm.for_subjects([2])])
        np.testing.assert_array_equal(back.X, fm.X)
        np.testing.assert_array_equal(back.subject, fm.subject)

    def test_csv_header(self, tmp_path):
        path = tmp_path / "f.csv"
        self._make([1, 2]).to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 3

    def test_shape_validation(self):
        with pytest.raises(ValueError, match=r"\(n, 4\)"):
            FeatureMatrix(np.zeros((2, 3)), np.zeros(2, dtype=np.int8),
                          np.zeros(2, dtype=np.int32), np.zeros(2))


class TestScaler:
    def test_fit_apply(self):
        fm = FeatureMatrix(
            X=np.array([[0.0, 0, 0, 0], [2.0, 2, 2, 2]]),
            y=np.array([0, 1], dtype=np.int8),
            subject=np.zeros(2, dtype=np.int32),
            end_ms=np.zeros(2),
        )
        p = fit_scaler(fm)
        np.testing.assert_array_equal(p.mean, [1.0, 1, 1, 1])
        np.testing.assert_array_equal(p.std, [1.0, 1, 1, 1])
        out = apply_scaler(fm, p)
        np.testing.assert_array_equal(out.X, [[-1.0, -1, -1, -1], [1.0, 1, 1, 1]])

    def test_standardizes_train(self):
        rng = np.random.default_rng(9)
        fm = FeatureMatrix(
            X=rng.standard_normal((200, 4)) * 5 + 3,
            y=rng.integers(0, 2, 200).astype(np.int8),
            subject=np.zeros(200, dtype=np.int32),
            end_ms=np.zeros(200),
        )
        out = apply_scaler(fm, fit_scaler(fm))
        np.testing.assert_allclose(out.X.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.X.std(axis=0), 1.0, atol=1e-12)

    def test_constant_feature_floored(self):
        fm = FeatureMatrix(
            X=np.full((5, 4), 2.0),
            y=np.array([0, 1, 0, 1, 0], dtype=np.int8),
            subject=np.zeros(5, dtype=np.int32),
            end_ms=np.zeros(5),
        )
        p = fit_scaler(fm)
        assert np.all(p.std == ScalerParams.EPS)
        assert np.all(np.isfinite(apply_scaler(fm, p).X))

    def test_empty_rejected(self):
        fm = FeatureMatrix(np.zeros((0, 4)), np.zeros(0, dtype=np.int8),
                           np.zeros(0, dtype=np.int32), np.zeros(0))
        with pytest.raises(ValueError, match="empty"):
            fit_scaler(fm)
