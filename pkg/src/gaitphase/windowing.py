"""Moving-window segmentation, time-domain features and standard scaling.

Each window yields (zc, mav, sigma, mad):

    zc    = 1/2 sum |sgn(x_i) - sgn(x_{i+1})|      (sgn(0) = 0)
    mav   = 1/n sum |x_i|
    sigma = sqrt(1/n sum (x_i - mean)^2)           (population form)
    mad   = 1/n sum |x_i - mean|

The window's label is the phase at the window end shifted delay_ms into
the future; windows whose shifted label falls past the end of the signal
are dropped.
"""

from dataclasses import dataclass

import numpy as np

from gaitphase import backend
from gaitphase.labeling import PhaseSeries
from gaitphase.signals import SampledSignal, ms_to_samples

FEATURE_NAMES = ("zc", "mav", "sigma", "mad")

CSV_HEADER = "zc,mav,sigma,mad,label,subject,end_ms"


@dataclass(frozen=True)
class WindowSpec:
    window_ms: float
    delay_ms: float = 0.0
    stride_ms: float = 10.0

    def __post_init__(self):
        if self.window_ms <= 0 or self.stride_ms <= 0 or self.delay_ms < 0:
            raise ValueError("window/stride must be positive, delay non-negative")


@dataclass(frozen=True)
class FeatureVector:
    zc: float
    mav: float
    sigma: float
    mad: float


@dataclass(frozen=True)
class FeatureMatrix:
    """Rows of (features, label, subject id, window end time)."""

    X: np.ndarray  # (n, 4) float64
    y: np.ndarray  # (n,) int8 in {0, 1}
    subject: np.ndarray  # (n,) int32
    end_ms: np.ndarray  # (n,) float64

    def __post_init__(self):
        n = self.X.shape[0]
        if self.X.ndim != 2 or self.X.shape[1] != 4:
            raise ValueError("X must be (n, 4)")
        if not (self.y.size == n and self.subject.size == n and self.end_ms.size == n):
            raise ValueError("ragged feature matrix")
        if n and not np.isin(self.y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    @property
    def n_rows(self):
        return self.X.shape[0]

    def subjects(self):
        return sorted(np.unique(self.subject).tolist())

    def for_subjects(self, ids):
        """Row subset for the given subjects; the single access path the
        cross-validation harness uses, so tests can audit it."""
        mask = np.isin(self.subject, list(ids))
        return FeatureMatrix(self.X[mask], self.y[mask], self.subject[mask], self.end_ms[mask])

    @staticmethod
    def concat(parts):
        parts = list(parts)
        return FeatureMatrix(
            np.concatenate([p.X for p in parts]),
            np.concatenate([p.y for p in parts]),
            np.concatenate([p.subject for p in parts]),
            np.concatenate([p.end_ms for p in parts]),
        )

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for i in range(self.n_rows):
                feats = ",".join(repr(float(v)) for v in self.X[i])
                fh.write(f"{feats},{int(self.y[i])},{int(self.subject[i])},{repr(float(self.end_ms[i]))}\n")


def features(window) -> FeatureVector:
    """The four time-domain features of one window."""
    x = np.asarray(window, dtype=np.float64)
    if x.size < 2:
        raise ValueError("window must hold at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite value in window")
    row = backend.window_features(x, np.zeros(1, dtype=np.int64), x.size)[0]
    return FeatureVector(*[float(v) for v in row])


def segment(emg: SampledSignal, phases: PhaseSeries, spec: WindowSpec,
            subject_id: int = 0) -> FeatureMatrix:
    """Windowed features with delay-shifted labels."""
    n = len(emg)
    if len(phases) != n:
        raise ValueError("EMG and phase series must be aligned")
    rate = emg.sample_rate_hz
    width = ms_to_samples(spec.window_ms, rate)
    stride = max(1, ms_to_samples(spec.stride_ms, rate))
    delay = ms_to_samples(spec.delay_ms, rate)
    if width < 2:
        raise ValueError("window shorter than 2 samples at this rate")
    if width > n:
        raise ValueError("window longer than signal")
    starts = np.arange(0, n - width + 1, stride, dtype=np.int64)
    label_ix = starts + width - 1 + delay
    starts = starts[label_ix < n]
    label_ix = label_ix[label_ix < n]
    X = backend.window_features(emg.samples, starts, width)
    return FeatureMatrix(
        X=X,
        y=phases.labels[label_ix].astype(np.int8),
        subject=np.full(starts.size, subject_id, dtype=np.int32),
        end_ms=(starts + width - 1) * 1000.0 / rate,
    )


@dataclass(frozen=True)
class ScalerParams:
    mean: np.ndarray  # (4,)
    std: np.ndarray  # (4,), floored at 1e-8

    EPS = 1e-8


def fit_scaler(train: FeatureMatrix) -> ScalerParams:
    """Per-feature mean/std over the training rows only."""
    if train.n_rows == 0:
        raise ValueError("cannot fit scaler on empty matrix")
    mean = train.X.mean(axis=0)
    std = train.X.std(axis=0)  # population denominator
    std = np.maximum(std, ScalerParams.EPS)
    return ScalerParams(mean=mean, std=std)


def apply_scaler(m: FeatureMatrix, p: ScalerParams) -> FeatureMatrix:
    return FeatureMatrix((m.X - p.mean) / p.std, m.y, m.subject, m.end_ms)
