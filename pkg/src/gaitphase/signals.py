"""Core signal containers shared across the pipeline."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SampledSignal:
    """A uniformly sampled real-valued channel."""

    samples: np.ndarray
    sample_rate_hz: float
    channel_name: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("signal must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError(f"non-finite sample in channel {self.channel_name!r}")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")

    def __len__(self):
        return self.samples.size

    def with_samples(self, samples):
        return SampledSignal(samples, self.sample_rate_hz, self.channel_name)


@dataclass(frozen=True)
class GaitRecording:
    """One subject's paired EMG and knee-angle channels."""

    subject_id: int
    rf_emg: SampledSignal
    knee_angle: SampledSignal
    healthy: bool = True

    def __post_init__(self):
        if self.rf_emg.sample_rate_hz != self.knee_angle.sample_rate_hz:
            raise ValueError("EMG and knee channels must share a sample rate")
        if len(self.rf_emg) != len(self.knee_angle):
            raise ValueError("EMG and knee channels must share a length")


def ms_to_samples(ms: float, sample_rate_hz: float) -> int:
    """Convert milliseconds to a sample count, rounding to nearest.

    The single conversion point for every ms-based parameter.
    """
    return int(round(ms * sample_rate_hz / 1000.0))
