"""Filtering and normalization primitives for EMG and knee channels."""

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from gaitphase.signals import SampledSignal


class FilterConfigError(ValueError):
    """Raised for filter specs that are invalid at the signal's rate."""


@dataclass(frozen=True)
class BandpassSpec:
    low_cut_hz: float = 10.0
    high_cut_hz: float = 300.0
    order: int = 4
    zero_phase: bool = True

    def validate(self, sample_rate_hz):
        nyq = sample_rate_hz / 2.0
        if not 0 < self.low_cut_hz < self.high_cut_hz:
            raise FilterConfigError("need 0 < low_cut_hz < high_cut_hz")
        if self.high_cut_hz >= nyq:
            raise FilterConfigError(
                f"high_cut_hz {self.high_cut_hz} must be below Nyquist {nyq}"
            )


def bandpass(sig: SampledSignal, spec: BandpassSpec) -> SampledSignal:
    """Butterworth band-pass; forward-backward when zero_phase is set."""
    spec.validate(sig.sample_rate_hz)
    sos = sps.butter(
        spec.order,
        [spec.low_cut_hz, spec.high_cut_hz],
        btype="bandpass",
        fs=sig.sample_rate_hz,
        output="sos",
    )
    if spec.zero_phase:
        out = sps.sosfiltfilt(sos, sig.samples, padtype="even")
    else:
        out = sps.sosfilt(sos, sig.samples)
    return sig.with_samples(out)


def lowpass(sig: SampledSignal, cut_hz: float, order: int = 2) -> SampledSignal:
    """Zero-phase Butterworth low-pass (knee-angle smoothing)."""
    nyq = sig.sample_rate_hz / 2.0
    if not 0 < cut_hz < nyq:
        raise FilterConfigError(f"cut_hz {cut_hz} must be in (0, {nyq})")
    sos = sps.butter(order, cut_hz, btype="lowpass", fs=sig.sample_rate_hz, output="sos")
    return sig.with_samples(sps.sosfiltfilt(sos, sig.samples, padtype="even"))


def normalize_maxabs(sig: SampledSignal) -> SampledSignal:
    """Scale so max |sample| is 1."""
    peak = float(np.max(np.abs(sig.samples)))
    if peak == 0.0:
        raise ValueError("cannot normalize zero signal")
    return sig.with_samples(sig.samples / peak)
