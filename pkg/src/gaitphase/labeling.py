"""Gait-phase labeling from knee-angle extrema.

The knee trace toggles phase at every local maximum/minimum: the
interval starting at a flexion maximum is stance (label 1), the one
starting at a minimum is swing (label 0), configurable via the
convention tag.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from gaitphase.signals import SampledSignal, ms_to_samples

MAX = 1
MIN = -1

CONVENTIONS = ("max_starts_stance", "min_starts_stance")


@dataclass(frozen=True)
class ExtremaList:
    indices: np.ndarray  # int64, strictly increasing
    kinds: np.ndarray  # +1 for MAX, -1 for MIN, strictly alternating

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        kinds = np.asarray(self.kinds, dtype=np.int8)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "kinds", kinds)
        if idx.size != kinds.size:
            raise ValueError("indices and kinds must be parallel")
        if idx.size and np.any(np.diff(idx) <= 0):
            raise ValueError("extrema indices must be strictly increasing")
        if idx.size > 1 and np.any(kinds[1:] == kinds[:-1]):
            raise ValueError("extrema kinds must alternate")

    def __len__(self):
        return self.indices.size


@dataclass(frozen=True)
class PhaseSeries:
    labels: np.ndarray  # int8 in {0, 1}, one per sample
    convention: str = "max_starts_stance"

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8)
        object.__setattr__(self, "labels", labels)
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("phase labels must be 0 or 1")

    def __len__(self):
        return self.labels.size


def _alternate(indices, kinds, values):
    """Collapse same-kind runs, keeping the most extreme candidate."""
    keep_idx, keep_kind = [], []
    for i, k in zip(indices, kinds):
        if keep_kind and keep_kind[-1] == k:
            prev = keep_idx[-1]
            better = values[i] > values[prev] if k == MAX else values[i] < values[prev]
            if better:
                keep_idx[-1] = i
        else:
            keep_idx.append(i)
            keep_kind.append(k)
    return keep_idx, keep_kind


def detect_extrema(sig: SampledSignal, min_prominence=0.3, min_separation_ms=400.0):
    """Alternating local maxima/minima with prominence and spacing floors.

    min_prominence is a fraction of the signal's value range.
    """
    if not 0 < min_prominence < 1:
        raise ValueError("min_prominence must be in (0, 1)")
    if min_separation_ms <= 0:
        raise ValueError("min_separation_ms must be positive")
    x = sig.samples
    sep = max(1, ms_to_samples(min_separation_ms, sig.sample_rate_hz))
    if x.size < 2 * sep:
        raise ValueError("signal shorter than twice the minimum extrema separation")
    prom = min_prominence * float(np.ptp(x))
    if prom == 0.0:
        raise ValueError("no gait cycles detected")
    maxima, _ = find_peaks(x, prominence=prom, distance=sep)
    minima, _ = find_peaks(-x, prominence=prom, distance=sep)
    if maxima.size + minima.size == 0:
        raise ValueError("no gait cycles detected")
    indices = np.concatenate([maxima, minima])
    kinds = np.concatenate([np.full(maxima.size, MAX), np.full(minima.size, MIN)])
    order = np.argsort(indices)
    idx, knd = _alternate(indices[order], kinds[order], x)
    # drop whichever neighbor of a too-close pair is less extreme, then
    # restore alternation; clean gait traces never loop here more than once
    changed = True
    while changed:
        changed = False
        for k in range(len(idx) - 1):
            if idx[k + 1] - idx[k] < sep:
                a, b = idx[k], idx[k + 1]
                weaker = k if abs(x[a]) < abs(x[b]) else k + 1
                del idx[weaker]
                del knd[weaker]
                idx, knd = _alternate(idx, knd, x)
                changed = True
                break
    if not idx:
        raise ValueError("no gait cycles detected")
    return ExtremaList(np.array(idx, dtype=np.int64), np.array(knd, dtype=np.int8))


def label_phases(knee: SampledSignal, extrema: ExtremaList,
                 convention="max_starts_stance") -> PhaseSeries:
    """Per-sample stance/swing labels toggling at each extremum."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    if len(extrema) == 0:
        raise ValueError("extrema list is empty")
    stance_kind = MAX if convention == "max_starts_stance" else MIN
    n = len(knee)
    labels = np.empty(n, dtype=np.int8)
    idx = extrema.indices
    kinds = extrema.kinds
    first_label = 1 if kinds[0] == stance_kind else 0
    labels[: idx[0]] = 1 - first_label
    for k in range(len(idx)):
        stop = idx[k + 1] if k + 1 < len(idx) else n
        labels[idx[k]: stop] = 1 if kinds[k] == stance_kind else 0
    return PhaseSeries(labels, convention)
