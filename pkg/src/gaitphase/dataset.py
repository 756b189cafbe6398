"""Dataset ingestion and subject screening.

Recordings live as one delimited-text file per subject and exercise,
named ``<health>_subject<NN>_<exercise>.txt`` with a header row naming
the columns. Column names, delimiter and sample rate come from the
ingest config so mirror-format drift is absorbed by configuration.
"""

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gaitphase.signals import GaitRecording, SampledSignal


class IngestError(Exception):
    """Raised when the on-disk dataset cannot be parsed."""


_FILE_RE = re.compile(r"^(?P<health>[a-z]+)_subject(?P<sid>\d+)_(?P<exercise>[a-z]+)\.txt$")

_DELIMITERS = {"tab": "\t", "comma": ",", "semicolon": ";", "space": None}


@dataclass(frozen=True)
class IngestConfig:
    emg_column: str = "rf_emg"
    knee_column: str = "knee_angle"
    delimiter: str = "tab"
    sample_rate_hz: float = 1000.0
    healthy_only: bool = True
    exercise: str = "walk"


@dataclass(frozen=True)
class ScreeningReport:
    """Per-subject |EMG| quantiles and the resulting exclusions."""

    quantiles: dict  # subject_id -> (p50, p90, p95)
    excluded_subjects: frozenset
    exclusion_reasons: dict  # subject_id -> str
    threshold: float

    def retained_subjects(self):
        return sorted(set(self.quantiles) - self.excluded_subjects)


def quantile(values, q):
    """q-quantile with linear interpolation between order statistics."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("quantile of empty sequence")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must be in [0, 1]")
    return float(np.quantile(values, q))


def _parse_file(path: Path, config: IngestConfig):
    delim = _DELIMITERS.get(config.delimiter, config.delimiter)
    with open(path) as fh:
        header = fh.readline()
        if not header.strip():
            raise IngestError(f"{path}: empty file")
        columns = [c.strip() for c in header.strip().split(delim)]
        try:
            emg_ix = columns.index(config.emg_column)
            knee_ix = columns.index(config.knee_column)
        except ValueError:
            raise IngestError(
                f"{path}: missing required column "
                f"({config.emg_column!r}/{config.knee_column!r} not in {columns})"
            ) from None
        emg, knee = [], []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.strip().split(delim)
            try:
                e = float(parts[emg_ix])
                k = float(parts[knee_ix])
            except (ValueError, IndexError):
                raise IngestError(f"{path}: line {lineno}: unparseable row") from None
            if not (math.isfinite(e) and math.isfinite(k)):
                raise IngestError(f"{path}: line {lineno}: non-finite sample")
            emg.append(e)
            knee.append(k)
    if not emg:
        raise IngestError(f"{path}: no data rows")
    return np.array(emg), np.array(knee)


def ingest_dataset(root_path, config: IngestConfig):
    """Parse the dataset tree into one GaitRecording per subject.

    Only files for the configured exercise are read; unhealthy-subject
    files are skipped when ``healthy_only`` is set.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise IngestError(f"dataset directory not found: {root}")
    recordings = []
    seen = set()
    for path in sorted(root.iterdir()):
        m = _FILE_RE.match(path.name)
        if not m:
            continue
        if m.group("exercise") != config.exercise:
            continue
        healthy = m.group("health") == "healthy"
        if config.healthy_only and not healthy:
            continue
        sid = int(m.group("sid"))
        if sid in seen:
            raise IngestError(f"{path}: duplicate subject id {sid}")
        seen.add(sid)
        emg, knee = _parse_file(path, config)
        n = min(emg.size, knee.size)
        recordings.append(
            GaitRecording(
                subject_id=sid,
                rf_emg=SampledSignal(emg[:n], config.sample_rate_hz, "rf_emg"),
                knee_angle=SampledSignal(knee[:n], config.sample_rate_hz, "knee_angle"),
                healthy=healthy,
            )
        )
    if not recordings:
        raise IngestError(f"no subject files found under {root}")
    return recordings


def screen_subjects(recordings, p95_threshold=0.01):
    """Rank subjects by |raw EMG| quantiles and exclude flat channels.

    Quantiles are computed on the absolute raw EMG, before any filtering
    or normalization. Subjects whose 95% quantile falls below the
    threshold are excluded as not-properly-recorded sensors.
    """
    if not recordings:
        raise ValueError("no recordings to screen")
    quantiles = {}
    excluded = set()
    reasons = {}
    for rec in sorted(recordings, key=lambda r: r.subject_id):
        a = np.abs(rec.rf_emg.samples)
        trip = (quantile(a, 0.50), quantile(a, 0.90), quantile(a, 0.95))
        quantiles[rec.subject_id] = trip
        if trip[2] < p95_threshold:
            excluded.add(rec.subject_id)
            reasons[rec.subject_id] = (
                f"p95(|EMG|) = {trip[2]:.4f} < {p95_threshold:g}: sensor likely not recording"
            )
    return ScreeningReport(
        quantiles=quantiles,
        excluded_subjects=frozenset(excluded),
        exclusion_reasons=reasons,
        threshold=p95_threshold,
    )
