"""Subject-wise cross-validation, ROC-AUC, the sweep grid and streaming replay."""

import time
import warnings
from dataclasses import dataclass

import numpy as np

from gaitphase import backend, dsp
from gaitphase.classifiers import (
    DEFAULT_SPACES, ModelKind, sample_params, train,
)
from gaitphase.config import RunConfig
from gaitphase.labeling import detect_extrema, label_phases
from gaitphase.signals import SampledSignal, ms_to_samples
from gaitphase.windowing import (
    FeatureMatrix, ScalerParams, WindowSpec, apply_scaler, fit_scaler, segment,
)


class CellError(RuntimeError):
    """A sweep cell failed; carries the cell coordinates."""

    def __init__(self, window_ms, delay_ms, model, cause):
        super().__init__(f"cell ({window_ms:g} ms, {delay_ms:g} ms, {model}): {cause}")
        self.window_ms = window_ms
        self.delay_ms = delay_ms
        self.model = model


@dataclass(frozen=True)
class SubjectFolds:
    k: int
    folds: tuple  # of (train subject ids tuple, test subject id)


def make_folds(subject_ids) -> SubjectFolds:
    """Leave-one-subject-out folds in ascending subject order."""
    ids = sorted(set(int(s) for s in subject_ids))
    if len(ids) < 2:
        raise ValueError("need at least 2 subjects for subject-wise CV")
    folds = []
    for test in ids:
        tr = tuple(s for s in ids if s != test)
        assert test not in tr
        folds.append((tr, test))
    return SubjectFolds(k=len(ids), folds=tuple(folds))


def roc_auc(scores, labels) -> float:
    """AUC by the Mann-Whitney rank statistic with half-credit for ties."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.size != labels.size:
        raise ValueError("scores and labels must have equal length")
    pos = labels == 1
    n1 = int(pos.sum())
    n0 = scores.size - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("AUC undefined for single-class labels")
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    # twice the average rank, as an exact integer
    boundaries = np.flatnonzero(s[1:] != s[:-1])
    starts = np.concatenate(([0], boundaries + 1))
    ends = np.concatenate((boundaries, [s.size - 1]))
    group_rank2 = starts + ends + 2  # (lo + hi) with 1-based ranks
    rank2 = np.repeat(group_rank2, ends - starts + 1)
    r2_pos = int(rank2[pos[order]].sum())
    num = r2_pos - n1 * (n1 + 1)
    den = 2 * n1 * n0
    return num / den


@dataclass(frozen=True)
class PreparedRecording:
    """Filtered/normalized EMG plus derived phase labels for one subject."""

    subject_id: int
    emg: SampledSignal
    phases: object  # PhaseSeries


def prepare_recording(rec, cfg: RunConfig) -> PreparedRecording:
    emg = dsp.bandpass(rec.rf_emg, dsp.BandpassSpec(cfg.bp_low_hz, cfg.bp_high_hz, cfg.bp_order))
    emg = dsp.normalize_maxabs(emg)
    knee = dsp.normalize_maxabs(dsp.lowpass(rec.knee_angle, cfg.knee_cut_hz, cfg.knee_order))
    extrema = detect_extrema(knee, cfg.prominence, cfg.min_separation_ms)
    phases = label_phases(knee, extrema, cfg.convention)
    return PreparedRecording(rec.subject_id, emg, phases)


def prepare_recordings(recordings, cfg: RunConfig):
    return [prepare_recording(r, cfg) for r in sorted(recordings, key=lambda r: r.subject_id)]


def features_for(prepared, spec: WindowSpec) -> FeatureMatrix:
    return FeatureMatrix.concat(
        segment(p.emg, p.phases, spec, p.subject_id) for p in prepared
    )


def _seed_int(*parts):
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def _stratified_cap(fm: FeatureMatrix, cap: int, seed: int) -> FeatureMatrix:
    if cap <= 0 or fm.n_rows <= cap:
        return fm
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xCA9]))
    keep = []
    for c in (0, 1):
        idx = np.flatnonzero(fm.y == c)
        k = int(round(cap * idx.size / fm.n_rows))
        k = max(1, min(k, idx.size))
        keep.append(rng.choice(idx, size=k, replace=False))
    keep = np.sort(np.concatenate(keep))
    return FeatureMatrix(fm.X[keep], fm.y[keep], fm.subject[keep], fm.end_ms[keep])


@dataclass(frozen=True)
class FoldEvaluation:
    mean_auc: float
    per_fold_auc: tuple  # NaN where the held-out subject had one class
    pooled_auc: float


def evaluate_params(kind, params, fm: FeatureMatrix, folds: SubjectFolds,
                    seed: int, svm_cap: int = 0, kernel: str = "rbf") -> FoldEvaluation:
    """Subject-wise CV of one hyperparameter draw.

    Per fold: scaler fit on training subjects only, model trained on the
    scaled training rows, the held-out subject scored and ranked.
    """
    per_fold = []
    pooled_scores = []
    pooled_labels = []
    for train_ids, test_id in folds.folds:
        train_fm = fm.for_subjects(train_ids)
        test_fm = fm.for_subjects([test_id])
        if np.unique(test_fm.y).size < 2:
            warnings.warn(
                f"subject {test_id}: single-class test labels, fold skipped",
                stacklevel=2,
            )
            per_fold.append(float("nan"))
            continue
        scaler = fit_scaler(train_fm)
        train_s = apply_scaler(train_fm, scaler)
        test_s = apply_scaler(test_fm, scaler)
        fold_seed = _seed_int(seed, test_id)
        if kind == ModelKind.SVM:
            train_s = _stratified_cap(train_s, svm_cap, fold_seed)
            params = {**params, "kernel": kernel}
        model = train(kind, params, train_s.X, train_s.y, seed=fold_seed)
        sc = model.score(test_s.X)
        per_fold.append(roc_auc(sc, test_s.y))
        pooled_scores.append(sc)
        pooled_labels.append(test_s.y)
    arr = np.array(per_fold)
    if np.isnan(arr).all():
        raise ValueError("every fold was single-class; cannot evaluate")
    pooled = roc_auc(np.concatenate(pooled_scores), np.concatenate(pooled_labels))
    return FoldEvaluation(
        mean_auc=float(np.nanmean(arr)),
        per_fold_auc=tuple(per_fold),
        pooled_auc=pooled,
    )


@dataclass(frozen=True)
class SearchResult:
    params: dict
    mean_auc: float
    per_fold_auc: tuple
    pooled_auc: float
    n_draws: int


_KIND_ORDER = list(ModelKind)


def random_search(kind, fm: FeatureMatrix, folds: SubjectFolds, budget: int,
                  seed: int, space: dict | None = None, svm_cap: int = 0,
                  kernel: str = "rbf") -> SearchResult:
    """Uniform random draws over the space, scored by CV mean AUC.

    Ties keep the earliest draw.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if space is None:
        space = DEFAULT_SPACES[kind]
    if not space:
        raise ValueError("empty search space")
    kind_ix = _KIND_ORDER.index(kind)
    rng = np.random.default_rng(np.random.SeedSequence([seed, kind_ix, 0xA5]))
    best = None
    for draw in range(budget):
        params = sample_params(space, rng)
        ev = evaluate_params(kind, params, fm, folds,
                             seed=_seed_int(seed, kind_ix, draw),
                             svm_cap=svm_cap, kernel=kernel)
        if best is None or ev.mean_auc > best[1].mean_auc:
            best = (params, ev)
    params, ev = best
    return SearchResult(params=params, mean_auc=ev.mean_auc,
                        per_fold_auc=ev.per_fold_auc, pooled_auc=ev.pooled_auc,
                        n_draws=budget)


@dataclass(frozen=True)
class SweepCell:
    window_ms: float
    delay_ms: float
    model: str
    per_fold_auc: tuple
    mean_auc: float
    pooled_auc: float
    winning_params: dict

    def to_dict(self):
        return {
            "window_ms": self.window_ms,
            "delay_ms": self.delay_ms,
            "model": self.model,
            "per_fold_auc": list(self.per_fold_auc),
            "mean_auc": self.mean_auc,
            "pooled_auc": self.pooled_auc,
            "winning_params": self.winning_params,
        }


def evaluate_cell(prepared, window_ms, delay_ms, kind, folds: SubjectFolds,
                  stride_ms, budget, seed, svm_cap=0, kernel="rbf",
                  space=None) -> SweepCell:
    spec = WindowSpec(window_ms=window_ms, delay_ms=delay_ms, stride_ms=stride_ms)
    fm = features_for(prepared, spec)
    kind_ix = _KIND_ORDER.index(kind)
    cell_seed = _seed_int(seed, int(window_ms * 1000), int(delay_ms * 1000), kind_ix)
    res = random_search(kind, fm, folds, budget, cell_seed,
                        space=space, svm_cap=svm_cap, kernel=kernel)
    return SweepCell(
        window_ms=float(window_ms),
        delay_ms=float(delay_ms),
        model=kind.value,
        per_fold_auc=res.per_fold_auc,
        mean_auc=res.mean_auc,
        pooled_auc=res.pooled_auc,
        winning_params=res.params,
    )


@dataclass(frozen=True)
class SweepReport:
    cells: tuple
    failed: tuple  # of (window_ms, delay_ms, model, message)
    seed: int
    config_snapshot: dict

    def best_per_model(self):
        """Highest mean AUC per model; ties go to the smaller window, then delay."""
        best = {}
        for cell in self.cells:
            cur = best.get(cell.model)
            key = (-cell.mean_auc, cell.window_ms, cell.delay_ms)
            if cur is None or key < (-cur.mean_auc, cur.window_ms, cur.delay_ms):
                best[cell.model] = cell
        return best

    def heatmap(self, model):
        """(windows, delays, mean-AUC matrix) for one model."""
        cells = [c for c in self.cells if c.model == model]
        windows = sorted({c.window_ms for c in cells})
        delays = sorted({c.delay_ms for c in cells})
        mat = np.full((len(windows), len(delays)), np.nan)
        for c in cells:
            mat[windows.index(c.window_ms), delays.index(c.delay_ms)] = c.mean_auc
        return windows, delays, mat

    def to_dict(self):
        return {
            "seed": self.seed,
            "config": self.config_snapshot,
            "cells": [c.to_dict() for c in self.cells],
            "failed": [list(f) for f in self.failed],
            "best_per_model": {m: c.to_dict() for m, c in sorted(self.best_per_model().items())},
        }


def run_sweep(prepared, folds: SubjectFolds, cfg: RunConfig, jobs=None) -> SweepReport:
    """Evaluate the full (window x delay x model) grid."""
    models = [ModelKind.from_name(m) for m in cfg.models]
    if not models or not cfg.windows_ms or not cfg.delays_ms:
        raise ValueError("empty sweep grid")
    coords = [
        (w, d, kind)
        for w in cfg.windows_ms
        for d in cfg.delays_ms
        for kind in models
    ]

    def one(w, d, kind):
        try:
            return evaluate_cell(
                prepared, w, d, kind, folds, cfg.stride_ms, cfg.budget,
                cfg.seed, svm_cap=cfg.svm_subsample_cap, kernel=cfg.svm_kernel,
            )
        except Exception as exc:  # noqa: BLE001 - reported per cell
            return CellError(w, d, kind.value, exc)

    n_jobs = jobs if jobs is not None else cfg.jobs
    if n_jobs and n_jobs > 1:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(delayed(one)(w, d, k) for w, d, k in coords)
    else:
        results = [one(w, d, k) for w, d, k in coords]

    cells = tuple(r for r in results if isinstance(r, SweepCell))
    failed = tuple(
        (r.window_ms, r.delay_ms, r.model, str(r)) for r in results if isinstance(r, CellError)
    )
    return SweepReport(cells=cells, failed=failed, seed=cfg.seed,
                       config_snapshot=cfg.snapshot())


def replay_stream(prepared_rec: PreparedRecording, model, scaler: ScalerParams,
                  spec: WindowSpec):
    """Score windows chronologically as if they arrived live.

    Yields (window end time ms, score, feature+score latency ms); scores
    are bit-identical to batch scoring of the same windows.
    """
    x = prepared_rec.emg.samples
    rate = prepared_rec.emg.sample_rate_hz
    width = ms_to_samples(spec.window_ms, rate)
    stride = max(1, ms_to_samples(spec.stride_ms, rate))
    out = []
    start_buf = np.zeros(1, dtype=np.int64)
    for start in range(0, x.size - width + 1, stride):
        t0 = time.perf_counter()
        start_buf[0] = start
        row = backend.window_features(x, start_buf, width)
        scaled = (row - scaler.mean) / scaler.std
        s = float(model.score(scaled)[0])
        latency_ms = (time.perf_counter() - t0) * 1000.0
        out.append(((start + width - 1) * 1000.0 / rate, s, latency_ms))
    return out
