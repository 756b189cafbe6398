"""Command-line entry point: screen | sweep | replay | features | synth."""

import argparse
import dataclasses
import json
import statistics
import sys
from pathlib import Path

import numpy as np

from gaitphase import evaluation, synthetic
from gaitphase.classifiers import ModelKind
from gaitphase.config import ConfigError, RunConfig, load_config
from gaitphase.dataset import IngestConfig, IngestError, ingest_dataset, screen_subjects
from gaitphase.windowing import WindowSpec, apply_scaler, fit_scaler

EXIT_OK = 0
EXIT_PIPELINE = 1
EXIT_USAGE = 2


def _parse_grid(text):
    """'300x40' or '275,300x0,10,20' -> (windows, delays)."""
    try:
        w_part, d_part = text.split("x")
        windows = tuple(float(w) for w in w_part.split(",") if w)
        delays = tuple(float(d) for d in d_part.split(",") if d)
    except ValueError:
        raise ConfigError(f"bad --grid {text!r}; expected WINDOWSxDELAYS like 300x40") from None
    if not windows or not delays:
        raise ConfigError(f"bad --grid {text!r}: empty axis")
    return windows, delays


def _build_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "quick", False):
        cfg = cfg.quick()
    overrides = {}
    if args.dataset:
        overrides["root"] = args.dataset
    if getattr(args, "models", None):
        overrides["models"] = tuple(args.models.split(","))
    if getattr(args, "grid", None):
        overrides["windows_ms"], overrides["delays_ms"] = _parse_grid(args.grid)
    if getattr(args, "stride_ms", None) is not None:
        overrides["stride_ms"] = args.stride_ms
    if getattr(args, "budget", None) is not None:
        overrides["budget"] = args.budget
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "jobs", None) is not None:
        overrides["jobs"] = args.jobs
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    if getattr(args, "threshold", None) is not None:
        overrides["p95_threshold"] = args.threshold
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    if not cfg.root:
        raise ConfigError("no dataset directory given (--dataset or config [dataset] root)")
    return cfg


def _ingest(cfg: RunConfig):
    icfg = IngestConfig(
        emg_column=cfg.emg_column,
        knee_column=cfg.knee_column,
        delimiter=cfg.delimiter,
        sample_rate_hz=cfg.sample_rate_hz,
        healthy_only=cfg.healthy_only,
        exercise=cfg.exercise,
    )
    return ingest_dataset(cfg.root, icfg)


def _retained(recordings, report):
    return [r for r in recordings if r.subject_id not in report.excluded_subjects]


def _out_dir(cfg) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_screen(args) -> int:
    cfg = _build_config(args)
    recordings = _ingest(cfg)
    report = screen_subjects(recordings, cfg.p95_threshold)
    out = _out_dir(cfg)
    lines = ["subject,p50,p90,p95,excluded"]
    print(f"{'subject':>8} {'p50':>9} {'p90':>9} {'p95':>9}  excluded")
    for sid in sorted(report.quantiles):
        p50, p90, p95 = report.quantiles[sid]
        flag = sid in report.excluded_subjects
        print(f"{sid:>8} {p50:>9.4f} {p90:>9.4f} {p95:>9.4f}  {'yes' if flag else ''}")
        lines.append(f"{sid},{p50!r},{p90!r},{p95!r},{int(flag)}")
    for sid in sorted(report.excluded_subjects):
        print(f"excluded subject {sid}: {report.exclusion_reasons[sid]}")
    (out / "screening.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _write_sweep_outputs(report, out: Path):
    with open(out / "report.json", "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    best = report.best_per_model()
    rows = ["model,auc,window_ms,delay_ms"]
    for model in sorted(best, key=lambda m: -best[m].mean_auc):
        c = best[model]
        rows.append(f"{model},{c.mean_auc!r},{c.window_ms:g},{c.delay_ms:g}")
    (out / "summary.csv").write_text("\n".join(rows) + "\n")
    for model in sorted({c.model for c in report.cells}):
        windows, delays, mat = report.heatmap(model)
        lines = ["window_ms," + ",".join(f"{d:g}" for d in delays)]
        for i, w in enumerate(windows):
            lines.append(f"{w:g}," + ",".join(repr(v) for v in mat[i]))
        (out / f"heatmap_{model}.csv").write_text("\n".join(lines) + "\n")


def cmd_sweep(args) -> int:
    cfg = _build_config(args)
    recordings = _ingest(cfg)
    screen = screen_subjects(recordings, cfg.p95_threshold)
    retained = _retained(recordings, screen)
    prepared = evaluation.prepare_recordings(retained, cfg)
    folds = evaluation.make_folds([p.subject_id for p in prepared])
    report = evaluation.run_sweep(prepared, folds, cfg)
    out = _out_dir(cfg)
    _write_sweep_outputs(report, out)
    best = report.best_per_model()
    print(f"{'model':>6} {'auc':>7} {'window':>7} {'delay':>6}")
    for model in sorted(best, key=lambda m: -best[m].mean_auc):
        c = best[model]
        print(f"{model:>6} {c.mean_auc:>7.3f} {c.window_ms:>7g} {c.delay_ms:>6g}")
    for w, d, m, msg in report.failed:
        print(f"FAILED {msg}", file=sys.stderr)
    return EXIT_PIPELINE if report.failed else EXIT_OK


def cmd_features(args) -> int:
    cfg = _build_config(args)
    recordings = _ingest(cfg)
    screen = screen_subjects(recordings, cfg.p95_threshold)
    prepared = evaluation.prepare_recordings(_retained(recordings, screen), cfg)
    spec = WindowSpec(cfg.windows_ms[0], cfg.delays_ms[0], cfg.stride_ms)
    fm = evaluation.features_for(prepared, spec)
    out = _out_dir(cfg)
    path = out / "features.csv"
    fm.to_csv(path)
    print(f"wrote {fm.n_rows} rows to {path}")
    return EXIT_OK


def cmd_replay(args) -> int:
    cfg = _build_config(args)
    recordings = _ingest(cfg)
    screen = screen_subjects(recordings, cfg.p95_threshold)
    subject = args.subject
    by_id = {r.subject_id: r for r in recordings}
    if subject not in by_id:
        raise ConfigError(f"unknown subject {subject}")
    if subject in screen.excluded_subjects:
        if not args.force:
            raise ConfigError(f"subject {subject} is excluded by screening; use --force")
        print(f"warning: subject {subject} is excluded by screening, replaying anyway")
    kind = ModelKind.from_name(cfg.models[0])
    window_ms, delay_ms = cfg.windows_ms[0], cfg.delays_ms[0]
    spec = WindowSpec(window_ms, delay_ms, cfg.stride_ms)

    train_recs = [r for r in _retained(recordings, screen) if r.subject_id != subject]
    prepared_train = evaluation.prepare_recordings(train_recs, cfg)
    folds = evaluation.make_folds([p.subject_id for p in prepared_train])
    fm = evaluation.features_for(prepared_train, spec)
    kind_ix = list(ModelKind).index(kind)
    search = evaluation.random_search(
        kind, fm, folds, cfg.budget,
        evaluation._seed_int(cfg.seed, int(window_ms * 1000), int(delay_ms * 1000), kind_ix),
        svm_cap=cfg.svm_subsample_cap, kernel=cfg.svm_kernel,
    )
    scaler = fit_scaler(fm)
    train_s = apply_scaler(fm, scaler)
    params = dict(search.params)
    if kind == ModelKind.SVM:
        params["kernel"] = cfg.svm_kernel
    from gaitphase.classifiers import train as train_model

    model = train_model(kind, params, train_s.X, train_s.y, seed=cfg.seed)

    prepared_test = evaluation.prepare_recording(by_id[subject], cfg)
    stream = evaluation.replay_stream(prepared_test, model, scaler, spec)

    # batch scoring of the same windows must match bit for bit
    test_fm = evaluation.features_for([prepared_test], WindowSpec(window_ms, 0.0, cfg.stride_ms))
    batch = model.score(apply_scaler(test_fm, scaler).X)
    replay_scores = np.array([s for _, s, _ in stream])
    if replay_scores.size != batch.size or not np.array_equal(replay_scores, batch):
        print("replay/batch score mismatch", file=sys.stderr)
        return EXIT_PIPELINE

    out = _out_dir(cfg)
    path = out / f"replay_subject{subject:02d}.csv"
    lines = ["time_ms,score,latency_ms"]
    for t, s, lat in stream:
        lines.append(f"{t!r},{s!r},{lat!r}")
    path.write_text("\n".join(lines) + "\n")
    med = statistics.median(lat for _, _, lat in stream) if stream else float("nan")
    print(f"replayed {len(stream)} windows of subject {subject} "
          f"(model {kind.value}, params {search.params})")
    print(f"median latency {med:.3f} ms (budget {cfg.latency_budget_ms:g} ms)")
    if stream and med >= cfg.latency_budget_ms:
        print("warning: median latency exceeds the configured budget", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args) -> int:
    target = args.dataset or (args.config and load_config(args.config).root)
    if not target:
        raise ConfigError("synth needs --dataset to know where to write")
    paths = synthetic.generate_dataset(
        target, seed=args.seed if args.seed is not None else 12345,
        duration_s=args.duration_s,
    )
    print(f"wrote {len(paths)} subject files under {target}")
    return EXIT_OK


def _add_common(p, grid=True):
    p.add_argument("--config", help="INI config file; flags override it")
    p.add_argument("--dataset", help="dataset root directory")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--threshold", type=float, help="p95 screening threshold")
    if grid:
        p.add_argument("--models", help="comma list: nb,dt,rf,gbm,svm,knn")
        p.add_argument("--grid", help="WINDOWSxDELAYS in ms, e.g. 300x40 or 275,300x0,10")
        p.add_argument("--stride-ms", dest="stride_ms", type=float)
        p.add_argument("--budget", type=int, help="random-search draws per cell")
        p.add_argument("--quick", action="store_true",
                       help="reduced grid / coarse stride preset")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gaitphase",
        description="Single-channel EMG gait-phase detection pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("screen", help="per-subject |EMG| quantiles and exclusions")
    _add_common(p, grid=False)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("sweep", help="window x delay x model AUC sweep")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("features", help="dump the feature matrix CSV for one cell")
    _add_common(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("replay", help="stream one subject through a trained model")
    _add_common(p)
    p.add_argument("--subject", type=int, required=True)
    p.add_argument("--force", action="store_true",
                   help="replay even a screening-excluded subject")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("synth", help="generate the synthetic walking dataset")
    p.add_argument("--dataset", help="directory to write subject files into")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--duration-s", dest="duration_s", type=float, default=20.0)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, IngestError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - pipeline failure boundary
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
