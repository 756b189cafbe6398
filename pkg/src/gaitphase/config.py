"""Run configuration: INI-style file, CLI overrides, reproducible snapshots."""

import configparser
from dataclasses import dataclass, field, fields, replace

FULL_WINDOWS_MS = tuple(float(w) for w in range(50, 401, 25))
FULL_DELAYS_MS = tuple(float(d) for d in range(0, 101, 10))

QUICK_WINDOWS_MS = (275.0, 300.0, 325.0, 375.0)
QUICK_DELAYS_MS = (0.0, 10.0, 20.0, 40.0)

ALL_MODELS = ("nb", "dt", "rf", "gbm", "svm", "knn")


class ConfigError(ValueError):
    """Raised for unreadable or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    # [dataset]
    root: str = ""
    delimiter: str = "tab"
    emg_column: str = "rf_emg"
    knee_column: str = "knee_angle"
    sample_rate_hz: float = 1000.0
    healthy_only: bool = True
    exercise: str = "walk"
    p95_threshold: float = 0.01
    # [filter]
    bp_low_hz: float = 10.0
    bp_high_hz: float = 300.0
    bp_order: int = 4
    knee_cut_hz: float = 6.0
    knee_order: int = 2
    # [labeling]
    prominence: float = 0.3
    min_separation_ms: float = 400.0
    convention: str = "max_starts_stance"
    # [windowing]
    windows_ms: tuple = FULL_WINDOWS_MS
    delays_ms: tuple = FULL_DELAYS_MS
    stride_ms: float = 10.0
    # [search]
    budget: int = 20
    svm_subsample_cap: int = 20000
    svm_kernel: str = "rbf"
    models: tuple = ALL_MODELS
    # [run]
    seed: int = 0
    jobs: int = 1
    out_dir: str = "out"
    latency_budget_ms: float = 10.0

    def quick(self):
        """The scaled-down preset: reduced grid, coarser stride, SVM cap."""
        return replace(
            self,
            windows_ms=QUICK_WINDOWS_MS,
            delays_ms=QUICK_DELAYS_MS,
            stride_ms=150.0,
            svm_subsample_cap=1500,
        )

    def snapshot(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @staticmethod
    def from_snapshot(d: dict) -> "RunConfig":
        kwargs = {}
        for f in fields(RunConfig):
            if f.name in d:
                v = d[f.name]
                kwargs[f.name] = tuple(v) if isinstance(v, list) else v
        return RunConfig(**kwargs)


_SECTIONS = {
    "dataset": ("root", "delimiter", "emg_column", "knee_column", "sample_rate_hz",
                "healthy_only", "exercise", "p95_threshold"),
    "filter": ("bp_low_hz", "bp_high_hz", "bp_order", "knee_cut_hz", "knee_order"),
    "labeling": ("prominence", "min_separation_ms", "convention"),
    "windowing": ("windows_ms", "delays_ms", "stride_ms"),
    "search": ("budget", "svm_subsample_cap", "svm_kernel", "models"),
    "run": ("seed", "jobs", "out_dir", "latency_budget_ms"),
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(name, raw):
    raw = raw.strip()
    ftype = _FIELD_TYPES[name]
    if ftype is bool:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if ftype is int:
        return int(raw)
    if ftype is float:
        return float(raw)
    if ftype is tuple:
        items = [p.strip() for p in raw.split(",") if p.strip()]
        if name == "models":
            return tuple(items)
        return tuple(float(p) for p in items)
    return raw


def load_config(path) -> RunConfig:
    """Read a key=value config file; unknown keys are an error."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    kwargs = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            try:
                kwargs[key] = _parse_value(key, raw)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
    return RunConfig(**kwargs)


def write_config(cfg: RunConfig, path):
    parser = configparser.ConfigParser()
    for section, keys in _SECTIONS.items():
        parser[section] = {}
        for key in keys:
            v = getattr(cfg, key)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            parser[section][key] = str(v)
    with open(path, "w") as fh:
        parser.write(fh)
