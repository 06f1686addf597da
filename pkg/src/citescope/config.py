"""Run configuration: a flat key-value config file plus command-line
overrides (flags win), resolved against an optional data root directory
taken from the CITESCOPE_DATA_ROOT environment variable."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

DATA_ROOT_ENV = "CITESCOPE_DATA_ROOT"
DEFAULT_SEEDS = (133, 11, 22)

TASKS = ("mention", "saliency", "relation", "all")
FUSIONS = ("none", "stage1", "stage2")

# fields holding input paths that must exist when set
INPUT_PATH_FIELDS = ("corpus", "store", "citing", "seeds_file",
                     "graph_nodes", "graph_edges", "embeddings",
                     "citance_cache", "idf", "checkpoint")


@dataclass
class RunConfig:
    # paths
    corpus: str | None = None
    store: str | None = None
    citing: str | None = None
    seeds_file: str | None = None
    graph_nodes: str | None = None
    graph_edges: str | None = None
    embeddings: str | None = None
    citance_cache: str | None = None
    idf: str | None = None
    checkpoint: str | None = None
    checkpoint_dir: str | None = None
    report: str | None = None
    # task selection and features
    task: str = "relation"
    fusion: str = "none"
    use_citances: bool = False
    use_tfidf: bool = False
    use_graph: bool = False
    # seeds and execution
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    jobs: int = 1
    deterministic: bool = True
    # model hyperparameters
    lr: float = 0.1
    epochs: int = 20
    patience: int = 10
    batch_size: int = 4
    grad_clip: float = 5.0
    negative_ratio: int = 5
    val_fraction: float = 0.2
    d_tok: int = 64
    d_ctx: int = 128
    hidden: int = 128
    d_span: int = 128
    d_rel: int = 128
    graph_dim: int = 128
    section_cap: int = 512
    # embedding hyperparameters
    dim: int = 128
    walks_per_node: int = 10
    walk_length: int = 40
    window: int = 5
    negatives: int = 5
    embed_epochs: int = 5
    embed_lr: float = 0.025
    # citance hyperparameters
    max_citing: int = 25
    # significance
    resamples: int = 10000
    two_sided: bool = False

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, "
                              f"got {self.task!r}")
        if self.fusion not in FUSIONS:
            raise ConfigError(f"fusion must be one of {FUSIONS}, "
                              f"got {self.fusion!r}")
        if not self.seeds:
            raise ConfigError("seed list must be nonempty")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def validate_inputs(self, fields_to_check=INPUT_PATH_FIELDS) -> None:
        """Referenced input paths must exist; fusion needs embeddings."""
        for name in fields_to_check:
            value = getattr(self, name)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"{name} path does not exist: {value}")
        if self.fusion != "none" and self.use_graph and \
                self.embeddings is None:
            raise ConfigError("graph fusion requires an embeddings path")

    def settings(self) -> dict:
        """Flat mapping of every effective setting, for report headers."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_BOOL_FIELDS = {f.name for f in fields(RunConfig) if f.type == "bool"}
_INT_FIELDS = {f.name for f in fields(RunConfig) if f.type == "int"}
_FLOAT_FIELDS = {f.name for f in fields(RunConfig) if f.type == "float"}
_PATH_FIELDS = INPUT_PATH_FIELDS + ("checkpoint_dir", "report")


def _coerce(key: str, value):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    if not isinstance(value, str):
        return value
    try:
        if key == "seeds":
            return tuple(int(s) for s in value.replace(",", " ").split())
        if key in _BOOL_FIELDS:
            low = value.strip().lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(value)
        if key in _INT_FIELDS:
            return int(value)
        if key in _FLOAT_FIELDS:
            return float(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    return value


def parse_config_file(path) -> dict[str, str]:
    """key = value lines; blank lines and # comments ignored."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(
                f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def resolve_data_root(path_value: str | None,
                      data_root: str | None) -> str | None:
    if path_value is None:
        return None
    p = Path(path_value)
    if data_root and not p.is_absolute():
        return str(Path(data_root) / p)
    return str(p)


def build_run_config(config_path=None, overrides: dict | None = None,
                     env: dict | None = None) -> RunConfig:
    """Layer config file values under flag overrides (flags win) and
    resolve relative paths against the data root."""
    env = os.environ if env is None else env
    merged: dict = {}
    if config_path is not None:
        for key, value in parse_config_file(config_path).items():
            merged[key] = _coerce(key, value)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        merged[key] = _coerce(key, value)
    data_root = env.get(DATA_ROOT_ENV)
    for key in _PATH_FIELDS:
        if merged.get(key) is not None:
            merged[key] = resolve_data_root(merged[key], data_root)
    return RunConfig(**merged)
