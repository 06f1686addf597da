"""Model and training configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..errors import ConfigError

FUSION_MODES = ("none", "stage1", "stage2")


@dataclass
class ModelConfig:
    d_tok: int = 64
    d_ctx: int = 128
    hidden: int = 128
    d_span: int = 128
    d_rel: int = 128
    graph_dim: int = 128
    section_cap: int = 512
    # defaults: early fusion for relation extraction, late fusion for
    # saliency; both configurable
    fusion_mention: str = "none"
    fusion_saliency: str = "stage2"
    fusion_relation: str = "stage1"
    use_tfidf: bool = False
    use_citances: bool = False

    def __post_init__(self):
        for name in ("fusion_mention", "fusion_saliency", "fusion_relation"):
            if getattr(self, name) not in FUSION_MODES:
                raise ConfigError(
                    f"{name} must be one of {FUSION_MODES}, "
                    f"got {getattr(self, name)!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainConfig:
    lr: float = 0.1
    epochs: int = 20
    patience: int = 10
    batch_size: int = 4
    grad_clip: float = 5.0
    negative_ratio: int = 5  # sampled negative tuples per gold relation
    threshold_grid: tuple[float, ...] = field(
        default_factory=lambda: tuple(round(0.05 * k, 2)
                                      for k in range(1, 20)))
    seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["threshold_grid"] = list(d["threshold_grid"])
        return d
