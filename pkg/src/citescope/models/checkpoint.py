"""Versioned model checkpoints: a single torch.save archive holding the
configs, vocabulary, weights, and selected thresholds."""

from __future__ import annotations

from pathlib import Path

import torch

from ..errors import ValidationError
from .config import ModelConfig, TrainConfig
from .data import Vocab
from .pipeline import IEModel

CHECKPOINT_VERSION = 1


def save_checkpoint(path, model: IEModel, train_config: TrainConfig,
                    thresholds: dict[str, float] | None = None) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "model_config": model.config.to_dict(),
        "train_config": train_config.to_dict(),
        "vocab": model.vocab.to_dict(),
        "state_dict": model.state_dict(),
        "thresholds": dict(thresholds or {}),
    }
    torch.save(payload, Path(path))


def load_checkpoint(path) -> tuple[IEModel, TrainConfig, dict[str, float]]:
    payload = torch.load(Path(path), weights_only=False)
    version = payload.get("version")
    if version != CHECKPOINT_VERSION:
        raise ValidationError(
            f"unsupported checkpoint version {version!r}, "
            f"expected {CHECKPOINT_VERSION}")
    config = ModelConfig(**payload["model_config"])
    tcfg_dict = dict(payload["train_config"])
    tcfg_dict["threshold_grid"] = tuple(tcfg_dict["threshold_grid"])
    train_config = TrainConfig(**tcfg_dict)
    vocab = Vocab.from_dict(payload["vocab"])
    model = IEModel(vocab, config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, train_config, dict(payload["thresholds"])
