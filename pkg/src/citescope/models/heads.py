"""Task heads: emission network for tagging, additive-attention span
embeddings, saliency classifier, and the 4-ary relation scorer.

Each head ends in two feedforward stages; the document's graph embedding
can be concatenated into the input of the first stage (stage1) or the
second stage (stage2), or not at all.
"""

from __future__ import annotations

import torch
from torch import nn

from ..errors import ValidationError
from ..iobes import N_TAGS
from .config import ModelConfig


def _fused_dim(base: int, fusion: str, stage: str, graph_dim: int) -> int:
    return base + (graph_dim if fusion == stage else 0)


def _maybe_cat(x: torch.Tensor, graph_vec: torch.Tensor | None,
               fusion: str, stage: str, graph_dim: int) -> torch.Tensor:
    if fusion != stage:
        return x
    if graph_vec is None:
        # unlinked documents carry no graph embedding; fuse zeros,
        # mirroring the embedding-table policy for unknown nodes
        graph_vec = torch.zeros(graph_dim, dtype=x.dtype)
    if graph_vec.shape[-1] != graph_dim:
        raise ValidationError(
            f"graph vector has length {graph_vec.shape[-1]}, "
            f"expected {graph_dim}")
    if x.dim() == 2:
        graph_vec = graph_vec.unsqueeze(0).expand(x.shape[0], -1)
    return torch.cat([x, graph_vec], dim=-1)


class EmissionNet(nn.Module):
    """Two feedforward layers from context vectors to per-tag potentials,
    with optional graph fusion at either stage."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.fusion = config.fusion_mention
        self.ff1 = nn.Linear(
            _fused_dim(config.d_ctx, self.fusion, "stage1", config.graph_dim),
            config.hidden)
        self.ff2 = nn.Linear(
            _fused_dim(config.hidden, self.fusion, "stage2",
                       config.graph_dim),
            N_TAGS)
        self.double()

    def forward(self, token_vecs: torch.Tensor,
                graph_vec: torch.Tensor | None = None) -> torch.Tensor:
        x = _maybe_cat(token_vecs, graph_vec, self.fusion, "stage1",
                       self.config.graph_dim)
        h = torch.tanh(self.ff1(x))
        h = _maybe_cat(h, graph_vec, self.fusion, "stage2",
                       self.config.graph_dim)
        return self.ff2(h)


class SpanAttention(nn.Module):
    """Additive attention producing one span vector from the token vectors
    inside a span; the output is a convex combination of the projected
    token vectors."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.project = nn.Linear(config.d_ctx, config.d_span)
        self.score_hidden = nn.Linear(config.d_ctx, config.d_span)
        self.score_vec = nn.Linear(config.d_span, 1, bias=False)
        self.double()

    def attention_weights(self, token_vecs: torch.Tensor) -> torch.Tensor:
        scores = self.score_vec(torch.tanh(self.score_hidden(token_vecs)))
        return torch.softmax(scores.squeeze(-1), dim=0)

    def forward(self, token_vecs: torch.Tensor) -> torch.Tensor:
        if token_vecs.shape[0] == 0:
            raise ValidationError("cannot embed an empty span")
        weights = self.attention_weights(token_vecs)
        return weights @ self.project(token_vecs)


class SaliencyHead(nn.Module):
    """Span vector -> salient probability through two feedforward stages.

    Optional channels appended at stage1: the document graph embedding
    (when fusion_saliency == stage1) and the span-mean citation TF-IDF
    scalar (when use_tfidf).
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.fusion = config.fusion_saliency
        in1 = _fused_dim(config.d_span, self.fusion, "stage1",
                         config.graph_dim)
        if config.use_tfidf:
            in1 += 1
        self.ff1 = nn.Linear(in1, config.hidden)
        self.ff2 = nn.Linear(
            _fused_dim(config.hidden, self.fusion, "stage2",
                       config.graph_dim), 1)
        self.double()

    def forward(self, span_vec: torch.Tensor,
                graph_vec: torch.Tensor | None = None,
                tfidf_feat: torch.Tensor | None = None) -> torch.Tensor:
        x = _maybe_cat(span_vec, graph_vec, self.fusion, "stage1",
                       self.config.graph_dim)
        if self.config.use_tfidf:
            if tfidf_feat is None:
                tfidf_feat = torch.zeros((), dtype=torch.float64)
            x = torch.cat([x, tfidf_feat.reshape(1)])
        h = torch.tanh(self.ff1(x))
        h = _maybe_cat(h, graph_vec, self.fusion, "stage2",
                       self.config.graph_dim)
        return torch.sigmoid(self.ff2(h)).squeeze(-1)


def cluster_saliency(mention_probs) -> float:
    """Cluster-level saliency is the max over its mentions' probabilities."""
    probs = list(mention_probs)
    if not probs:
        raise ValidationError("cluster saliency needs at least one mention")
    return max(float(p) for p in probs)


class RelationHead(nn.Module):
    """Per-section relation composition plus final scoring.

    Per eligible section: the four entities' max-pooled span vectors are
    concatenated (plus the graph embedding at stage1) and passed through
    the first feedforward network; the per-section vectors are averaged
    (plus the graph embedding at stage2) and passed through the second.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.fusion = config.fusion_relation
        self.ff1 = nn.Linear(
            _fused_dim(4 * config.d_span, self.fusion, "stage1",
                       config.graph_dim),
            config.d_rel)
        self.ff2 = nn.Linear(
            _fused_dim(config.d_rel, self.fusion, "stage2",
                       config.graph_dim), 1)
        self.double()

    def forward(self, section_entity_vecs: list[list[torch.Tensor]],
                graph_vec: torch.Tensor | None = None) -> torch.Tensor:
        """section_entity_vecs: one [task, dataset, method, metric] list of
        max-pooled span vectors per eligible section."""
        if not section_entity_vecs:
            raise ValidationError("relation scoring needs >= 1 section")
        section_vecs = []
        for entity_vecs in section_entity_vecs:
            x = torch.cat(entity_vecs)
            x = _maybe_cat(x, graph_vec, self.fusion, "stage1",
                           self.config.graph_dim)
            section_vecs.append(torch.tanh(self.ff1(x)))
        pooled = torch.stack(section_vecs).mean(dim=0)
        pooled = _maybe_cat(pooled, graph_vec, self.fusion, "stage2",
                            self.config.graph_dim)
        return torch.sigmoid(self.ff2(pooled)).squeeze(-1)
