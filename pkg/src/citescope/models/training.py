"""Task training: stochastic gradient descent with gradient clipping,
early stopping, and validation-F1 threshold selection.

Each task trains on gold inputs; multi-task runs minimize the equally
weighted sum of the selected task losses through the shared encoder.
The early-stopping metric multiplies validation loss by (1 - validation
F1) so both factors improve in the same direction; lower is better.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import torch

from ..corpus import Document, Mention
from ..errors import NumericalError, ValidationError
from ..iobes import decode_iobes
from ..metrics import mention_f1
from .config import ModelConfig, TrainConfig
from .data import Vocab, mention_saliency_labels, sample_negative_tuples
from .heads import cluster_saliency
from .pipeline import IEModel, as_graph_tensor

logger = logging.getLogger(__name__)

TASKS = ("mention", "saliency", "relation")


@dataclass
class DocFeatures:
    """Frozen per-document side inputs: graph embedding and citation
    TF-IDF token features."""
    graph_vecs: dict[str, np.ndarray] = field(default_factory=dict)
    tfidf: dict[str, np.ndarray] = field(default_factory=dict)

    def graph(self, doc_id: str):
        return as_graph_tensor(self.graph_vecs.get(doc_id))

    def tfidf_for(self, doc_id: str):
        return self.tfidf.get(doc_id)


def _bce(prob: torch.Tensor, label: bool) -> torch.Tensor:
    eps = 1e-12
    target = 1.0 if label else 0.0
    return -(target * torch.log(prob + eps) +
             (1 - target) * torch.log(1 - prob + eps))


def doc_loss(model: IEModel, doc: Document, tasks, features: DocFeatures,
             rng: np.random.Generator,
             negative_ratio: int) -> torch.Tensor:
    graph_vec = features.graph(doc.doc_id)
    total = torch.zeros((), dtype=torch.float64)

    if "mention" in tasks:
        total = total + model.mention_loss(doc, graph_vec)

    needs_spans = "saliency" in tasks or "relation" in tasks
    if needs_spans:
        _chunks, token_vecs = model.encode_doc(doc)

    if "saliency" in tasks:
        labels = mention_saliency_labels(doc)
        if labels:
            losses = []
            tfidf = features.tfidf_for(doc.doc_id)
            for idx, salient in labels:
                prob = model.mention_saliency_prob(
                    token_vecs, doc.mentions[idx], graph_vec, tfidf)
                losses.append(_bce(prob, salient))
            total = total + torch.stack(losses).mean()

    if "relation" in tasks:
        cluster_mentions = {cid: [doc.mentions[i] for i in idxs]
                            for cid, idxs in doc.clusters.items() if idxs}
        examples = [(rel, True) for rel in doc.relations]
        examples += [(rel, False)
                     for rel in sample_negative_tuples(doc, rng,
                                                       negative_ratio)]
        losses = []
        for rel, label in examples:
            if any(cid not in cluster_mentions
                   for _t, cid in rel.typed_items()):
                continue
            prob, _fb = model.relation_prob(doc, token_vecs, rel,
                                            cluster_mentions, graph_vec)
            losses.append(_bce(prob, label))
        if losses:
            total = total + torch.stack(losses).mean()
    return total


# --- validation predictions on gold inputs ---------------------------


@torch.no_grad()
def predict_mentions(model: IEModel, doc: Document,
                     features: DocFeatures) -> list[Mention]:
    sequences = model.tag(doc, features.graph(doc.doc_id))
    return decode_iobes(sequences, doc.sections)


@torch.no_grad()
def saliency_scores(model: IEModel, doc: Document, features: DocFeatures) \
        -> list[tuple[str, int, float, bool]]:
    """(cluster_id, mention index, cluster prob, gold label) per clustered
    mention, computed on gold mentions and gold clusters."""
    graph_vec = features.graph(doc.doc_id)
    tfidf = features.tfidf_for(doc.doc_id)
    _chunks, token_vecs = model.encode_doc(doc)
    rows = []
    for cid, idxs in sorted(doc.clusters.items()):
        if not idxs:
            continue
        probs = [float(model.mention_saliency_prob(
            token_vecs, doc.mentions[i], graph_vec, tfidf)) for i in idxs]
        cprob = cluster_saliency(probs)
        label = cid in doc.salient_cluster_ids
        for i in idxs:
            rows.append((cid, i, cprob, label))
    return rows


@torch.no_grad()
def relation_scores(model: IEModel, doc: Document, features: DocFeatures,
                    rng: np.random.Generator, negative_ratio: int) \
        -> list[tuple[float, bool]]:
    """(probability, gold label) per candidate, on gold clusters with
    sampled negatives."""
    graph_vec = features.graph(doc.doc_id)
    _chunks, token_vecs = model.encode_doc(doc)
    cluster_mentions = {cid: [doc.mentions[i] for i in idxs]
                        for cid, idxs in doc.clusters.items() if idxs}
    rows = []
    examples = [(rel, True) for rel in doc.relations]
    examples += [(rel, False)
                 for rel in sample_negative_tuples(doc, rng, negative_ratio)]
    for rel, label in examples:
        if any(cid not in cluster_mentions for _t, cid in rel.typed_items()):
            continue
        prob, _fb = model.relation_prob(doc, token_vecs, rel,
                                        cluster_mentions, graph_vec)
        rows.append((float(prob), label))
    return rows


def _binary_f1(pairs) -> float:
    tp = sum(1 for p, l in pairs if p and l)
    fp = sum(1 for p, l in pairs if p and not l)
    fn = sum(1 for p, l in pairs if not p and l)
    if tp == 0:
        return 0.0
    prec = tp / (tp + fp)
    rec = tp / (tp + fn)
    return 2 * prec * rec / (prec + rec)


def validation_f1(model: IEModel, docs, task: str, features: DocFeatures,
                  threshold: float = 0.5, seed: int = 0) -> float:
    if task == "mention":
        pred = {d.doc_id: predict_mentions(model, d, features) for d in docs}
        gold = {d.doc_id: list(d.mentions) for d in docs}
        return mention_f1(pred, gold)[1].f1
    if task == "saliency":
        rows = [r for d in docs for r in saliency_scores(model, d, features)]
        return _binary_f1([(p >= threshold, l) for _c, _i, p, l in rows])
    if task == "relation":
        rng = np.random.default_rng(seed)
        rows = [r for d in docs
                for r in relation_scores(model, d, features, rng, 5)]
        return _binary_f1([(p >= threshold, l) for p, l in rows])
    raise ValidationError(f"unknown task {task!r}")


def select_threshold(model: IEModel, docs, task: str, features: DocFeatures,
                     grid, seed: int = 0) -> tuple[float, float]:
    """Grid argmax of validation F1; ties go to the lowest threshold."""
    best_theta, best_f1 = grid[0], -1.0
    for theta in grid:
        f1 = validation_f1(model, docs, task, features, threshold=theta,
                           seed=seed)
        if f1 > best_f1:
            best_theta, best_f1 = theta, f1
    return best_theta, best_f1


@dataclass
class TrainResult:
    model: IEModel
    thresholds: dict[str, float]
    history: list[dict]
    stopped_epoch: int


def train_model(train_docs, val_docs, tasks, model_config: ModelConfig,
                train_config: TrainConfig,
                features: DocFeatures | None = None,
                vocab: Vocab | None = None) -> TrainResult:
    """Train an IEModel on the given tasks.

    Gold annotations feed every task; early stopping watches
    val_loss * (1 - val_F1) with the configured patience; thresholds for
    saliency/relation come from a validation F1 grid search afterwards.
    """
    tasks = tuple(tasks)
    for t in tasks:
        if t not in TASKS:
            raise ValidationError(f"unknown task {t!r}")
    if not train_docs:
        raise ValidationError("empty training split")
    if not val_docs:
        raise ValidationError("empty validation split")
    if features is None:
        features = DocFeatures()

    torch.manual_seed(train_config.seed)
    if vocab is None:
        vocab = Vocab.build(train_docs)
    model = IEModel(vocab, model_config)
    optimizer = torch.optim.SGD(model.parameters(), lr=train_config.lr)
    rng = np.random.default_rng(train_config.seed)

    # the metric task is the most downstream selected task
    metric_task = next(t for t in ("relation", "saliency", "mention")
                       if t in tasks)

    best_metric = float("inf")
    best_state = None
    since_improvement = 0
    history = []
    stopped = train_config.epochs
    for epoch in range(train_config.epochs):
        model.train()
        order = rng.permutation(len(train_docs))
        epoch_loss = 0.0
        for batch_start in range(0, len(order), train_config.batch_size):
            batch = order[batch_start:batch_start + train_config.batch_size]
            optimizer.zero_grad()
            loss = torch.zeros((), dtype=torch.float64)
            for doc_idx in batch:
                loss = loss + doc_loss(model, train_docs[doc_idx], tasks,
                                       features, rng,
                                       train_config.negative_ratio)
            loss = loss / len(batch)
            if not torch.isfinite(loss):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch}; reduce lr")
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(),
                                           train_config.grad_clip)
            optimizer.step()
            epoch_loss += float(loss.detach())

        model.eval()
        with torch.no_grad():
            val_loss = float(sum(
                doc_loss(model, d, tasks, features, rng,
                         train_config.negative_ratio)
                for d in val_docs)) / len(val_docs)
        val_f1 = validation_f1(model, val_docs, metric_task, features,
                               seed=train_config.seed)
        metric = val_loss * (1.0 - val_f1)
        history.append({"epoch": epoch, "train_loss": epoch_loss,
                        "val_loss": val_loss, "val_f1": val_f1,
                        "metric": metric})
        if metric < best_metric - 1e-12:
            best_metric = metric
            best_state = {k: v.detach().clone()
                          for k, v in model.state_dict().items()}
            since_improvement = 0
        else:
            since_improvement += 1
            if since_improvement >= train_config.patience:
                stopped = epoch + 1
                break
    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()

    thresholds = {}
    for task in tasks:
        if task in ("saliency", "relation"):
            theta, _f1 = select_threshold(model, val_docs, task, features,
                                          train_config.threshold_grid,
                                          seed=train_config.seed)
            thresholds[task] = theta
    return TrainResult(model=model, thresholds=thresholds, history=history,
                       stopped_epoch=stopped)
