"""DeepWalk node embeddings: truncated uniform random walks over the
undirected citation graph, then skip-gram with negative sampling.

Defaults follow standard DeepWalk settings (10 walks of length 40 per
node, window 5, 5 negatives, 5 epochs, lr 0.025 with linear decay) and are
all overridable. Negative samples come from the unigram^(3/4) node
distribution. Walk generation uses one RNG stream per (node, walk) so the
corpus is deterministic for a fixed seed regardless of scheduling.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import NumericalError, ValidationError
from .graph import CitationGraph

logger = logging.getLogger(__name__)

MAGIC = b"CITESCOPE-EMB\x00\x001"  # 16-byte binary header
assert len(MAGIC) == 16


@dataclass
class WalkCorpus:
    walks: list[np.ndarray]  # node indices into node_ids
    node_ids: list[str]
    walks_per_node: int
    walk_length: int
    seed: int


def generate_walks(graph: CitationGraph, walks_per_node: int,
                   walk_length: int, seed: int) -> WalkCorpus:
    """Uniform random walks on the undirected graph, walks_per_node per
    start node. A walk halts immediately at an isolated node."""
    if walks_per_node < 1:
        raise ValidationError("walks_per_node must be >= 1")
    if walk_length < 2:
        raise ValidationError("walk_length must be >= 2")
    walks: list[np.ndarray] = []
    for v in range(graph.n_nodes):
        for w in range(walks_per_node):
            rng = np.random.default_rng([seed, v, w])
            walk = [v]
            cur = v
            for _ in range(walk_length - 1):
                nbrs = graph.neighbors_idx(cur)
                if len(nbrs) == 0:
                    break
                cur = int(nbrs[rng.integers(len(nbrs))])
                walk.append(cur)
            walks.append(np.asarray(walk, dtype=np.int64))
    return WalkCorpus(walks=walks, node_ids=list(graph.node_ids),
                      walks_per_node=walks_per_node,
                      walk_length=walk_length, seed=seed)


def sgns_pair_loss_grad(center: np.ndarray, context: np.ndarray,
                        negatives: np.ndarray):
    """Skip-gram negative-sampling loss for one (center, context) pair with
    k negative output vectors, plus analytic gradients.

    loss = -log sigma(u_o . h) - sum_k log sigma(-u_k . h)

    Returns (loss, grad_center, grad_context, grad_negatives).
    """
    pos_score = context @ center
    neg_scores = negatives @ center
    pos_sig = 1.0 / (1.0 + np.exp(-pos_score))
    neg_sig = 1.0 / (1.0 + np.exp(-neg_scores))
    loss = -np.log(pos_sig + 1e-300) - np.sum(np.log(1 - neg_sig + 1e-300))
    g_pos = pos_sig - 1.0            # d loss / d (u_o . h)
    g_neg = neg_sig                  # d loss / d (u_k . h)
    grad_center = g_pos * context + g_neg @ negatives
    grad_context = g_pos * center
    grad_negatives = g_neg[:, None] * center[None, :]
    return loss, grad_center, grad_context, grad_negatives


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    # context-side (output) vectors from training; diagnostics only, not
    # serialized
    context_vectors: dict[str, np.ndarray] = field(default_factory=dict)
    misses: int = 0

    def lookup(self, record_id: str) -> np.ndarray:
        """Vector for a node; absent nodes get the zero vector (logged)."""
        vec = self.vectors.get(record_id)
        if vec is None:
            self.misses += 1
            logger.debug("embedding miss for %s", record_id)
            return np.zeros(self.dim)
        return vec

    def __contains__(self, record_id: str) -> bool:
        return record_id in self.vectors

    def save_text(self, path) -> None:
        """First line `N dim`, then `record_id v1 ... vdim` per line."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(self.vectors)} {self.dim}\n")
            for rid in self.vectors:
                vals = " ".join("%.17g" % v for v in self.vectors[rid])
                fh.write(f"{rid} {vals}\n")

    @classmethod
    def load_text(cls, path) -> "EmbeddingTable":
        with open(path, encoding="utf-8") as fh:
            n, dim = map(int, fh.readline().split())
            table = cls(dim=dim)
            for _ in range(n):
                parts = fh.readline().split()
                table.vectors[parts[0]] = np.asarray(
                    [float(x) for x in parts[1:]], dtype=np.float64)
        return table

    def save_binary(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<qq", len(self.vectors), self.dim))
            for rid in self.vectors:
                enc = rid.encode("utf-8")
                fh.write(struct.pack("<i", len(enc)))
                fh.write(enc)
                fh.write(self.vectors[rid].astype("<f8").tobytes())

    @classmethod
    def load_binary(cls, path) -> "EmbeddingTable":
        with open(path, "rb") as fh:
            if fh.read(16) != MAGIC:
                raise ValidationError(f"{path}: not an embedding file")
            n, dim = struct.unpack("<qq", fh.read(16))
            table = cls(dim=dim)
            for _ in range(n):
                (idlen,) = struct.unpack("<i", fh.read(4))
                rid = fh.read(idlen).decode("utf-8")
                table.vectors[rid] = np.frombuffer(
                    fh.read(8 * dim), dtype="<f8").copy()
        return table


def train_skipgram(corpus: WalkCorpus, dim: int = 128, window: int = 5,
                   negatives: int = 5, epochs: int = 5, lr: float = 0.025,
                   seed: int = 0) -> tuple[EmbeddingTable, list[float]]:
    """Single-threaded deterministic SGNS over the walk corpus.

    Returns the embedding table (input vectors) and the mean per-pair loss
    of each epoch.
    """
    if not corpus.walks:
        raise ValidationError("empty walk corpus")
    n = len(corpus.node_ids)
    rng = np.random.default_rng(seed)

    counts = np.zeros(n, dtype=np.float64)
    for walk in corpus.walks:
        np.add.at(counts, walk, 1.0)
    noise = counts ** 0.75
    noise /= noise.sum()
    noise_cdf = np.cumsum(noise)

    w_in = (rng.random((n, dim)) - 0.5) / dim
    w_out = np.zeros((n, dim))

    pairs = []
    for walk in corpus.walks:
        for i, center in enumerate(walk):
            lo = max(0, i - window)
            hi = min(len(walk), i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    pairs.append((center, walk[j]))
    pairs = np.asarray(pairs, dtype=np.int64)

    total_steps = max(1, epochs * len(pairs))
    step = 0
    epoch_losses = []
    min_lr = lr * 1e-4
    for _epoch in range(epochs):
        order = rng.permutation(len(pairs))
        epoch_loss = 0.0
        for k in order:
            c, o = pairs[k]
            negs = np.searchsorted(noise_cdf, rng.random(negatives))
            cur_lr = max(min_lr, lr * (1.0 - step / total_steps))
            step += 1
            loss, g_c, g_o, g_n = sgns_pair_loss_grad(
                w_in[c], w_out[o], w_out[negs])
            if not np.isfinite(loss):
                raise NumericalError(
                    f"non-finite skip-gram loss at step {step}; "
                    f"lr={lr} is likely too high")
            epoch_loss += loss
            w_in[c] -= cur_lr * g_c
            w_out[o] -= cur_lr * g_o
            # negatives may repeat; apply updates one at a time
            np.subtract.at(w_out, negs, cur_lr * g_n)
        epoch_losses.append(epoch_loss / len(pairs))
    table = EmbeddingTable(dim=dim)
    for idx, rid in enumerate(corpus.node_ids):
        table.vectors[rid] = w_in[idx].copy()
        table.context_vectors[rid] = w_out[idx].copy()
    return table, epoch_losses


class DeepWalkEmbedder(BaseEstimator):
    """Estimator-style wrapper: fit on a CitationGraph, then transform
    record ids to embedding vectors."""

    def __init__(self, dim=128, walks_per_node=10, walk_length=40,
                 window=5, negatives=5, epochs=5, lr=0.025, seed=0):
        self.dim = dim
        self.walks_per_node = walks_per_node
        self.walk_length = walk_length
        self.window = window
        self.negatives = negatives
        self.epochs = epochs
        self.lr = lr
        self.seed = seed

    def fit(self, graph: CitationGraph, y=None):
        corpus = generate_walks(graph, self.walks_per_node,
                                self.walk_length, self.seed)
        self.embedding_, self.epoch_losses_ = train_skipgram(
            corpus, dim=self.dim, window=self.window,
            negatives=self.negatives, epochs=self.epochs, lr=self.lr,
            seed=self.seed)
        return self

    def transform(self, record_ids) -> np.ndarray:
        if not hasattr(self, "embedding_"):
            raise NotFittedError("call fit before transform")
        return np.stack([self.embedding_.lookup(r) for r in record_ids])
