"""Vocabulary, document chunking, and candidate generation for the IE
models."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import product

from ..corpus import CITANCE, Document, Mention, Relation4
from ..errors import ValidationError
from ..iobes import TAG_INDEX, encode_iobes

logger = logging.getLogger(__name__)

UNK = "<unk>"


class Vocab:
    """Token to index mapping with an unknown bucket at index 0."""

    def __init__(self, tokens=()):
        self.index = {UNK: 0}
        for t in tokens:
            if t not in self.index:
                self.index[t] = len(self.index)

    @classmethod
    def build(cls, docs, min_count: int = 1) -> "Vocab":
        counts: dict[str, int] = {}
        for doc in docs:
            for tok in doc.all_tokens():
                counts[tok] = counts.get(tok, 0) + 1
        kept = [t for t in sorted(counts) if counts[t] >= min_count]
        return cls(kept)

    def __len__(self) -> int:
        return len(self.index)

    def encode(self, tokens) -> list[int]:
        return [self.index.get(t, 0) for t in tokens]

    def to_dict(self) -> dict:
        return dict(self.index)

    @classmethod
    def from_dict(cls, d: dict) -> "Vocab":
        v = cls()
        v.index = dict(d)
        return v


@dataclass
class Chunk:
    """A contiguous slice of one section, capped for the per-section
    encoder pass."""
    section_index: int
    start: int  # global token offset
    token_ids: list[int]
    is_citance: bool


def chunk_document(doc: Document, vocab: Vocab, cap: int = 512) -> list[Chunk]:
    """Split sections longer than cap into continuation chunks, moving a
    split point left when it would cut a gold mention."""
    all_tokens = doc.all_tokens()
    chunks = []
    for sec_idx, (lo, hi) in enumerate(doc.section_spans()):
        section = doc.sections[sec_idx]
        pos = lo
        while pos < hi:
            end = min(pos + cap, hi)
            if end < hi:
                # avoid cutting a mention: back up to the nearest gold
                # mention start at or before the tentative split
                for m in doc.mentions:
                    if m.start < end < m.end:
                        end = m.start
                        break
                if end <= pos:  # degenerate: a mention longer than cap
                    end = min(pos + cap, hi)
            tokens = all_tokens[pos:end]
            chunks.append(Chunk(
                section_index=sec_idx,
                start=pos,
                token_ids=vocab.encode(tokens),
                is_citance=section.kind == CITANCE,
            ))
            pos = end
        if lo == hi:  # empty section still occupies a slot
            chunks.append(Chunk(section_index=sec_idx, start=lo,
                                token_ids=[],
                                is_citance=section.kind == CITANCE))
    return chunks


def gold_tag_ids(doc: Document, chunks: list[Chunk]) -> list[list[int]]:
    """Gold IOBES tag indices aligned with each chunk."""
    per_section = encode_iobes(doc)
    spans = doc.section_spans()
    out = []
    for chunk in chunks:
        sec_lo = spans[chunk.section_index][0]
        tags = per_section[chunk.section_index]
        rel = chunk.start - sec_lo
        out.append([TAG_INDEX[t]
                    for t in tags[rel:rel + len(chunk.token_ids)]])
    return out


def mention_saliency_labels(doc: Document) -> list[tuple[int, bool]]:
    """(mention index, salient?) for every clustered mention; saliency is a
    cluster property projected to its mentions."""
    labels = []
    for cid, idxs in doc.clusters.items():
        salient = cid in doc.salient_cluster_ids
        for i in idxs:
            labels.append((i, salient))
    return sorted(labels)


CANDIDATE_CAP = 10_000


def candidate_tuples(clusters_by_type: dict[str, list[str]],
                     cap: int = CANDIDATE_CAP) -> list[Relation4]:
    """Full typed cross-product of cluster ids, deterministically truncated
    (lexicographic) at the cap with a warning."""
    tasks = sorted(clusters_by_type.get("Task", []))
    datasets = sorted(clusters_by_type.get("Dataset", []))
    methods = sorted(clusters_by_type.get("Method", []))
    metrics = sorted(clusters_by_type.get("Metric", []))
    total = len(tasks) * len(datasets) * len(methods) * len(metrics)
    if total > cap:
        logger.warning("candidate cross-product of %d truncated to %d",
                       total, cap)
    out = []
    for tup in product(tasks, datasets, methods, metrics):
        if len(out) >= cap:
            break
        out.append(Relation4(*tup))
    return out


def clusters_by_type(doc: Document,
                     cluster_ids=None) -> dict[str, list[str]]:
    """Group cluster ids by the entity type of their mentions; empty
    clusters are skipped."""
    out: dict[str, list[str]] = {}
    ids = doc.clusters.keys() if cluster_ids is None else cluster_ids
    for cid in ids:
        idxs = doc.clusters[cid]
        if not idxs:
            continue
        etype = doc.mentions[idxs[0]].entity_type
        out.setdefault(etype, []).append(cid)
    return out


def sample_negative_tuples(doc: Document, rng, ratio: int) -> list[Relation4]:
    """Gold-typed non-relation 4-tuples, ratio negatives per positive."""
    gold = {r.as_tuple() for r in doc.relations}
    by_type = clusters_by_type(doc)
    pool = [t for t in product(sorted(by_type.get("Task", [])),
                               sorted(by_type.get("Dataset", [])),
                               sorted(by_type.get("Method", [])),
                               sorted(by_type.get("Metric", [])))
            if t not in gold]
    if not pool:
        return []
    k = min(len(pool), max(1, ratio * max(1, len(gold))))
    chosen = rng.choice(len(pool), size=k, replace=False)
    return [Relation4(*pool[i]) for i in sorted(chosen)]
