"""Annotated-document data model and line-delimited corpus IO.

Documents are pre-tokenized; tokens are opaque strings. All types are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import ParseError, ValidationError

ENTITY_TYPES = ("Task", "Dataset", "Method", "Metric")

BODY = "body"
CITANCE = "citance"


@dataclass(frozen=True)
class Section:
    tokens: tuple[str, ...]
    kind: str = BODY
    source_doc_id: str | None = None

    def __post_init__(self):
        if self.kind not in (BODY, CITANCE):
            raise ValidationError(f"unknown section kind {self.kind!r}")
        if self.kind == CITANCE and self.source_doc_id is None:
            raise ValidationError("citance section requires source_doc_id")


@dataclass(frozen=True, order=True)
class Mention:
    start: int  # global token index, inclusive
    end: int    # global token index, exclusive
    entity_type: str

    def __post_init__(self):
        if self.entity_type not in ENTITY_TYPES:
            raise ValidationError(f"unknown entity type {self.entity_type!r}")
        if not (0 <= self.start < self.end):
            raise ValidationError(f"bad mention span [{self.start}, {self.end})")


@dataclass(frozen=True)
class Relation4:
    task_cluster: str
    dataset_cluster: str
    method_cluster: str
    metric_cluster: str

    def as_tuple(self) -> tuple[str, str, str, str]:
        return (self.task_cluster, self.dataset_cluster,
                self.method_cluster, self.metric_cluster)

    def typed_items(self) -> tuple[tuple[str, str], ...]:
        return tuple(zip(ENTITY_TYPES, self.as_tuple()))


@dataclass(frozen=True)
class Document:
    doc_id: str
    sections: tuple[Section, ...]
    mentions: tuple[Mention, ...] = ()
    clusters: dict[str, tuple[int, ...]] = field(default_factory=dict)
    salient_cluster_ids: frozenset[str] = frozenset()
    relations: tuple[Relation4, ...] = ()

    def __post_init__(self):
        _validate_document(self)

    @property
    def n_tokens(self) -> int:
        return sum(len(s.tokens) for s in self.sections)

    def section_spans(self) -> list[tuple[int, int]]:
        """Global [start, end) token range of each section, in order."""
        spans, pos = [], 0
        for s in self.sections:
            spans.append((pos, pos + len(s.tokens)))
            pos += len(s.tokens)
        return spans

    def all_tokens(self) -> list[str]:
        return [t for s in self.sections for t in s.tokens]

    def section_of(self, position: int) -> int:
        for i, (lo, hi) in enumerate(self.section_spans()):
            if lo <= position < hi:
                return i
        raise ValidationError(f"token position {position} out of range")

    def mention_text(self, mention: Mention) -> str:
        tokens = self.all_tokens()
        return " ".join(tokens[mention.start:mention.end])

    def cluster_of_mention(self, mention_index: int) -> str | None:
        for cid, idxs in self.clusters.items():
            if mention_index in idxs:
                return cid
        return None

    def cluster_type(self, cluster_id: str) -> str:
        types = {self.mentions[i].entity_type for i in self.clusters[cluster_id]}
        return next(iter(types))


def _validate_document(doc: Document) -> None:
    n = doc.n_tokens
    spans = doc.section_spans()

    seen_citance = False
    for s in doc.sections:
        if s.kind == CITANCE:
            seen_citance = True
        elif seen_citance:
            raise ValidationError(
                f"{doc.doc_id}: body section after citance section")

    occupied: list[Mention] = sorted(doc.mentions)
    for a, b in zip(occupied, occupied[1:]):
        if b.start < a.end:
            raise ValidationError(
                f"{doc.doc_id}: overlapping mentions {a} and {b}")
    for m in doc.mentions:
        if m.end > n:
            raise ValidationError(f"{doc.doc_id}: mention {m} exceeds {n} tokens")
        if not any(lo <= m.start and m.end <= hi for lo, hi in spans):
            raise ValidationError(
                f"{doc.doc_id}: mention {m} crosses a section boundary")

    assigned: set[int] = set()
    for cid, idxs in doc.clusters.items():
        for i in idxs:
            if not (0 <= i < len(doc.mentions)):
                raise ValidationError(
                    f"{doc.doc_id}: cluster {cid} references mention index {i} "
                    f"of {len(doc.mentions)}")
            if i in assigned:
                raise ValidationError(
                    f"{doc.doc_id}: mention index {i} in more than one cluster")
            assigned.add(i)

    for cid in doc.salient_cluster_ids:
        if cid not in doc.clusters:
            raise ValidationError(
                f"{doc.doc_id}: salient cluster {cid} not defined")
    for rel in doc.relations:
        for etype, cid in rel.typed_items():
            if cid not in doc.clusters:
                raise ValidationError(
                    f"{doc.doc_id}: relation cluster {cid} not defined")
            types = {doc.mentions[i].entity_type for i in doc.clusters[cid]}
            if types and types != {etype}:
                raise ValidationError(
                    f"{doc.doc_id}: cluster {cid} used as {etype} but has "
                    f"mentions of type {sorted(types)}")


def flatten_relations(rels: Iterable[Relation4]) -> set[frozenset[tuple[str, str]]]:
    """Expand 4-ary relations into their deduplicated typed binary pairs.

    Each relation yields its C(4,2) = 6 unordered (entity_type, cluster_id)
    pairs; the result is the union over all relations.
    """
    pairs: set[frozenset[tuple[str, str]]] = set()
    for rel in rels:
        items = rel.typed_items()
        for i in range(4):
            for j in range(i + 1, 4):
                pairs.add(frozenset((items[i], items[j])))
    return pairs


def _doc_to_record(doc: Document) -> dict:
    return {
        "doc_id": doc.doc_id,
        "sections": [
            {"tokens": list(s.tokens), "kind": s.kind,
             **({"source_doc_id": s.source_doc_id}
                if s.source_doc_id is not None else {})}
            for s in doc.sections
        ],
        "mentions": [
            {"start": m.start, "end": m.end, "type": m.entity_type}
            for m in doc.mentions
        ],
        # lexicographic cluster order keeps serialization canonical
        "clusters": {cid: list(doc.clusters[cid])
                     for cid in sorted(doc.clusters)},
        "salient_clusters": sorted(doc.salient_cluster_ids),
        "relations": [
            {"Task": r.task_cluster, "Dataset": r.dataset_cluster,
             "Method": r.method_cluster, "Metric": r.metric_cluster}
            for r in doc.relations
        ],
    }


def _doc_from_record(rec: dict) -> Document:
    sections = tuple(
        Section(tokens=tuple(s["tokens"]), kind=s.get("kind", BODY),
                source_doc_id=s.get("source_doc_id"))
        for s in rec["sections"]
    )
    mentions = tuple(
        Mention(start=m["start"], end=m["end"], entity_type=m["type"])
        for m in rec.get("mentions", [])
    )
    clusters = {cid: tuple(idxs)
                for cid, idxs in rec.get("clusters", {}).items()}
    relations = tuple(
        Relation4(task_cluster=r["Task"], dataset_cluster=r["Dataset"],
                  method_cluster=r["Method"], metric_cluster=r["Metric"])
        for r in rec.get("relations", [])
    )
    return Document(
        doc_id=rec["doc_id"],
        sections=sections,
        mentions=mentions,
        clusters=clusters,
        salient_cluster_ids=frozenset(rec.get("salient_clusters", [])),
        relations=relations,
    )


def iter_corpus(path) -> Iterator[Document]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            if "doc_id" not in rec or "sections" not in rec:
                raise ParseError("record missing doc_id or sections",
                                 line=lineno)
            yield _doc_from_record(rec)


def load_corpus(path) -> list[Document]:
    return list(iter_corpus(path))


def save_corpus(docs: Iterable[Document], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(_doc_to_record(doc), ensure_ascii=False))
            fh.write("\n")
