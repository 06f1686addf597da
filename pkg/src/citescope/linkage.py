"""Exact-identifier linkage between corpus documents and a bibliographic
metadata store.

A document links to a store record when any of its four identifiers (title
in normalized form, DOI, arXiv id, Semantic Scholar id) matches exactly.
A document matching two distinct records is an ambiguity error, never a
silent pick.
"""

from __future__ import annotations

import json
import string
import unicodedata
from dataclasses import dataclass, field

from .errors import AmbiguityError, ParseError, StoreIntegrityError

# priority used for diagnostics only: which matched identifier is reported
IDENTIFIER_KINDS = ("s2_id", "doi", "arxiv_id", "title_norm")

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize_title(title: str) -> str:
    """NFC, casefold, strip ASCII punctuation, collapse whitespace."""
    t = unicodedata.normalize("NFC", title).casefold()
    t = t.translate(_PUNCT_TABLE)
    return " ".join(t.split())


@dataclass(frozen=True)
class MetaRecord:
    record_id: str
    title_norm: str = ""
    doi: str | None = None
    arxiv_id: str | None = None
    s2_id: str | None = None
    outbound: tuple[str, ...] = ()  # record ids this paper cites
    inbound: tuple[str, ...] = ()   # record ids citing this paper


@dataclass(frozen=True)
class DocIdentifiers:
    doc_id: str
    title: str | None = None
    doi: str | None = None
    arxiv_id: str | None = None
    s2_id: str | None = None

    @property
    def title_norm(self) -> str | None:
        return normalize_title(self.title) if self.title else None


class MetaStore:
    """Metadata records indexed by every identifier kind. Read-only after
    construction."""

    def __init__(self, records):
        self.records: dict[str, MetaRecord] = {}
        self._index: dict[str, dict[str, str]] = {
            kind: {} for kind in IDENTIFIER_KINDS}
        for rec in records:
            if rec.record_id in self.records:
                raise StoreIntegrityError(
                    f"duplicate record_id {rec.record_id}")
            self.records[rec.record_id] = rec
            for kind in IDENTIFIER_KINDS:
                value = getattr(rec, kind)
                if not value:
                    continue
                index = self._index[kind]
                if value in index and index[value] != rec.record_id:
                    raise StoreIntegrityError(
                        f"records {index[value]} and {rec.record_id} both "
                        f"claim {kind}={value!r}")
                index[value] = rec.record_id

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self.records

    def get(self, record_id: str) -> MetaRecord | None:
        return self.records.get(record_id)

    def find(self, kind: str, value: str) -> str | None:
        return self._index[kind].get(value)


@dataclass
class LinkMap:
    pairs: dict[str, str] = field(default_factory=dict)
    unmatched: list[str] = field(default_factory=list)
    # diagnostics: doc_id -> identifier kind that produced the link
    matched_on: dict[str, str] = field(default_factory=dict)


def link_records(docs, store: MetaStore) -> LinkMap:
    """Match each document against the store on all four identifiers.

    Deterministic and order-independent; a document whose identifiers hit
    two distinct records raises AmbiguityError, and two documents claiming
    the same record raises AmbiguityError as well (the link map must stay
    injective).
    """
    result = LinkMap()
    claimed: dict[str, str] = {}
    for doc in sorted(docs, key=lambda d: d.doc_id):
        hits: dict[str, str] = {}  # record_id -> first identifier kind
        for kind in IDENTIFIER_KINDS:
            value = getattr(doc, kind)
            if not value:
                continue
            rid = store.find(kind, value)
            if rid is not None and rid not in hits:
                hits[rid] = kind
        if not hits:
            result.unmatched.append(doc.doc_id)
            continue
        if len(hits) > 1:
            raise AmbiguityError(
                f"document {doc.doc_id} matches multiple records: "
                + ", ".join(f"{rid} (via {kind})"
                            for rid, kind in sorted(hits.items())))
        (record_id, kind), = hits.items()
        if record_id in claimed:
            raise AmbiguityError(
                f"documents {claimed[record_id]} and {doc.doc_id} both "
                f"link to record {record_id}")
        claimed[record_id] = doc.doc_id
        result.pairs[doc.doc_id] = record_id
        result.matched_on[doc.doc_id] = kind
    return result


def load_store(path) -> MetaStore:
    """Read a line-delimited metadata store (JSON records)."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            records.append(MetaRecord(
                record_id=rec["record_id"],
                title_norm=normalize_title(rec.get("title", "")),
                doi=rec.get("doi"),
                arxiv_id=rec.get("arxiv_id"),
                s2_id=rec.get("s2_id"),
                outbound=tuple(rec.get("outbound", [])),
                inbound=tuple(rec.get("inbound", [])),
            ))
    return MetaStore(records)


def save_link_map(link_map: LinkMap, path) -> None:
    """Two-column text: doc_id<TAB>record_id; unmatched docs get an empty
    second column."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id in sorted(link_map.pairs):
            fh.write(f"{doc_id}\t{link_map.pairs[doc_id]}\n")
        for doc_id in sorted(link_map.unmatched):
            fh.write(f"{doc_id}\t\n")


def load_link_map(path) -> LinkMap:
    link_map = LinkMap()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.rstrip("\n"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise ParseError("expected two tab-separated columns",
                                 line=lineno)
            doc_id, record_id = parts
            if record_id:
                link_map.pairs[doc_id] = record_id
            else:
                link_map.unmatched.append(doc_id)
    return link_map
