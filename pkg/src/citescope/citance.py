"""Citance extraction from citing documents and the averaged citation
TF-IDF token feature.

A citance is the sentence containing the first reference marker pointing
at the target paper, widened to a three-sentence window only when both the
preceding and following sentences exist within the same section. Citance
text is appended to the target document as non-predictable sections: the
tagger must never emit mentions there.
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import CITANCE, Document, Section
from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Marker:
    """A reference marker inside a citing document."""
    target_id: str
    section_index: int
    sentence_index: int


@dataclass(frozen=True)
class CitingDocument:
    doc_id: str
    # sections -> sentences -> tokens
    sections: tuple[tuple[tuple[str, ...], ...], ...]
    markers: tuple[Marker, ...]


@dataclass(frozen=True)
class Citance:
    citing_doc_id: str
    sentences: tuple[tuple[str, ...], ...]  # 1 or 3 sentences
    anchor: tuple[int, int]  # (section index, sentence index) of the marker

    def __post_init__(self):
        if len(self.sentences) not in (1, 2, 3):
            raise ValidationError(
                f"citance must hold 1-3 sentences, got {len(self.sentences)}")

    def tokens(self) -> tuple[str, ...]:
        return tuple(t for s in self.sentences for t in s)


def extract_citances(target: str, citing_docs, max_citing: int = 25,
                     seed: int = 0) -> list[Citance]:
    """One citance per citing document, sampling max_citing citing
    documents uniformly without replacement when there are more.

    The citance is centered on the sentence with the first marker pointing
    at the target; the adjacent sentences are attached only when both
    exist in the same section (all-or-neither).
    """
    with_marker = []
    for doc in citing_docs:
        markers = [m for m in doc.markers if m.target_id == target]
        if not markers:
            logger.warning("citing document %s has no marker to %s; skipped",
                           doc.doc_id, target)
            continue
        first = min(markers,
                    key=lambda m: (m.section_index, m.sentence_index))
        with_marker.append((doc, first))

    if len(with_marker) > max_citing:
        rng = np.random.default_rng(seed)
        chosen = rng.choice(len(with_marker), size=max_citing, replace=False)
        with_marker = [with_marker[i] for i in sorted(chosen)]

    citances = []
    for doc, marker in with_marker:
        section = doc.sections[marker.section_index]
        s = marker.sentence_index
        if 0 < s < len(section) - 1:
            sentences = (section[s - 1], section[s], section[s + 1])
        else:
            sentences = (section[s],)
        citances.append(Citance(citing_doc_id=doc.doc_id,
                                sentences=sentences,
                                anchor=(marker.section_index, s)))
    return citances


def append_citance_sections(doc: Document, citances) -> Document:
    """Return a copy of doc with one citance section per citance appended
    after the body sections; annotations are untouched."""
    if any(s.kind == CITANCE for s in doc.sections):
        raise ValidationError(
            f"{doc.doc_id} already carries citance sections")
    new_sections = doc.sections + tuple(
        Section(tokens=c.tokens(), kind=CITANCE,
                source_doc_id=c.citing_doc_id)
        for c in citances
    )
    return Document(
        doc_id=doc.doc_id,
        sections=new_sections,
        mentions=doc.mentions,
        clusters=doc.clusters,
        salient_cluster_ids=doc.salient_cluster_ids,
        relations=doc.relations,
    )


@dataclass
class IdfTable:
    doc_freq: Counter = field(default_factory=Counter)
    n_citances: int = 0

    def idf(self, token: str) -> float:
        # smoothed: unseen tokens get ln(1 + n) + 1, never a zero division
        return math.log((1 + self.n_citances) /
                        (1 + self.doc_freq.get(token, 0))) + 1.0

    def save_text(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"n_citances\t{self.n_citances}\n")
            for token in sorted(self.doc_freq):
                fh.write(f"{token}\t{self.doc_freq[token]}\n")

    @classmethod
    def load_text(cls, path) -> "IdfTable":
        table = cls()
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if header[0] != "n_citances":
                raise ParseError("missing n_citances header", line=1)
            table.n_citances = int(header[1])
            for lineno, line in enumerate(fh, start=2):
                if not line.rstrip("\n"):
                    continue
                token, count = line.rstrip("\n").split("\t")
                table.doc_freq[token] = int(count)
        return table


def build_idf(all_citances) -> IdfTable:
    """Each citance counts as one IDF document."""
    table = IdfTable()
    for citance in all_citances:
        table.n_citances += 1
        for token in set(citance.tokens()):
            table.doc_freq[token] += 1
    return table


def citation_tfidf(doc_tokens, citances, idf: IdfTable) -> np.ndarray:
    """Per-token feature: the token's TF-IDF in each citance (raw count /
    citance length), averaged over all citances. All zeros when there are
    no citances."""
    feats = np.zeros(len(doc_tokens))
    if not citances:
        return feats
    per_token_avg: dict[str, float] = {}
    counts = [(Counter(c.tokens()), len(c.tokens())) for c in citances]
    for i, token in enumerate(doc_tokens):
        if token not in per_token_avg:
            total = 0.0
            for counter, length in counts:
                if length:
                    total += (counter.get(token, 0) / length) * idf.idf(token)
            per_token_avg[token] = total / len(citances)
        feats[i] = per_token_avg[token]
    return feats


def save_citance_cache(citances_by_target: dict[str, list[Citance]],
                       path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for target in sorted(citances_by_target):
            for c in citances_by_target[target]:
                fh.write(json.dumps({
                    "target_id": target,
                    "citing_doc_id": c.citing_doc_id,
                    "sentences": [list(s) for s in c.sentences],
                    "anchor": list(c.anchor),
                }, ensure_ascii=False) + "\n")


def load_citance_cache(path) -> dict[str, list[Citance]]:
    out: dict[str, list[Citance]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            out.setdefault(rec["target_id"], []).append(Citance(
                citing_doc_id=rec["citing_doc_id"],
                sentences=tuple(tuple(s) for s in rec["sentences"]),
                anchor=tuple(rec["anchor"]),
            ))
    return out


def load_citing_docs(path) -> list[CitingDocument]:
    """JSON-lines citing documents: doc_id, sections (sections ->
    sentences -> tokens), and markers."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            try:
                out.append(CitingDocument(
                    doc_id=rec["doc_id"],
                    sections=tuple(
                        tuple(tuple(sent) for sent in sec)
                        for sec in rec["sections"]),
                    markers=tuple(Marker(
                        target_id=m["target_id"],
                        section_index=int(m["section_index"]),
                        sentence_index=int(m["sentence_index"]),
                    ) for m in rec.get("markers", ())),
                ))
            except (KeyError, TypeError) as exc:
                raise ParseError(f"bad citing document record: {exc}",
                                 line=lineno) from exc
    return out
