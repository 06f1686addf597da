"""IOBES tag alphabet plus encoding/decoding between mentions and tags.

The alphabet has 17 symbols: O plus {B, I, E, S} x {Task, Dataset, Method,
Metric}. Decoding is total: ill-formed model output is repaired
deterministically (a run of I-t/E-t with no opening B-t opens at the run
start; an unclosed B-t/I-t run closes at the run end).
"""

from __future__ import annotations

from .corpus import CITANCE, ENTITY_TYPES, Document, Mention, Section
from .errors import ValidationError

TAGS: tuple[str, ...] = ("O",) + tuple(
    f"{prefix}-{etype}" for etype in ENTITY_TYPES for prefix in "BIES"
)
TAG_INDEX = {t: i for i, t in enumerate(TAGS)}
N_TAGS = len(TAGS)  # 17

O_TAG = "O"


def tag_parts(tag: str) -> tuple[str, str | None]:
    """Split a tag into (prefix, entity_type); O maps to ("O", None)."""
    if tag == O_TAG:
        return O_TAG, None
    prefix, etype = tag.split("-", 1)
    return prefix, etype


def is_legal_transition(prev: str, cur: str) -> bool:
    """IOBES legality: B-t/I-t must be followed by I-t/E-t of the same type;
    O, E-t and S-t may be followed by O, B-u or S-u."""
    p_pre, p_type = tag_parts(prev)
    c_pre, c_type = tag_parts(cur)
    if p_pre in ("B", "I"):
        return c_pre in ("I", "E") and c_type == p_type
    return c_pre in (O_TAG, "B", "S")


def is_legal_start(tag: str) -> bool:
    return tag_parts(tag)[0] in (O_TAG, "B", "S")


def is_legal_end(tag: str) -> bool:
    return tag_parts(tag)[0] in (O_TAG, "E", "S")


def is_legal_sequence(tags: list[str]) -> bool:
    if not tags:
        return True
    if not is_legal_start(tags[0]) or not is_legal_end(tags[-1]):
        return False
    return all(is_legal_transition(a, b) for a, b in zip(tags, tags[1:]))


def encode_iobes(doc: Document) -> list[list[str]]:
    """One tag sequence per section; citance sections are all O.

    Length-1 mentions become S-t; longer ones B-t, I-t..., E-t. Overlapping
    mentions are rejected at document construction, so encoding is total
    over valid documents.
    """
    spans = doc.section_spans()
    sequences = [[O_TAG] * len(s.tokens) for s in doc.sections]
    for m in doc.mentions:
        sec = next(i for i, (lo, hi) in enumerate(spans)
                   if lo <= m.start and m.end <= hi)
        if doc.sections[sec].kind == CITANCE:
            raise ValidationError(
                f"{doc.doc_id}: mention {m} inside a citance section")
        lo = spans[sec][0]
        a, b = m.start - lo, m.end - lo
        seq = sequences[sec]
        if b - a == 1:
            seq[a] = f"S-{m.entity_type}"
        else:
            seq[a] = f"B-{m.entity_type}"
            for k in range(a + 1, b - 1):
                seq[k] = f"I-{m.entity_type}"
            seq[b - 1] = f"E-{m.entity_type}"
    return sequences


def _decode_section(tags: list[str], offset: int) -> list[Mention]:
    mentions: list[Mention] = []
    open_start: int | None = None
    open_type: str | None = None

    def close(end: int) -> None:
        nonlocal open_start, open_type
        if open_start is not None:
            mentions.append(Mention(offset + open_start, offset + end,
                                    open_type))
        open_start, open_type = None, None

    for pos, tag in enumerate(tags):
        prefix, etype = tag_parts(tag)
        if prefix == O_TAG:
            close(pos)
            continue
        if open_type is not None and etype != open_type:
            close(pos)
        if prefix == "B":
            close(pos)
            open_start, open_type = pos, etype
        elif prefix == "I":
            if open_start is None:
                open_start, open_type = pos, etype
        elif prefix == "E":
            if open_start is None:
                open_start, open_type = pos, etype
            close(pos + 1)
        elif prefix == "S":
            close(pos)
            mentions.append(Mention(offset + pos, offset + pos + 1, etype))
    close(len(tags))
    return mentions


def decode_iobes(tag_sequences: list[list[str]],
                 sections: tuple[Section, ...]) -> list[Mention]:
    """Extract mentions from per-section tag sequences, repairing ill-formed
    input. Citance sections never yield mentions."""
    if len(tag_sequences) != len(sections):
        raise ValidationError(
            f"{len(tag_sequences)} tag sequences for {len(sections)} sections")
    mentions: list[Mention] = []
    offset = 0
    for tags, section in zip(tag_sequences, sections):
        if len(tags) != len(section.tokens):
            raise ValidationError("tag sequence length mismatch")
        if section.kind != CITANCE:
            mentions.extend(_decode_section(list(tags), offset))
        offset += len(section.tokens)
    return mentions
