"""Pluggable coreference: any callable (mentions, doc) -> clusters.

The default black box clusters mentions by (entity type, casefolded
surface string). A gold passthrough mode returns the document's annotated
clusters unchanged.
"""

from __future__ import annotations

from ..corpus import Document, Mention


def surface_coref(mentions: list[Mention],
                  doc: Document) -> dict[str, tuple[int, ...]]:
    tokens = doc.all_tokens()
    groups: dict[tuple[str, str], list[int]] = {}
    for idx, m in enumerate(mentions):
        surface = " ".join(tokens[m.start:m.end]).casefold()
        groups.setdefault((m.entity_type, surface), []).append(idx)
    clusters = {}
    for k, (etype, surface) in enumerate(sorted(groups)):
        clusters[f"p{k}_{etype}"] = tuple(groups[(etype, surface)])
    return clusters


def gold_coref(mentions: list[Mention],
               doc: Document) -> dict[str, tuple[int, ...]]:
    """Identity mode: the document's gold clusters, unchanged."""
    return dict(doc.clusters)
