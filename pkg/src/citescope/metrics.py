"""Evaluation metrics: span-level mention F1, document-level and
corpus-level relation metrics, and the bucketed breakdowns.

All functions are pure and permutation-invariant over input order.
Degenerate documents (empty gold and empty prediction) score as perfect;
this convention is stated in report headers.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .corpus import ENTITY_TYPES, Document, Relation4
from .graph import CitationGraph


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PRF":
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f1, tp, fp, fn)


@dataclass(frozen=True)
class MacroPRF:
    """Unweighted mean of per-unit precision/recall/F1 (units are documents
    or classes; counts do not aggregate)."""
    precision: float
    recall: float
    f1: float
    support: int


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


def mention_f1(pred: dict, gold: dict) -> tuple[dict[str, PRF], MacroPRF]:
    """Exact span+type matching; per-type PRF pooled over the corpus, then
    averaged over the four entity types.

    pred/gold: doc_id -> iterable of Mention.
    """
    per_type = {}
    for etype in ENTITY_TYPES:
        tp = fp = fn = 0
        for doc_id in set(pred) | set(gold):
            p = {(m.start, m.end) for m in pred.get(doc_id, ())
                 if m.entity_type == etype}
            g = {(m.start, m.end) for m in gold.get(doc_id, ())
                 if m.entity_type == etype}
            tp += len(p & g)
            fp += len(p - g)
            fn += len(g - p)
        per_type[etype] = PRF.from_counts(tp, fp, fn)
    macro = MacroPRF(
        precision=_mean(v.precision for v in per_type.values()),
        recall=_mean(v.recall for v in per_type.values()),
        f1=_mean(v.f1 for v in per_type.values()),
        support=len(ENTITY_TYPES),
    )
    return per_type, macro


def _document_prf(pred: set, gold: set) -> tuple[float, float, float]:
    if not pred and not gold:
        return 1.0, 1.0, 1.0  # correct abstention scores as perfect
    tp = len(pred & gold)
    p = tp / len(pred) if pred else 0.0
    r = tp / len(gold) if gold else 1.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


def doc_level_relation_metric(preds: dict, golds: dict) -> MacroPRF:
    """Per-document P/R/F1 on exact relation-tuple matches, averaged
    unweighted over documents.

    preds/golds: doc_id -> set of hashable relation identities (4-ary
    tuples or flattened binary pairs).
    """
    doc_ids = sorted(set(preds) | set(golds))
    rows = [_document_prf(set(preds.get(d, ())), set(golds.get(d, ())))
            for d in doc_ids]
    return MacroPRF(
        precision=_mean(r[0] for r in rows),
        recall=_mean(r[1] for r in rows),
        f1=_mean(r[2] for r in rows),
        support=len(doc_ids),
    )


def corpus_level_relation_metric(predictions, labels) -> \
        tuple[dict[str, PRF], MacroPRF]:
    """Pooled binary classification over all candidate relations; macro
    average of the positive-class and negative-class PRF."""
    predictions = [bool(x) for x in predictions]
    labels = [bool(x) for x in labels]
    if len(predictions) != len(labels):
        raise ValueError("predictions and labels must align")
    per_class = {}
    for cls_name, positive in (("positive", True), ("negative", False)):
        tp = sum(1 for p, l in zip(predictions, labels)
                 if p == positive and l == positive)
        fp = sum(1 for p, l in zip(predictions, labels)
                 if p == positive and l != positive)
        fn = sum(1 for p, l in zip(predictions, labels)
                 if p != positive and l == positive)
        per_class[cls_name] = PRF.from_counts(tp, fp, fn)
    macro = MacroPRF(
        precision=_mean(v.precision for v in per_class.values()),
        recall=_mean(v.recall for v in per_class.values()),
        f1=_mean(v.f1 for v in per_class.values()),
        support=len(labels),
    )
    return per_class, macro


DEFAULT_CITATION_BUCKETS = (0, 10, 50, 250)


@dataclass
class Bucket:
    label: str
    count: int
    metric: MacroPRF | None
    flagged_docs: tuple[str, ...] = ()


@dataclass
class BucketedReport:
    description: str
    buckets: list[Bucket]


def _bucket_label(value: float, edges) -> str:
    for lo, hi in zip(edges, edges[1:]):
        if lo <= value < hi:
            return f"[{lo},{hi})"
    return f"[{edges[-1]},inf)"


def bucket_by_citations(preds: dict, golds: dict, doc_to_node: dict,
                        graph: CitationGraph,
                        bucket_edges=DEFAULT_CITATION_BUCKETS) \
        -> BucketedReport:
    """Document-level relation F1 grouped by inbound-citation count.

    Documents without a graph node fall into the zero-citation bucket and
    are flagged.
    """
    labels = [_bucket_label(e, bucket_edges) for e in bucket_edges]
    groups: dict[str, list[str]] = {lab: [] for lab in labels}
    flagged: dict[str, list[str]] = {lab: [] for lab in labels}
    for doc_id in sorted(set(preds) | set(golds)):
        node = doc_to_node.get(doc_id)
        if node is None or node not in graph:
            lab = _bucket_label(0, bucket_edges)
            flagged[lab].append(doc_id)
        else:
            lab = _bucket_label(graph.in_degree(node), bucket_edges)
        groups[lab].append(doc_id)
    buckets = []
    for lab in labels:
        docs = groups[lab]
        metric = None
        if docs:
            metric = doc_level_relation_metric(
                {d: preds.get(d, set()) for d in docs},
                {d: golds.get(d, set()) for d in docs})
        buckets.append(Bucket(label=lab, count=len(docs), metric=metric,
                              flagged_docs=tuple(flagged[lab])))
    return BucketedReport(description="document-level relation F1 by "
                                      "inbound citation count",
                          buckets=buckets)


def relation_span_distance(rel: Relation4, doc: Document) -> float:
    """Mean absolute token distance between mention pairs from distinct
    clusters of the relation, normalized by document length."""
    positions = {}
    for _etype, cid in rel.typed_items():
        positions[cid] = [doc.mentions[i].start for i in doc.clusters[cid]]
    dists = []
    for ca, cb in combinations(positions, 2):
        for a in positions[ca]:
            for b in positions[cb]:
                dists.append(abs(a - b))
    return _mean(dists) / doc.n_tokens


def global_saliency_rate(docs) -> dict[str, float]:
    """Fraction of each mention surface form's occurrences whose cluster is
    labeled salient, over the given split."""
    salient: dict[str, int] = {}
    total: dict[str, int] = {}
    for doc in docs:
        for idx, mention in enumerate(doc.mentions):
            surface = doc.mention_text(mention)
            total[surface] = total.get(surface, 0) + 1
            cid = doc.cluster_of_mention(idx)
            if cid is not None and cid in doc.salient_cluster_ids:
                salient[surface] = salient.get(surface, 0) + 1
    return {s: salient.get(s, 0) / total[s] for s in total}
