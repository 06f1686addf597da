"""Citation graph construction and queries.

Edges are directed citing -> cited; neighborhood queries use the
undirected view. The adjacency structure is a CSR array so million-node
graphs stay cheap to build and query.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linkage import MetaStore

logger = logging.getLogger(__name__)


class CitationGraph:
    """Immutable directed citation graph with precomputed undirected CSR
    adjacency."""

    def __init__(self, node_ids, edges):
        """node_ids: iterable of record ids; edges: iterable of
        (citing_id, cited_id) pairs between those nodes. Self loops and
        duplicate edges are dropped."""
        self.node_ids: list[str] = list(dict.fromkeys(node_ids))
        self.index: dict[str, int] = {nid: i for i, nid in
                                      enumerate(self.node_ids)}
        n = len(self.node_ids)

        pairs = np.asarray(
            [(self.index[a], self.index[b]) for a, b in edges],
            dtype=np.int64).reshape(-1, 2)
        if len(pairs):
            pairs = pairs[pairs[:, 0] != pairs[:, 1]]
            pairs = np.unique(pairs, axis=0)
        self.edge_array = pairs  # (E, 2), citing index -> cited index

        # undirected CSR over deduplicated neighbor pairs
        if len(pairs):
            und = np.concatenate([pairs, pairs[:, ::-1]])
            und = np.unique(und, axis=0)
            src, dst = und[:, 0], und[:, 1]
        else:
            src = dst = np.zeros(0, dtype=np.int64)
        self._indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(self._indptr, src + 1, 1)
        np.cumsum(self._indptr, out=self._indptr)
        self._indices = dst  # und is sorted by (src, dst) already

        self._in_degree = np.bincount(pairs[:, 1], minlength=n) if n else \
            np.zeros(0, dtype=np.int64)
        self._out_degree = np.bincount(pairs[:, 0], minlength=n) if n else \
            np.zeros(0, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edge_array)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.index

    def neighbors_idx(self, idx: int) -> np.ndarray:
        return self._indices[self._indptr[idx]:self._indptr[idx + 1]]

    def neighborhood(self, node_id: str, hops: int) -> set[str]:
        """All nodes within undirected distance <= hops, excluding the node
        itself."""
        if hops not in (1, 2):
            raise ValidationError(f"hops must be 1 or 2, got {hops}")
        if node_id not in self.index:
            raise ValidationError(f"unknown node {node_id!r}")
        v = self.index[node_id]
        one_hop = self.neighbors_idx(v)
        reach = set(one_hop.tolist())
        if hops == 2 and len(one_hop):
            chunks = [self.neighbors_idx(u) for u in one_hop]
            reach.update(np.concatenate(chunks).tolist())
        reach.discard(v)
        return {self.node_ids[i] for i in reach}

    def in_degree(self, node_id: str) -> int:
        return int(self._in_degree[self.index[node_id]])

    def out_degree(self, node_id: str) -> int:
        return int(self._out_degree[self.index[node_id]])

    def save_edge_list(self, path) -> None:
        """Text lines `citing_id<TAB>cited_id`, one per directed edge."""
        with open(path, "w", encoding="utf-8") as fh:
            for a, b in self.edge_array:
                fh.write(f"{self.node_ids[a]}\t{self.node_ids[b]}\n")

    def save_node_list(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for nid in self.node_ids:
                fh.write(nid + "\n")

    @classmethod
    def load(cls, node_path, edge_path) -> "CitationGraph":
        with open(node_path, encoding="utf-8") as fh:
            nodes = [line.rstrip("\n") for line in fh if line.strip()]
        edges = []
        with open(edge_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line:
                    a, b = line.split("\t")
                    edges.append((a, b))
        return cls(nodes, edges)


@dataclass
class BuildReport:
    dropped_edges: int = 0
    unresolved_endpoints: int = 0


def build_graph(seed_ids, store: MetaStore,
                report: BuildReport | None = None) -> CitationGraph:
    """Radius-2 undirected neighborhood graph around the seed set.

    Nodes are all store records within undirected distance <= 2 of any
    seed; edges are all citation edges between included nodes. Edges whose
    far endpoint is missing from the store are dropped and counted.
    """
    seeds = sorted(set(seed_ids))
    for sid in seeds:
        if sid not in store:
            raise ValidationError(f"seed {sid!r} not in metadata store")
    if report is None:
        report = BuildReport()

    def undirected_neighbors(rid: str) -> list[str]:
        rec = store.get(rid)
        out = []
        for other in rec.outbound + rec.inbound:
            if other in store:
                out.append(other)
            else:
                report.unresolved_endpoints += 1
        return out

    included: set[str] = set(seeds)
    frontier = list(seeds)
    for _hop in range(2):
        nxt = []
        for rid in frontier:
            for other in undirected_neighbors(rid):
                if other not in included:
                    included.add(other)
                    nxt.append(other)
        frontier = nxt

    nodes = sorted(included)
    edges = []
    for rid in nodes:
        rec = store.get(rid)
        for cited in rec.outbound:
            if cited in included:
                edges.append((rid, cited))
            elif cited in store:
                report.dropped_edges += 1
        # inbound edges between included nodes are recovered from the
        # citing side's outbound list when both record lists agree; keep
        # inbound-only edges too (S2ORC-style lists can be asymmetric)
        for citing in rec.inbound:
            if citing in included:
                edges.append((citing, rid))
            elif citing in store:
                report.dropped_edges += 1
    if report.unresolved_endpoints:
        logger.warning("dropped %d edge endpoints missing from the store",
                       report.unresolved_endpoints)
    return CitationGraph(nodes, edges)


@dataclass
class DegreeStats:
    citations: dict[str, int]   # in-degree per document
    references: dict[str, int]  # out-degree per document
    missing: list[str]          # requested ids absent from the graph
    citation_hist: dict[str, int]
    reference_hist: dict[str, int]


DEFAULT_BUCKETS = (0, 10, 50, 250)


def _bucket_label(value: int, edges=DEFAULT_BUCKETS) -> str:
    for lo, hi in zip(edges, edges[1:]):
        if lo <= value < hi:
            return f"[{lo},{hi})"
    return f"[{edges[-1]},inf)"


def degree_stats(graph: CitationGraph, doc_ids,
                 bucket_edges=DEFAULT_BUCKETS) -> DegreeStats:
    """Per-document citation (inbound) and reference (outbound) counts plus
    bucketed histograms. Documents missing from the graph land in the zero
    bucket and are flagged."""
    citations, references, missing = {}, {}, []
    for did in sorted(doc_ids):
        if did in graph:
            citations[did] = graph.in_degree(did)
            references[did] = graph.out_degree(did)
        else:
            missing.append(did)
            citations[did] = 0
            references[did] = 0
    chist: dict[str, int] = {}
    rhist: dict[str, int] = {}
    for did in citations:
        chist[_bucket_label(citations[did], bucket_edges)] = \
            chist.get(_bucket_label(citations[did], bucket_edges), 0) + 1
        rhist[_bucket_label(references[did], bucket_edges)] = \
            rhist.get(_bucket_label(references[did], bucket_edges), 0) + 1
    return DegreeStats(citations, references, missing, chist, rhist)
