"""The multi-task IE model and the end-to-end prediction pipeline:
mention tagging -> coreference black box -> saliency -> 4-ary relations.

Each stage can fuse the document's frozen graph embedding; citance
sections contribute encoder context but never predictions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from ..corpus import Document, Mention, Relation4
from ..errors import ValidationError
from ..iobes import TAGS, decode_iobes
from .config import ModelConfig
from .coref import surface_coref
from .crf import LinearChainCRF
from .data import Chunk, Vocab, candidate_tuples, chunk_document, \
    gold_tag_ids
from .encoder import TokenEncoder
from .heads import EmissionNet, RelationHead, SaliencyHead, SpanAttention, \
    cluster_saliency

logger = logging.getLogger(__name__)

O_INDEX = 0


def as_graph_tensor(vec) -> torch.Tensor | None:
    if vec is None:
        return None
    return torch.as_tensor(np.asarray(vec), dtype=torch.float64)


class IEModel(nn.Module):
    """Shared encoder plus the three task heads."""

    def __init__(self, vocab: Vocab, config: ModelConfig):
        super().__init__()
        self.vocab = vocab
        self.config = config
        self.encoder = TokenEncoder(len(vocab), config)
        self.emission = EmissionNet(config)
        self.crf = LinearChainCRF()
        self.span_attn = SpanAttention(config)
        self.saliency = SaliencyHead(config)
        self.relation = RelationHead(config)

    # --- encoding -----------------------------------------------------

    def encode_doc(self, doc: Document) -> tuple[list[Chunk], torch.Tensor]:
        chunks = chunk_document(doc, self.vocab, self.config.section_cap)
        return chunks, self.encoder(chunks)

    # --- mention tagging ----------------------------------------------

    def chunk_emissions(self, chunks: list[Chunk], token_vecs: torch.Tensor,
                        graph_vec=None) -> list[torch.Tensor]:
        emissions = self.emission(token_vecs, graph_vec)
        out, pos = [], 0
        for chunk in chunks:
            out.append(emissions[pos:pos + len(chunk.token_ids)])
            pos += len(chunk.token_ids)
        return out

    def tag(self, doc: Document, graph_vec=None) -> list[list[str]]:
        """Viterbi decode per chunk; citance chunks are forced all-O.
        Returns one tag sequence per document section."""
        chunks, token_vecs = self.encode_doc(doc)
        per_chunk = self.chunk_emissions(chunks, token_vecs, graph_vec)
        sequences = [[] for _ in doc.sections]
        for chunk, emissions in zip(chunks, per_chunk):
            if not chunk.token_ids:
                continue
            if chunk.is_citance:
                tags = ["O"] * len(chunk.token_ids)
            else:
                tags = [TAGS[i] for i in self.crf.viterbi(emissions)]
            sequences[chunk.section_index].extend(tags)
        return sequences

    def mention_loss(self, doc: Document, graph_vec=None) -> torch.Tensor:
        """CRF negative log-likelihood of the gold tags, summed over
        non-citance chunks and normalized by token count."""
        chunks, token_vecs = self.encode_doc(doc)
        per_chunk = self.chunk_emissions(chunks, token_vecs, graph_vec)
        gold = gold_tag_ids(doc, chunks)
        total = torch.zeros((), dtype=torch.float64)
        n_tokens = 0
        for chunk, emissions, tags in zip(chunks, per_chunk, gold):
            if chunk.is_citance or not tags:
                continue
            total = total - self.crf.log_likelihood(emissions, tags)
            n_tokens += len(tags)
        return total / max(1, n_tokens)

    # --- spans and saliency -------------------------------------------

    def span_vec(self, token_vecs: torch.Tensor,
                 mention: Mention) -> torch.Tensor:
        return self.span_attn(token_vecs[mention.start:mention.end])

    def mention_saliency_prob(self, token_vecs: torch.Tensor,
                              mention: Mention, graph_vec=None,
                              tfidf_feats: np.ndarray | None = None
                              ) -> torch.Tensor:
        tfidf = None
        if self.config.use_tfidf:
            if tfidf_feats is None:
                tfidf = torch.zeros((), dtype=torch.float64)
            else:
                tfidf = torch.tensor(
                    float(np.mean(tfidf_feats[mention.start:mention.end])),
                    dtype=torch.float64)
        return self.saliency(self.span_vec(token_vecs, mention),
                             graph_vec, tfidf)

    # --- relations ----------------------------------------------------

    def relation_prob(self, doc: Document, token_vecs: torch.Tensor,
                      rel: Relation4,
                      cluster_mentions: dict[str, list[Mention]],
                      graph_vec=None) -> tuple[torch.Tensor, bool]:
        """Probability that the 4-tuple is a relation of the document.

        A section is eligible when all four entities have a mention in it;
        with no eligible section, each entity pools over the whole document
        as one pseudo-section (flagged via the returned bool).
        """
        entity_mentions = []
        for _etype, cid in rel.typed_items():
            mentions = cluster_mentions.get(cid, [])
            if not mentions:
                raise ValidationError(
                    f"cluster {cid} has no mentions in {doc.doc_id}")
            entity_mentions.append(mentions)

        spans = doc.section_spans()

        def section_of(m: Mention) -> int:
            return next(i for i, (lo, hi) in enumerate(spans)
                        if lo <= m.start and m.end <= hi)

        by_section: list[dict[int, list[Mention]]] = []
        for mentions in entity_mentions:
            d: dict[int, list[Mention]] = {}
            for m in mentions:
                d.setdefault(section_of(m), []).append(m)
            by_section.append(d)
        eligible = set(by_section[0])
        for d in by_section[1:]:
            eligible &= set(d)

        def pooled(mentions: list[Mention]) -> torch.Tensor:
            vecs = torch.stack([self.span_vec(token_vecs, m)
                                for m in mentions])
            return vecs.max(dim=0).values

        fallback = not eligible
        if fallback:
            section_entity_vecs = [[pooled(m) for m in entity_mentions]]
        else:
            section_entity_vecs = [
                [pooled(d[sec]) for d in by_section]
                for sec in sorted(eligible)
            ]
        return self.relation(section_entity_vecs, graph_vec), fallback


@dataclass
class PipelineOutput:
    doc_id: str
    mentions: list[Mention]
    clusters: dict[str, tuple[int, ...]]
    cluster_probs: dict[str, float]
    salient_cluster_ids: set[str]
    relations: list[Relation4]
    relation_probs: dict[tuple[str, str, str, str], float] = \
        field(default_factory=dict)


class IEPipeline:
    """Chains a trained IEModel through all stages on raw documents."""

    def __init__(self, model: IEModel, saliency_threshold: float = 0.5,
                 relation_threshold: float = 0.5, coref_fn=surface_coref):
        self.model = model
        self.saliency_threshold = saliency_threshold
        self.relation_threshold = relation_threshold
        self.coref_fn = coref_fn

    @torch.no_grad()
    def predict(self, doc: Document, graph_vec=None,
                tfidf_feats: np.ndarray | None = None) -> PipelineOutput:
        model = self.model
        graph_vec = as_graph_tensor(graph_vec)
        sequences = model.tag(doc, graph_vec)
        mentions = decode_iobes(sequences, doc.sections)
        clusters = self.coref_fn(mentions, doc)

        _chunks, token_vecs = model.encode_doc(doc)
        cluster_probs = {}
        for cid, idxs in clusters.items():
            probs = [float(model.mention_saliency_prob(
                token_vecs, mentions[i], graph_vec, tfidf_feats))
                for i in idxs]
            cluster_probs[cid] = cluster_saliency(probs)
        salient = {cid for cid, p in cluster_probs.items()
                   if p >= self.saliency_threshold}

        by_type: dict[str, list[str]] = {}
        for cid in sorted(salient):
            if clusters[cid]:
                etype = mentions[clusters[cid][0]].entity_type
                by_type.setdefault(etype, []).append(cid)
        candidates = candidate_tuples(by_type)

        cluster_mentions = {cid: [mentions[i] for i in idxs]
                            for cid, idxs in clusters.items()}
        relations, relation_probs = [], {}
        for rel in candidates:
            prob, _fb = model.relation_prob(doc, token_vecs, rel,
                                            cluster_mentions, graph_vec)
            relation_probs[rel.as_tuple()] = float(prob)
            if float(prob) >= self.relation_threshold:
                relations.append(rel)
        return PipelineOutput(
            doc_id=doc.doc_id,
            mentions=mentions,
            clusters=clusters,
            cluster_probs=cluster_probs,
            salient_cluster_ids=salient,
            relations=relations,
            relation_probs=relation_probs,
        )
