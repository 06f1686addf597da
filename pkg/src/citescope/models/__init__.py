"""Neural IE models: shared encoder, CRF mention tagger, saliency and
4-ary relation heads, with optional graph-embedding fusion."""

from .checkpoint import CHECKPOINT_VERSION, load_checkpoint, save_checkpoint
from .config import FUSION_MODES, ModelConfig, TrainConfig
from .coref import gold_coref, surface_coref
from .crf import NEG_INF, LinearChainCRF, legality_masks
from .data import (CANDIDATE_CAP, UNK, Chunk, Vocab, candidate_tuples,
                   chunk_document, clusters_by_type, gold_tag_ids,
                   mention_saliency_labels, sample_negative_tuples)
from .encoder import TokenEncoder
from .estimators import (MentionTagger, MultiTaskExtractor, RelationScorer,
                         SaliencyScorer)
from .heads import (EmissionNet, RelationHead, SaliencyHead, SpanAttention,
                    cluster_saliency)
from .pipeline import IEModel, IEPipeline, PipelineOutput, as_graph_tensor
from .training import (TASKS, DocFeatures, TrainResult, doc_loss,
                       predict_mentions, relation_scores, saliency_scores,
                       select_threshold, train_model, validation_f1)

__all__ = [
    "CHECKPOINT_VERSION", "load_checkpoint", "save_checkpoint",
    "FUSION_MODES", "ModelConfig", "TrainConfig",
    "gold_coref", "surface_coref",
    "NEG_INF", "LinearChainCRF", "legality_masks",
    "CANDIDATE_CAP", "UNK", "Chunk", "Vocab", "candidate_tuples",
    "chunk_document", "clusters_by_type", "gold_tag_ids",
    "mention_saliency_labels", "sample_negative_tuples",
    "TokenEncoder",
    "MentionTagger", "MultiTaskExtractor", "RelationScorer",
    "SaliencyScorer",
    "EmissionNet", "RelationHead", "SaliencyHead", "SpanAttention",
    "cluster_saliency",
    "IEModel", "IEPipeline", "PipelineOutput", "as_graph_tensor",
    "TASKS", "DocFeatures", "TrainResult", "doc_loss", "predict_mentions",
    "relation_scores", "saliency_scores", "select_threshold", "train_model",
    "validation_f1",
]
