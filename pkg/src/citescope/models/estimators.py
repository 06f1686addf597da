"""Estimator-style wrappers over the IE model: fit on annotated
documents, predict on raw ones.

Each estimator holds a ModelConfig/TrainConfig pair as constructor
parameters (so get_params/set_params round-trip) and trains the shared
model on its own task; MultiTaskExtractor trains all three tasks jointly
and predicts through the full pipeline.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..corpus import Mention, Relation4
from ..errors import ValidationError
from .config import ModelConfig, TrainConfig
from .coref import surface_coref
from .pipeline import IEPipeline, PipelineOutput
from .training import (DocFeatures, predict_mentions, relation_scores,
                       saliency_scores, train_model)


def _split_val(docs, val_docs, val_fraction):
    if val_docs is not None:
        return list(docs), list(val_docs)
    docs = list(docs)
    n_val = max(1, int(round(val_fraction * len(docs))))
    if n_val >= len(docs):
        raise ValidationError("too few documents to hold out validation")
    return docs[:-n_val], docs[-n_val:]


class _TaskEstimator(BaseEstimator):
    """Shared fit machinery; subclasses define tasks_ and predict."""

    tasks_: tuple[str, ...] = ()

    def __init__(self, model_config=None, train_config=None,
                 features=None, val_fraction=0.2):
        self.model_config = model_config
        self.train_config = train_config
        self.features = features
        self.val_fraction = val_fraction

    def fit(self, X, y=None, val_docs=None):
        """Train on annotated documents X; y is unused (annotations live
        on the documents)."""
        train, val = _split_val(X, val_docs, self.val_fraction)
        result = train_model(
            train, val, self.tasks_,
            self.model_config or ModelConfig(),
            self.train_config or TrainConfig(),
            features=self.features)
        self.model_ = result.model
        self.thresholds_ = result.thresholds
        self.history_ = result.history
        self.features_ = self.features or DocFeatures()
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError(
                f"{type(self).__name__} is not fitted; call fit first")


class MentionTagger(_TaskEstimator):
    """Sequence tagger producing typed mention spans per document."""

    tasks_ = ("mention",)

    def predict(self, X) -> list[list[Mention]]:
        self._check_fitted()
        return [predict_mentions(self.model_, doc, self.features_)
                for doc in X]


class SaliencyScorer(_TaskEstimator):
    """Classifies gold clusters as salient or not."""

    tasks_ = ("saliency",)

    def predict_proba(self, X) -> list[dict[str, float]]:
        self._check_fitted()
        out = []
        for doc in X:
            rows = saliency_scores(self.model_, doc, self.features_)
            out.append({cid: p for cid, _i, p, _l in rows})
        return out

    def predict(self, X) -> list[set[str]]:
        self._check_fitted()
        theta = self.thresholds_.get("saliency", 0.5)
        return [{cid for cid, p in probs.items() if p >= theta}
                for probs in self.predict_proba(X)]


class RelationScorer(_TaskEstimator):
    """Scores typed 4-tuples of gold clusters as relations."""

    tasks_ = ("relation",)

    def predict_proba(self, X, seed: int = 0) \
            -> list[list[tuple[float, bool]]]:
        self._check_fitted()
        rng = np.random.default_rng(seed)
        return [relation_scores(self.model_, doc, self.features_, rng, 5)
                for doc in X]


class MultiTaskExtractor(_TaskEstimator):
    """Joint model over all tasks; predict runs the full pipeline from
    raw text to 4-ary relations."""

    tasks_ = ("mention", "saliency", "relation")

    def __init__(self, model_config=None, train_config=None,
                 features=None, val_fraction=0.2, coref_fn=surface_coref):
        super().__init__(model_config=model_config,
                         train_config=train_config, features=features,
                         val_fraction=val_fraction)
        self.coref_fn = coref_fn

    def pipeline(self) -> IEPipeline:
        self._check_fitted()
        return IEPipeline(
            self.model_,
            saliency_threshold=self.thresholds_.get("saliency", 0.5),
            relation_threshold=self.thresholds_.get("relation", 0.5),
            coref_fn=self.coref_fn)

    def predict(self, X) -> list[PipelineOutput]:
        pipe = self.pipeline()
        out = []
        for doc in X:
            graph_vec = self.features_.graph_vecs.get(doc.doc_id)
            tfidf = self.features_.tfidf_for(doc.doc_id)
            out.append(pipe.predict(doc, graph_vec, tfidf))
        return out

    def predict_relations(self, X) -> list[list[Relation4]]:
        return [o.relations for o in self.predict(X)]
