"""Paired and hierarchical bootstrap significance tests.

One-sided by default with system A as the proposed system: the p-value is
the fraction of resamples where system B's metric is >= system A's (ties
count against A). Seed-reproducible; the paired test is the single-seed
special case of the hierarchical one, so the two agree exactly there.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BootstrapResult:
    p_value: float
    n_resamples: int
    seed: int
    two_sided: bool
    tie_convention: str = "ties count against the proposed system (>=)"


def hierarchical_bootstrap(per_seed_a, per_seed_b, metric_fn,
                           n_resamples: int = 10_000, seed: int = 0,
                           two_sided: bool = False) -> BootstrapResult:
    """Bootstrap over (training seed, resampled test set) pairs.

    per_seed_a / per_seed_b: one list of per-unit outputs per training
    seed; units must be aligned across systems (and across seeds). Each
    resample draws one seed per system uniformly, then a bootstrap sample
    of unit indices shared by both systems.
    """
    if not per_seed_a or not per_seed_b:
        raise ValidationError("each system needs at least one seed")
    n_units = len(per_seed_a[0])
    for outputs in list(per_seed_a) + list(per_seed_b):
        if len(outputs) != n_units:
            raise ValidationError("per-unit outputs must be aligned")
    if n_units == 0:
        raise ValidationError("no test units")
    if n_resamples < 1000:
        logger.warning("n_resamples=%d < 1000: p-value will be unstable",
                       n_resamples)

    rng = np.random.default_rng(seed)
    wins_b = 0
    for _ in range(n_resamples):
        sa = per_seed_a[rng.integers(len(per_seed_a))]
        sb = per_seed_b[rng.integers(len(per_seed_b))]
        idx = rng.integers(n_units, size=n_units)
        ma = metric_fn([sa[i] for i in idx])
        mb = metric_fn([sb[i] for i in idx])
        if mb >= ma:
            wins_b += 1
    p = wins_b / n_resamples
    if two_sided:
        p = min(1.0, 2 * min(p, 1 - p))
    return BootstrapResult(p_value=p, n_resamples=n_resamples, seed=seed,
                           two_sided=two_sided)


def paired_bootstrap(scores_a, scores_b, metric_fn,
                     n_resamples: int = 10_000, seed: int = 0,
                     two_sided: bool = False) -> BootstrapResult:
    """Single-seed paired bootstrap: resample aligned test units with
    replacement and compare the two systems' metrics per resample."""
    if len(scores_a) != len(scores_b):
        raise ValidationError("systems must share the same test units")
    return hierarchical_bootstrap([scores_a], [scores_b], metric_fn,
                                  n_resamples=n_resamples, seed=seed,
                                  two_sided=two_sided)
