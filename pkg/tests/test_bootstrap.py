import random

import pytest

from citescope.bootstrap import hierarchical_bootstrap, paired_bootstrap
from citescope.errors import ValidationError


def f1_from_counts(units):
    """units: (tp, n_pred, n_gold) triples pooled into a corpus F1."""
    tp = sum(u[0] for u in units)
    n_pred = sum(u[1] for u in units)
    n_gold = sum(u[2] for u in units)
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    return 2 * p * r / (p + r) if p + r else 0.0


def planted_units(rng, n, accuracy):
    """Per-item counts for a system with the given hit rate."""
    return [(1 if rng.random() < accuracy else 0, 1, 1) for _ in range(n)]


class TestPaired:
    def test_identical_systems_p_is_one(self):
        units = [(1, 1, 1), (0, 1, 1)] * 50
        res = paired_bootstrap(units, list(units), f1_from_counts,
                               n_resamples=2000, seed=0)
        assert res.p_value == 1.0

    def test_strictly_better_system_p_zero(self):
        a = [(1, 1, 1)] * 100  # perfect on every item
        b = [(0, 1, 1)] * 100
        res = paired_bootstrap(a, b, f1_from_counts, n_resamples=2000,
                               seed=0)
        assert res.p_value == 0.0

    def test_planted_ten_point_gap_significant(self):
        rng = random.Random(42)
        a = planted_units(rng, 200, 0.70)
        b = planted_units(rng, 200, 0.60)
        res = paired_bootstrap(a, b, f1_from_counts, n_resamples=10_000,
                               seed=1)
        assert res.p_value < 0.05

    def test_seed_reproducibility(self):
        rng = random.Random(9)
        a = planted_units(rng, 80, 0.6)
        b = planted_units(rng, 80, 0.55)
        r1 = paired_bootstrap(a, b, f1_from_counts, n_resamples=3000, seed=5)
        r2 = paired_bootstrap(a, b, f1_from_counts, n_resamples=3000, seed=5)
        assert r1.p_value == r2.p_value

    def test_mismatched_units_rejected(self):
        with pytest.raises(ValidationError):
            paired_bootstrap([(1, 1, 1)], [(1, 1, 1)] * 2, f1_from_counts)

    def test_low_resamples_warns(self, caplog):
        import logging
        with caplog.at_level(logging.WARNING, logger="citescope.bootstrap"):
            paired_bootstrap([(1, 1, 1)] * 4, [(0, 1, 1)] * 4,
                             f1_from_counts, n_resamples=100, seed=0)
        assert any("unstable" in rec.message for rec in caplog.records)


class TestHierarchical:
    def test_single_seed_reduces_to_paired(self):
        rng = random.Random(3)
        a = planted_units(rng, 60, 0.7)
        b = planted_units(rng, 60, 0.6)
        rp = paired_bootstrap(a, b, f1_from_counts, n_resamples=2000, seed=2)
        rh = hierarchical_bootstrap([a], [b], f1_from_counts,
                                    n_resamples=2000, seed=2)
        assert rp.p_value == rh.p_value

    def test_three_seeds_planted_gap(self):
        # exact per-seed hit counts: a 10-point F1 gap at every seed
        rng = random.Random(4)

        def exact_units(hits, n):
            units = [(1, 1, 1)] * hits + [(0, 1, 1)] * (n - hits)
            rng.shuffle(units)
            return units

        per_seed_a = [exact_units(140, 200) for _ in range(3)]
        per_seed_b = [exact_units(120, 200) for _ in range(3)]
        res = hierarchical_bootstrap(per_seed_a, per_seed_b, f1_from_counts,
                                     n_resamples=10_000, seed=0)
        assert res.p_value < 0.05

    def test_mismatched_seed_counts_allowed(self):
        rng = random.Random(5)
        a = [planted_units(rng, 30, 0.8) for _ in range(3)]
        b = [planted_units(rng, 30, 0.5) for _ in range(2)]
        res = hierarchical_bootstrap(a, b, f1_from_counts, n_resamples=1000,
                                     seed=0)
        assert 0.0 <= res.p_value <= 1.0

    def test_empty_seed_list_rejected(self):
        with pytest.raises(ValidationError):
            hierarchical_bootstrap([], [[(1, 1, 1)]], f1_from_counts)

    def test_deterministic(self):
        rng = random.Random(6)
        a = [planted_units(rng, 40, 0.7) for _ in range(2)]
        b = [planted_units(rng, 40, 0.6) for _ in range(2)]
        r1 = hierarchical_bootstrap(a, b, f1_from_counts,
                                    n_resamples=2000, seed=11)
        r2 = hierarchical_bootstrap(a, b, f1_from_counts,
                                    n_resamples=2000, seed=11)
        assert r1.p_value == r2.p_value
