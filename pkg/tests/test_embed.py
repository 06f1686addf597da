import numpy as np
import pytest
from scipy.stats import chi2
from sklearn.exceptions import NotFittedError

from citescope.embed import (DeepWalkEmbedder, EmbeddingTable, WalkCorpus,
                             generate_walks, sgns_pair_loss_grad,
                             train_skipgram)
from citescope.errors import ValidationError
from citescope.graph import CitationGraph


def make_barbell_graph(clique_size=10):
    """Two cliques joined by a single bridge edge."""
    nodes = [f"a{i}" for i in range(clique_size)] + \
            [f"b{i}" for i in range(clique_size)]
    edges = []
    for side in ("a", "b"):
        for i in range(clique_size):
            for j in range(i + 1, clique_size):
                edges.append((f"{side}{i}", f"{side}{j}"))
    edges.append(("a0", "b0"))
    return CitationGraph(nodes, edges)


class TestWalks:
    def test_isolated_node_walk_length_one(self):
        g = CitationGraph(["solo"], [])
        corpus = generate_walks(g, walks_per_node=3, walk_length=10, seed=0)
        assert len(corpus.walks) == 3
        assert all(len(w) == 1 for w in corpus.walks)

    def test_two_node_alternation(self):
        g = CitationGraph(["a", "b"], [("a", "b")])
        corpus = generate_walks(g, walks_per_node=4, walk_length=4, seed=0)
        for walk in corpus.walks:
            ids = [corpus.node_ids[i] for i in walk]
            assert ids in (["a", "b", "a", "b"], ["b", "a", "b", "a"])

    def test_every_transition_is_an_edge(self):
        rng = np.random.default_rng(5)
        nodes = [f"n{i}" for i in range(30)]
        edges = {(f"n{a}", f"n{b}")
                 for a, b in rng.integers(0, 30, size=(60, 2)) if a != b}
        g = CitationGraph(nodes, edges)
        und = {(g.index[a], g.index[b]) for a, b in edges}
        und |= {(b, a) for a, b in und}
        corpus = generate_walks(g, walks_per_node=5, walk_length=10, seed=1)
        for walk in corpus.walks:
            for u, v in zip(walk, walk[1:]):
                assert (int(u), int(v)) in und

    def test_reproducible_for_fixed_seed(self):
        g = make_barbell_graph(5)
        c1 = generate_walks(g, 3, 8, seed=42)
        c2 = generate_walks(g, 3, 8, seed=42)
        assert all(np.array_equal(a, b) for a, b in zip(c1.walks, c2.walks))

    def test_next_step_uniform_chi_squared(self):
        # star: hub connected to 5 leaves; the first step from the hub
        # should be uniform over the 5 neighbors
        leaves = [f"leaf{i}" for i in range(5)]
        g = CitationGraph(["hub"] + leaves, [("hub", x) for x in leaves])
        corpus = generate_walks(g, walks_per_node=20000, walk_length=2,
                                seed=9)
        hub = corpus.node_ids.index("hub")
        firsts = [w[1] for w in corpus.walks if w[0] == hub and len(w) > 1]
        n = len(firsts)
        assert n == 20000
        observed = np.bincount(firsts, minlength=6)[1:]  # drop hub slot
        expected = n / 5
        stat = float(np.sum((observed - expected) ** 2 / expected))
        assert stat < chi2.ppf(0.99, df=4)

    def test_parameter_validation(self):
        g = CitationGraph(["a"], [])
        with pytest.raises(ValidationError):
            generate_walks(g, 0, 10, seed=0)
        with pytest.raises(ValidationError):
            generate_walks(g, 1, 1, seed=0)


class TestSkipGram:
    def test_pair_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        eps = 1e-6
        for _ in range(100):
            h = rng.normal(size=8)
            u = rng.normal(size=8)
            negs = rng.normal(size=(3, 8))
            _, g_c, g_o, g_n = sgns_pair_loss_grad(h, u, negs)
            for vec, grad in ((h, g_c), (u, g_o)):
                for i in range(len(vec)):
                    orig = vec[i]
                    vec[i] = orig + eps
                    lp = sgns_pair_loss_grad(h, u, negs)[0]
                    vec[i] = orig - eps
                    lm = sgns_pair_loss_grad(h, u, negs)[0]
                    vec[i] = orig
                    fd = (lp - lm) / (2 * eps)
                    denom = max(abs(fd), abs(grad[i]), 1e-8)
                    assert abs(fd - grad[i]) / denom <= 1e-4

    def test_cooccurring_pair_alignment_increases(self):
        # (a, b) co-occur; c/d dominate the noise distribution so the
        # positive term drives a's input vector toward b's context vector
        walks = [np.array([0, 1])] * 50 + [np.array([2, 3])] * 400
        corpus = WalkCorpus(walks=walks, node_ids=["a", "b", "c", "d"],
                            walks_per_node=1, walk_length=2, seed=0)
        cosines = []
        for epochs in (1, 3, 6):
            table, _ = train_skipgram(corpus, dim=16, window=2, negatives=2,
                                      epochs=epochs, lr=0.05, seed=1)
            va = table.vectors["a"]
            ub = table.context_vectors["b"]
            cosines.append(
                float(va @ ub / (np.linalg.norm(va) * np.linalg.norm(ub))))
        assert cosines[0] < cosines[1] < cosines[2]

    def test_barbell_community_separation(self):
        g = make_barbell_graph(10)
        corpus = generate_walks(g, walks_per_node=5, walk_length=20, seed=0)
        table, losses = train_skipgram(corpus, dim=32, window=5, negatives=5,
                                       epochs=3, lr=0.05, seed=0)
        margin = cosine_margin(table, 10)
        assert margin >= 0.2
        assert losses == sorted(losses, reverse=True)  # non-increasing

    def test_empty_corpus_rejected(self):
        corpus = WalkCorpus([], [], 1, 2, 0)
        with pytest.raises(ValidationError):
            train_skipgram(corpus)

    def test_deterministic_rerun(self):
        g = make_barbell_graph(4)
        corpus = generate_walks(g, 2, 6, seed=0)
        t1, _ = train_skipgram(corpus, dim=8, epochs=1, seed=3)
        t2, _ = train_skipgram(corpus, dim=8, epochs=1, seed=3)
        for rid in t1.vectors:
            assert np.array_equal(t1.vectors[rid], t2.vectors[rid])


def cosine_margin(table, clique_size):
    """Mean intra-clique cosine minus mean inter-clique cosine on the
    barbell node labels."""
    def cos(x, y):
        return float(x @ y / (np.linalg.norm(x) * np.linalg.norm(y)))
    a = [table.vectors[f"a{i}"] for i in range(clique_size)]
    b = [table.vectors[f"b{i}"] for i in range(clique_size)]
    intra = [cos(x, y) for grp in (a, b)
             for i, x in enumerate(grp) for y in grp[i + 1:]]
    inter = [cos(x, y) for x in a for y in b]
    return float(np.mean(intra) - np.mean(inter))


class TestEmbeddingTable:
    def test_lookup_present_and_missing(self):
        t = EmbeddingTable(dim=4, vectors={"x": np.arange(4.0)})
        assert np.array_equal(t.lookup("x"), np.arange(4.0))
        assert np.array_equal(t.lookup("absent"), np.zeros(4))
        assert t.misses == 1

    def test_text_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(2)
        t = EmbeddingTable(dim=6, vectors={
            f"n{i}": rng.normal(size=6) for i in range(5)})
        p = tmp_path / "emb.txt"
        t.save_text(p)
        assert p.read_text().splitlines()[0] == "5 6"
        t2 = EmbeddingTable.load_text(p)
        for rid in t.vectors:
            assert np.array_equal(t.vectors[rid], t2.vectors[rid])

    def test_binary_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(4)
        t = EmbeddingTable(dim=128, vectors={
            f"paper/{i}": rng.normal(size=128) for i in range(7)})
        p = tmp_path / "emb.bin"
        t.save_binary(p)
        t2 = EmbeddingTable.load_binary(p)
        assert t2.dim == 128
        for rid in t.vectors:
            assert np.array_equal(t.vectors[rid], t2.vectors[rid])

    def test_binary_magic_rejected(self, tmp_path):
        p = tmp_path / "junk.bin"
        p.write_bytes(b"\x00" * 64)
        with pytest.raises(ValidationError):
            EmbeddingTable.load_binary(p)


class TestEstimator:
    def test_fit_transform(self):
        g = make_barbell_graph(4)
        emb = DeepWalkEmbedder(dim=8, walks_per_node=2, walk_length=6,
                               epochs=1, seed=0)
        emb.fit(g)
        out = emb.transform(["a0", "nonexistent"])
        assert out.shape == (2, 8)
        assert np.array_equal(out[1], np.zeros(8))

    def test_transform_before_fit(self):
        with pytest.raises(NotFittedError):
            DeepWalkEmbedder().transform(["a"])

    def test_get_params(self):
        params = DeepWalkEmbedder(dim=16).get_params()
        assert params["dim"] == 16 and params["window"] == 5
