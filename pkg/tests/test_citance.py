import math

import numpy as np
import pytest

from citescope.citance import (Citance, CitingDocument, IdfTable, Marker,
                               append_citance_sections, build_idf,
                               citation_tfidf, extract_citances,
                               load_citance_cache, save_citance_cache)
from citescope.errors import ValidationError

from conftest import make_doc


def citing_doc(doc_id, sections, markers):
    return CitingDocument(
        doc_id=doc_id,
        sections=tuple(tuple(tuple(sent) for sent in sec) for sec in sections),
        markers=tuple(markers),
    )


class TestExtract:
    def test_single_sentence_section(self):
        doc = citing_doc("c1", [[["as", "shown", "in", "[1]"]]],
                        [Marker("target", 0, 0)])
        out = extract_citances("target", [doc])
        assert len(out) == 1
        assert len(out[0].sentences) == 1
        assert out[0].anchor == (0, 0)

    def test_mid_section_three_sentences(self):
        doc = citing_doc("c1", [[["before"], ["cite", "[1]"], ["after"]]],
                        [Marker("target", 0, 1)])
        out = extract_citances("target", [doc])
        assert out[0].sentences == (("before",), ("cite", "[1]"), ("after",))

    def test_edge_sentence_all_or_neither(self):
        # marker in the first sentence: only one neighbor exists, so none
        # are attached
        doc = citing_doc("c1", [[["cite", "[1]"], ["after"], ["more"]]],
                        [Marker("target", 0, 0)])
        out = extract_citances("target", [doc])
        assert out[0].sentences == (("cite", "[1]"),)

    def test_first_marker_selected(self):
        doc = citing_doc(
            "c1",
            [[["first", "[1]"], ["x"]], [["later", "[1]"]]],
            [Marker("target", 1, 0), Marker("target", 0, 0)],
        )
        out = extract_citances("target", [doc])
        assert out[0].anchor == (0, 0)

    def test_no_marker_skipped(self):
        doc = citing_doc("c1", [[["nothing"]]], [Marker("other", 0, 0)])
        assert extract_citances("target", [doc]) == []

    def test_sampling_capped_and_reproducible(self):
        docs = [citing_doc(f"c{i}", [[["cite", "[1]"]]],
                           [Marker("target", 0, 0)]) for i in range(40)]
        out1 = extract_citances("target", docs, max_citing=25, seed=7)
        out2 = extract_citances("target", docs, max_citing=25, seed=7)
        assert len(out1) == 25
        assert [c.citing_doc_id for c in out1] == \
            [c.citing_doc_id for c in out2]
        out3 = extract_citances("target", docs, max_citing=25, seed=8)
        assert len(out3) == 25  # different seed still caps at 25


class TestAppendSections:
    def test_zero_citances_unchanged(self):
        doc = make_doc()
        assert append_citance_sections(doc, []) == doc

    def test_three_citances_appended(self):
        doc = make_doc()
        citances = [Citance(f"c{i}", (("some", "text"),), (0, 0))
                    for i in range(3)]
        out = append_citance_sections(doc, citances)
        assert len(out.sections) == len(doc.sections) + 3
        assert all(s.kind == "citance" for s in out.sections[-3:])
        assert out.sections[-3].source_doc_id == "c0"
        assert out.mentions == doc.mentions

    def test_double_append_rejected(self):
        doc = append_citance_sections(
            make_doc(), [Citance("c", (("x",),), (0, 0))])
        with pytest.raises(ValidationError):
            append_citance_sections(doc, [])


class TestIdf:
    def toy_citances(self):
        return [
            Citance("c1", (("the", "method", "works"),), (0, 0)),
            Citance("c2", (("the", "dataset", "helps"),), (0, 0)),
            Citance("c3", (("the", "method", "fails", "badly"),), (0, 0)),
        ]

    def test_token_in_every_citance_min_idf(self):
        idf = build_idf(self.toy_citances())
        assert idf.idf("the") == pytest.approx(math.log(1) + 1) == 1.0

    def test_unseen_token_max_idf(self):
        idf = build_idf(self.toy_citances())
        assert "zzz" not in idf.doc_freq
        assert idf.idf("zzz") == pytest.approx(math.log(4) + 1)

    def test_hand_computed_values(self):
        idf = build_idf(self.toy_citances())
        assert idf.n_citances == 3
        # method appears in 2 of 3 citances
        assert idf.idf("method") == pytest.approx(math.log(4 / 3) + 1,
                                                  abs=1e-9)
        assert idf.idf("dataset") == pytest.approx(math.log(4 / 2) + 1,
                                                   abs=1e-9)

    def test_idf_table_round_trip(self, tmp_path):
        idf = build_idf(self.toy_citances())
        p = tmp_path / "idf.tsv"
        idf.save_text(p)
        loaded = IdfTable.load_text(p)
        assert loaded.n_citances == idf.n_citances
        assert loaded.doc_freq == idf.doc_freq


class TestTfidf:
    def test_no_citances_zero_vector(self):
        feats = citation_tfidf(["a", "b"], [], IdfTable())
        assert np.array_equal(feats, np.zeros(2))

    def test_absent_token_zero(self):
        citances = [Citance("c1", (("x", "y"),), (0, 0))]
        idf = build_idf(citances)
        feats = citation_tfidf(["absent"], citances, idf)
        assert feats[0] == 0.0

    def test_two_citance_hand_computation(self):
        c1 = Citance("c1", (("a", "a", "b"),), (0, 0))
        c2 = Citance("c2", (("a", "c"),), (0, 0))
        idf = build_idf([c1, c2])
        feats = citation_tfidf(["a", "b", "c"], [c1, c2], idf)
        idf_a = math.log(3 / 3) + 1
        idf_b = math.log(3 / 2) + 1
        idf_c = math.log(3 / 2) + 1
        assert feats[0] == pytest.approx(
            ((2 / 3) * idf_a + (1 / 2) * idf_a) / 2, abs=1e-9)
        assert feats[1] == pytest.approx(((1 / 3) * idf_b + 0) / 2, abs=1e-9)
        assert feats[2] == pytest.approx((0 + (1 / 2) * idf_c) / 2, abs=1e-9)

    def test_nonnegative_and_monotone(self):
        base = Citance("c1", (("w", "x", "y", "z", "q"),), (0, 0))
        more = Citance("c1", (("w", "w", "y", "z", "q"),), (0, 0))
        other = Citance("c2", (("k", "l"),), (0, 0))
        idf = build_idf([base, other])
        f_base = citation_tfidf(["w"], [base, other], idf)
        f_more = citation_tfidf(["w"], [more, other], idf)
        assert f_base[0] >= 0
        assert f_more[0] > f_base[0]


def test_cache_round_trip(tmp_path):
    citances = {"t1": [Citance("c1", (("a",), ("b", "c"), ("d",)), (0, 1))],
                "t2": [Citance("c2", (("x",),), (2, 0))]}
    p = tmp_path / "cache.jsonl"
    save_citance_cache(citances, p)
    loaded = load_citance_cache(p)
    assert loaded == citances
