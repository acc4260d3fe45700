import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from robustrag.bm25 import (
    INDEX_MAGIC,
    BM25Retriever,
    Bm25Index,
    EmptyIndexError,
    InvalidOrdinalError,
    bm25_score,
    retrieve_top_m,
)
from robustrag.corpus import Corpus, CorpusError, Document, ingest_corpus, write_corpus
from robustrag.text import content_tokens, normalize_answer, tokenize


def _write_lines(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


def test_tokenize_examples():
    assert tokenize("Who painted the Mona Lisa?") == ["who", "painted", "the", "mona", "lisa"]
    assert tokenize("") == []
    assert tokenize("Steve Jobs still runs Apple today, who's the CEO?") == [
        "steve", "jobs", "still", "runs", "apple", "today", "who", "s", "the", "ceo"]


def test_content_tokens_and_normalize():
    assert content_tokens(tokenize("Who painted the Mona Lisa?")) == ["painted", "mona", "lisa"]
    assert normalize_answer("  The  Leonardo, da Vinci! ") == "leonardo da vinci"


def test_ingest_counts_lines(tmp_path):
    p = _write_lines(tmp_path / "c.jsonl", [{"id": f"d{i}", "title": "t", "text": f"body {i}"} for i in range(3)])
    corpus = ingest_corpus(p)
    assert corpus.doc_count == 3
    assert [d.id for d in corpus] == ["d0", "d1", "d2"]


def test_ingest_duplicate_id(tmp_path):
    p = _write_lines(tmp_path / "c.jsonl", [{"id": "d1", "title": "", "text": "a"}, {"id": "d1", "title": "", "text": "b"}])
    with pytest.raises(CorpusError, match="d1"):
        ingest_corpus(p)


def test_ingest_malformed_line_number(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text('{"id": "a", "title": "", "text": "x"}\n{not json}\n', encoding="utf-8")
    with pytest.raises(CorpusError, match=":2"):
        ingest_corpus(p)


def test_ingest_empty_file_then_retrieval_fails(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text("", encoding="utf-8")
    corpus = ingest_corpus(p)
    assert corpus.doc_count == 0
    with pytest.raises(EmptyIndexError):
        Bm25Index.build(corpus).retrieve("anything", 5)


def test_empty_text_rejected():
    with pytest.raises(CorpusError):
        Document("x", "title", "   ")


def test_corpus_round_trip(tmp_path, mona_corpus):
    write_corpus(mona_corpus, tmp_path / "c.jsonl")
    again = ingest_corpus(tmp_path / "c.jsonl")
    assert again.documents == mona_corpus.documents


def test_bm25_single_doc_values():
    idx = Bm25Index.build(Corpus([Document("a", "", "alpha")]))
    assert math.isclose(bm25_score(idx, ["alpha"], 0), math.log(4 / 3), rel_tol=0, abs_tol=1e-12)
    assert math.isclose(bm25_score(idx, ["alpha", "alpha"], 0), 2 * math.log(4 / 3), abs_tol=1e-12)
    assert bm25_score(idx, ["beta"], 0) == 0.0


def test_bm25_invalid_ordinal(mona_corpus):
    idx = Bm25Index.build(mona_corpus)
    with pytest.raises(InvalidOrdinalError):
        idx.score(["mona"], 4)
    with pytest.raises(IndexError):
        idx.score(["mona"], -1)


def test_bm25_params_validated(mona_corpus):
    with pytest.raises(ValueError):
        Bm25Index.build(mona_corpus, k1=0.0)
    with pytest.raises(ValueError):
        Bm25Index.build(mona_corpus, b=1.5)


def test_retrieve_ties_and_bounds():
    corpus = Corpus([Document("x", "", "same words"), Document("y", "", "same words"), Document("z", "", "other")])
    idx = Bm25Index.build(corpus)
    hits = retrieve_top_m(idx, "same", 10)
    assert [h.doc_id for h in hits] == ["x", "y", "z"]
    assert [h.retrieval_rank for h in hits] == [1, 2, 3]
    assert hits[0].retrieval_score == hits[1].retrieval_score > hits[2].retrieval_score == 0.0
    with pytest.raises(ValueError):
        idx.retrieve("same", 0)


def test_retrieve_mona_lisa(toy_inputs, toy_index):
    corpus, _ = toy_inputs
    both = [d.id for d in corpus if {"mona", "lisa"} <= set(tokenize(d.full_text))]
    top = toy_index.retrieve("mona lisa", 5)
    assert top[0].doc_id in both


def test_index_save_load_bytes(tmp_path, toy_inputs):
    corpus, _ = toy_inputs
    a, b = Bm25Index.build(corpus), Bm25Index.build(corpus)
    a.save(tmp_path / "a.idx")
    b.save(tmp_path / "b.idx")
    assert (tmp_path / "a.idx").read_bytes() == (tmp_path / "b.idx").read_bytes()
    assert (tmp_path / "a.idx").read_text().startswith(INDEX_MAGIC + "\n")
    loaded = Bm25Index.load(tmp_path / "a.idx")
    q = "who painted the mona lisa"
    assert [c.doc_id for c in loaded.retrieve(q, 20)] == [c.doc_id for c in a.retrieve(q, 20)]
    assert loaded.avg_doc_length == a.avg_doc_length


def test_index_bad_magic(tmp_path):
    (tmp_path / "x.idx").write_text("NOTANIDX\n{}\n")
    with pytest.raises(ValueError, match="CORMIDX1"):
        Bm25Index.load(tmp_path / "x.idx")


def test_postings_ordinal_invariant():
    with pytest.raises(ValueError):
        Bm25Index(["a"], {"t": [(3, 1)]}, [1])


def test_retriever_estimator_api(mona_corpus):
    est = BM25Retriever(k1=1.5, b=0.5)
    assert est.get_params() == {"k1": 1.5, "b": 0.5}
    est.fit(mona_corpus)
    assert est.predict(["mona lisa ceiling"], m=2)[0][0] in {"gold", "echo", "sistine"}
    cloned = clone(est)
    assert not hasattr(cloned, "index_")
    with pytest.raises(Exception):
        cloned.retrieve("x", 1)


words = st.sampled_from(["alpha", "beta", "gamma", "delta", "eps", "zeta"])
docs_st = st.lists(st.lists(words, min_size=1, max_size=8).map(" ".join), min_size=1, max_size=12)


@settings(max_examples=60, deadline=None)
@given(docs_st, st.lists(words, min_size=1, max_size=4), st.integers(1, 12), st.integers(1, 12))
def test_prefix_and_zero_properties(texts, query, m1, m2):
    corpus = Corpus([Document(f"d{i}", "", t) for i, t in enumerate(texts)])
    idx = Bm25Index.build(corpus)
    q = " ".join(query)
    lo, hi = sorted((m1, m2))
    small, big = idx.retrieve(q, lo), idx.retrieve(q, hi)
    assert big[:len(small)] == small
    scores = [c.retrieval_score for c in big]
    assert scores == sorted(scores, reverse=True)
    for ordinal, doc in enumerate(corpus):
        shared = set(query) & set(tokenize(doc.full_text))
        assert (idx.score(query, ordinal) == 0.0) == (not shared)
