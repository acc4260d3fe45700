import json

import pytest

from robustrag.bm25 import Bm25Index, RankedCandidate
from robustrag.corpus import Corpus, Document
from robustrag.distill import (
    CandidatePools,
    DatasetFormatError,
    DistillDataset,
    ListwiseGroup,
    RobustnessLabel,
    build_candidate_pools,
    build_dataset,
    build_listwise_groups,
    label_robustness,
    read_dataset,
    write_dataset,
)
from robustrag.generation import SycophantSim
from robustrag.perturbation import PerturbationSet, PerturbedQuery, PType, QaExample

MONA = QaExample("mona", "Who painted the Mona Lisa?", ("Leonardo da Vinci",), "painter")


def _pset(k, types=None):
    types = types or [PType.FALSE_PREMISE, PType.CONFIRMATION_BIAS, PType.DISTRACTION]
    members = []
    for j in range(k):
        t = types[j % len(types)]
        payload = "Michelangelo" if t.has_payload else None
        text = {PType.FALSE_PREMISE: "Given that Michelangelo is behind the Mona Lisa, who painted the Mona Lisa?",
                PType.CONFIRMATION_BIAS: "Since Michelangelo painted the Mona Lisa, who painted the Mona Lisa?",
                PType.DISTRACTION: "Who painted the Mona Lisa? Bees dance to share directions."}[t]
        members.append(PerturbedQuery("mona", text, t, payload, j + 1))
    return PerturbationSet("mona", tuple(members))


class Scripted:
    """Correct exactly on the listed perturbation texts (by position in each batch of K)."""

    def __init__(self, good_positions, k):
        self.good, self.k = set(good_positions), k

    def generate_many(self, requests):
        return ["Leonardo da Vinci" if i % self.k in self.good else "Michelangelo" for i, _ in enumerate(requests)]


@pytest.fixture
def corpus():
    return Corpus([
        Document("gold", "Leonardo da Vinci", "Leonardo da Vinci painted the Mona Lisa."),
        Document("echo", "Belief", "Michelangelo painted the Mona Lisa, fans say."),
        Document("bees", "Bees", "Bees dance to share directions with the hive."),
        Document("misc", "Misc", "Glaciers carve valleys over many centuries."),
    ])


def test_pool_counts(corpus):
    index = Bm25Index.build(corpus)
    pools = build_candidate_pools(MONA, _pset(5), index, m=3)
    assert len(pools.perturbed_pools) == 5 and len(pools.clean_pool) == 3
    empty = build_candidate_pools(MONA, PerturbationSet("mona", ()), index, m=3)
    assert empty.perturbed_pools == ()


def test_distraction_pool_differs(corpus):
    index = Bm25Index.build(corpus)
    pools = build_candidate_pools(MONA, _pset(3), index, m=2)
    clean = [c.doc_id for c in pools.clean_pool]
    distract = [c.doc_id for c in pools.perturbed_pools[2]]
    assert "bees" in distract and "bees" not in clean


def test_label_examples(corpus):
    lab = label_robustness(MONA, _pset(5), corpus["gold"], Scripted({0, 2, 4}, 5))
    assert lab.score == 0.6 and lab.per_perturbation == (True, False, True, False, True)
    sim = SycophantSim()
    assert label_robustness(MONA, _pset(5), corpus["misc"], sim).score == 0.0
    only_iii = _pset(3, [PType.DISTRACTION])
    assert label_robustness(MONA, only_iii, corpus["gold"], sim).score == 1.0
    # payload rewrites lose the answer on the echo doc
    assert label_robustness(MONA, _pset(5), corpus["echo"], sim).score == 0.0
    with pytest.raises(ValueError):
        label_robustness(MONA, PerturbationSet("mona", ()), corpus["gold"], sim)


def test_label_failure_context(corpus):
    class Broken:
        def generate_many(self, requests):
            raise ConnectionError("down")

    with pytest.raises(RuntimeError, match="mona.*gold"):
        label_robustness(MONA, _pset(2), corpus["gold"], Broken())


def _pools_with(clean_ids, pool_ids, k=1):
    cand = lambda ids: tuple(RankedCandidate(d, r, 1.0) for r, d in enumerate(ids, start=1))
    return CandidatePools("q", cand(clean_ids), tuple(cand(pool_ids) for _ in range(k)),
                          tuple(f"t{j}" for j in range(k)), tuple(range(1, k + 1)), 50)


def _labels(pos, zero):
    labs = {d: RobustnessLabel("q", d, 0.4, (True, True, False, False, False)) for d in pos}
    labs.update({d: RobustnessLabel("q", d, 0.0, (False,) * 5) for d in zero})
    return labs


def test_group_sizes():
    zeros = [f"z{i}" for i in range(15)]
    groups, skipped = build_listwise_groups(_pools_with(["p"], zeros), _labels(["p"], zeros), 10, seed=3)
    assert len(groups) == 1 and len(groups[0]) == 11 and skipped == 0
    few = zeros[:6]
    groups, _ = build_listwise_groups(_pools_with(["p"], few), _labels(["p"], few), 10, seed=3)
    assert len(groups[0]) == 7
    g = groups[0]
    assert g.anchor == ("p", 0.4) and all(s == 0 for _, s in g.negatives)


def test_empty_positive_pool_skipped():
    zeros = ["a", "b", "c"]
    groups, skipped = build_listwise_groups(_pools_with(zeros, zeros, k=4), _labels([], zeros), 10, seed=0)
    assert groups == [] and skipped == 4


def test_group_sampling_seeded():
    zeros = [f"z{i}" for i in range(20)]
    pools, labels = _pools_with(["p1", "p2", "p3"], zeros, k=3), _labels(["p1", "p2", "p3"], zeros)
    assert build_listwise_groups(pools, labels, 5, 11) == build_listwise_groups(pools, labels, 5, 11)
    assert build_listwise_groups(pools, labels, 5, 11) != build_listwise_groups(pools, labels, 5, 12)


def _dataset(n):
    groups = [ListwiseGroup(f"q{i}", 1 + i % 5, f"text {i}", (f"a{i}", f"b{i}", f"c{i}"), (0.0, 0.6, 0.0), 1)
              for i in range(n)]
    return DistillDataset(groups, 5, 10, 42, {"m": 20})


def test_dataset_round_trip(tmp_path):
    ds = _dataset(100)
    write_dataset(ds, tmp_path / "d.jsonl")
    back = read_dataset(tmp_path / "d.jsonl")
    assert back.groups == ds.groups and (back.k, back.n_neg, back.seed) == (5, 10, 42)
    assert back.config_hash == ds.config_hash
    header = json.loads((tmp_path / "d.jsonl").read_text().splitlines()[0])
    assert header["version"] == "CORMDS1" and {"k", "n_neg", "seed", "config_hash"} <= set(header)


def test_dataset_empty_and_version(tmp_path):
    write_dataset(_dataset(0), tmp_path / "e.jsonl")
    assert read_dataset(tmp_path / "e.jsonl").groups == []
    assert len((tmp_path / "e.jsonl").read_text().splitlines()) == 1
    (tmp_path / "v.jsonl").write_text(json.dumps({"version": "CORMDS9", "k": 1, "n_neg": 1, "seed": 0}) + "\n")
    with pytest.raises(DatasetFormatError, match="CORMDS9"):
        read_dataset(tmp_path / "v.jsonl")


def test_build_dataset_end_to_end(corpus):
    index = Bm25Index.build(corpus)
    ds = build_dataset([MONA], {"mona": _pset(5)}, index, corpus, SycophantSim(), m=4, n_neg=10, seed=1)
    assert ds.k == 5 and len(ds.groups) == 5
    for g in ds.groups:
        assert g.anchor[0] == "gold" and "echo" in g.doc_ids
    assert ds.provenance["skipped_groups"] == 0
