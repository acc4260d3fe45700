"""End-to-end driver: perturb -> distill -> train -> evaluate, plus sweeps.

Everything here composes the library modules; the CLI subcommands are thin
wrappers around these functions.
"""

import csv
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .bm25 import Bm25Index
from .corpus import ingest_corpus
from .critic import CriticParams, EvidenceCritic, RemoteCritic, write_training_log
from .distill import build_dataset, write_dataset
from .evaluation import (
    EvalRecord,
    EvalReport,
    accuracy,
    best_gold_rank,
    emit_report,
    paired_rank_comparison,
    per_type_accuracy,
    recall_at_k,
    risk_coverage_curve,
    robustness_gap,
    write_records,
)
from .generation import judge_correct, make_backend
from .inference import InferenceConfig, answer_pipeline, baseline_answer
from .perturbation import EntityPool, TemplateTables, generate_perturbation_set, load_qa, write_perturbations
from .text import mentions_any, normalize_answer

log = logging.getLogger(__name__)


def toy_data_path(name):
    """Path of a file shipped in the package's data directory."""
    return Path(str(resources.files("robustrag.data").joinpath(name)))


def resolve_inputs(cfg):
    corpus_path = cfg.paths.corpus or toy_data_path("toy_corpus.jsonl")
    qa_path = cfg.paths.qa or toy_data_path("toy_qa.jsonl")
    return ingest_corpus(corpus_path), load_qa(qa_path)


def tables_for(cfg):
    p = cfg.perturbation
    if p.templates_path or p.distractors_path:
        return TemplateTables.load(p.templates_path, p.distractors_path)
    return None


def perturb_examples(examples, pcfg, seed=None, tables=None):
    """One perturbation set per example (in example order)."""
    pool = EntityPool.from_examples(examples)
    seed = pcfg.seed if seed is None else seed
    return [
        generate_perturbation_set(ex, pcfg.k, pool, seed, tables=tables,
                                  max_resamples=pcfg.max_resamples, banned_words=pcfg.banned_words)
        for ex in examples
    ]


def distill_examples(examples, psets, index, corpus, cfg):
    backend = make_backend(cfg.distill.backend, cfg.distill.remote)
    by_id = {s.source_id: s for s in psets} if isinstance(psets, list) else psets
    provenance = {"k": cfg.perturbation.k, "perturbation_seed": cfg.perturbation.seed,
                  "n_neg": cfg.distill.n_neg, "backend": cfg.distill.backend, "corpus_docs": corpus.doc_count}
    return build_dataset(examples, by_id, index, corpus, backend, cfg.distill.m, cfg.distill.n_neg,
                         cfg.distill.seed, provenance)


def make_critic(tcfg):
    return EvidenceCritic(tau=tcfg.tau, lam=tcfg.lam, epochs=tcfg.epochs, batch_size=tcfg.batch,
                          learning_rate=tcfg.lr, weight_decay=tcfg.weight_decay, optimizer=tcfg.optimizer,
                          hash_bits=tcfg.hash_bits, seed=tcfg.seed)


def train_critic(dataset, corpus, tcfg):
    return make_critic(tcfg).fit(dataset, corpus)


def load_critic(cfg, corpus):
    if cfg.infer.critic_remote:
        from .remote import Endpoint
        return RemoteCritic(Endpoint.from_dict(cfg.infer.critic_remote))
    return EvidenceCritic.from_params(CriticParams.load(cfg.paths.params), corpus)


# -- evaluation --------------------------------------------------------------------


@dataclass
class EvalQuery:
    query_id: str
    text: str
    condition: str
    gold: tuple
    payload: str = None
    ptype: str = None


def eval_queries(examples, eval_psets):
    """Clean questions followed by every held-out perturbed rewrite."""
    queries = [EvalQuery(ex.id, ex.question, "clean", ex.gold_answers) for ex in examples]
    by_id = {s.source_id: s for s in eval_psets}
    for ex in examples:
        for p in by_id[ex.id].members:
            queries.append(EvalQuery(f"{ex.id}#{p.perturbation_index}", p.text, "biased", ex.gold_answers,
                                     p.bias_payload, p.ptype.value))
    return queries


@dataclass
class EvalRun:
    report: EvalReport
    records: list
    baseline_records: list
    paired_pairs: dict = field(default_factory=dict)


def _has_gold_fn(corpus, gold):
    norm = [normalize_answer(g) for g in gold]
    cache = {}

    def has_gold(doc_id):
        hit = cache.get(doc_id)
        if hit is None:
            hit = cache[doc_id] = mentions_any(normalize_answer(corpus[doc_id].full_text), norm)
        return hit

    return has_gold


def _summary(records):
    clean = [r for r in records if r.condition == "clean"]
    biased = [r for r in records if r.condition == "biased"]
    acc_c = accuracy(clean) if clean else float("nan")
    acc_b = accuracy(biased) if biased else float("nan")
    return acc_c, acc_b, robustness_gap(acc_c, acc_b), per_type_accuracy(biased)


def evaluate(queries, index, corpus, critic, backend, icfg, ecfg):
    """Run critic pipeline and BM25 baseline over ``queries``; build the report.

    Recall@k and paired ranks use the biased queries whose candidate pool
    contains a gold-bearing document.
    """
    records, base_records = [], []
    ranks_critic, ranks_bm25 = {}, {}
    for q in queries:
        out = answer_pipeline(q.text, index, critic, backend, icfg, corpus, gold_hint=q.gold, bias_payload=q.payload)
        base = baseline_answer(q.text, index, backend, icfg, corpus, gold_hint=q.gold, bias_payload=q.payload)
        has_gold = _has_gold_fn(corpus, q.gold)
        r_critic = best_gold_rank([s.doc_id for s in out.ranked], has_gold)
        r_bm25 = best_gold_rank([s.doc_id for s in base.ranked], has_gold)
        gold_ranks = None
        if r_critic is not None:
            gold_ranks = {"critic": r_critic, "bm25": r_bm25}
            if q.condition == "biased":
                ranks_critic[q.query_id] = r_critic
                ranks_bm25[q.query_id] = r_bm25
        correct = (not out.abstained) and judge_correct(out.answer, q.gold)
        records.append(EvalRecord(q.query_id, q.condition, out.confidence, correct, out.abstained, q.ptype, gold_ranks))
        base_records.append(EvalRecord(q.query_id, q.condition, base.confidence, judge_correct(base.answer, q.gold),
                                       False, q.ptype))

    acc_c, acc_b, gap, per_type = _summary(records)
    b_c, b_b, b_gap, b_type = _summary(base_records)
    baseline = {"acc_clean": b_c, "acc_biased": b_b, "robustness_gap": b_gap}
    if b_type:
        baseline["per_type_accuracy"] = b_type
    recall, paired, pairs = {}, None, {}
    if ranks_critic:
        recall = {"critic": recall_at_k(ranks_critic, ecfg.ks), "bm25": recall_at_k(ranks_bm25, ecfg.ks)}
        paired = paired_rank_comparison(ranks_bm25, ranks_critic)
        pairs = {q: (ranks_bm25[q], ranks_critic[q]) for q in ranks_critic}
    biased = [r for r in records if r.condition == "biased"] or records
    report = EvalReport(
        acc_clean=acc_c, acc_biased=acc_b, robustness_gap=gap, per_type_accuracy=per_type,
        recall_at_k=recall, paired_rank=paired,
        risk_coverage=risk_coverage_curve(biased, ecfg.coverage_grid),
        baseline=baseline, n_queries=len(queries),
    )
    return EvalRun(report, records, base_records, pairs)


def infer_config(cfg):
    return InferenceConfig(m=cfg.infer.m, c=cfg.infer.c, gamma=cfg.infer.gamma)


# -- full runs ---------------------------------------------------------------------


@dataclass
class BenchmarkResult:
    report: EvalReport
    run: EvalRun
    critic: object
    dataset: object
    files: dict = field(default_factory=dict)


def run_benchmark(cfg, out_dir=None, corpus=None, examples=None, index=None, critic=None):
    """Full toy run; writes every intermediate artifact when ``out_dir`` is set."""
    if corpus is None or examples is None:
        corpus, examples = resolve_inputs(cfg)
    index = index or Bm25Index.build(corpus)
    tables = tables_for(cfg)
    files = {}
    out = Path(out_dir) if out_dir else None
    if out:
        out.mkdir(parents=True, exist_ok=True)

    dataset = None
    if critic is None:
        psets = perturb_examples(examples, cfg.perturbation, tables=tables)
        dataset = distill_examples(examples, psets, index, corpus, cfg)
        log.info("distilled %d groups (%s)", len(dataset.groups), dataset.provenance)
        critic = train_critic(dataset, corpus, cfg.train)
        if out:
            files["index"] = out / "index.cormidx"
            index.save(files["index"])
            files["perturbations"] = out / "perturbations.jsonl"
            write_perturbations(psets, files["perturbations"])
            files["dataset"] = out / "dataset.jsonl"
            write_dataset(dataset, files["dataset"])
            files["params"] = out / "critic.json"
            critic.params_.save(files["params"])
            files["training_log"] = out / "training_log.csv"
            write_training_log(critic.training_log_, files["training_log"])

    # held-out rewrites: same questions, independently seeded perturbations
    eval_psets = perturb_examples(examples, cfg.perturbation, seed=cfg.eval.seed, tables=tables)
    backend = make_backend(cfg.infer.backend, cfg.infer.remote)
    run = evaluate(eval_queries(examples, eval_psets), index, corpus, critic, backend, infer_config(cfg), cfg.eval)
    if out:
        files["records"] = out / "records.jsonl"
        write_records(run.records, files["records"])
        files["baseline_records"] = out / "baseline_records.jsonl"
        write_records(run.baseline_records, files["baseline_records"])
        for p in emit_report(run.report, out / "report", "json", run.paired_pairs):
            files[p.stem] = p
    return BenchmarkResult(run.report, run, critic, dataset, files)


SWEEP_COLUMNS = ["parameter", "value", "acc_clean", "acc_biased", "robustness_gap", "baseline_acc_clean",
                 "baseline_acc_biased", "baseline_robustness_gap", "abstain_rate", "critic_recall_at_1"]


def run_sweep(spec, out_dir):
    """One row per swept value; k and tau retrain, m and gamma reuse one critic."""
    spec.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus, examples = resolve_inputs(spec.fixed)
    index = Bm25Index.build(corpus)
    shared_critic = None
    rows = []
    for value in spec.values:
        cfg = spec.config_for(value)
        sub = out / f"{spec.parameter}={value}"
        if spec.retrains:
            result = run_benchmark(cfg, sub, corpus, examples, index)
        else:
            if shared_critic is None:
                shared_critic = run_benchmark(spec.fixed, out / "shared", corpus, examples, index).critic
            result = run_benchmark(cfg, sub, corpus, examples, index, critic=shared_critic)
        rep = result.report
        abstain = sum(r.abstained for r in result.run.records) / len(result.run.records)
        rows.append({
            "parameter": spec.parameter, "value": value,
            "acc_clean": rep.acc_clean, "acc_biased": rep.acc_biased, "robustness_gap": rep.robustness_gap,
            "baseline_acc_clean": rep.baseline["acc_clean"], "baseline_acc_biased": rep.baseline["acc_biased"],
            "baseline_robustness_gap": rep.baseline["robustness_gap"], "abstain_rate": abstain,
            "critic_recall_at_1": rep.recall_at_k.get("critic", {}).get(1, ""),
        })
    path = out / f"sweep_{spec.parameter}.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    return rows, path
