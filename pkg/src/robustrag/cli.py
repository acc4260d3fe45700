"""Command-line entry point.

Exit codes: 0 success, 1 runtime error, 2 usage or config error, and 3 when
``infer`` abstains.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import benchmark as bm
from .bm25 import Bm25Index
from .config import ConfigError, SweepSpec, load_config
from .corpus import ingest_corpus
from .critic import write_training_log
from .distill import read_dataset, write_dataset
from .generation import make_backend
from .inference import ABSTAIN_MESSAGE, answer_pipeline
from .perturbation import load_qa, read_perturbations, write_perturbations

log = logging.getLogger("robustrag")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_ABSTAIN = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 by itself; raise instead so main() owns every exit code
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# flag dest -> dotted config field
FLAG_FIELDS = {
    "corpus": "paths.corpus", "qa": "paths.qa", "index": "paths.index",
    "perturbations": "paths.perturbations", "dataset": "paths.dataset",
    "params": "paths.params", "reports": "paths.reports",
    "k": "perturbation.k", "perturb_seed": "perturbation.seed", "templates": "perturbation.templates_path",
    "distractors": "perturbation.distractors_path",
    "distill_m": "distill.m", "n_neg": "distill.n_neg", "distill_seed": "distill.seed",
    "backend": "distill.backend",
    "epochs": "train.epochs", "batch": "train.batch", "lr": "train.lr", "tau": "train.tau",
    "lam": "train.lambda", "weight_decay": "train.weight_decay", "train_seed": "train.seed",
    "optimizer": "train.optimizer", "hash_bits": "train.hash_bits",
    "m": "infer.m", "c": "infer.c", "gamma": "infer.gamma",
    "eval_seed": "eval.seed",
}


def _add(p, *names):
    specs = {
        "corpus": ("--corpus", dict(help="corpus JSON-lines file")),
        "qa": ("--qa", dict(help="QA JSON-lines file")),
        "index": ("--index", dict(help="BM25 index file")),
        "perturbations": ("--perturbations", dict(help="perturbation JSON-lines file")),
        "dataset": ("--dataset", dict(help="distilled dataset file")),
        "params": ("--params", dict(help="critic parameter file")),
        "reports": ("--reports", dict(help="report output directory")),
        "k": ("--k", dict(type=int, help="perturbations per question")),
        "perturb_seed": ("--seed", dict(type=int, dest="perturb_seed", help="perturbation seed")),
        "templates": ("--templates", dict(help="template table JSON")),
        "distractors": ("--distractors", dict(help="distractor table JSON")),
        "distill_m": ("--m", dict(type=int, dest="distill_m", help="candidate pool depth for labelling")),
        "n_neg": ("--n-neg", dict(type=int, dest="n_neg", help="negatives per group")),
        "distill_seed": ("--seed", dict(type=int, dest="distill_seed", help="group sampling seed")),
        "backend": ("--backend", dict(help="teacher backend: sycophant_sim or remote")),
        "epochs": ("--epochs", dict(type=int)),
        "batch": ("--batch", dict(type=int)),
        "lr": ("--lr", dict(type=float)),
        "tau": ("--tau", dict(type=float)),
        "lam": ("--lambda", dict(type=float, dest="lam")),
        "weight_decay": ("--weight-decay", dict(type=float, dest="weight_decay")),
        "train_seed": ("--seed", dict(type=int, dest="train_seed")),
        "optimizer": ("--optimizer", dict()),
        "hash_bits": ("--hash-bits", dict(type=int, dest="hash_bits")),
        "m": ("--m", dict(type=int, help="retrieval depth")),
        "c": ("--c", dict(type=int, help="context capacity")),
        "gamma": ("--gamma", dict(type=float, help="safety threshold in [0, 1]")),
        "eval_seed": ("--eval-seed", dict(type=int, dest="eval_seed", help="seed for held-out rewrites")),
    }
    for name in names:
        flag, kw = specs[name]
        p.add_argument(flag, default=None, **kw)


def build_parser():
    parser = _Parser(prog="robustrag", description="Risk-aware retrieval-augmented QA toolkit.")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--set", action="append", default=[], metavar="SECTION.FIELD=VALUE",
                        help="override any config field (repeatable)")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("ingest", help="build and save the BM25 index")
    _add(p, "corpus", "index")

    p = sub.add_parser("perturb", help="generate biased rewrites of the QA set")
    _add(p, "qa", "perturbations", "k", "perturb_seed", "templates", "distractors")

    p = sub.add_parser("distill", help="label pooled documents and build listwise groups")
    _add(p, "corpus", "qa", "index", "perturbations", "dataset", "distill_m", "n_neg", "distill_seed", "backend")

    p = sub.add_parser("train", help="fit the evidence critic")
    _add(p, "corpus", "dataset", "params", "epochs", "batch", "lr", "tau", "lam", "weight_decay",
         "train_seed", "optimizer", "hash_bits")
    p.add_argument("--training-log", help="CSV of per-epoch losses")

    p = sub.add_parser("infer", help="answer one query (exit 3 on abstention)")
    _add(p, "corpus", "index", "params", "m", "c", "gamma")
    p.add_argument("--query", required=True)
    p.add_argument("--gold", action="append", default=[], help="gold alias hint for the simulator")
    p.add_argument("--bias-payload", help="bias payload hint for the simulator")
    p.add_argument("--json", action="store_true", help="print the full outcome record")

    p = sub.add_parser("eval", help="evaluate a trained critic against the BM25 baseline")
    _add(p, "corpus", "qa", "index", "params", "reports", "k", "m", "c", "gamma", "eval_seed")

    p = sub.add_parser("sweep", help="vary one of k, tau, m, gamma and tabulate results")
    p.add_argument("--param", required=True, choices=sorted(SweepSpec.TARGETS))
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", default="artifacts/sweep")

    p = sub.add_parser("demo", help="end-to-end run on the shipped toy benchmark")
    p.add_argument("--out", default="artifacts/demo")
    return parser


def _overrides(args):
    ov = {}
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects SECTION.FIELD=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        ov[key] = value
    for dest, dotted in FLAG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is not None:
            ov[dotted] = value
    return ov


def _need(path, what):
    if not path or not Path(path).exists():
        raise FileNotFoundError(f"{what} not found: {path} (run the producing subcommand first)")
    return path


def _corpus(cfg):
    return ingest_corpus(cfg.paths.corpus or bm.toy_data_path("toy_corpus.jsonl"))


def _qa(cfg):
    return load_qa(cfg.paths.qa or bm.toy_data_path("toy_qa.jsonl"))


def _parent(path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return path


def cmd_ingest(cfg, args):
    corpus = _corpus(cfg)
    index = Bm25Index.build(corpus)
    index.save(_parent(cfg.paths.index))
    print(f"indexed {corpus.doc_count} documents -> {cfg.paths.index}")


def cmd_perturb(cfg, args):
    examples = _qa(cfg)
    sets = bm.perturb_examples(examples, cfg.perturbation, tables=bm.tables_for(cfg))
    write_perturbations(sets, _parent(cfg.paths.perturbations))
    print(f"wrote {sum(s.k for s in sets)} perturbations for {len(sets)} questions -> {cfg.paths.perturbations}")


def cmd_distill(cfg, args):
    corpus = _corpus(cfg)
    examples = _qa(cfg)
    index = Bm25Index.load(_need(cfg.paths.index, "index"))
    psets = read_perturbations(_need(cfg.paths.perturbations, "perturbation file"))
    missing = [ex.id for ex in examples if ex.id not in psets]
    if missing:
        raise ValueError(f"perturbation file lacks questions {missing[:5]}")
    ds = bm.distill_examples(examples, psets, index, corpus, cfg)
    write_dataset(ds, _parent(cfg.paths.dataset))
    print(f"wrote {len(ds.groups)} groups ({ds.provenance['skipped_groups']} skipped) -> {cfg.paths.dataset}")


def cmd_train(cfg, args):
    corpus = _corpus(cfg)
    ds = read_dataset(_need(cfg.paths.dataset, "dataset"))
    critic = bm.train_critic(ds, corpus, cfg.train)
    critic.params_.save(_parent(cfg.paths.params))
    if args.training_log:
        write_training_log(critic.training_log_, _parent(args.training_log))
    last = critic.training_log_[-1]
    print(f"trained on {len(ds.groups)} groups, final mean loss {last.mean_total:.4f} -> {cfg.paths.params}")


def cmd_infer(cfg, args):
    corpus = _corpus(cfg)
    index = Bm25Index.load(_need(cfg.paths.index, "index"))
    if not cfg.infer.critic_remote:
        _need(cfg.paths.params, "critic params")
    critic = bm.load_critic(cfg, corpus)
    backend = make_backend(cfg.infer.backend, cfg.infer.remote)
    icfg = bm.infer_config(cfg)
    out = answer_pipeline(args.query, index, critic, backend, icfg, corpus,
                          gold_hint=tuple(args.gold), bias_payload=args.bias_payload)
    if args.json:
        print(json.dumps(out.to_record(None, icfg), sort_keys=True))
    elif out.abstained:
        print(ABSTAIN_MESSAGE)
    else:
        print(out.answer)
    return EXIT_ABSTAIN if out.abstained else EXIT_OK


def cmd_eval(cfg, args):
    corpus = _corpus(cfg)
    examples = _qa(cfg)
    index = Bm25Index.load(_need(cfg.paths.index, "index"))
    if not cfg.infer.critic_remote:
        _need(cfg.paths.params, "critic params")
    critic = bm.load_critic(cfg, corpus)
    result = bm.run_benchmark(cfg, cfg.paths.reports, corpus, examples, index, critic=critic)
    _print_summary(result.report)


def cmd_sweep(cfg, args):
    try:
        values = [json.loads(v) for v in args.values.split(",") if v.strip()]
    except json.JSONDecodeError as exc:
        raise UsageError(f"--values must be comma-separated numbers: {exc}") from None
    spec = SweepSpec(args.param, values, cfg)
    rows, path = bm.run_sweep(spec, args.out)
    for row in rows:
        print(f"{row['parameter']}={row['value']}: acc_biased={row['acc_biased']:.3f} "
              f"gap={row['robustness_gap']:.3f} abstain={row['abstain_rate']:.3f}")
    print(f"wrote {path}")


def cmd_demo(cfg, args):
    result = bm.run_benchmark(cfg, args.out)
    _print_summary(result.report)
    print(f"artifacts in {args.out}")


def _print_summary(rep):
    base = rep.baseline
    print(f"critic   acc_clean={rep.acc_clean:.3f} acc_biased={rep.acc_biased:.3f} gap={rep.robustness_gap:.3f}")
    print(f"baseline acc_clean={base['acc_clean']:.3f} acc_biased={base['acc_biased']:.3f} "
          f"gap={base['robustness_gap']:.3f}")


COMMANDS = {
    "ingest": cmd_ingest, "perturb": cmd_perturb, "distill": cmd_distill, "train": cmd_train,
    "infer": cmd_infer, "eval": cmd_eval, "sweep": cmd_sweep, "demo": cmd_demo,
}


def run_command(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError(parser.format_usage().strip())
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = load_config(args.config, _overrides(args))
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        code = COMMANDS[args.command](cfg, args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK if code is None else code


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
