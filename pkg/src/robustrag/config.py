"""Pipeline configuration: JSON file + dotted overrides, validated up front."""

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .validation import check_choice, check_scalar


class ConfigError(ValueError):
    pass


@dataclass
class PathsConfig:
    corpus: str = None
    qa: str = None
    index: str = "artifacts/index.cormidx"
    perturbations: str = "artifacts/perturbations.jsonl"
    dataset: str = "artifacts/dataset.jsonl"
    params: str = "artifacts/critic.json"
    reports: str = "artifacts/reports"


@dataclass
class PerturbationConfig:
    k: int = 5
    seed: int = 42
    banned_words: list = None
    templates_path: str = None
    distractors_path: str = None
    max_resamples: int = 8


@dataclass
class DistillConfig:
    m: int = 20
    n_neg: int = 10
    seed: int = 42
    backend: str = "sycophant_sim"
    remote: dict = None


@dataclass
class TrainSection:
    epochs: int = 3
    batch: int = 32
    lr: float = 0.1
    tau: float = 1.0
    # "lambda" in the file; renamed because it is a keyword
    lam: float = 1.0
    weight_decay: float = 0.01
    seed: int = 42
    optimizer: str = "adamw"
    hash_bits: int = 14


@dataclass
class InferSection:
    m: int = 100
    c: int = 3
    gamma: float = 0.0
    backend: str = "sycophant_sim"
    remote: dict = None
    critic_remote: dict = None


@dataclass
class EvalSection:
    ks: list = field(default_factory=lambda: [1, 3, 5, 10])
    coverage_grid: list = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    seed: int = 7


_SECTIONS = {
    "paths": PathsConfig,
    "perturbation": PerturbationConfig,
    "distill": DistillConfig,
    "train": TrainSection,
    "infer": InferSection,
    "eval": EvalSection,
}
_ALIASES = {("train", "lambda"): "lam"}


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    perturbation: PerturbationConfig = field(default_factory=PerturbationConfig)
    distill: DistillConfig = field(default_factory=DistillConfig)
    train: TrainSection = field(default_factory=TrainSection)
    infer: InferSection = field(default_factory=InferSection)
    eval: EvalSection = field(default_factory=EvalSection)

    def validate(self):
        def chk(section, name, **kw):
            try:
                return check_scalar(getattr(getattr(self, section), name), f"{section}.{name}", **kw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc)) from None

        chk("perturbation", "k", kind=int, min_val=0)
        chk("perturbation", "seed", kind=int)
        chk("perturbation", "max_resamples", kind=int, min_val=1)
        chk("distill", "m", kind=int, min_val=1)
        chk("distill", "n_neg", kind=int, min_val=1)
        chk("distill", "seed", kind=int)
        chk("train", "epochs", kind=int, min_val=1)
        chk("train", "batch", kind=int, min_val=1)
        chk("train", "lr", min_val=0.0, include_min=False)
        chk("train", "tau", min_val=0.0, include_min=False)
        chk("train", "lam", min_val=0.0)
        chk("train", "weight_decay", min_val=0.0)
        chk("train", "seed", kind=int)
        chk("train", "hash_bits", kind=int, min_val=1, max_val=24)
        chk("infer", "c", kind=int, min_val=1)
        chk("infer", "m", kind=int, min_val=self.infer.c if isinstance(self.infer.c, int) else 1)
        chk("infer", "gamma", min_val=0.0, max_val=1.0)
        chk("eval", "seed", kind=int)
        try:
            check_choice(self.train.optimizer, "train.optimizer", {"adamw", "sgd"})
            check_choice(self.distill.backend, "distill.backend", {"sycophant_sim", "remote"})
            check_choice(self.infer.backend, "infer.backend", {"sycophant_sim", "remote"})
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.eval.ks or any(not isinstance(k, int) or isinstance(k, bool) or k < 1 for k in self.eval.ks):
            raise ConfigError(f"eval.ks must be a non-empty list of positive integers, got {self.eval.ks!r}")
        grid = self.eval.coverage_grid
        if not grid or any(not isinstance(c, (int, float)) or not 0.0 < c <= 1.0 for c in grid):
            raise ConfigError(f"eval.coverage_grid values must lie in (0, 1], got {grid!r}")
        for section in ("distill", "infer"):
            if getattr(self, section).backend == "remote" and not getattr(self, section).remote:
                raise ConfigError(f"{section}.remote must be set when {section}.backend is 'remote'")
        return self

    def to_dict(self):
        d = {name: asdict(getattr(self, name)) for name in _SECTIONS}
        d["train"]["lambda"] = d["train"].pop("lam")
        return d

    def copy(self):
        return copy.deepcopy(self)


def _field_name(section, key):
    key = _ALIASES.get((section, key), key)
    if key not in {f.name for f in fields(_SECTIONS[section])}:
        raise ConfigError(f"unknown config field {section}.{key}")
    return key


def _from_dict(d, source="<config>"):
    if not isinstance(d, dict):
        raise ConfigError(f"{source}: top level must be an object")
    cfg = PipelineConfig()
    for section, values in d.items():
        if section not in _SECTIONS:
            raise ConfigError(f"{source}: unknown config section {section!r}")
        if not isinstance(values, dict):
            raise ConfigError(f"{source}: section {section!r} must be an object")
        target = getattr(cfg, section)
        for key, value in values.items():
            setattr(target, _field_name(section, key), value)
    return cfg


def parse_override(dotted, raw):
    """Coerce a ``section.field=value`` string using the field's default type."""
    if "." not in dotted:
        raise ConfigError(f"override {dotted!r} must look like section.field")
    section, key = dotted.split(".", 1)
    if section not in _SECTIONS:
        raise ConfigError(f"unknown config section {section!r}")
    name = _field_name(section, key)
    if not isinstance(raw, str):
        return section, name, raw
    try:
        return section, name, json.loads(raw)
    except json.JSONDecodeError:
        return section, name, raw


def load_config(path=None, overrides=None):
    """Defaults < file values < overrides; validated before return.

    ``overrides`` maps dotted names (``"train.tau"``) to values; strings are
    parsed as JSON when possible.
    """
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        cfg = _from_dict(raw, str(p))
    else:
        cfg = PipelineConfig()
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        section, name, value = parse_override(dotted, value)
        setattr(getattr(cfg, section), name, value)
    return cfg.validate()


@dataclass
class SweepSpec:
    parameter: str
    values: list
    fixed: PipelineConfig = field(default_factory=PipelineConfig)

    # parameters that change training data or the model vs inference-only ones
    RETRAIN = ("k", "tau")
    TARGETS = {"k": ("perturbation", "k"), "tau": ("train", "tau"), "m": ("infer", "m"), "gamma": ("infer", "gamma")}

    def validate(self):
        if self.parameter not in self.TARGETS:
            raise ConfigError(f"sweep parameter must be one of {sorted(self.TARGETS)}, got {self.parameter!r}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        for v in self.values:
            self.config_for(v)
        return self

    @property
    def retrains(self):
        return self.parameter in self.RETRAIN

    def config_for(self, value):
        cfg = self.fixed.copy()
        section, name = self.TARGETS[self.parameter]
        setattr(getattr(cfg, section), name, value)
        if self.parameter == "m":
            cfg.infer.c = min(cfg.infer.c, value) if isinstance(value, int) and value >= 1 else cfg.infer.c
        return cfg.validate()
