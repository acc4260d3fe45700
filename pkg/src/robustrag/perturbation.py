"""Template-driven biased-query generation and constraint checking.

Three perturbation families are supported: a false premise naming a wrong
entity, a confirmation-bias claim woven into the question, and an appended
off-topic distractor sentence. Every generator is a pure function of its
inputs and the shipped template tables, so a perturbation set can be
regenerated byte for byte from ``(example, k, entity_pool, seed)``.
"""

import enum
import json
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .text import WH_WORDS, content_tokens, mentions_any, normalize_answer, tokenize, wh_word


SURVIVAL_THRESHOLD = 0.6
DEFAULT_MAX_RESAMPLES = 8

_AUXILIARIES = {"is", "was", "are", "were", "did", "does", "do", "has", "had", "can", "will"}
_CLAIM_PREFIXES = ("it is ", "it's ", "it was ")
_ELIDABLE_PREPS = {"of", "in", "at", "for"}


class PerturbationError(ValueError):
    """A perturbation precondition was violated."""


class GenerationError(RuntimeError):
    """No valid perturbation could be produced within the resample budget."""


class PType(str, enum.Enum):
    FALSE_PREMISE = "FalsePremise"
    CONFIRMATION_BIAS = "ConfirmationBias"
    DISTRACTION = "Distraction"

    @property
    def has_payload(self):
        return self is not PType.DISTRACTION


ROUND_ROBIN = (PType.FALSE_PREMISE, PType.CONFIRMATION_BIAS, PType.DISTRACTION)


@dataclass(frozen=True)
class QaExample:
    id: str
    question: str
    gold_answers: tuple
    answer_type: str = "entity"
    topic: str = None

    def __post_init__(self):
        if not self.question.strip():
            raise PerturbationError(f"example {self.id!r} has an empty question")
        if not self.gold_answers:
            raise PerturbationError(f"example {self.id!r} has no gold answers")
        object.__setattr__(self, "gold_answers", tuple(self.gold_answers))

    @property
    def topic_tokens(self):
        return content_tokens(tokenize(self.question))

    def is_gold(self, entity):
        norm = normalize_answer(entity)
        return any(norm == normalize_answer(g) for g in self.gold_answers)


@dataclass(frozen=True)
class PerturbedQuery:
    source_id: str
    text: str
    ptype: PType
    bias_payload: str = None
    perturbation_index: int = 1

    def __post_init__(self):
        if not self.text.strip():
            raise PerturbationError("perturbed text is empty")
        object.__setattr__(self, "ptype", PType(self.ptype))
        if self.ptype.has_payload != (self.bias_payload is not None):
            raise PerturbationError(
                f"{self.ptype.value} perturbation must "
                f"{'carry' if self.ptype.has_payload else 'not carry'} a bias payload"
            )

    def to_record(self):
        return {
            "source_id": self.source_id,
            "text": self.text,
            "ptype": self.ptype.value,
            "bias_payload": self.bias_payload,
            "k_index": self.perturbation_index,
        }

    @classmethod
    def from_record(cls, rec):
        return cls(rec["source_id"], rec["text"], PType(rec["ptype"]),
                   rec.get("bias_payload"), int(rec["k_index"]))


@dataclass(frozen=True)
class PerturbationSet:
    source_id: str
    members: tuple

    @property
    def k(self):
        return len(self.members)

    def type_counts(self):
        counts = {t: 0 for t in ROUND_ROBIN}
        for m in self.members:
            counts[m.ptype] += 1
        return counts


@dataclass(frozen=True)
class Violation:
    rule: str
    detail: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.violations

    @property
    def rules(self):
        return [v.rule for v in self.violations]


# -- template tables ----------------------------------------------------------


@dataclass
class TemplateTables:
    false_premise: list
    confirmation_bias: dict
    claims: dict
    verb_lexicon: dict
    banned_words: tuple
    distractors: dict

    @classmethod
    def load(cls, templates_path=None, distractors_path=None):
        tpl = _read_json(templates_path, "templates.json")
        inv = _read_json(distractors_path, "distractors.json")
        tables = cls(
            false_premise=list(tpl["false_premise"]),
            confirmation_bias={k: list(v) for k, v in tpl["confirmation_bias"].items()},
            claims={k: list(v) for k, v in tpl["claims"].items()},
            verb_lexicon={k: tuple(v) for k, v in tpl["verb_lexicon"].items()},
            banned_words=tuple(tpl.get("banned_words", ())),
            distractors={k: list(v) for k, v in inv.items()},
        )
        if len(tables.false_premise) < 4 or any(len(v) < 4 for v in tables.confirmation_bias.values()):
            raise ValueError("template tables need at least 4 templates per type and subtype")
        return tables


_DEFAULT_TABLES = None


def default_tables():
    global _DEFAULT_TABLES
    if _DEFAULT_TABLES is None:
        _DEFAULT_TABLES = TemplateTables.load()
    return _DEFAULT_TABLES


def _read_json(path, default_name):
    if path is None:
        return json.loads(resources.files("robustrag.data").joinpath(default_name).read_text("utf-8"))
    return json.loads(Path(path).read_text(encoding="utf-8"))


# -- question anatomy ---------------------------------------------------------


@dataclass(frozen=True)
class QuestionParts:
    wh: str           # lowercased interrogative, e.g. "who"
    wh_phrase: str    # surface form, e.g. "Which city"
    predicate: str    # question body after the wh-phrase, without "?"
    verb: str
    topic: str


def parse_question(question, topic=None):
    """Split ``"Who painted the Mona Lisa?"`` into wh-phrase, predicate and topic.

    The topic defaults to the predicate's object (everything after its first
    word), which suits the "Wh VERB OBJECT?" shapes the templates target.
    """
    body = question.strip().rstrip("?").strip()
    words = body.split()
    if not words:
        raise PerturbationError("empty question")
    n_wh = 0
    if words[0].lower() in WH_WORDS:
        n_wh = 1
        if (words[0].lower() in {"which", "what", "whose", "how"} and len(words) > 2
                and words[1].lower() not in _AUXILIARIES):
            n_wh = 2
    wh = wh_word(tokenize(body)) or ""
    rest = words[n_wh:]
    predicate = " ".join(rest)
    verb = rest[0].lower() if rest else ""
    if topic is None:
        topic = " ".join(rest[1:]) or predicate
    return QuestionParts(wh, " ".join(words[:n_wh]), predicate, verb, topic)


def _lower_first(s):
    return s[:1].lower() + s[1:]


def _upper_first(s):
    return s[:1].upper() + s[1:]


def _elide_question(question, claim):
    """Shorten a question whose trailing phrase is already stated in the claim.

    ``("Who is the CEO of Apple?", "Steve Jobs still runs Apple today")``
    gives ``"who's the CEO?"``.
    """
    words = question.strip().rstrip("?").split()
    claim_tokens = set(tokenize(claim))
    for i in range(len(words) - 1, 1, -1):
        if words[i].lower() in _ELIDABLE_PREPS:
            tail = content_tokens(tokenize(" ".join(words[i + 1:])))
            if tail and set(tail) <= claim_tokens:
                words = words[:i]
            break
    if len(words) > 1 and words[0].lower() in WH_WORDS and words[1].lower() == "is":
        words = [f"{words[0]}'s"] + words[2:]
    return _lower_first(" ".join(words)) + "?"


def _claim_np(claim):
    low = claim.lower()
    for prefix in _CLAIM_PREFIXES:
        if low.startswith(prefix):
            return claim[len(prefix):]
    return claim


def _render(template, **slots):
    try:
        return template.format(**slots)
    except KeyError as exc:
        raise PerturbationError(f"template slot {exc} unavailable for this question") from None


def _pick_template(templates, index, label):
    if not 0 <= index < len(templates):
        raise PerturbationError(f"{label} template index {index} out of range 0..{len(templates) - 1}")
    return templates[index]


# -- generators -----------------------------------------------------------------


def perturb_false_premise(example, wrong_entity, template_index=0, tables=None, k_index=1):
    """Embed ``wrong_entity`` as a background presupposition of the question."""
    tables = tables or default_tables()
    if example.is_gold(wrong_entity):
        raise PerturbationError(f"wrong entity {wrong_entity!r} is a gold answer of {example.id!r}")
    template = _pick_template(tables.false_premise, template_index, "false-premise")
    parts = parse_question(example.question, example.topic)
    slots = {"wrong": wrong_entity, "topic": parts.topic, "question": _lower_first(example.question.strip()),
             "wh": parts.wh}
    if parts.verb in tables.verb_lexicon:
        slots["work"], slots["act"] = tables.verb_lexicon[parts.verb]
    text = _render(template, **slots)
    return PerturbedQuery(example.id, text, PType.FALSE_PREMISE, wrong_entity, k_index)


def make_claim(example, wrong_entity, subtype, claim_index=0, tables=None):
    tables = tables or default_tables()
    templates = tables.claims.get(subtype)
    if templates is None:
        raise PerturbationError(f"unknown confirmation-bias subtype {subtype!r}")
    parts = parse_question(example.question, example.topic)
    template = _pick_template(templates, claim_index, f"{subtype} claim")
    return _render(template, wrong=wrong_entity, predicate=parts.predicate, topic=parts.topic)


def perturb_confirmation_bias(example, false_claim, subtype, template_index=0, tables=None, k_index=1):
    """Ask the question from inside the worldview stated by ``false_claim``."""
    tables = tables or default_tables()
    if not false_claim or not false_claim.strip():
        raise PerturbationError("false claim is empty")
    if mentions_any(false_claim, example.gold_answers):
        raise PerturbationError(f"false claim {false_claim!r} contains a gold answer of {example.id!r}")
    templates = tables.confirmation_bias.get(subtype)
    if templates is None:
        raise PerturbationError(f"unknown confirmation-bias subtype {subtype!r}")
    template = _pick_template(templates, template_index, f"{subtype} confirmation-bias")
    parts = parse_question(example.question, example.topic)
    claim = false_claim.strip()
    text = _render(
        template,
        claim=claim,
        Claim=_upper_first(claim),
        np=_claim_np(claim),
        topic=parts.topic,
        question=_lower_first(example.question.strip()),
        elided=_elide_question(example.question, claim),
    )
    return PerturbedQuery(example.id, text, PType.CONFIRMATION_BIAS, claim, k_index)


def perturb_distraction(example, topic, distractor_sentence, tables=None, k_index=1):
    """Append one standalone sentence from an unrelated domain."""
    tables = tables or default_tables()
    if tables.distractors and topic not in tables.distractors:
        raise PerturbationError(f"distractor topic {topic!r} is not in the inventory")
    overlap = set(content_tokens(tokenize(distractor_sentence))) & set(example.topic_tokens)
    if overlap:
        raise PerturbationError(f"distractor shares content tokens with the question: {sorted(overlap)}")
    if mentions_any(distractor_sentence, example.gold_answers):
        raise PerturbationError("distractor mentions a gold answer")
    text = f"{example.question.strip()} {distractor_sentence.strip()}"
    return PerturbedQuery(example.id, text, PType.DISTRACTION, None, k_index)


# -- validation -----------------------------------------------------------------


def _contains_tokens(tokens, phrase_tokens):
    n = len(phrase_tokens)
    return any(tokens[i:i + n] == phrase_tokens for i in range(len(tokens) - n + 1))


def validate_perturbation(example, perturbed, banned_words=None):
    """Check a rewrite against the protocol rules; never raises.

    R1  the clean question's wh-word survives
    R2  no hedging vocabulary
    R3  no gold alias introduced by the rewrite
    R4  distractors share no content token with the question
    R5  the information need survives: >= 60% of the question's content
        tokens for payload rewrites, the verbatim question prefix for
        distractions
    """
    if banned_words is None:
        banned_words = default_tables().banned_words
    report = ValidationReport()
    clean_tokens = tokenize(example.question)
    text_tokens = tokenize(perturbed.text)

    wh = wh_word(clean_tokens)
    if wh is not None and wh not in text_tokens:
        report.violations.append(Violation("R1", f"wh-word {wh!r} missing"))

    for phrase in banned_words:
        if _contains_tokens(text_tokens, tokenize(phrase)):
            report.violations.append(Violation("R2", f"hedging word {phrase!r}"))

    clean_norm = " ".join(clean_tokens)
    leaked = [g for g in example.gold_answers
              if mentions_any(perturbed.text, [g]) and not mentions_any(clean_norm, [g])]
    if leaked:
        report.violations.append(Violation("R3", f"gold alias {leaked[0]!r} in added material"))

    question = example.question.strip()
    if perturbed.ptype is PType.DISTRACTION:
        if perturbed.text.startswith(question):
            extra = set(content_tokens(tokenize(perturbed.text[len(question):])))
            overlap = extra & set(content_tokens(clean_tokens))
            if overlap:
                report.violations.append(Violation("R4", f"distractor overlaps question on {sorted(overlap)}"))
        else:
            report.violations.append(Violation("R5", "clean question is not a verbatim prefix"))
    else:
        wanted = set(content_tokens(clean_tokens))
        if wanted:
            kept = len(wanted & set(text_tokens)) / len(wanted)
            if kept < SURVIVAL_THRESHOLD:
                report.violations.append(Violation("R5", f"only {kept:.0%} of content tokens survive"))
    return report


# -- entity pool and set generation ---------------------------------------------


class EntityPool:
    """Gold answers of other examples, grouped by answer-type tag."""

    def __init__(self, by_type):
        self.by_type = {t: list(v) for t, v in by_type.items()}

    @classmethod
    def from_examples(cls, examples):
        by_type = {}
        for ex in examples:
            bucket = by_type.setdefault(ex.answer_type, [])
            if ex.gold_answers[0] not in bucket:
                bucket.append(ex.gold_answers[0])
        return cls(by_type)

    def candidates(self, example):
        return [e for e in self.by_type.get(example.answer_type, []) if not example.is_gold(e)]


def generate_perturbation_set(example, k, entity_pool, seed, tables=None,
                              max_resamples=DEFAULT_MAX_RESAMPLES, banned_words=None):
    """Build ``k`` validated perturbations with types assigned I, II, III, I, ...

    Confirmation-bias members alternate between the historical and
    quantitative subtypes. All random choices come from a generator seeded
    on ``(seed, example.id)``.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    tables = tables or default_tables()
    rng = random.Random(f"{seed}|{example.id}")
    wrong_pool = entity_pool.candidates(example)
    members = []
    seen_texts = set()
    n_bias = 0
    for j in range(k):
        ptype = ROUND_ROBIN[j % 3]
        if ptype.has_payload and not wrong_pool:
            raise GenerationError(f"entity pool exhausted for {example.id!r} ({example.answer_type})")
        subtype = None
        if ptype is PType.CONFIRMATION_BIAS:
            subtype = ("historical", "quantitative")[n_bias % 2]
            n_bias += 1
        fallback = None
        chosen = None
        for _ in range(max_resamples):
            try:
                cand = _draw(example, ptype, subtype, wrong_pool, rng, tables, j + 1)
            except PerturbationError:
                continue
            if not validate_perturbation(example, cand, banned_words).valid:
                continue
            if cand.text in seen_texts:
                fallback = fallback or cand
                continue
            chosen = cand
            break
        chosen = chosen or fallback
        if chosen is None:
            raise GenerationError(
                f"no valid {ptype.value} perturbation for {example.id!r} after {max_resamples} draws"
            )
        seen_texts.add(chosen.text)
        members.append(chosen)
    return PerturbationSet(example.id, tuple(members))


def _draw(example, ptype, subtype, wrong_pool, rng, tables, k_index):
    if ptype is PType.FALSE_PREMISE:
        wrong = rng.choice(wrong_pool)
        idx = rng.randrange(len(tables.false_premise))
        return perturb_false_premise(example, wrong, idx, tables, k_index)
    if ptype is PType.CONFIRMATION_BIAS:
        wrong = rng.choice(wrong_pool)
        claim = make_claim(example, wrong, subtype, rng.randrange(len(tables.claims[subtype])), tables)
        idx = rng.randrange(len(tables.confirmation_bias[subtype]))
        return perturb_confirmation_bias(example, claim, subtype, idx, tables, k_index)
    domain = rng.choice(sorted(tables.distractors))
    sentence = rng.choice(tables.distractors[domain])
    return perturb_distraction(example, domain, sentence, tables, k_index)


ADVERSARY_PROMPT = (
    "Rewrite the question as a user who holds the stated belief would ask it. Keep the question word and "
    "what is being asked; do not hedge and do not reveal the true answer. Reply with the rewritten question only."
    "\n\nQuestion: {question}\nRewrite type: {ptype}\nBelief: {payload}\nRewrite:"
)


class RemoteAdversary:
    """Rewrites through a chat-completion endpoint instead of the templates.

    Outputs go through :func:`validate_perturbation` like template output; a
    rewrite that breaks a rule raises :class:`PerturbationError`. The prompt
    is a placeholder.
    """

    def __init__(self, endpoint, client=None, banned_words=None):
        from .remote import RemoteClient

        self.endpoint = endpoint
        self.client = client or RemoteClient(endpoint)
        self.banned_words = banned_words

    def perturb(self, example, ptype, payload=None, k_index=1):
        ptype = PType(ptype)
        prompt = ADVERSARY_PROMPT.format(question=example.question, ptype=ptype.value, payload=payload or "none")
        text = self.client.complete(prompt)
        if ptype is PType.DISTRACTION:
            payload = None
            if not text.startswith(example.question.strip()):
                text = f"{example.question.strip()} {text}"
        pq = PerturbedQuery(example.id, text, ptype, payload, k_index)
        report = validate_perturbation(example, pq, self.banned_words)
        if not report.valid:
            raise PerturbationError(f"remote rewrite rejected ({', '.join(report.rules)}): {text!r}")
        return pq


# -- file formats -------------------------------------------------------------------


def load_qa(path):
    """Read a JSON-lines QA file with ``id, question, answers, answer_type``."""
    examples = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                examples.append(QaExample(
                    str(rec["id"]), rec["question"], tuple(rec["answers"]),
                    rec.get("answer_type", "entity"), rec.get("topic"),
                ))
            except (json.JSONDecodeError, KeyError, TypeError, PerturbationError) as exc:
                raise ValueError(f"{path}:{lineno}: bad QA record ({exc})") from None
    return examples


def write_perturbations(sets, path):
    with Path(path).open("w", encoding="utf-8") as fh:
        for pset in sets:
            for member in pset.members:
                fh.write(json.dumps(member.to_record(), ensure_ascii=False) + "\n")


def read_perturbations(path):
    """Group a perturbation file back into sets, preserving file order."""
    grouped = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                pq = PerturbedQuery.from_record(json.loads(line))
                grouped.setdefault(pq.source_id, []).append(pq)
    return {sid: PerturbationSet(sid, tuple(ms)) for sid, ms in grouped.items()}
