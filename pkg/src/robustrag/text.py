"""Tokenization and answer normalization shared by every stage."""

import re

_TOKEN_RE = re.compile(r"[^\W_]+")

# Kept small on purpose: premise phrasing ("who is", "was") must stay visible
# to the retriever, so this list only decides what counts as *content*.
STOPWORDS = frozenset(
    """a an the of in on at to for by with from and or is was were be it
    that this as who whom what which when where how s""".split()
)

WH_WORDS = ("who", "whom", "whose", "what", "which", "when", "where", "why", "how")

_ARTICLES = ("a", "an", "the")


def tokenize(text):
    """Lowercase, strip punctuation and split on whitespace.

    Apostrophes count as punctuation, so ``"who's"`` becomes ``["who", "s"]``.
    """
    return _TOKEN_RE.findall(text.lower())


def content_tokens(tokens):
    return [t for t in tokens if t not in STOPWORDS]


def wh_word(tokens):
    """First interrogative word in ``tokens`` or None."""
    for t in tokens:
        if t in WH_WORDS:
            return t
    return None


def normalize_answer(text):
    """Lowercase, drop punctuation and leading articles, collapse whitespace."""
    tokens = tokenize(text)
    while tokens and tokens[0] in _ARTICLES:
        tokens = tokens[1:]
    return " ".join(tokens)


def contains_phrase(haystack, needle):
    """Token-boundary containment of two already-normalized strings."""
    if not needle:
        return False
    return f" {needle} " in f" {haystack} "


def mentions_any(text, aliases):
    """True if any alias occurs (normalized, on token boundaries) in ``text``."""
    norm = " ".join(tokenize(text))
    return any(contains_phrase(norm, normalize_answer(a)) for a in aliases)
