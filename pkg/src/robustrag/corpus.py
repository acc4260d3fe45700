"""Document store and JSON-lines corpus ingestion."""

import json
from dataclasses import dataclass, field
from pathlib import Path


class CorpusError(ValueError):
    """Malformed corpus file or violated corpus invariant."""


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise CorpusError(f"document {self.id!r} has empty text")

    @property
    def full_text(self):
        return f"{self.title} {self.text}" if self.title else self.text

    def to_dict(self):
        return {"id": self.id, "title": self.title, "text": self.text}


@dataclass
class Corpus:
    documents: list = field(default_factory=list)

    def __post_init__(self):
        self._by_id = {}
        for ordinal, doc in enumerate(self.documents):
            if doc.id in self._by_id:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            self._by_id[doc.id] = ordinal

    @property
    def doc_count(self):
        return len(self.documents)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, doc_id):
        return self.documents[self._by_id[doc_id]]

    def __contains__(self, doc_id):
        return doc_id in self._by_id

    def ordinal(self, doc_id):
        return self._by_id[doc_id]


def ingest_corpus(path):
    """Read a JSON-lines corpus, one ``{id, title, text}`` object per line.

    Blank lines are ignored. File order is preserved; duplicate ids and
    malformed lines raise :class:`CorpusError` with the offending line number.
    """
    docs = []
    seen = set()
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or not all(
                isinstance(rec.get(k), str) for k in ("id", "title", "text")
            ):
                raise CorpusError(f"{path}:{lineno}: expected string fields id, title, text")
            if rec["id"] in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate document id {rec['id']!r}")
            seen.add(rec["id"])
            try:
                docs.append(Document(rec["id"], rec["title"], rec["text"]))
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from None
    return Corpus(docs)


def write_corpus(corpus, path):
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in corpus:
            fh.write(json.dumps(doc.to_dict(), ensure_ascii=False) + "\n")
