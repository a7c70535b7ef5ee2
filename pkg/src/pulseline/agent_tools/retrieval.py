"""Lite retrieval over a plain-text wellness corpus plus user uploads.

Term-frequency scoring with stopword removal; deliberately lexical so the
whole index lives in memory with no external services. Ties break on
doc_id so rankings are stable and retrieve(q, k) is always a prefix of
retrieve(q, k+1).
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

_WORD = re.compile(r"[a-z0-9]+")

_STOPWORDS = frozenset("""
a an and are as at be but by for from has have how i if in is it its my of on
or that the their them they this to was we what when where which will with you
your
""".split())

BUNDLED_CORPUS_DIR = Path(__file__).parent / "corpus"


class EmptyIndex(RuntimeError):
    """Retrieve called before any document was indexed."""


@dataclass
class KnowledgePassage:
    doc_id: str
    text: str
    source: str            # general_corpus | user_uploaded
    score: float


def tokenize(text: str) -> list[str]:
    return [w for w in _WORD.findall(text.lower()) if w not in _STOPWORDS]


class KnowledgeIndex:
    def __init__(self, corpus_dir: str | Path | None = BUNDLED_CORPUS_DIR):
        self._docs: dict[str, tuple[str, str, Counter]] = {}
        if corpus_dir is not None:
            self.load_corpus(corpus_dir)

    def load_corpus(self, corpus_dir: str | Path) -> int:
        count = 0
        for path in sorted(Path(corpus_dir).glob("*.txt")):
            self.add_document(path.stem, path.read_text(encoding="utf-8"),
                              source="general_corpus")
            count += 1
        return count

    def add_document(self, doc_id: str, text: str,
                     source: str = "user_uploaded") -> None:
        self._docs[doc_id] = (text, source, Counter(tokenize(text)))

    def __len__(self) -> int:
        return len(self._docs)

    def score(self, query: str, doc_id: str) -> float:
        """Sum of the document's term frequencies over the query terms."""
        _, _, counts = self._docs[doc_id]
        return float(sum(counts[t] for t in tokenize(query)))

    def retrieve(self, query: str, k: int) -> list[KnowledgePassage]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self._docs:
            raise EmptyIndex("no documents indexed")
        ranked = sorted(
            ((self.score(query, doc_id), doc_id) for doc_id in self._docs),
            key=lambda pair: (-pair[0], pair[1]))
        return [
            KnowledgePassage(doc_id=doc_id, text=self._docs[doc_id][0],
                             source=self._docs[doc_id][1], score=score)
            for score, doc_id in ranked[:k]
        ]
