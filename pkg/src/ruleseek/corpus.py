"""Document store with an inverted index, weighted-frequency ranking and
term co-occurrence lookup.

The index is an immutable snapshot: every ingestion rebuilds it and the new
snapshot is swapped in atomically, so searches never observe partial state.
"""
from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

SNAPSHOT_FORMAT = 1

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> List[str]:
    """Lowercase `text` and split it into alphanumeric tokens.

    Punctuation and other separators are dropped; empty input yields an
    empty list. Deterministic and idempotent on its own joined output.
    """
    return _TOKEN_RE.findall(text.lower())


def normalize_phrase(text: str) -> str:
    """Canonical form of a phrase: its tokens joined by single spaces."""
    return " ".join(tokenize(text))


@dataclass(frozen=True)
class Document:
    doc_id: int
    uri: str
    title: str
    body: str

    def token_stream(self) -> List[str]:
        """All indexed tokens of the document: title first, then body."""
        return tokenize(self.title) + tokenize(self.body)


@dataclass(frozen=True)
class Posting:
    term: str
    doc_id: int
    frequency: int
    positions: Tuple[int, ...]


@dataclass(frozen=True)
class RankedHit:
    doc_id: int
    score: float
    per_term_counts: Mapping[str, int]


class CorpusIndex:
    """Immutable inverted index over a fixed set of documents."""

    def __init__(self, documents: Sequence[Document]):
        self._documents: Dict[int, Document] = {d.doc_id: d for d in documents}
        self._streams: Dict[int, Tuple[str, ...]] = {}
        self._postings: Dict[str, Dict[int, Tuple[int, ...]]] = {}
        for doc in documents:
            stream = tuple(doc.token_stream())
            self._streams[doc.doc_id] = stream
            seen: Dict[str, List[int]] = {}
            for pos, tok in enumerate(stream):
                seen.setdefault(tok, []).append(pos)
            for tok, positions in seen.items():
                self._postings.setdefault(tok, {})[doc.doc_id] = tuple(positions)

    @property
    def doc_count(self) -> int:
        return len(self._documents)

    def document(self, doc_id: int) -> Document:
        return self._documents[doc_id]

    def documents(self) -> List[Document]:
        return [self._documents[i] for i in sorted(self._documents)]

    def token_stream(self, doc_id: int) -> Tuple[str, ...]:
        return self._streams[doc_id]

    def postings(self, term: str) -> List[Posting]:
        by_doc = self._postings.get(term, {})
        return [
            Posting(term=term, doc_id=doc_id, frequency=len(pos), positions=pos)
            for doc_id, pos in sorted(by_doc.items())
        ]

    def term_count(self, term: str, doc_id: int) -> int:
        return len(self._postings.get(term, {}).get(doc_id, ()))

    def vocabulary(self) -> Set[str]:
        return set(self._postings)

    def search(self, weighted_terms: Mapping[str, float]) -> List[RankedHit]:
        """Rank documents by the weight-scaled frequency of the query terms.

        Every returned document contains at least one query term. Hits are
        ordered by descending score with ties broken by ascending doc_id.
        Raises ValueError when no term carries a positive weight.
        """
        positive = {t: w for t, w in weighted_terms.items() if w > 0}
        if not positive:
            raise ValueError("search requires at least one term with positive weight")
        counts: Dict[int, Dict[str, int]] = {}
        for term in positive:
            for doc_id, positions in self._postings.get(term, {}).items():
                counts.setdefault(doc_id, {})[term] = len(positions)
        hits = []
        for doc_id, per_term in counts.items():
            score = sum(positive[t] * c for t, c in per_term.items())
            hits.append(RankedHit(doc_id=doc_id, score=score, per_term_counts=dict(sorted(per_term.items()))))
        hits.sort(key=lambda h: (-h.score, h.doc_id))
        return hits

    def cooccurring_terms(self, term: str, window: int = 4, min_count: int = 1) -> Set[str]:
        """Terms whose occurrences fall within `window` token positions of an
        occurrence of `term`, at least `min_count` times across the corpus.

        `term` itself is excluded; an unknown term yields the empty set.
        """
        if window < 1:
            raise ValueError("window must be >= 1")
        anchor_docs = self._postings.get(term, {})
        counts: Dict[str, int] = {}
        for doc_id, anchors in anchor_docs.items():
            stream = self._streams[doc_id]
            near: Set[int] = set()
            for a in anchors:
                lo = max(0, a - window)
                hi = min(len(stream) - 1, a + window)
                near.update(range(lo, hi + 1))
            for pos in near:
                tok = stream[pos]
                if tok != term:
                    counts[tok] = counts.get(tok, 0) + 1
        return {t for t, c in counts.items() if c >= min_count}

    def find_phrase_window(self, doc_id: int, tokens: Sequence[str], window: int = 8) -> Optional[Tuple[int, int]]:
        """Earliest position span covering all `tokens` within `window` slots.

        Returns (start, end) token positions with end - start < window, or
        None when the tokens never co-occur that tightly in the document.
        """
        if not tokens:
            return None
        wanted = set(tokens)
        occurrences = []
        for tok in wanted:
            positions = self._postings.get(tok, {}).get(doc_id)
            if not positions:
                return None
            occurrences.extend((p, tok) for p in positions)
        occurrences.sort()
        have: Dict[str, int] = {}
        best: Optional[Tuple[int, int]] = None
        left = 0
        for right in range(len(occurrences)):
            tok = occurrences[right][1]
            have[tok] = have.get(tok, 0) + 1
            while len(have) == len(wanted):
                span = (occurrences[left][0], occurrences[right][0])
                if span[1] - span[0] < window and (best is None or span < best):
                    best = span
                left_tok = occurrences[left][1]
                have[left_tok] -= 1
                if not have[left_tok]:
                    del have[left_tok]
                left += 1
        return best

    def snippet(self, doc_id: int, start: int, end: int, context_tokens: int = 12) -> str:
        """Reconstructed text around a matched span, `context_tokens` wide."""
        stream = self._streams[doc_id]
        span = end - start + 1
        pad = max(0, context_tokens - span)
        lo = max(0, start - pad // 2)
        hi = min(len(stream), lo + max(context_tokens, span))
        return " ".join(stream[lo:hi])


class Corpus:
    """Mutable document collection; the index is rebuilt on every ingestion."""

    def __init__(self) -> None:
        self._documents: List[Document] = []
        self._uris: Set[str] = set()
        self._index = CorpusIndex(())
        self._lock = threading.Lock()

    @property
    def index(self) -> CorpusIndex:
        return self._index

    @property
    def doc_count(self) -> int:
        return len(self._documents)

    def ingest_document(self, uri: str, title: str, body: str) -> int:
        """Store a document and rebuild the index snapshot.

        Rejects empty bodies and duplicate uris.
        """
        if not body or not body.strip():
            raise ValueError(f"document {uri!r} rejected: empty body")
        with self._lock:
            if uri in self._uris:
                raise ValueError(f"document {uri!r} rejected: duplicate uri")
            doc_id = len(self._documents) + 1
            doc = Document(doc_id=doc_id, uri=uri, title=title, body=body)
            self._documents.append(doc)
            self._uris.add(uri)
            self._index = CorpusIndex(self._documents)
        return doc_id

    def ingest_directory(self, directory: str) -> List[int]:
        """Ingest every file in `directory`: first line is the title, the
        remainder is the body. Files are processed in sorted name order."""
        import os

        doc_ids = []
        for name in sorted(os.listdir(directory)):
            path = os.path.join(directory, name)
            if not os.path.isfile(path):
                continue
            with open(path, encoding="utf-8") as fh:
                content = fh.read()
            first, _, rest = content.partition("\n")
            doc_ids.append(self.ingest_document(uri=name, title=first.strip(), body=rest))
        return doc_ids

    def save_snapshot(self, path: str) -> None:
        payload = {
            "format": SNAPSHOT_FORMAT,
            "documents": [
                {"doc_id": d.doc_id, "uri": d.uri, "title": d.title, "body": d.body}
                for d in self._documents
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False)

    @classmethod
    def load_snapshot(cls, path: str) -> "Corpus":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != SNAPSHOT_FORMAT:
            raise ValueError(f"unsupported snapshot format: {payload.get('format')!r}")
        corpus = cls()
        docs = [Document(**rec) for rec in payload["documents"]]
        corpus._documents = docs
        corpus._uris = {d.uri for d in docs}
        corpus._index = CorpusIndex(docs)
        return corpus
