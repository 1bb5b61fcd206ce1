"""Assembles the two-category search response: corpus-backed FACTS on one
side, rule-derived CONCLUSIONS on the other, plus the ranked hit list for
ordinary browsing.

A fact is a rule condition phrase whose tokens co-occur tightly inside a
top-ranked document (plus, as working-memory input, any query term found
there). Conclusions come from the inference run and never cite documents
directly; their traces bottom out in listed facts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .corpus import CorpusIndex, RankedHit
from .inference import InferenceResult, Trace
from .query import EffectiveQuery

KIND_CONDITION = "condition"
KIND_QUERY_TERM = "query_term"


@dataclass(frozen=True)
class RetrievedFact:
    statement: str
    doc_ids: Tuple[int, ...]
    snippet: str
    confidence: float
    best_rank: int
    kind: str


@dataclass(frozen=True)
class ConclusionView:
    statement: str
    confidence: float
    trace_id: str


@dataclass(frozen=True)
class SearchResult:
    query_echo: EffectiveQuery
    facts: Tuple[RetrievedFact, ...]
    conclusions: Tuple[ConclusionView, ...]
    hits: Tuple[RankedHit, ...]

    def fact_statements(self) -> Set[str]:
        return {f.statement for f in self.facts}

    def to_canonical_dict(self) -> Dict[str, object]:
        return {
            "query": {
                "weighted_terms": {t: w for t, w in sorted(self.query_echo.weighted_terms.items())},
                "linked_from_history": sorted(self.query_echo.linked_from_history),
            },
            "facts": [
                {
                    "statement": f.statement,
                    "confidence": f.confidence,
                    "doc_ids": list(f.doc_ids),
                    "snippet": f.snippet,
                }
                for f in self.facts
            ],
            "conclusions": [
                {"statement": c.statement, "confidence": c.confidence, "trace_id": c.trace_id}
                for c in self.conclusions
            ],
            "hits": [
                {
                    "doc_id": h.doc_id,
                    "score": h.score,
                    "per_term_counts": dict(sorted(h.per_term_counts.items())),
                }
                for h in self.hits
            ],
        }

    def render_text(self) -> str:
        """Two-column text rendering: FACTS next to CONCLUSIONS, hits below."""
        left = [f"{f.statement}  (docs {','.join(map(str, f.doc_ids))})" for f in self.facts]
        right = [f"{c.statement}  [{c.confidence:.2f}]" for c in self.conclusions]
        if not right:
            right = ["(no conclusions)"]
        if not left:
            left = ["(no facts)"]
        width = max([len(s) for s in left] + [len("FACTS")]) + 2
        lines = [f"{'FACTS':<{width}}| CONCLUSIONS"]
        lines.append("-" * (width + len("| CONCLUSIONS")))
        for i in range(max(len(left), len(right))):
            l = left[i] if i < len(left) else ""
            r = right[i] if i < len(right) else ""
            lines.append(f"{l:<{width}}| {r}")
        lines.append("")
        lines.append("HITS")
        for h in self.hits:
            lines.append(f"  doc {h.doc_id}  score={h.score:g}")
        return "\n".join(lines)


def extract_facts(
    effective: EffectiveQuery,
    hits: Sequence[RankedHit],
    enabled_rules: Sequence,
    index: CorpusIndex,
    top_k: int = 10,
    phrase_window: int = 8,
    snippet_tokens: int = 12,
) -> List[RetrievedFact]:
    """Corpus-backed statements for the query: every enabled-rule condition
    phrase matched inside a top-K hit, and every query term found there.

    Each fact carries confidence 1.0, the matching documents, and a snippet
    around the earliest match in its best-ranked document.
    """
    top = list(hits[:top_k])
    facts: Dict[str, RetrievedFact] = {}

    phrases: List[str] = []
    for rule in enabled_rules:
        for phrase in rule.conditions:
            if phrase not in phrases:
                phrases.append(phrase)
    phrases.sort()

    def match_statement(statement: str, kind: str) -> None:
        tokens = statement.split()
        doc_ids: List[int] = []
        best_rank: Optional[int] = None
        snippet = ""
        for rank, hit in enumerate(top):
            span = index.find_phrase_window(hit.doc_id, tokens, phrase_window)
            if span is None:
                continue
            doc_ids.append(hit.doc_id)
            if best_rank is None:
                best_rank = rank
                snippet = index.snippet(hit.doc_id, span[0], span[1], snippet_tokens)
        if best_rank is None:
            return
        existing = facts.get(statement)
        if existing is not None and existing.kind == KIND_CONDITION:
            return
        facts[statement] = RetrievedFact(
            statement=statement,
            doc_ids=tuple(sorted(doc_ids)),
            snippet=snippet,
            confidence=1.0,
            best_rank=best_rank,
            kind=kind,
        )

    for phrase in phrases:
        match_statement(phrase, KIND_CONDITION)
    for term in sorted(effective.weighted_terms):
        if term not in facts:
            match_statement(term, KIND_QUERY_TERM)

    return sorted(facts.values(), key=lambda f: (f.best_rank, f.statement))


def _trace_leaves(trace: Trace) -> Set[str]:
    produced = {step.produced for step in trace.steps}
    leaves: Set[str] = set()
    for step in trace.steps:
        leaves.update(c for c in step.conditions if c not in produced)
    return leaves


def compose(
    effective: EffectiveQuery,
    extracted: Sequence[RetrievedFact],
    inference: InferenceResult,
    hits: Sequence[RankedHit],
) -> SearchResult:
    """Build the final response and enforce its shape.

    The facts panel lists the matched condition phrases; conclusions are the
    derived statements, sorted by descending confidence then statement. A
    derived statement that is itself a corpus-matched condition stays a fact
    only, keeping the two categories disjoint. When inference produced
    nothing at all, the panel falls back to the plain query-term matches,
    which recovers classic keyword search.
    """
    condition_facts = [f for f in extracted if f.kind == KIND_CONDITION]
    panel_statements = {f.statement for f in condition_facts}

    conclusions: List[ConclusionView] = []
    for statement, fact in inference.derived.items():
        if statement in panel_statements:
            continue
        conclusions.append(
            ConclusionView(statement=statement, confidence=fact.confidence, trace_id=fact.provenance.trace_id)
        )
    conclusions.sort(key=lambda c: (-c.confidence, c.statement))

    panel = list(condition_facts)
    if not conclusions and not panel:
        panel = list(extracted)
    panel.sort(key=lambda f: (f.best_rank, f.statement))

    return SearchResult(
        query_echo=effective,
        facts=tuple(panel),
        conclusions=tuple(conclusions),
        hits=tuple(hits),
    )
