"""Forward and backward chaining over ground production rules.

Facts are statements with a confidence in (0, 1]. A derived fact's
confidence is the firing rule's confidence times the minimum confidence of
its matched conditions, so produced facts never outrank the reliable facts
they came from. Every rule fires at most once per run and only when firing
actually changes working memory (a new statement, a higher confidence, or an
equal confidence with a shorter derivation), which bounds every run by the
number of rules even in cyclic rule bases.

Each derived fact carries a complete, replayable trace: the ordered rule
firings that produced it, rooted in the initial facts.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from .corpus import normalize_phrase, tokenize
from .query import CooccurrenceFn, expand_terms, jaccard

RULE_ORDER = "rule_order"
SPECIFICITY = "specificity"
STRATEGIES = (RULE_ORDER, SPECIFICITY)

RETRIEVED = "retrieved"
DERIVED = "derived"


@dataclass(frozen=True)
class Provenance:
    kind: str
    doc_ids: Tuple[int, ...] = ()
    trace_id: str = ""


@dataclass(frozen=True)
class Fact:
    statement: str
    confidence: float
    provenance: Provenance

    def __post_init__(self):
        if not 0 < self.confidence <= 1:
            raise ValueError(f"fact {self.statement!r}: confidence {self.confidence} outside (0, 1]")
        if self.provenance.kind == RETRIEVED and not self.provenance.doc_ids:
            raise ValueError(f"retrieved fact {self.statement!r} must cite at least one document")
        if self.provenance.kind == DERIVED and not self.provenance.trace_id:
            raise ValueError(f"derived fact {self.statement!r} must carry a trace id")


@dataclass(frozen=True)
class TraceStep:
    seq: int
    rule_id: str
    rule_text: str
    rule_confidence: float
    conditions: Tuple[str, ...]
    produced: str
    confidence: float

    def canonical_dict(self) -> Dict[str, object]:
        return {
            "rule_id": self.rule_id,
            "rule_text": self.rule_text,
            "rule_confidence": self.rule_confidence,
            "conditions": list(self.conditions),
            "produced": self.produced,
            "confidence": self.confidence,
        }


@dataclass(frozen=True)
class Trace:
    trace_id: str
    steps: Tuple[TraceStep, ...]

    def canonical_dict(self) -> Dict[str, object]:
        return {"trace_id": self.trace_id, "steps": [s.canonical_dict() for s in self.steps]}


def _trace_id(steps: Sequence[TraceStep]) -> str:
    payload = json.dumps([s.canonical_dict() for s in steps], sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def make_trace(steps: Sequence[TraceStep]) -> Trace:
    return Trace(trace_id=_trace_id(steps), steps=tuple(steps))


def replay_trace(trace: Trace, initial_facts: Mapping[str, float]) -> Dict[str, float]:
    """Re-execute a trace against the initial facts, checking every step.

    Raises ValueError when a step's conditions are not available or its
    recomputed confidence differs from the recorded one.
    """
    env: Dict[str, float] = dict(initial_facts)
    for step in trace.steps:
        missing = [c for c in step.conditions if c not in env]
        if missing:
            raise ValueError(f"trace {trace.trace_id}: step {step.rule_id} missing conditions {missing}")
        confidence = step.rule_confidence * min(env[c] for c in step.conditions)
        if confidence != step.confidence:
            raise ValueError(
                f"trace {trace.trace_id}: step {step.rule_id} recomputed {confidence} != {step.confidence}"
            )
        env[step.produced] = confidence
    return env


def is_compressed(rule: object) -> bool:
    return getattr(rule, "member_rule_ids", None) is not None


def rank_activations(activations: Sequence, strategy: str) -> List:
    """Total, deterministic firing order over simultaneously-active rules.

    rule_order fires by ascending order index; specificity fires the rule
    with the most conditions first, ties by ascending order index. Remaining
    ties keep input (load) order; compressed shortcut rules always yield to
    ordinary rules so they never pre-empt the chains they summarize.
    """
    if strategy == RULE_ORDER:
        key = lambda r: (is_compressed(r), r.order_index)
    elif strategy == SPECIFICITY:
        key = lambda r: (is_compressed(r), -len(r.conditions), r.order_index)
    else:
        raise ValueError(f"unknown strategy: {strategy!r}")
    return sorted(activations, key=key)


class AreaScorer:
    """Scores how well a statement matches the query's semantic area.

    The area is the co-occurrence expansion of the query terms; a statement
    scores the Jaccard overlap between its own expansion and that area.
    """

    def __init__(self, query_terms: Iterable[str], cooccur: CooccurrenceFn):
        self._cooccur = cooccur
        self._area = expand_terms(query_terms, cooccur)
        self._cache: Dict[str, float] = {}

    @property
    def area(self) -> Set[str]:
        return set(self._area)

    def __call__(self, statement: str) -> float:
        cached = self._cache.get(statement)
        if cached is not None:
            return cached
        expansion = expand_terms(tokenize(statement), self._cooccur)
        score = jaccard(expansion, self._area)
        self._cache[statement] = score
        return score


def relevance_filter(
    rules: Sequence,
    query_area: Union[Mapping[str, float], Iterable[str]],
    cooccur: CooccurrenceFn,
    tau: float,
) -> List:
    """Rules whose conclusion scores at least tau against the query area."""
    if not 0 <= tau <= 1:
        raise ValueError(f"tau {tau} outside [0, 1]")
    terms = query_area.keys() if isinstance(query_area, Mapping) else query_area
    scorer = AreaScorer(terms, cooccur)
    return [rule for rule in rules if scorer(rule.conclusion) >= tau]


@dataclass
class _WmRecord:
    confidence: float
    depth: int
    steps: Tuple[TraceStep, ...]


def _merge_steps(parts: Iterable[Tuple[TraceStep, ...]]) -> List[TraceStep]:
    by_seq: Dict[int, TraceStep] = {}
    for steps in parts:
        for step in steps:
            by_seq[step.seq] = step
    return [by_seq[seq] for seq in sorted(by_seq)]


class InferenceResult:
    def __init__(
        self,
        records: Dict[str, _WmRecord],
        fired: Tuple[str, ...],
        initial: Mapping[str, float],
    ):
        self._records = records
        self.fired = fired
        self.initial = dict(initial)
        self.traces: Dict[str, Trace] = {}
        self.derived: Dict[str, Fact] = {}
        for statement in sorted(records):
            record = records[statement]
            if not record.steps:
                continue
            trace = make_trace(record.steps)
            self.traces[trace.trace_id] = trace
            self.derived[statement] = Fact(
                statement=statement,
                confidence=record.confidence,
                provenance=Provenance(kind=DERIVED, trace_id=trace.trace_id),
            )

    def statements(self) -> Set[str]:
        return set(self._records)

    def confidence(self, statement: str) -> float:
        return self._records[statement].confidence

    def depth(self, statement: str) -> int:
        return self._records[statement].depth

    def trace_for(self, statement: str) -> Optional[Trace]:
        fact = self.derived.get(statement)
        return self.traces[fact.provenance.trace_id] if fact else None


def _as_confidence_map(initial_facts) -> Dict[str, float]:
    if isinstance(initial_facts, Mapping):
        return {normalize_phrase(s): c for s, c in initial_facts.items()}
    confidences: Dict[str, float] = {}
    for fact in initial_facts:
        if isinstance(fact, Fact):
            statement, confidence = fact.statement, fact.confidence
        elif isinstance(fact, str):
            statement, confidence = fact, 1.0
        else:
            statement, confidence = fact
        statement = normalize_phrase(statement)
        confidences[statement] = max(confidences.get(statement, 0.0), confidence)
    return confidences


def forward_chain(
    initial_facts,
    rules: Sequence,
    strategy: str = RULE_ORDER,
    max_depth: int = 8,
) -> InferenceResult:
    """Data-driven inference to fixpoint or the depth limit.

    Repeatedly fires the strategy-first active rule whose conditions are all
    in working memory and whose firing would change it. A conclusion lands at
    depth 1 + the deepest of its supports; activations past max_depth stay on
    the shelf. Re-derivations keep the higher confidence (shorter trace on
    ties) and every derived fact carries a full trace.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy: {strategy!r}")

    initial = _as_confidence_map(initial_facts)
    wm: Dict[str, _WmRecord] = {
        statement: _WmRecord(confidence=conf, depth=0, steps=())
        for statement, conf in initial.items()
    }
    fired: List[str] = []
    fired_ids: Set[str] = set()
    seq = 0

    while True:
        productive = []
        for rule in rules:
            if rule.rule_id in fired_ids:
                continue
            conditions = sorted(rule.conditions)
            if any(c not in wm for c in conditions):
                continue
            candidate_conf = rule.confidence * min(wm[c].confidence for c in conditions)
            candidate_depth = 1 + max(wm[c].depth for c in conditions)
            if candidate_depth > max_depth:
                continue
            existing = wm.get(rule.conclusion)
            if existing is not None:
                # A compressed shortcut only introduces a missing conclusion;
                # letting it re-derive would double work its member chain
                # already did (or will do) step by step.
                if is_compressed(rule):
                    continue
                if candidate_conf < existing.confidence:
                    continue
                if candidate_conf == existing.confidence:
                    candidate_steps = _merge_steps([wm[c].steps for c in conditions])
                    if len(candidate_steps) + 1 >= len(existing.steps) or not existing.steps:
                        continue
            productive.append(rule)
        if not productive:
            break

        chosen = rank_activations(productive, strategy)[0]
        conditions = sorted(chosen.conditions)
        candidate_conf = chosen.confidence * min(wm[c].confidence for c in conditions)
        candidate_depth = 1 + max(wm[c].depth for c in conditions)
        seq += 1
        step = TraceStep(
            seq=seq,
            rule_id=chosen.rule_id,
            rule_text=chosen.canonical_text(),
            rule_confidence=chosen.confidence,
            conditions=tuple(conditions),
            produced=chosen.conclusion,
            confidence=candidate_conf,
        )
        steps = tuple(_merge_steps([wm[c].steps for c in conditions]) + [step])
        wm[chosen.conclusion] = _WmRecord(confidence=candidate_conf, depth=candidate_depth, steps=steps)
        fired.append(chosen.rule_id)
        fired_ids.add(chosen.rule_id)

    return InferenceResult(records=wm, fired=tuple(fired), initial=initial)


@dataclass
class BackwardResult:
    goal: str
    proved: bool
    trace: Optional[Trace] = None
    confidence: float = 0.0
    depth: int = 0
    missing: Tuple[str, ...] = ()


def backward_chain(
    goal: str,
    facts,
    rules: Sequence,
    max_depth: int = 8,
) -> BackwardResult:
    """Goal-driven search for a minimal-depth proof of `goal`.

    Succeeds immediately when the goal is already a fact. On failure the
    result lists the unsatisfied leaf conditions: statements that were needed
    but are neither facts nor the conclusion of any rule.
    """
    goal = normalize_phrase(goal)
    if not goal:
        raise ValueError("goal must be non-empty")
    fact_conf = _as_confidence_map(facts)
    by_conclusion: Dict[str, List] = {}
    for rule in rules:
        by_conclusion.setdefault(rule.conclusion, []).append(rule)

    missing: Set[str] = set()
    counter = [0]

    def prove(statement: str, path: FrozenSet[str], budget: int):
        if statement in fact_conf:
            return 0, fact_conf[statement], ()
        candidates = by_conclusion.get(statement)
        if not candidates:
            missing.add(statement)
            return None
        if statement in path or budget <= 0:
            return None
        best = None
        for rule in candidates:
            sub_results = []
            provable = True
            for cond in sorted(rule.conditions):
                sub = prove(cond, path | {statement}, budget - 1)
                if sub is None:
                    provable = False
                    break
                sub_results.append(sub)
            if not provable:
                continue
            height = 1 + max(s[0] for s in sub_results)
            confidence = rule.confidence * min(s[1] for s in sub_results)
            counter[0] += 1
            step = TraceStep(
                seq=counter[0],
                rule_id=rule.rule_id,
                rule_text=rule.canonical_text(),
                rule_confidence=rule.confidence,
                conditions=tuple(sorted(rule.conditions)),
                produced=statement,
                confidence=confidence,
            )
            steps = tuple(_merge_steps([s[2] for s in sub_results]) + [step])
            if best is None or height < best[0]:
                best = (height, confidence, steps)
        return best

    outcome = prove(goal, frozenset(), max_depth)
    if outcome is None:
        return BackwardResult(goal=goal, proved=False, missing=tuple(sorted(missing)))
    height, confidence, steps = outcome
    trace = make_trace(steps)
    return BackwardResult(goal=goal, proved=True, trace=trace, confidence=confidence, depth=height)
