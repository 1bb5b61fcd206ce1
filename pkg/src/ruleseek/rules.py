"""Production rule storage: text DSL parsing, validation and the rule graph.

Rule files hold one rule per line:

    IF <phrase> (AND <phrase>)* THEN <phrase> (AND <phrase>)* [<confidence>]

`#` starts a comment, blank lines are ignored, the bracketed confidence is
optional (default 1.0) and must lie in (0, 1]. A conjunctive consequent is
split into one rule per conclusion at parse time. Phrases are normalized
with the corpus tokenizer, so matching against the index is exact.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Sequence, Set, Tuple

from .corpus import normalize_phrase

_CONFIDENCE_SUFFIX = re.compile(r"\[\s*([0-9.eE+-]+)\s*\]\s*$")
_IF_RE = re.compile(r"^\s*IF\s+", re.IGNORECASE)
_THEN_RE = re.compile(r"\s+THEN\s+", re.IGNORECASE)
_AND_RE = re.compile(r"\s+AND\s+", re.IGNORECASE)


class RuleSyntaxError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Rule:
    rule_id: str
    conditions: FrozenSet[str]
    conclusion: str
    confidence: float = 1.0
    order_index: int = 0
    source: str = ""

    def __post_init__(self):
        if not self.conditions:
            raise ValueError(f"rule {self.rule_id}: conditions must be non-empty")
        if not self.conclusion:
            raise ValueError(f"rule {self.rule_id}: conclusion must be non-empty")
        if not 0 < self.confidence <= 1:
            raise ValueError(f"rule {self.rule_id}: confidence {self.confidence} outside (0, 1]")

    def canonical_text(self) -> str:
        text = "IF " + " AND ".join(sorted(self.conditions)) + " THEN " + self.conclusion
        if self.confidence != 1.0:
            text += f" [{format(self.confidence, '.12g')}]"
        return text


def parse_rule_dsl(text: str) -> List[Rule]:
    """Parse rule DSL text into rules, assigning sequential ids and using the
    source line number as the order index. Raises RuleSyntaxError with the
    offending line number on malformed input."""
    rules: List[Rule] = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if not _IF_RE.match(line):
            raise RuleSyntaxError(line_no, f"expected rule to start with IF: {raw_line.strip()!r}")
        line = _IF_RE.sub("", line, count=1)
        parts = _THEN_RE.split(line)
        if len(parts) != 2:
            raise RuleSyntaxError(line_no, "expected exactly one THEN")
        condition_part, conclusion_part = parts

        confidence = 1.0
        conf_match = _CONFIDENCE_SUFFIX.search(conclusion_part)
        if conf_match:
            try:
                confidence = float(conf_match.group(1))
            except ValueError:
                raise RuleSyntaxError(line_no, f"bad confidence literal {conf_match.group(1)!r}")
            if not 0 < confidence <= 1:
                raise RuleSyntaxError(line_no, f"confidence {confidence} outside (0, 1]")
            conclusion_part = conclusion_part[: conf_match.start()]

        conditions = []
        for phrase in _AND_RE.split(condition_part):
            normalized = normalize_phrase(phrase)
            if not normalized:
                raise RuleSyntaxError(line_no, "empty condition phrase")
            conditions.append(normalized)
        if not conditions:
            raise RuleSyntaxError(line_no, "rule has no conditions")

        conclusions = []
        for phrase in _AND_RE.split(conclusion_part):
            normalized = normalize_phrase(phrase)
            if not normalized:
                raise RuleSyntaxError(line_no, "empty conclusion phrase")
            conclusions.append(normalized)

        for conclusion in conclusions:
            rules.append(
                Rule(
                    rule_id=f"r{len(rules) + 1}",
                    conditions=frozenset(conditions),
                    conclusion=conclusion,
                    confidence=confidence,
                    order_index=line_no,
                    source=f"line {line_no}",
                )
            )
    return rules


class RuleBase:
    """Immutable ordered rule collection with a content-derived version hash."""

    def __init__(self, rules: Sequence[Rule]):
        ids = [r.rule_id for r in rules]
        if len(set(ids)) != len(ids):
            raise ValueError("rule ids must be unique")
        self._rules: Tuple[Rule, ...] = tuple(rules)
        self._by_id: Dict[str, Rule] = {r.rule_id: r for r in rules}
        self.version_hash = hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    @classmethod
    def from_text(cls, text: str) -> "RuleBase":
        return cls(parse_rule_dsl(text))

    @property
    def rules(self) -> Tuple[Rule, ...]:
        return self._rules

    def rule(self, rule_id: str) -> Rule:
        return self._by_id[rule_id]

    def __len__(self) -> int:
        return len(self._rules)

    def serialize(self) -> str:
        """Canonical DSL text; parsing it back yields an identical rule list."""
        return "\n".join(r.canonical_text() for r in self._rules)


@dataclass(frozen=True)
class RuleGraph:
    nodes: FrozenSet[str]
    edges: Tuple[Tuple[str, str, str], ...]  # (condition term, conclusion term, rule_id)
    chain_segments: Tuple[Tuple[str, ...], ...]  # ordered rule_ids, single-condition only


@dataclass
class ValidationReport:
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    duplicates: List[Tuple[str, str]] = field(default_factory=list)
    cycles: List[Tuple[str, ...]] = field(default_factory=list)
    chain_segments: Tuple[Tuple[str, ...], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors


def build_rule_graph(rule_base: RuleBase) -> RuleGraph:
    """Edges per (rule, condition) pair plus the maximal chain segments.

    A chain segment is a maximal path of two or more single-condition rules
    where every junction between consecutive rules has exactly one incoming
    and one outgoing single-condition edge, so the path is unambiguous.
    """
    nodes: Set[str] = set()
    edges: List[Tuple[str, str, str]] = []
    for rule in rule_base.rules:
        nodes.add(rule.conclusion)
        for cond in sorted(rule.conditions):
            nodes.add(cond)
            edges.append((cond, rule.conclusion, rule.rule_id))

    single = [r for r in rule_base.rules if len(r.conditions) == 1 and r.conclusion not in r.conditions]
    out_edges: Dict[str, List[Rule]] = {}
    in_degree: Dict[str, int] = {}
    for rule in single:
        (cond,) = rule.conditions
        out_edges.setdefault(cond, []).append(rule)
        in_degree[rule.conclusion] = in_degree.get(rule.conclusion, 0) + 1

    def linear(term: str) -> bool:
        return in_degree.get(term, 0) == 1 and len(out_edges.get(term, ())) == 1

    segments: List[Tuple[str, ...]] = []
    visited: Set[str] = set()

    def walk(start: Rule) -> None:
        segment = [start]
        visited.add(start.rule_id)
        term = start.conclusion
        while linear(term):
            nxt = out_edges[term][0]
            if nxt.rule_id in visited:
                break
            segment.append(nxt)
            visited.add(nxt.rule_id)
            term = nxt.conclusion
        if len(segment) >= 2:
            segments.append(tuple(r.rule_id for r in segment))

    for rule in single:
        (cond,) = rule.conditions
        if rule.rule_id not in visited and not linear(cond):
            walk(rule)
    for rule in single:  # purely cyclic leftovers
        if rule.rule_id not in visited:
            walk(rule)

    return RuleGraph(nodes=frozenset(nodes), edges=tuple(edges), chain_segments=tuple(segments))


def validate(rule_base: RuleBase) -> ValidationReport:
    """Check the rule set: self-loops are hard errors, duplicates and cycles
    are reported but accepted (inference depth limits handle cycles)."""
    report = ValidationReport()

    for rule in rule_base.rules:
        if rule.conclusion in rule.conditions:
            report.errors.append(
                f"rule {rule.rule_id}: self-loop, conclusion {rule.conclusion!r} is also a condition"
            )

    seen: Dict[Tuple[FrozenSet[str], str], str] = {}
    for rule in rule_base.rules:
        key = (rule.conditions, rule.conclusion)
        if key in seen:
            report.duplicates.append((seen[key], rule.rule_id))
            report.warnings.append(f"rule {rule.rule_id} duplicates rule {seen[key]}")
        else:
            seen[key] = rule.rule_id

    adjacency: Dict[str, Set[str]] = {}
    for rule in rule_base.rules:
        for cond in rule.conditions:
            adjacency.setdefault(cond, set()).add(rule.conclusion)
    for cycle in _find_cycles(adjacency):
        report.cycles.append(cycle)
        report.warnings.append("cycle through terms: " + " -> ".join(cycle))

    graph = build_rule_graph(rule_base)
    report.chain_segments = graph.chain_segments
    return report


def _find_cycles(adjacency: Dict[str, Set[str]]) -> List[Tuple[str, ...]]:
    """Strongly connected components with more than one node, sorted."""
    index_counter = [0]
    stack: List[str] = []
    lowlink: Dict[str, int] = {}
    index: Dict[str, int] = {}
    on_stack: Set[str] = set()
    components: List[Tuple[str, ...]] = []
    all_nodes = sorted(set(adjacency) | {n for targets in adjacency.values() for n in targets})

    def strongconnect(node: str) -> None:
        index[node] = lowlink[node] = index_counter[0]
        index_counter[0] += 1
        stack.append(node)
        on_stack.add(node)
        for succ in sorted(adjacency.get(node, ())):
            if succ not in index:
                strongconnect(succ)
                lowlink[node] = min(lowlink[node], lowlink[succ])
            elif succ in on_stack:
                lowlink[node] = min(lowlink[node], index[succ])
        if lowlink[node] == index[node]:
            component = []
            while True:
                member = stack.pop()
                on_stack.discard(member)
                component.append(member)
                if member == node:
                    break
            if len(component) > 1:
                components.append(tuple(sorted(component)))

    for node in all_nodes:
        if node not in index:
            strongconnect(node)
    components.sort()
    return components
