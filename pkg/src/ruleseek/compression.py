"""Chain compression and the per-query compiled rule set cache.

A chain of single-condition rules can be summarized by one rule from the
chain's head straight to the endpoint whose conclusion best matches the
query area. Compiled rule sets pair the area-relevant rules (plus the rules
needed to derive their conditions) with those compressed shortcuts, and are
cached per normalized keyword sequence, keyed to the rule base version so
any rule edit invalidates them.
"""
from __future__ import annotations

import json
import math
import os
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

from .query import LEFT_TO_RIGHT
from .rules import Rule, RuleBase, RuleGraph, build_rule_graph

AreaScoreFn = Callable[[str], float]

COMPILED_FORMAT = 1


@dataclass(frozen=True)
class CompressedRule:
    rule_id: str
    conditions: FrozenSet[str]
    conclusion: str
    confidence: float
    member_rule_ids: Tuple[str, ...]
    order_index: int = 0

    def __post_init__(self):
        if len(self.member_rule_ids) < 2:
            raise ValueError("a compressed rule must cover at least two member rules")
        if not 0 < self.confidence <= 1:
            raise ValueError(f"compressed rule confidence {self.confidence} outside (0, 1]")
        if self.conclusion in self.conditions:
            raise ValueError("compressed rule must not be a self-loop")

    def canonical_text(self) -> str:
        text = "IF " + " AND ".join(sorted(self.conditions)) + " THEN " + self.conclusion
        if self.confidence != 1.0:
            text += f" [{format(self.confidence, '.12g')}]"
        return text


def compress_chains(
    rule_base: RuleBase,
    graph: RuleGraph,
    area_score: AreaScoreFn,
    tau: float,
) -> List[CompressedRule]:
    """One compressed rule per chain segment, head to the best endpoint.

    The endpoint is the member conclusion with the highest area score at or
    above tau; equal scores pick the deeper endpoint. A segment where every
    member conclusion clears tau is left alone (each rule stays useful on
    its own), as is a segment where none does.
    """
    compressed: List[CompressedRule] = []
    for segment in graph.chain_segments:
        members = [rule_base.rule(rule_id) for rule_id in segment]
        scores = [area_score(rule.conclusion) for rule in members]
        if all(score >= tau for score in scores):
            continue
        best: Optional[int] = None
        for idx, score in enumerate(scores):
            if score >= tau and (best is None or score >= scores[best]):
                best = idx
        if best is None or best < 1:
            continue
        used = members[: best + 1]
        head = used[0]
        conclusion = used[-1].conclusion
        if conclusion in head.conditions:
            continue
        confidence = math.prod(rule.confidence for rule in used)
        compressed.append(
            CompressedRule(
                rule_id="cmp:" + "+".join(rule.rule_id for rule in used),
                conditions=head.conditions,
                conclusion=conclusion,
                confidence=confidence,
                member_rule_ids=tuple(rule.rule_id for rule in used),
                order_index=head.order_index,
            )
        )
    return compressed


CompiledEntry = Union[Rule, CompressedRule]


def make_cache_key(terms: Iterable[str], direction: str = LEFT_TO_RIGHT) -> str:
    return " ".join(sorted(set(terms))) + "|" + direction


@dataclass(frozen=True)
class CompiledRuleSet:
    key: str
    rulebase_version: str
    rules: Tuple[CompiledEntry, ...]
    built_at: float = field(default_factory=time.time)

    def canonical_dict(self) -> Dict[str, object]:
        return {
            "format": COMPILED_FORMAT,
            "key": self.key,
            "rulebase_version": self.rulebase_version,
            "rules": [_entry_dict(rule) for rule in self.rules],
        }

    def canonical_json(self) -> str:
        return json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))


def _entry_dict(rule: CompiledEntry) -> Dict[str, object]:
    record: Dict[str, object] = {
        "rule_id": rule.rule_id,
        "conditions": sorted(rule.conditions),
        "conclusion": rule.conclusion,
        "confidence": rule.confidence,
        "order_index": rule.order_index,
    }
    if isinstance(rule, CompressedRule):
        record["kind"] = "compressed"
        record["member_rule_ids"] = list(rule.member_rule_ids)
    else:
        record["kind"] = "rule"
        record["source"] = rule.source
    return record


def _entry_from_dict(record: Dict[str, object]) -> CompiledEntry:
    if record["kind"] == "compressed":
        return CompressedRule(
            rule_id=record["rule_id"],
            conditions=frozenset(record["conditions"]),
            conclusion=record["conclusion"],
            confidence=record["confidence"],
            member_rule_ids=tuple(record["member_rule_ids"]),
            order_index=record["order_index"],
        )
    return Rule(
        rule_id=record["rule_id"],
        conditions=frozenset(record["conditions"]),
        conclusion=record["conclusion"],
        confidence=record["confidence"],
        order_index=record["order_index"],
        source=record.get("source", ""),
    )


def compile_for_query(
    keywords: Iterable[str],
    rule_base: RuleBase,
    area_score: AreaScoreFn,
    tau: float,
    direction: str = LEFT_TO_RIGHT,
) -> CompiledRuleSet:
    """Build the rule set a query actually needs.

    Keeps every rule whose conclusion clears tau, pulls in the rules those
    depend on (so no relevant conclusion becomes underivable), and adds the
    compressed chain shortcuts. Deterministic for fixed inputs and stamped
    with the rule base version.
    """
    relevant_ids: Set[str] = set()
    for rule in rule_base.rules:
        if area_score(rule.conclusion) >= tau:
            relevant_ids.add(rule.rule_id)

    needed: Set[str] = set(relevant_ids)
    while True:
        wanted_terms: Set[str] = set()
        for rule in rule_base.rules:
            if rule.rule_id in needed:
                wanted_terms.update(rule.conditions)
        added = False
        for rule in rule_base.rules:
            if rule.rule_id not in needed and rule.conclusion in wanted_terms:
                needed.add(rule.rule_id)
                added = True
        if not added:
            break

    support = [rule for rule in rule_base.rules if rule.rule_id in needed]
    graph = build_rule_graph(rule_base)
    bridges = compress_chains(rule_base, graph, area_score, tau)
    return CompiledRuleSet(
        key=make_cache_key(keywords, direction),
        rulebase_version=rule_base.version_hash,
        rules=tuple(support) + tuple(bridges),
    )


class RuleSetCache:
    """LRU cache of compiled rule sets with an append-friendly backing file.

    Entries are valid only while their rule base version matches; stale hits
    are evicted and reported as misses. File IO failures flip the cache into
    degraded (memory-only) mode instead of failing lookups.
    """

    def __init__(self, path: Optional[str] = None, capacity: int = 10_000):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._path = path
        self.capacity = capacity
        self._entries: "OrderedDict[str, CompiledRuleSet]" = OrderedDict()
        self._lock = threading.RLock()
        self._log_lines = 0
        self.hits = 0
        self.misses = 0
        self.evictions = 0
        self.degraded = False
        if path:
            self._load()

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, key: str, current_version: str) -> Optional[CompiledRuleSet]:
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                self.misses += 1
                return None
            if entry.rulebase_version != current_version:
                del self._entries[key]
                self.evictions += 1
                self.misses += 1
                self._append({"op": "del", "key": key})
                return None
            self._entries.move_to_end(key)
            self.hits += 1
            return entry

    def put(self, compiled: CompiledRuleSet, current_version: str) -> None:
        if compiled.rulebase_version != current_version:
            raise ValueError("compiled set rejected: stale rule base version")
        with self._lock:
            self._entries[compiled.key] = compiled
            self._entries.move_to_end(compiled.key)
            while len(self._entries) > self.capacity:
                evicted_key, _ = self._entries.popitem(last=False)
                self.evictions += 1
                self._append({"op": "del", "key": evicted_key})
            self._append({"op": "put", "entry": self._store_dict(compiled)})

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self._append({"op": "clear"})

    def stats(self) -> Dict[str, object]:
        with self._lock:
            lookups = self.hits + self.misses
            return {
                "size": len(self._entries),
                "capacity": self.capacity,
                "hits": self.hits,
                "misses": self.misses,
                "evictions": self.evictions,
                "hit_ratio": self.hits / lookups if lookups else 0.0,
                "degraded": self.degraded,
            }

    @staticmethod
    def _store_dict(compiled: CompiledRuleSet) -> Dict[str, object]:
        record = compiled.canonical_dict()
        record["built_at"] = compiled.built_at
        return record

    @staticmethod
    def _from_store(record: Dict[str, object]) -> CompiledRuleSet:
        return CompiledRuleSet(
            key=record["key"],
            rulebase_version=record["rulebase_version"],
            rules=tuple(_entry_from_dict(r) for r in record["rules"]),
            built_at=record.get("built_at", 0.0),
        )

    def _append(self, record: Dict[str, object]) -> None:
        if not self._path or self.degraded:
            return
        try:
            with open(self._path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
            self._log_lines += 1
            if self._log_lines > max(512, 4 * len(self._entries)):
                self._compact()
        except OSError:
            self.degraded = True

    def _compact(self) -> None:
        tmp = self._path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            for entry in self._entries.values():
                fh.write(json.dumps({"op": "put", "entry": self._store_dict(entry)}, sort_keys=True) + "\n")
        os.replace(tmp, self._path)
        self._log_lines = len(self._entries)

    def _load(self) -> None:
        if not os.path.exists(self._path):
            return
        try:
            with open(self._path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    if record["op"] == "put":
                        entry = self._from_store(record["entry"])
                        self._entries[entry.key] = entry
                        self._entries.move_to_end(entry.key)
                    elif record["op"] == "del":
                        self._entries.pop(record["key"], None)
                    elif record["op"] == "clear":
                        self._entries.clear()
                    self._log_lines += 1
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)
        except (OSError, ValueError, KeyError):
            self._entries.clear()
            self.degraded = True
