"""The engine: owns the corpus, rule base, compiled-rule cache and sessions,
and runs the full query pipeline.

Pipeline per request: parse -> link with session history -> fetch or compile
the rule set for the effective keywords -> rank documents -> extract facts
from the top hits -> forward-chain -> compose the FACTS/CONCLUSIONS answer.

Corpus and rule base references are swapped atomically on reload; inference
runs are pure functions of the snapshots they grabbed, so concurrent
searches never see partial state. Requests within one session are serialized
to keep history linkage well-defined.
"""
from __future__ import annotations

import threading
import time
from typing import Callable, Dict, Optional, Set, Tuple

from . import __version__
from .compose import KIND_CONDITION, compose, extract_facts
from .compression import CompiledRuleSet, RuleSetCache, compile_for_query, make_cache_key
from .config import Config
from .corpus import Corpus, CorpusIndex, tokenize
from .inference import AreaScorer, Trace, forward_chain
from .query import Session, effective_query, parse_request
from .rules import RuleBase, ValidationReport, validate


class EngineNotReady(RuntimeError):
    pass


class RuleValidationError(ValueError):
    def __init__(self, report: ValidationReport):
        super().__init__("; ".join(report.errors))
        self.report = report


class SessionStore:
    """Server-side sessions keyed by caller-supplied id, expiring when idle."""

    def __init__(self, ttl: float, history_limit: int, clock: Callable[[], float] = time.time):
        self._ttl = ttl
        self._history_limit = history_limit
        self._clock = clock
        self._sessions: Dict[str, Session] = {}
        self._last_active: Dict[str, float] = {}
        self._locks: Dict[str, threading.Lock] = {}
        self._store_lock = threading.Lock()

    def get_or_create(self, session_id: str) -> Session:
        now = self._clock()
        with self._store_lock:
            session = self._sessions.get(session_id)
            if session is not None and now - self._last_active[session_id] > self._ttl:
                session = None
            if session is None:
                session = Session(session_id=session_id, created_at=now, max_history=self._history_limit)
                self._sessions[session_id] = session
            self._last_active[session_id] = now
            return session

    def lock(self, session_id: str) -> threading.Lock:
        with self._store_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def __len__(self) -> int:
        return len(self._sessions)


class SearchEngine:
    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()
        self.corpus = Corpus()
        self.rule_base: Optional[RuleBase] = None
        self.validation: Optional[ValidationReport] = None
        self.cache: Optional[RuleSetCache] = None
        if self.config.cache_enabled:
            self.cache = RuleSetCache(path=self.config.cache_path, capacity=self.config.cache_capacity)
        self.sessions = SessionStore(ttl=self.config.session_ttl, history_limit=self.config.history_limit)
        self.traces: Dict[str, Trace] = {}
        self.searches = 0
        self._swap_lock = threading.RLock()

    @classmethod
    def from_config(cls, config: Config) -> "SearchEngine":
        engine = cls(config)
        if config.index_snapshot:
            engine.load_corpus_snapshot(config.index_snapshot)
        elif config.corpus_dir:
            engine.corpus.ingest_directory(config.corpus_dir)
        if config.rules_file:
            with open(config.rules_file, encoding="utf-8") as fh:
                engine.load_rules_text(fh.read())
        return engine

    @property
    def ready(self) -> bool:
        return self.corpus.doc_count > 0 and self.rule_base is not None

    def load_corpus_snapshot(self, path: str) -> None:
        loaded = Corpus.load_snapshot(path)
        with self._swap_lock:
            self.corpus = loaded
            self._drop_compiled_sets()

    def add_document(self, uri: str, title: str, body: str) -> int:
        with self._swap_lock:
            doc_id = self.corpus.ingest_document(uri, title, body)
            self._drop_compiled_sets()
            return doc_id

    def _drop_compiled_sets(self) -> None:
        # Compiled sets bake in corpus co-occurrence, so a corpus change
        # invalidates them even though the rule base version is unchanged.
        if self.cache is not None:
            self.cache.clear()

    def load_rules_text(self, text: str) -> ValidationReport:
        rule_base = RuleBase.from_text(text)
        report = validate(rule_base)
        if not report.ok:
            raise RuleValidationError(report)
        with self._swap_lock:
            self.rule_base = rule_base
            self.validation = report
        return report

    def _cooccur(self, index: CorpusIndex):
        window = self.config.expansion_window
        min_count = self.config.expansion_min_count
        return lambda term: index.cooccurring_terms(term, window=window, min_count=min_count)

    def compile_rules(self, terms, direction: Optional[str] = None) -> Tuple[CompiledRuleSet, str]:
        """Fetch the compiled rule set for a term set, via the cache when on.

        Returns the set and the cache outcome: hit, miss or off.
        """
        if self.rule_base is None:
            raise EngineNotReady("no rule base loaded")
        direction = direction or self.config.direction
        index = self.corpus.index
        cooccur = self._cooccur(index)
        key = make_cache_key(terms, direction)
        state = "off"
        if self.cache is not None:
            cached = self.cache.get(key, self.rule_base.version_hash)
            if cached is not None:
                return cached, "hit"
            state = "miss"
        scorer = AreaScorer(terms, cooccur)
        compiled = compile_for_query(terms, self.rule_base, scorer, self.config.tau, direction)
        if self.cache is not None:
            self.cache.put(compiled, self.rule_base.version_hash)
        return compiled, state

    def search(self, session_id: str, query: str, direction: Optional[str] = None):
        """Run the full pipeline; returns (SearchResult, response metadata)."""
        if not self.ready:
            raise EngineNotReady("corpus and rules must be loaded before searching")
        direction = direction or self.config.direction
        request = parse_request(query, direction)

        index = self.corpus.index
        rule_base = self.rule_base
        cooccur = self._cooccur(index)
        session = self.sessions.get_or_create(session_id)

        with self.sessions.lock(session_id):
            effective = effective_query(
                session, request, self.config.theta, cooccur, decay=self.config.decay
            )
            compiled, cache_state = self.compile_rules(effective.weighted_terms, direction)
            hits = index.search(effective.weighted_terms)
            extracted = extract_facts(
                effective,
                hits,
                compiled.rules,
                index,
                top_k=self.config.top_k,
                phrase_window=self.config.phrase_window,
                snippet_tokens=self.config.snippet_tokens,
            )
            # Working memory starts from the condition-phrase facts only: a
            # bare query-term match is evidence to show, not a premise, and
            # seeding it would pre-empt deriving that same statement by rule.
            initial = {
                fact.statement: fact.confidence for fact in extracted if fact.kind == KIND_CONDITION
            }
            inference = forward_chain(
                initial, compiled.rules, strategy=self.config.strategy, max_depth=self.config.max_depth
            )
            result = compose(effective, extracted, inference, hits)
            self.traces.update(inference.traces)
            session.append(request, self._result_terms(extracted, hits, index))
            self.searches += 1

        meta = {
            "cache": cache_state,
            "compiled_key": compiled.key,
            "engine_version": __version__,
            "rulebase_version": rule_base.version_hash,
        }
        return result, meta

    @staticmethod
    def _result_terms(extracted, hits, index: CorpusIndex) -> Set[str]:
        terms: Set[str] = set()
        for hit in hits[:3]:
            terms.update(tokenize(index.document(hit.doc_id).title))
        for fact in extracted:
            terms.update(fact.statement.split())
        return terms

    def explain(self, trace_id: str) -> Optional[Trace]:
        return self.traces.get(trace_id)

    def stats(self) -> Dict[str, object]:
        cache_stats = self.cache.stats() if self.cache is not None else {"enabled": False}
        if self.cache is not None:
            cache_stats["enabled"] = True
        return {
            "documents": self.corpus.doc_count,
            "rules": len(self.rule_base) if self.rule_base is not None else 0,
            "rulebase_version": self.rule_base.version_hash if self.rule_base else None,
            "searches": self.searches,
            "sessions": len(self.sessions),
            "cache": cache_stats,
            "engine_version": __version__,
        }
