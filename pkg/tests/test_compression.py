import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import NaiveLRU, brute_closure
from ruleseek.compression import (
    CompiledRuleSet,
    CompressedRule,
    RuleSetCache,
    compile_for_query,
    compress_chains,
    make_cache_key,
)
from ruleseek.inference import forward_chain
from ruleseek.rules import Rule, RuleBase, build_rule_graph

TERMS = "abcdefgh"


def scorer_from(scores):
    return lambda statement: scores.get(statement, 0.0)


def chain_base(confidences=(1.0, 1.0, 1.0, 1.0)):
    lines = []
    for i, (frm, to) in enumerate(zip("abcd", "bcde")):
        conf = f" [{confidences[i]}]" if confidences[i] != 1.0 else ""
        lines.append(f"IF {frm} THEN {to}{conf}")
    return RuleBase.from_text("\n".join(lines))


class TestCompressChains:
    def test_endpoint_is_best_scoring_conclusion(self):
        base = chain_base()
        graph = build_rule_graph(base)
        (bridge,) = compress_chains(base, graph, scorer_from({"e": 0.9}), tau=0.15)
        assert bridge.conditions == frozenset({"a"})
        assert bridge.conclusion == "e"
        assert bridge.member_rule_ids == ("r1", "r2", "r3", "r4")

    def test_interior_endpoint(self):
        base = chain_base()
        graph = build_rule_graph(base)
        (bridge,) = compress_chains(base, graph, scorer_from({"d": 0.9}), tau=0.15)
        assert bridge.conclusion == "d"
        assert bridge.member_rule_ids == ("r1", "r2", "r3")

    def test_all_clearing_means_no_compression(self):
        base = chain_base()
        graph = build_rule_graph(base)
        scores = {"b": 0.5, "c": 0.5, "d": 0.5, "e": 0.5}
        assert compress_chains(base, graph, scorer_from(scores), tau=0.15) == []

    def test_none_clearing_means_no_compression(self):
        base = chain_base()
        graph = build_rule_graph(base)
        assert compress_chains(base, graph, scorer_from({}), tau=0.15) == []

    def test_confidence_is_member_product(self):
        base = RuleBase.from_text("IF a THEN b [0.9]\nIF b THEN c [0.8]")
        graph = build_rule_graph(base)
        (bridge,) = compress_chains(base, graph, scorer_from({"c": 1.0}), tau=0.15)
        assert bridge.confidence == pytest.approx(0.72, abs=1e-12)

    def test_tie_picks_deepest(self):
        base = chain_base()
        graph = build_rule_graph(base)
        (bridge,) = compress_chains(base, graph, scorer_from({"c": 0.4, "e": 0.4}), tau=0.15)
        assert bridge.conclusion == "e"

    def test_first_member_endpoint_yields_nothing(self):
        base = chain_base()
        graph = build_rule_graph(base)
        assert compress_chains(base, graph, scorer_from({"b": 0.9}), tau=0.15) == []

    def test_requires_two_members(self):
        with pytest.raises(ValueError):
            CompressedRule(
                rule_id="c",
                conditions=frozenset({"a"}),
                conclusion="b",
                confidence=1.0,
                member_rule_ids=("r1",),
            )


class TestCompileForQuery:
    def _cooccur(self, corpus):
        index = corpus.index
        return lambda t: index.cooccurring_terms(t, 4, 1)

    def test_car_fixture_compiles_rules_one_and_three(self, car_corpus, car_rules):
        from ruleseek.inference import AreaScorer

        scorer = AreaScorer(["car", "logistics"], self._cooccur(car_corpus))
        compiled = compile_for_query(["car", "logistics"], car_rules, scorer, tau=0.15)
        assert [r.rule_id for r in compiled.rules] == ["r1", "r3"]
        assert compiled.rulebase_version == car_rules.version_hash

    def test_empty_rule_base(self):
        compiled = compile_for_query(["x"], RuleBase([]), scorer_from({}), tau=0.15)
        assert compiled.rules == ()

    def test_identical_keys_identical_sets(self, car_corpus, car_rules):
        from ruleseek.inference import AreaScorer

        scorer = AreaScorer(["car", "logistics"], self._cooccur(car_corpus))
        a = compile_for_query(["logistics", "car"], car_rules, scorer, tau=0.15)
        b = compile_for_query(["car", "logistics", "car"], car_rules, scorer, tau=0.15)
        assert a.key == b.key
        assert a.canonical_json() == b.canonical_json()

    def test_support_rules_pulled_in(self):
        base = RuleBase.from_text("IF a THEN b\nIF b THEN s1")
        compiled = compile_for_query(["q"], base, scorer_from({"s1": 0.9}), tau=0.15)
        ids = [r.rule_id for r in compiled.rules]
        assert "r1" in ids and "r2" in ids  # r1 supports r2's condition
        bridges = [r for r in compiled.rules if isinstance(r, CompressedRule)]
        assert len(bridges) == 1 and bridges[0].conclusion == "s1"

    def test_chain_bridge_included_with_members(self):
        base = chain_base()
        compiled = compile_for_query(["q"], base, scorer_from({"e": 0.9}), tau=0.15)
        bridges = [r for r in compiled.rules if isinstance(r, CompressedRule)]
        plain = [r.rule_id for r in compiled.rules if not isinstance(r, CompressedRule)]
        assert len(bridges) == 1
        assert bridges[0].canonical_text() == "IF a THEN e"
        assert plain == ["r1", "r2", "r3", "r4"]  # support closure keeps the chain derivable


area_scores = st.dictionaries(
    st.sampled_from(TERMS), st.floats(min_value=0.0, max_value=1.0, allow_nan=False), max_size=8
)


@st.composite
def random_rules(draw):
    count = draw(st.integers(min_value=0, max_value=12))
    rules = []
    for i in range(count):
        conditions = draw(st.sets(st.sampled_from(TERMS), min_size=1, max_size=3))
        conclusion = draw(st.sampled_from(sorted(set(TERMS) - conditions)))
        confidence = draw(st.floats(min_value=0.05, max_value=1.0, allow_nan=False))
        rules.append(
            Rule(
                rule_id=f"r{i + 1}",
                conditions=frozenset(conditions),
                conclusion=conclusion,
                confidence=confidence,
                order_index=i + 1,
            )
        )
    return rules


class TestCompiledSetProperties:
    @given(
        rules=random_rules(),
        facts=st.dictionaries(
            st.sampled_from(TERMS), st.floats(min_value=0.05, max_value=1.0, allow_nan=False),
            min_size=1, max_size=5,
        ),
        scores=area_scores,
        tau=st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_sound_preserving_and_no_extra_work(self, rules, facts, scores, tau):
        base = RuleBase(rules)
        scorer = scorer_from(scores)
        compiled = compile_for_query(["q"], base, scorer, tau)
        depth = max(len(rules) + len(compiled.rules), 1)

        original = forward_chain(facts, rules, max_depth=depth)
        compiled_run = forward_chain(facts, compiled.rules, max_depth=depth)
        closure = brute_closure(facts, rules)

        # soundness: compiled derivations stay inside the original closure
        assert compiled_run.statements() <= closure
        # preservation: every closure statement clearing tau is still derived
        relevant = {s for s in closure if scorer(s) >= tau}
        assert relevant <= compiled_run.statements()
        # work bound: compression never increases rule firings
        assert len(compiled_run.fired) <= len(original.fired)

    @given(rules=random_rules(), scores=area_scores, tau=st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=150, deadline=None)
    def test_bridge_soundness_against_original_closure(self, rules, scores, tau):
        base = RuleBase(rules)
        graph = build_rule_graph(base)
        for bridge in compress_chains(base, graph, scorer_from(scores), tau):
            seed = {c: 1.0 for c in bridge.conditions}
            closure_run = forward_chain(seed, rules, max_depth=max(len(rules), 1))
            assert bridge.conclusion in closure_run.statements()
            assert closure_run.confidence(bridge.conclusion) >= bridge.confidence - 1e-12


class TestRuleSetCache:
    def _compiled(self, key="a b|left_to_right", version="v1", base=None):
        base = base or chain_base()
        return CompiledRuleSet(key=key, rulebase_version=version, rules=base.rules)

    def test_put_get_round_trip_bit_identical(self):
        cache = RuleSetCache()
        entry = self._compiled()
        cache.put(entry, "v1")
        got = cache.get(entry.key, "v1")
        assert got.canonical_json() == entry.canonical_json()

    def test_version_gate_evicts_stale(self):
        cache = RuleSetCache()
        entry = self._compiled(version="v1")
        cache.put(entry, "v1")
        assert cache.get(entry.key, "v2") is None
        assert len(cache) == 0
        assert cache.misses == 1 and cache.evictions == 1

    def test_unknown_key_misses(self):
        cache = RuleSetCache()
        assert cache.get("nope|left_to_right", "v1") is None
        assert cache.misses == 1

    def test_stale_put_rejected(self):
        cache = RuleSetCache()
        with pytest.raises(ValueError):
            cache.put(self._compiled(version="old"), "new")

    def test_lru_eviction_matches_hand_simulation(self):
        cache = RuleSetCache(capacity=3)
        oracle = NaiveLRU(3)
        evicted_by_oracle = []
        for key in ["k1|d", "k2|d", "k3|d", "k4|d"]:
            evicted_by_oracle += oracle.touch(key)
            cache.put(self._compiled(key=key), "v1")
        assert evicted_by_oracle == ["k1|d"]
        assert cache.get("k1|d", "v1") is None
        for key in ["k2|d", "k3|d", "k4|d"]:
            assert cache.get(key, "v1") is not None
        assert cache.evictions == 1

    def test_get_refreshes_recency(self):
        cache = RuleSetCache(capacity=2)
        cache.put(self._compiled(key="k1|d"), "v1")
        cache.put(self._compiled(key="k2|d"), "v1")
        cache.get("k1|d", "v1")
        cache.put(self._compiled(key="k3|d"), "v1")  # evicts k2, not k1
        assert cache.get("k1|d", "v1") is not None
        assert cache.get("k2|d", "v1") is None

    def test_persistence_across_restart(self, tmp_path):
        path = str(tmp_path / "cache.jsonl")
        cache = RuleSetCache(path=path, capacity=10)
        entry = self._compiled()
        cache.put(entry, "v1")
        reloaded = RuleSetCache(path=path, capacity=10)
        got = reloaded.get(entry.key, "v1")
        assert got is not None
        assert got.canonical_json() == entry.canonical_json()

    def test_eviction_persisted(self, tmp_path):
        path = str(tmp_path / "cache.jsonl")
        cache = RuleSetCache(path=path, capacity=1)
        cache.put(self._compiled(key="k1|d"), "v1")
        cache.put(self._compiled(key="k2|d"), "v1")
        reloaded = RuleSetCache(path=path, capacity=1)
        assert reloaded.get("k1|d", "v1") is None
        assert reloaded.get("k2|d", "v1") is not None

    def test_storage_failure_degrades_not_fails(self, tmp_path):
        cache = RuleSetCache(path=str(tmp_path))  # a directory: appends will fail
        entry = self._compiled()
        cache.put(entry, "v1")
        assert cache.degraded
        assert cache.get(entry.key, "v1") is not None  # memory path still works

    def test_corrupt_file_degrades(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        path.write_text("{not json}\n")
        cache = RuleSetCache(path=str(path))
        assert cache.degraded
        assert len(cache) == 0

    def test_make_cache_key_order_insensitive(self):
        assert make_cache_key(["b", "a", "b"]) == make_cache_key(["a", "b"])
        assert make_cache_key(["a"], "left_to_right") != make_cache_key(["a"], "right_to_left")
