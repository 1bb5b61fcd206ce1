"""ruleseek: a desk-scale keyword search engine whose answers split into
corpus-backed facts and rule-derived conclusions, with explanation traces,
relevance-gated rule firing, chain compression and a compiled-rule cache."""

__version__ = "0.1.0"

from .corpus import Corpus, CorpusIndex, Document, Posting, RankedHit, tokenize  # noqa: F401
from .query import (  # noqa: F401
    EffectiveQuery,
    Session,
    UserRequest,
    effective_query,
    history_link_score,
    parse_request,
)
from .rules import Rule, RuleBase, RuleGraph, build_rule_graph, parse_rule_dsl, validate  # noqa: F401
from .inference import (  # noqa: F401
    AreaScorer,
    BackwardResult,
    Fact,
    Trace,
    backward_chain,
    forward_chain,
    rank_activations,
    relevance_filter,
)
from .compression import (  # noqa: F401
    CompiledRuleSet,
    CompressedRule,
    RuleSetCache,
    compile_for_query,
    compress_chains,
)
from .compose import SearchResult, compose, extract_facts  # noqa: F401
from .config import Config, load_config  # noqa: F401
from .engine import SearchEngine  # noqa: F401
