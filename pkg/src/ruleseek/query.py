"""User request parsing and session-linked query construction.

A request is an ordered keyword list with per-keyword attributes: a priority
weight in (0, 1] and an origin (typed by the user or inherited from session
history). Positional priority decays harmonically; an explicit `term^0.7`
suffix overrides the positional weight.
"""
from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from .corpus import tokenize

LEFT_TO_RIGHT = "left_to_right"
RIGHT_TO_LEFT = "right_to_left"

ORIGIN_TYPED = "typed"
ORIGIN_HISTORY = "history"

_WEIGHT_SUFFIX = re.compile(r"^(?P<term>.*?)\^(?P<weight>\d+(?:\.\d+)?)$")


class EmptyRequestError(ValueError):
    pass


@dataclass(frozen=True)
class KeywordAttribute:
    priority_weight: float
    origin: str = ORIGIN_TYPED


@dataclass(frozen=True)
class UserRequest:
    raw: str
    keywords: Tuple[str, ...]
    attributes: Mapping[str, KeywordAttribute]

    def weighted_terms(self) -> Dict[str, float]:
        return {k: self.attributes[k].priority_weight for k in self.keywords}


@dataclass(frozen=True)
class EffectiveQuery:
    weighted_terms: Mapping[str, float]
    linked_from_history: FrozenSet[str] = frozenset()

    def terms(self) -> Tuple[str, ...]:
        return tuple(sorted(self.weighted_terms))


@dataclass
class SessionEntry:
    request: UserRequest
    result_terms: FrozenSet[str]


@dataclass
class Session:
    session_id: str
    history: List[SessionEntry] = field(default_factory=list)
    created_at: float = field(default_factory=time.time)
    max_history: int = 20

    def append(self, request: UserRequest, result_terms: Iterable[str]) -> None:
        self.history.append(SessionEntry(request=request, result_terms=frozenset(result_terms)))
        if len(self.history) > self.max_history:
            del self.history[: len(self.history) - self.max_history]

    def last(self) -> Optional[SessionEntry]:
        return self.history[-1] if self.history else None


def parse_request(raw: str, direction: str = LEFT_TO_RIGHT) -> UserRequest:
    """Parse user input into keywords with positional priority weights.

    Keyword i (0-based, in priority order) receives weight 1/(i+1); with
    direction=right_to_left the priority order is reversed before weighting.
    An explicit `term^w` suffix overrides the positional weight and must lie
    in (0, 1]. Repeated keywords keep their highest weight.
    """
    if direction not in (LEFT_TO_RIGHT, RIGHT_TO_LEFT):
        raise ValueError(f"unknown direction: {direction!r}")
    pieces: List[Tuple[str, Optional[float]]] = []
    for chunk in raw.split():
        explicit: Optional[float] = None
        m = _WEIGHT_SUFFIX.match(chunk)
        if m:
            explicit = float(m.group("weight"))
            if not 0 < explicit <= 1:
                raise ValueError(f"explicit priority {explicit} out of range (0, 1]: {chunk!r}")
            chunk = m.group("term")
        for token in tokenize(chunk):
            pieces.append((token, explicit))
    if not pieces:
        raise EmptyRequestError("empty request")

    priority_order = list(pieces)
    if direction == RIGHT_TO_LEFT:
        priority_order.reverse()

    weights: Dict[str, float] = {}
    for rank, (token, explicit) in enumerate(priority_order):
        weight = explicit if explicit is not None else 1.0 / (rank + 1)
        weights[token] = max(weight, weights.get(token, 0.0))

    keywords: List[str] = []
    for token, _ in pieces:
        if token not in keywords:
            keywords.append(token)
    attributes = {k: KeywordAttribute(priority_weight=weights[k]) for k in keywords}
    return UserRequest(raw=raw, keywords=tuple(keywords), attributes=attributes)


CooccurrenceFn = Callable[[str], Set[str]]


def expand_terms(terms: Iterable[str], cooccur: CooccurrenceFn) -> Set[str]:
    """A term set together with every term the corpus sees near its members."""
    expansion: Set[str] = set()
    for term in terms:
        expansion.add(term)
        expansion.update(cooccur(term))
    return expansion


def jaccard(a: Set[str], b: Set[str]) -> float:
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def history_link_score(
    prev: UserRequest,
    prev_result_terms: Iterable[str],
    current: UserRequest,
    cooccur: CooccurrenceFn,
) -> float:
    """Semantic connection between consecutive requests in [0, 1].

    Jaccard similarity between the co-occurrence expansions of the previous
    request (keywords plus its result terms) and the current request.
    """
    prev_seed = set(prev.keywords) | set(prev_result_terms)
    prev_expansion = expand_terms(prev_seed, cooccur)
    curr_expansion = expand_terms(current.keywords, cooccur)
    return jaccard(prev_expansion, curr_expansion)


def effective_query(
    session: Optional[Session],
    current: UserRequest,
    theta: float,
    cooccur: CooccurrenceFn,
    decay: float = 0.5,
) -> EffectiveQuery:
    """Merge the previous request's terms into the current one when the two
    requests are semantically linked (link score >= theta).

    Inherited terms carry weight prior * decay, capped at the lowest typed
    weight so typed keywords always dominate; a term both typed and inherited
    keeps its typed weight. Only the immediately preceding request can link.
    """
    weighted: Dict[str, float] = current.weighted_terms()
    linked: Set[str] = set()
    last = session.last() if session is not None else None
    if last is not None:
        score = history_link_score(last.request, last.result_terms, current, cooccur)
        if score >= theta:
            floor = min(weighted.values())
            for term, attr in last.request.attributes.items():
                if term in weighted:
                    continue
                weighted[term] = min(attr.priority_weight * decay, floor)
                linked.add(term)
    return EffectiveQuery(weighted_terms=weighted, linked_from_history=frozenset(linked))
