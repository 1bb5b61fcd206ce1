"""Shared fixture corpora and rule files.

The wording of each corpus is load-bearing: co-occurrence expansion uses a
4-token window, so which vocabulary sits near which decides the area scores
that drive relevance filtering (tau defaults to 0.15). The expected scores
are exercised in the tests; edit these texts only together with them.
"""
from __future__ import annotations

from typing import Dict, List, Tuple

from ruleseek.corpus import Corpus

# Biography fixture: three statements about one historical figure.
NAPOLEON_DOCS: List[Tuple[str, str, str]] = [
    ("doc/genetics", "Napoleon genetics", "napoleon had e1b1b1 haplogroup ancestors from the middle east"),
    ("doc/conquest", "Napoleon conquest", "napoleon conqueror and unifier of europe"),
    ("doc/death", "Napoleon death", "napoleon arsenic in hair was poisoned"),
]

NAPOLEON_RULES = """\
# biography rules
IF e1b1b1 haplogroup THEN ancestors from the middle east
IF conqueror THEN unifier
IF arsenic in hair THEN was poisoned
"""

NAPOLEON_FACTS = {"e1b1b1 haplogroup", "conqueror", "arsenic in hair"}
NAPOLEON_CONCLUSIONS = {"ancestors from the middle east", "unifier", "was poisoned"}

# Attribute-style fixture: parts imply the whole.
PLANE_DOCS: List[Tuple[str, str, str]] = [
    ("doc/parts", "aircraft parts", "wings engine chassis assembled for the aircraft"),
    ("doc/aviation", "aviation", "a plane has wings engine chassis for flight"),
]

PLANE_RULES = "IF wings AND engine AND chassis THEN plane\n"

# Relevance-filter fixture: the car/race/logistics/special rule quartet.
# "car" co-occurs with almost nothing, "logistics" with a lot, so the
# race/special conclusions fall below tau while rules 1 and 3 clear it.
CAR_DOCS: List[Tuple[str, str, str]] = [
    ("doc/fleet", "fleet", "car fleet transportation"),
    ("doc/supply", "supply", "transportation logistics supply chain management hub network planning freight"),
    ("doc/routes", "routes", "logistics warehouse distribution shipment cargo dispatch transportation"),
    ("doc/freight", "freight", "logistics freight carriers customs brokers inventory transportation"),
    ("doc/ports", "ports", "logistics harbor terminals containers pallets transportation"),
    ("doc/rail", "rail", "logistics railcars depots couriers parcels transportation"),
]

CAR_RULES = """\
IF car THEN used for transportation
IF car THEN used in race
IF used for transportation THEN logistics
IF used in race THEN car is special
"""

# Consecutive-request fixture: films then actors.
MOVIE_DOCS: List[Tuple[str, str, str]] = [
    ("doc/terminator", "terminator", "terminator movie released 1991 action film"),
    ("doc/actors", "actors", "schwarzenegger actor starred terminator movie"),
]

CHAIN_RULES = """\
IF a THEN b
IF b THEN c
IF c THEN d
IF d THEN e
"""


def build_corpus(docs: List[Tuple[str, str, str]]) -> Corpus:
    corpus = Corpus()
    for uri, title, body in docs:
        corpus.ingest_document(uri, title, body)
    return corpus


def doc_texts(docs: List[Tuple[str, str, str]]) -> Dict[int, str]:
    """doc_id -> indexed text (title + body), mirroring ingestion order."""
    return {i + 1: f"{title} {body}" for i, (_, title, body) in enumerate(docs)}
