"""Query topics and the three query formulations used across runs.

``key_conv`` concatenates the keyword and conversational fields;
``udels_query`` joins keyword non-stopwords with entity-ish content words
from the conversational field; ``t5_query`` appends precomputed generated
queries to ``key_conv``. Translations are table lookups from a sidecar
file, never a live service.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .errors import MissingExpansions, MissingTranslation, UnsupportedLanguage
from .textnorm import get_normalizer, tokenize

# Content words always kept by the default entity extractor.
DOMAIN_TERMS = frozenset({
    "covid", "covid19", "coronavirus", "sars", "virus", "pandemic",
    "vaccine", "mask", "quarantine", "lockdown", "antibody", "immunity",
})


@dataclass(frozen=True)
class QueryTopic:
    topic_id: str
    lang: str
    keyword: str
    conversational: str
    explanation: str = ""  # assessment aid only, never used for retrieval
    expansions: tuple[str, ...] = ()
    translations: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if not self.keyword or not self.conversational:
            raise ValueError("keyword and conversational must be non-empty")


def key_conv(topic: QueryTopic) -> str:
    """Keyword field, a single space, then the conversational field."""
    return f"{topic.keyword} {topic.conversational}"


def default_entity_extractor(topic: QueryTopic, stopwords: frozenset) -> list[str]:
    """Heuristic stand-in for named-entity extraction on the conversational
    field.

    Keeps non-stopword tokens, suppressing the leading run of tokens that
    merely repeat keyword-field content (the keyword part of the query
    already contributes those); domain terms end the suppression early.
    Capitalized mid-sentence tokens are always kept.
    """
    keyword_tokens = set(tokenize(topic.keyword))
    raw_tokens = [t for t in topic.conversational.split() if t]
    kept: list[str] = []
    skipping = True
    for position, raw in enumerate(raw_tokens):
        token = "".join(ch for ch in raw.lower() if ch.isalnum())
        if not token or token in stopwords:
            continue
        capitalized = raw[0].isupper() and position > 0
        if skipping and token in keyword_tokens and not capitalized \
                and token not in DOMAIN_TERMS:
            continue
        skipping = False
        kept.append(token)
    return kept


def udels_query(topic: QueryTopic, stopwords: Optional[frozenset] = None,
                entity_extractor: Optional[Callable] = None) -> str:
    """Keyword-field non-stopwords followed by conversational-field entities."""
    if stopwords is None:
        stopwords = get_normalizer(topic.lang).stopwords
    if entity_extractor is None:
        entity_extractor = default_entity_extractor
    keyword_part = [t for t in tokenize(topic.keyword) if t not in stopwords]
    entity_part = entity_extractor(topic, stopwords)
    return " ".join(keyword_part + entity_part)


def t5_query(topic: QueryTopic) -> str:
    """key_conv followed by the precomputed generated queries, in file order."""
    if not topic.expansions:
        raise MissingExpansions(f"topic {topic.topic_id} has no expansions")
    return " ".join([key_conv(topic), *topic.expansions])


def translate_query(topic: QueryTopic, target_lang: str) -> tuple[str, str]:
    """Stored (keyword, conversational) pair for the target language."""
    try:
        pair = topic.translations[target_lang]
    except KeyError:
        raise MissingTranslation(
            f"topic {topic.topic_id} has no {target_lang} translation"
        ) from None
    return pair["keyword"], pair["conversational"]


def derive_query(topic: QueryTopic, query_type: str) -> str:
    """Dispatch on the run's query_type."""
    if query_type == "key_conv":
        return key_conv(topic)
    if query_type == "udels":
        return udels_query(topic)
    if query_type == "t5":
        return t5_query(topic)
    raise ValueError(f"unknown query type {query_type!r}")


def translated_topic(topic: QueryTopic, target_lang: str) -> QueryTopic:
    """Copy of the topic with fields replaced by the stored translation."""
    keyword, conversational = translate_query(topic, target_lang)
    return QueryTopic(
        topic_id=topic.topic_id,
        lang=target_lang,
        keyword=keyword,
        conversational=conversational,
        explanation=topic.explanation,
        expansions=topic.expansions,
        translations=topic.translations,
    )


def load_topics(path: str | Path,
                expansions_path: str | Path | None = None,
                translations_path: str | Path | None = None) -> list[QueryTopic]:
    """Load topics from a JSONL file, merging optional sidecar files.

    Expansions file: ``{topic_id: [query, ...]}``.
    Translations file: ``{topic_id: {lang: {keyword, conversational}}}``.
    """
    expansions = {}
    if expansions_path is not None:
        expansions = json.loads(Path(expansions_path).read_text(encoding="utf-8"))
    translations = {}
    if translations_path is not None:
        translations = json.loads(Path(translations_path).read_text(encoding="utf-8"))
    topics = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            topic_id = record["topic_id"]
            topics.append(
                QueryTopic(
                    topic_id=topic_id,
                    lang=record["lang"],
                    keyword=record["keyword"],
                    conversational=record["conversational"],
                    explanation=record.get("explanation", ""),
                    expansions=tuple(expansions.get(topic_id, ())),
                    translations=translations.get(topic_id, {}),
                )
            )
    return topics
