"""Language-aware text normalization: tokenization, stopwords, stemming,
and rule-based sentence splitting.

The normalizer registry is pluggable; the built-in normalizers pair a
per-language stopword list with a lightweight suffix stemmer. Sentence
splitting is rule-based on terminal punctuation with a per-language
abbreviation exception list.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .errors import UnsupportedLanguage

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_TERMINALS = ".!?"

ENGLISH_STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because
been before being below between both but by can did do does doing down
during each few for from further had has have having he her here hers
him his how i if in into is it its itself just me more most my no nor
not now of off on once only or other our ours out over own same she
should so some such than that the their theirs them then there these
they this those through to too under until up very was we were what
when where which while who whom why will with you your yours
""".split())

SPANISH_STOPWORDS = frozenset("""
a al algo ante antes como con contra cual cuando de del desde donde dos
el ella ellas ellos en entre era eran es esa esas ese eso esos esta
estaba estan este esto estos fue ha han hasta hay la las le les lo los
mas me mi mientras muy nada ni no nos nosotros o otra otro para pero
poco por porque que quien se ser si sin sobre son su sus tambien te
tiene todo todos tu un una uno unos y ya
""".split())

FRENCH_STOPWORDS = frozenset("""
a au aux avec ce ces cette comme dans de des du elle elles en est et
etait ete etre il ils je la le les leur lui mais me meme mes moi mon ne
nos notre nous on ou par pas pour qu que qui sa se ses si son sont sur
ta te tes toi ton tu un une vos votre vous y
""".split())

GERMAN_STOPWORDS = frozenset("""
aber alle als also am an auch auf aus bei bin bis bist da damit dann
das dass dein der den des dem die dies diese dir doch dort du durch
ein eine einem einen einer eines er es fur hab habe haben hat hatte
hier ich ihr im in ist ja kann kein mein mich mir mit nach nicht noch
nur oder sehr sein sich sie sind so uber um und uns unter vom von vor
war was weil wenn werden wie wir wird zu zum zur
""".split())

ABBREVIATIONS = {
    "en": frozenset({"dr", "mr", "mrs", "ms", "prof", "st", "vs", "etc",
                     "e.g", "i.e", "fig", "jr", "sr", "al", "approx"}),
    "es": frozenset({"sr", "sra", "dr", "dra", "etc", "ej", "pag"}),
    "fr": frozenset({"m", "mme", "mlle", "dr", "etc", "ex", "fig"}),
    "de": frozenset({"dr", "prof", "bzw", "usw", "z.b", "ca", "nr", "abb"}),
}


def _strip_suffixes(word: str, suffixes, min_stem: int) -> str:
    for suffix, replacement in suffixes:
        if word.endswith(suffix) and len(word) - len(suffix) >= min_stem:
            return word[: len(word) - len(suffix)] + replacement
    return word


def stem_english(word: str) -> str:
    if len(word) <= 3:
        return word
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-3] + "y"
    word = _strip_suffixes(word, [("ing", ""), ("ed", ""), ("ly", "")], 3)
    if word.endswith("es") and len(word) >= 5:
        word = word[:-2]
    elif word.endswith("s") and not word.endswith(("ss", "us", "is")):
        word = word[:-1]
    return word


def stem_spanish(word: str) -> str:
    if len(word) <= 4:
        return word
    return _strip_suffixes(word, [
        ("amientos", ""), ("imientos", ""), ("amiento", ""), ("imiento", ""),
        ("aciones", ""), ("acion", ""), ("mente", ""), ("idades", "idad"),
        ("ismos", ""), ("ismo", ""), ("istas", ""), ("ista", ""),
        ("anza", ""), ("ables", "able"), ("ibles", "ible"),
        ("es", ""), ("os", "o"), ("as", "a"), ("s", ""),
    ], 4)


def stem_french(word: str) -> str:
    if len(word) <= 4:
        return word
    return _strip_suffixes(word, [
        ("issements", ""), ("issement", ""), ("issantes", ""), ("issant", ""),
        ("ements", ""), ("ement", ""), ("ites", "ite"), ("ances", "ance"),
        ("euses", "eur"), ("euse", "eur"), ("eurs", "eur"),
        ("aux", "al"), ("es", ""), ("x", ""), ("s", ""),
    ], 4)


def stem_german(word: str) -> str:
    if len(word) <= 4:
        return word
    return _strip_suffixes(word, [
        ("ungen", "ung"), ("heiten", "heit"), ("keiten", "keit"),
        ("ischen", "isch"), ("ische", "isch"), ("lichen", "lich"),
        ("liche", "lich"), ("en", ""), ("ern", ""), ("er", ""),
        ("es", ""), ("e", ""), ("n", ""), ("s", ""),
    ], 4)


@dataclass(frozen=True)
class Normalizer:
    """Stopword list plus a stem function for one language."""

    lang: str
    stopwords: frozenset
    stem: Callable[[str], str]


_REGISTRY: dict[str, Normalizer] = {}


def register_normalizer(normalizer: Normalizer) -> None:
    _REGISTRY[normalizer.lang] = normalizer


def get_normalizer(lang: str) -> Normalizer:
    try:
        return _REGISTRY[lang]
    except KeyError:
        raise UnsupportedLanguage(f"no normalizer registered for {lang!r}") from None


def supported_languages() -> list[str]:
    return sorted(_REGISTRY)


for _lang, _stop, _stem in [
    ("en", ENGLISH_STOPWORDS, stem_english),
    ("es", SPANISH_STOPWORDS, stem_spanish),
    ("fr", FRENCH_STOPWORDS, stem_french),
    ("de", GERMAN_STOPWORDS, stem_german),
]:
    register_normalizer(Normalizer(_lang, _stop, _stem))


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens, punctuation stripped."""
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


def normalize_tokens(text: str, lang: str) -> list[str]:
    """Lowercase, strip punctuation, drop stopwords, and stem, in source order."""
    norm = get_normalizer(lang)
    return [norm.stem(tok) for tok in tokenize(text) if tok not in norm.stopwords]


def stopwords_for(lang: str) -> frozenset:
    return get_normalizer(lang).stopwords


def _preceding_word(text: str, index: int) -> str:
    """Word (possibly dotted, e.g. 'e.g') immediately before text[index]."""
    j = index
    while j > 0 and (text[j - 1].isalpha() or text[j - 1] == "."):
        j -= 1
    return text[j:index].strip(".")


def split_sentences(text: str, lang: str = "en") -> list[str]:
    """Rule-based sentence segmentation on terminal punctuation.

    Segments are non-overlapping and order-preserving; known abbreviations
    do not terminate a sentence; empty segments are dropped.
    """
    abbrevs = ABBREVIATIONS.get(lang, ABBREVIATIONS["en"])
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] not in _TERMINALS:
            i += 1
            continue
        j = i
        while j + 1 < n and text[j + 1] in _TERMINALS:
            j += 1
        boundary = j + 1 >= n or text[j + 1].isspace()
        if boundary and text[i] == "." and j == i:
            if _preceding_word(text, i).lower() in abbrevs:
                boundary = False
        if boundary:
            segment = text[start:j + 1].strip()
            if segment:
                sentences.append(segment)
            start = j + 1
        i = j + 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences
