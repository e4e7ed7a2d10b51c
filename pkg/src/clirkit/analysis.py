"""Per-language text analyzers.

These are small, fully specified stand-ins for the Lucene analyzers a typical
Anserini/Pyserini setup would use. They make no attempt at token-level parity
with Lucene.

    en: split on non-alphanumerics, lowercase, drop stopwords, Porter stem
    fa: fold Arabic letter forms, strip diacritics, split, lowercase, drop stopwords
    ru: split, lowercase, light suffix stemming, drop stopwords
    zh: character unigrams followed by adjacent-character bigrams
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .porter import porter_stem

LANGUAGES = ("en", "fa", "ru", "zh")
STEMMERS = ("none", "english-porter", "russian-light")

_WORD_RE = re.compile(r"[^\W_]+")

# Arabic code points folded to their Persian counterparts
_FA_FOLD = str.maketrans({
    "\u064a": "\u06cc",  # ARABIC LETTER YEH -> FARSI YEH
    "\u0649": "\u06cc",  # ALEF MAKSURA -> FARSI YEH
    "\u0643": "\u06a9",  # ARABIC LETTER KAF -> KEHEH
    "\u0629": "\u0647",  # TEH MARBUTA -> HEH
    "\u200c": " ",       # ZWNJ separates morphemes; treat as a token break
})
_FA_DIACRITICS = re.compile("[\u064b-\u065f\u0670\u0640]")  # harakat, superscript alef, tatweel


@dataclass(frozen=True)
class AnalyzerConfig:
    language: str = "en"
    lowercase: bool = True
    stopwords: frozenset[str] = field(default_factory=frozenset)
    stemmer: str = "none"
    fa_normalization: bool = False

    def __post_init__(self):
        if self.language not in LANGUAGES:
            raise ValueError(f"unsupported language {self.language!r}")
        if self.stemmer not in STEMMERS:
            raise ValueError(f"unknown stemmer {self.stemmer!r}")
        if self.language == "zh" and self.stemmer != "none":
            raise ValueError("zh analysis does not stem")
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))

    @classmethod
    def default(cls, language: str) -> "AnalyzerConfig":
        """Stock configuration for a language, with the bundled stopword list."""
        stemmer = {"en": "english-porter", "ru": "russian-light"}.get(language, "none")
        stopwords = bundled_stopwords(language)
        if stemmer == "russian-light":
            # the ru pipeline drops stopwords after stemming
            stopwords = frozenset(russian_light_stem(w) for w in stopwords)
        return cls(language=language, lowercase=True, stopwords=stopwords,
                   stemmer=stemmer, fa_normalization=language == "fa")

    def to_dict(self) -> dict:
        return {"language": self.language, "lowercase": self.lowercase,
                "stopwords": sorted(self.stopwords), "stemmer": self.stemmer,
                "fa_normalization": self.fa_normalization}

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyzerConfig":
        return cls(language=d["language"], lowercase=d["lowercase"],
                   stopwords=frozenset(d["stopwords"]), stemmer=d["stemmer"],
                   fa_normalization=d["fa_normalization"])


def read_stopwords(path: str | Path) -> frozenset[str]:
    """One token per line, UTF-8; blank lines and ``#`` comments ignored."""
    with open(path, encoding="utf-8") as f:
        return frozenset(w for w in (line.strip() for line in f) if w and not w.startswith("#"))


@lru_cache(maxsize=None)
def bundled_stopwords(language: str) -> frozenset[str]:
    res = resources.files("clirkit") / "data" / "stopwords" / f"{language}.txt"
    if not res.is_file():
        return frozenset()
    return frozenset(w for w in (line.strip() for line in res.read_text("utf-8").splitlines())
                     if w and not w.startswith("#"))


def normalize_persian(text: str) -> str:
    text = unicodedata.normalize("NFKC", text)
    text = text.translate(_FA_FOLD)
    return _FA_DIACRITICS.sub("", text)


_RU_SUFFIXES = (
    (6, ("иями", "оями")),
    (5, ("иям", "иях", "оях", "ями", "оям", "оьв", "ами", "его", "ему", "ери", "ими",
         "ого", "ому", "ыми", "оев")),
    (4, ("ая", "яя", "ях", "юю", "ах", "ею", "их", "ия", "ию", "ьв", "ою", "ую", "ям",
         "ых", "ея", "ам", "ем", "ей", "ём", "ев", "ий", "им", "ое", "ой", "ом", "ов",
         "ые", "ый", "ым", "ми")),
)
_RU_VOWELISH = frozenset("аеиоуйыяь")


def russian_light_stem(word: str) -> str:
    """Light inflectional stemmer (Savoy style): strip one case ending, then normalize."""
    n = len(word)
    for min_len, suffixes in _RU_SUFFIXES:
        if n > min_len and word.endswith(suffixes):
            word = word[:n - len(suffixes[0])]
            break
    else:
        if n > 3 and word[-1] in _RU_VOWELISH:
            word = word[:-1]
    n = len(word)
    if n > 3:
        if word[-1] in "ьи":
            return word[:-1]
        if word[-1] == "н" and word[-2] == "н":
            return word[:-1]
    return word


def _cjk_tokens(text: str, lowercase: bool) -> list[str]:
    if lowercase:
        text = text.lower()
    runs = [[ch for ch in chunk] for chunk in _WORD_RE.findall(text)]
    unigrams = [ch for run in runs for ch in run]
    bigrams = [run[i] + run[i + 1] for run in runs for i in range(len(run) - 1)]
    return unigrams + bigrams


def analyze(text: str, config: AnalyzerConfig) -> list[str]:
    if not text:
        return []
    if config.language == "zh":
        tokens = _cjk_tokens(text, config.lowercase)
        return [t for t in tokens if t not in config.stopwords]

    if config.language == "fa" and config.fa_normalization:
        text = normalize_persian(text)
    tokens = _WORD_RE.findall(text)
    if config.lowercase:
        tokens = [t.lower() for t in tokens]

    if config.stemmer == "russian-light":
        # stopwords are matched against stemmed forms in this pipeline
        tokens = [russian_light_stem(t) for t in tokens]
        return [t for t in tokens if t and t not in config.stopwords]

    tokens = [t for t in tokens if t not in config.stopwords]
    if config.stemmer == "english-porter":
        tokens = [porter_stem(t) for t in tokens]
    return [t for t in tokens if t]
