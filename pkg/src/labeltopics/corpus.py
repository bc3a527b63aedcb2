"""Record ingestion, tokenization and iterative corpus pruning."""

from __future__ import annotations

import csv
import functools
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from nltk.stem.porter import PorterStemmer

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")

# Abbreviations of "suspect"/"victim", optionally pluralised and/or numbered (V1, SUSPS, VICT2).
ROLE_PATTERN = re.compile(r"(?:s|su|susp|suspect|v|vic|vict|victim)s?\d*", re.IGNORECASE)

_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@functools.lru_cache(maxsize=None)
def stem(word: str) -> str:
    return _stemmer.stem(word)


def default_stop_words() -> frozenset[str]:
    text = resources.files("labeltopics").joinpath("data/english_stopwords.txt").read_text("utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def read_word_list(path: str | Path) -> set[str]:
    """One word per line; blank lines and ``#`` comments are ignored."""
    words = set()
    with open(path, encoding="utf-8", errors="replace") as f:
        for line in f:
            line = line.split("#", 1)[0].strip().lower()
            if line:
                words.add(line)
    return words


@dataclass(frozen=True)
class StopRules:
    stop_words: frozenset[str] = field(default_factory=default_stop_words)
    role_pattern: re.Pattern = ROLE_PATTERN

    def extended(self, extra: Iterable[str]) -> "StopRules":
        return StopRules(self.stop_words | {w.lower() for w in extra}, self.role_pattern)

    def is_role_word(self, token: str) -> bool:
        return self.role_pattern.fullmatch(token) is not None

    def drops(self, token: str) -> bool:
        return token.isdigit() or token in self.stop_words or self.is_role_word(token)


@dataclass(frozen=True)
class Document:
    id: str
    label: str
    raw_text: str
    tokens: tuple[str, ...] = ()

    def with_tokens(self, tokens: Iterable[str]) -> "Document":
        return Document(self.id, self.label, self.raw_text, tuple(tokens))


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    corpus_count: dict[str, int]
    doc_freq: dict[str, int]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    @classmethod
    def from_documents(cls, docs: Sequence[Document]) -> "Vocabulary":
        counts: Counter[str] = Counter()
        dfs: Counter[str] = Counter()
        for doc in docs:
            counts.update(doc.tokens)
            dfs.update(set(doc.tokens))
        terms = tuple(sorted(counts))
        return cls(terms, {t: counts[t] for t in terms}, {t: dfs[t] for t in terms})


def tokenize(raw_text: str, rules: StopRules | None = None, stem_words: bool = True) -> list[str]:
    """Lowercase alphanumeric runs minus stop-words, role words and bare numbers.

    >>> tokenize("SUSP ENTERED LOCATION PRODUCED HANDGUN DEMANDED MONEY")
    ['enter', 'locat', 'produc', 'handgun', 'demand', 'monei']
    """
    if rules is None:
        rules = _default_rules()
    tokens = [t.lower() for t in _TOKEN_RE.findall(raw_text)]
    tokens = [t for t in tokens if not rules.drops(t)]
    if stem_words:
        tokens = [stem(t) for t in tokens]
    return tokens


@functools.lru_cache(maxsize=1)
def _default_rules() -> StopRules:
    return StopRules()


def tokenize_documents(docs: Iterable[Document], rules: StopRules | None = None,
                       stem_words: bool = True) -> list[Document]:
    return [d.with_tokens(tokenize(d.raw_text, rules, stem_words)) for d in docs]


def prune_corpus(docs: Sequence[Document], min_term_count: int = 5,
                 min_doc_len: int = 3) -> tuple[list[Document], Vocabulary]:
    """Drop rare terms and short documents alternately until neither rule fires.

    Each pass removes every offending term (resp. document) at once, so the
    result is the largest sub-corpus satisfying both thresholds and does not
    depend on document order.
    """
    if min_term_count < 1 or min_doc_len < 1:
        raise ValueError("pruning thresholds must be >= 1")
    current = list(docs)
    while True:
        counts = Counter(t for d in current for t in d.tokens)
        rare = {t for t, c in counts.items() if c < min_term_count}
        if rare:
            current = [d.with_tokens(t for t in d.tokens if t not in rare) for d in current]
        kept = [d for d in current if len(d.tokens) >= min_doc_len]
        if not rare and len(kept) == len(current):
            break
        current = kept
    return current, Vocabulary.from_documents(current)


def read_records(path: str | Path, id_col: str = "id", label_col: str = "label",
                 text_col: str = "text", delimiter: str | None = None) -> list[Document]:
    """Read a delimited file with a header row into untokenized documents.

    The delimiter is inferred from the extension (``.tsv``/``.tab`` -> tab,
    otherwise comma) unless given. Undecodable bytes become U+FFFD.
    """
    path = Path(path)
    if delimiter is None:
        delimiter = "\t" if path.suffix.lower() in (".tsv", ".tab") else ","
    with open(path, encoding="utf-8", errors="replace", newline="") as f:
        reader = csv.DictReader(f, delimiter=delimiter)
        header = reader.fieldnames or []
        missing = [c for c in (id_col, label_col, text_col) if c not in header]
        if missing:
            raise KeyError(f"{path}: missing column(s) {', '.join(missing)}")
        return [Document(str(row[id_col] or ""), str(row[label_col] or ""), str(row[text_col] or ""))
                for row in reader]
