"""Planted-topic corpora for testing and demos.

Each topic owns a disjoint block of made-up words. A document draws its
words from its topic's block, except that each word is replaced with
probability ``noise`` by a word drawn from the whole vocabulary. Filler
words (stop-words and suspect/victim abbreviations) are sprinkled in so
the preprocessing has something to remove. Words are consonant-vowel
syllables ending in ``a`` or ``o``, which Porter stemming leaves alone.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .corpus import Document

_CONSONANTS = "bdfgklmnprtvzch"
_VOWELS = "ao"
FILLERS = ("THE", "AND", "SUSP", "VICT", "V1", "S2", "WAS", "TO", "OF")


@dataclass(frozen=True)
class SyntheticSpec:
    topics: int = 4
    docs_per_topic: int = 250
    vocab_per_topic: int = 50
    noise: float = 0.10
    min_len: int = 12
    max_len: int = 24
    labels_per_topic: int = 1
    label_noise: float = 0.0
    filler_rate: float = 0.1
    seed: int = 0


def make_word(i: int, syllables: int = 3) -> str:
    """Distinct pseudo-word for every index below ``30 ** syllables``."""
    letters = []
    base = len(_CONSONANTS) * len(_VOWELS)
    space = base ** syllables
    if not 0 <= i < space:
        raise ValueError("word index out of range; use more syllables")
    i = (i * 7919) % space  # 7919 is prime and coprime to 30**k: a bijection that scatters neighbours
    for _ in range(syllables):
        i, r = divmod(i, base)
        c, v = divmod(r, len(_VOWELS))
        letters.append(_CONSONANTS[c] + _VOWELS[v])
    return "".join(letters)


def topic_label(topic: int, sub: int = 0) -> str:
    return f"type_{topic + 1:02d}{chr(ord('a') + sub)}"


def topic_words(spec: SyntheticSpec) -> list[list[str]]:
    syllables = 3 if spec.topics * spec.vocab_per_topic <= 30 ** 3 else 4
    return [[make_word(t * spec.vocab_per_topic + j, syllables) for j in range(spec.vocab_per_topic)]
            for t in range(spec.topics)]


def generate(spec: SyntheticSpec) -> tuple[list[Document], np.ndarray]:
    """Return untokenized documents and their planted topic (0-based) per document."""
    rng = np.random.default_rng(spec.seed)
    words = topic_words(spec)
    flat = [w for block in words for w in block]
    labels = [topic_label(t, s) for t in range(spec.topics) for s in range(spec.labels_per_topic)]
    docs, planted = [], []
    for t in range(spec.topics):
        for k in range(spec.docs_per_topic):
            length = int(rng.integers(spec.min_len, spec.max_len + 1))
            out = []
            for _ in range(length):
                if rng.random() < spec.noise:
                    out.append(flat[rng.integers(len(flat))])
                else:
                    out.append(words[t][rng.integers(spec.vocab_per_topic)])
                if rng.random() < spec.filler_rate:
                    out.append(FILLERS[rng.integers(len(FILLERS))])
            label = topic_label(t, k % spec.labels_per_topic)
            if spec.label_noise > 0 and rng.random() < spec.label_noise:
                label = labels[rng.integers(len(labels))]
            docs.append(Document(f"d{len(docs):06d}", label, " ".join(out).upper()))
            planted.append(t)
    return docs, np.array(planted)


def write_corpus(docs: list[Document], path: str | Path, spec: SyntheticSpec | None = None) -> Path:
    """CSV with id,label,text; generator parameters go to ``<path>.json``."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "label", "text"])
        for d in docs:
            w.writerow([d.id, d.label, d.raw_text])
    if spec is not None:
        path.with_name(path.name + ".json").write_text(
            json.dumps({"generator": "planted-topics", **asdict(spec)}, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
    return path
