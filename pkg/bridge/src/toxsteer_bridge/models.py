"""Model backends behind the bridge endpoints.

Identifier schemes decide what gets loaded:

  ngram:PATH     n-gram artifact in the engine's documented JSON format
  lexicon:PATH   word-toxicity lexicon (token<TAB>value lines)
  overlap:       built-in token-overlap semantic similarity
  hf:MODEL_ID    transformers checkpoint (needs the optional hf extra)

The offline schemes read the engine's published file formats; nothing here
imports the engine package.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from pathlib import Path

import numpy as np

BOS_TOKEN = "<s>"
UNK_TOKEN = "<unk>"
_WORD_RE = re.compile(r"[a-z0-9']+")

NGRAM_FORMAT = "toxsteer-ngram"
NGRAM_VERSION = 1


def tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def vocab_hash(tokens) -> str:
    """sha256 over the ordered token list; must match the engine side."""
    return hashlib.sha256("\n".join(tokens).encode("utf-8")).hexdigest()


class NGramLM:
    """Reader for the engine's n-gram artifact; serves log-probabilities."""

    def __init__(self, path):
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != NGRAM_FORMAT:
            raise ValueError(f"{path}: not a {NGRAM_FORMAT} artifact")
        if payload.get("version") != NGRAM_VERSION:
            raise ValueError(f"{path}: unsupported version {payload.get('version')}")
        self.tokens: list[str] = payload["vocabulary"]
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        self.order: int = payload["order"]
        self.alpha: float = payload["alpha"]
        self.counts = {
            tuple(ctx.split(" ")) if ctx else (): dict(members)
            for ctx, members in payload["counts"].items()
        }
        self.totals = {ctx: sum(c.values()) for ctx, c in self.counts.items()}
        self.hash = vocab_hash(self.tokens)

    @property
    def size(self) -> int:
        return len(self.tokens)

    def encode(self, tokens) -> list[str]:
        return [tok if tok in self.index else UNK_TOKEN for tok in tokens]

    def validate(self, tokens) -> str | None:
        for tok in tokens:
            if tok not in self.index:
                return tok
        return None

    def log_probs(self, prefix: list[str]) -> np.ndarray:
        if self.order == 1:
            ctx = ()
        else:
            pad = [BOS_TOKEN] * max(0, self.order - 1 - len(prefix))
            ctx = tuple(pad + prefix[-(self.order - 1):])
        counts = np.full(self.size, self.alpha, dtype=float)
        for tok, c in self.counts.get(ctx, {}).items():
            counts[self.index[tok]] += c
        total = self.totals.get(ctx, 0)
        return np.log(counts) - math.log(total + self.alpha * self.size)


class LexiconToxicity:
    """Mean word toxicity over the lexicon, default for unmapped words."""

    mapping_note = ("mean of per-word lexicon values over the tokenized text; "
                    "unmapped words count as the default value")

    def __init__(self, path, default: float = 0.05):
        self.mapping: dict[str, float] = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected token<TAB>toxicity")
            value = float(parts[1])
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{path}:{lineno}: toxicity out of [0,1]")
            self.mapping[parts[0]] = value
        self.default = default

    def score(self, text: str) -> float:
        tokens = tokenize(text)
        if not tokens:
            return 0.0
        values = [self.mapping.get(tok, self.default) for tok in tokens]
        return float(sum(values) / len(values))


class OverlapMetric:
    """Token-overlap semantic similarity: the mean of the candidate's Jaccard
    overlap with the reference and with the source. Self-similarity is 1."""

    def score(self, source: str, candidate: str, reference: str) -> float:
        cand = set(tokenize(candidate))

        def jaccard(other: set) -> float:
            if not cand and not other:
                return 1.0
            union = cand | other
            return len(cand & other) / len(union) if union else 0.0

        return 0.5 * jaccard(set(tokenize(reference))) \
            + 0.5 * jaccard(set(tokenize(source)))


def load_lm(spec: str | None):
    if not spec:
        return None
    if spec.startswith("ngram:"):
        return NGramLM(spec[len("ngram:"):])
    if spec.startswith("hf:"):
        return _load_hf_lm(spec[len("hf:"):])
    raise ValueError(f"unknown LM spec {spec!r} (use ngram:PATH or hf:MODEL)")


def load_toxicity(spec: str | None):
    if not spec:
        return None
    if spec.startswith("lexicon:"):
        return LexiconToxicity(spec[len("lexicon:"):])
    if spec.startswith("hf:"):
        return _load_hf_classifier(spec[len("hf:"):])
    raise ValueError(f"unknown toxicity spec {spec!r} (use lexicon:PATH or hf:MODEL)")


def load_metric(spec: str | None):
    if not spec:
        return None
    if spec in ("overlap", "overlap:"):
        return OverlapMetric()
    if spec.startswith("hf:"):
        return _load_hf_metric(spec[len("hf:"):])
    raise ValueError(f"unknown metric spec {spec!r} (use overlap: or hf:MODEL)")


def _load_hf_lm(model_id: str):
    from .hf_backends import HFCausalLM
    return HFCausalLM(model_id)


def _load_hf_classifier(model_id: str):
    from .hf_backends import HFToxicityClassifier
    return HFToxicityClassifier(model_id)


def _load_hf_metric(model_id: str):
    from .hf_backends import HFEmbeddingMetric
    return HFEmbeddingMetric(model_id)
