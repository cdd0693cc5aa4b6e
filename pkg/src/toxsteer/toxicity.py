"""Toxicity scorers: sentence/prefix scores in [0, 1] and per-vocabulary
token toxicity vectors.

Two implementations share one duck-typed surface:

* :class:`LexiconScorer` — word -> toxicity lookup with a default for
  unmapped words; the desk-scale stand-in for a trained classifier.
* :class:`RemoteScorer` — delegates to an HTTP classifier endpoint
  (the model bridge's /toxicity contract).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import requests

from .errors import ContractViolation, InputError, TransportError
from .vocab import Vocabulary, detokenize, tokenize

AGGREGATIONS = ("mean", "max", "coverage_mean")


class LexiconScorer:
    """Scores token sequences from a word->toxicity map.

    aggregation:
      mean           average of per-token values, unmapped tokens counting as
                     default_toxicity (the default mode)
      max            maximum per-token value
      coverage_mean  sum of mapped values divided by sequence length, i.e. the
                     mean over mapped tokens scaled by lexicon coverage
    """

    def __init__(self, mapping: dict[str, float],
                 default_toxicity: float = 0.05,
                 aggregation: str = "mean"):
        for word, value in mapping.items():
            if not (0.0 <= value <= 1.0):
                raise ContractViolation(f"lexicon value for {word!r} out of [0,1]: {value}")
        if not (0.0 <= default_toxicity <= 1.0):
            raise ContractViolation(f"default_toxicity out of [0,1]: {default_toxicity}")
        if aggregation not in AGGREGATIONS:
            raise ContractViolation(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")
        self.mapping = dict(mapping)
        self.default_toxicity = default_toxicity
        self.aggregation = aggregation
        self._vector_cache: dict[tuple, np.ndarray] = {}

    def token_value(self, token: str) -> float:
        return self.mapping.get(token, self.default_toxicity)

    def score_sequence(self, tokens) -> float:
        tokens = list(tokens)
        if not tokens:
            return 0.0
        values = [self.token_value(tok) for tok in tokens]
        if self.aggregation == "max":
            return float(max(values))
        if self.aggregation == "coverage_mean":
            mapped = [self.mapping[tok] for tok in tokens if tok in self.mapping]
            return float(sum(mapped) / len(tokens))
        return float(sum(values) / len(values))

    def score_sentence(self, text: str) -> float:
        return self.score_sequence(tokenize(text))

    def token_toxicity_vector(self, vocabulary: Vocabulary) -> np.ndarray:
        """Per-vocabulary toxicity values; cached, read-only."""
        key = vocabulary.tokens
        if key not in self._vector_cache:
            vec = np.array([self.token_value(tok) for tok in vocabulary], dtype=float)
            vec.setflags(write=False)
            self._vector_cache[key] = vec
        return self._vector_cache[key]


class RemoteScorer:
    """HTTP client for a classifier exposing POST /toxicity {text} -> {toxicity}.

    Sequence scoring detokenizes and sends text. The per-vocabulary vector is
    built by prefix-extension: tox(v) = classifier(prefix + v), one request
    per token — correct but expensive, cache included.
    """

    def __init__(self, base_url: str, timeout: float = 10.0,
                 session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._http = session or requests.Session()
        self._vector_cache: dict[tuple, np.ndarray] = {}

    def _post_toxicity(self, text: str) -> float:
        url = f"{self.base_url}/toxicity"
        try:
            resp = self._http.post(url, json={"text": text}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"toxicity scorer unreachable: {exc}", endpoint=url) from exc
        if resp.status_code != 200:
            raise TransportError(f"toxicity scorer returned HTTP {resp.status_code}", endpoint=url)
        try:
            value = float(resp.json()["toxicity"])
        except (ValueError, KeyError, TypeError) as exc:
            raise TransportError(f"malformed toxicity response: {exc}", endpoint=url) from exc
        if not (0.0 <= value <= 1.0):
            raise ContractViolation(f"remote toxicity out of [0,1]: {value}")
        return value

    def score_sentence(self, text: str) -> float:
        if not tokenize(text):
            return 0.0
        return self._post_toxicity(text)

    def score_sequence(self, tokens) -> float:
        tokens = list(tokens)
        if not tokens:
            return 0.0
        return self._post_toxicity(detokenize(tokens))

    def token_toxicity_vector(self, vocabulary: Vocabulary,
                              prefix: tuple[str, ...] = ()) -> np.ndarray:
        key = (vocabulary.tokens, tuple(prefix))
        if key not in self._vector_cache:
            lead = detokenize(list(prefix))
            values = []
            for tok in vocabulary:
                text = f"{lead} {tok}".strip()
                values.append(self._post_toxicity(text))
            vec = np.array(values, dtype=float)
            vec.setflags(write=False)
            self._vector_cache[key] = vec
        return self._vector_cache[key]


def load_lexicon(path) -> dict[str, float]:
    """Parse a lexicon file: one ``token<TAB>toxicity`` pair per line,
    values in [0,1], ``#`` lines are comments. Errors carry line numbers."""
    mapping: dict[str, float] = {}
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise InputError(f"{path}:{lineno}: expected 'token<TAB>toxicity', got {raw!r}")
            token, value_str = parts
            try:
                value = float(value_str)
            except ValueError:
                raise InputError(f"{path}:{lineno}: toxicity is not a number: {value_str!r}") from None
            if not (0.0 <= value <= 1.0):
                raise InputError(f"{path}:{lineno}: toxicity out of [0,1]: {value}")
            mapping[token] = value
    return mapping


def save_lexicon(mapping: dict[str, float], path) -> None:
    path = Path(path)
    lines = [f"{token}\t{value}" for token, value in sorted(mapping.items())]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
