"""Token-distribution providers.

Every backend exposes ``vocabulary`` and ``next_scores(prefix) -> ScoreVector``
where the score vector holds log-probabilities over the whole vocabulary
(logsumexp == 0). Three implementations: a fixed-table mock for tests, an
add-alpha smoothed n-gram model trainable from a line corpus, and an HTTP
client for a remote model server.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from pathlib import Path

import numpy as np
import requests

from .errors import ContractViolation, InputError, TransportError
from .vocab import BOS_TOKEN, EOS_TOKEN, Vocabulary, tokenize

MODEL_FORMAT = "toxsteer-ngram"
MODEL_FORMAT_VERSION = 1


class MockBackend:
    """Cycles through a fixed table of score vectors, one per step.

    Rows must already be normalized log-probabilities; use
    :meth:`from_probabilities` to build rows from probability vectors.
    """

    def __init__(self, vocabulary: Vocabulary, rows):
        self.vocabulary = vocabulary
        table = [np.asarray(row, dtype=float) for row in rows]
        if not table:
            raise ContractViolation("mock backend needs at least one score row")
        for i, row in enumerate(table):
            if row.shape != (len(vocabulary),):
                raise ContractViolation(
                    f"mock row {i} has length {row.shape}, vocabulary has {len(vocabulary)}")
            if not np.all(np.isfinite(row)):
                raise ContractViolation(f"mock row {i} contains non-finite entries")
            total = float(np.logaddexp.reduce(row))
            if abs(total) > 1e-9:
                raise ContractViolation(
                    f"mock row {i} is not a normalized log distribution (logsumexp={total:.3e})")
        self._table = table

    @classmethod
    def from_probabilities(cls, vocabulary: Vocabulary, prob_rows) -> "MockBackend":
        rows = []
        for row in prob_rows:
            row = np.asarray(row, dtype=float)
            rows.append(np.log(row / row.sum()))
        return cls(vocabulary, rows)

    @classmethod
    def uniform(cls, vocabulary: Vocabulary) -> "MockBackend":
        v = len(vocabulary)
        return cls(vocabulary, [np.full(v, -math.log(v))])

    def next_scores(self, prefix) -> np.ndarray:
        for tok in prefix:
            if tok not in self.vocabulary:
                raise ContractViolation(f"prefix token not in vocabulary: {tok!r}")
        return self._table[len(list(prefix)) % len(self._table)]


class NGramModel:
    """Add-alpha smoothed n-gram language model over a word vocabulary.

    Contexts shorter than order-1 are padded with BOS on the left; BOS itself
    is not part of the vocabulary, so the predictive distribution covers
    exactly the V real tokens and sums to one by construction.
    """

    def __init__(self, vocabulary: Vocabulary, order: int, alpha: float,
                 counts: dict[tuple, Counter]):
        if order < 1:
            raise ContractViolation(f"order must be >= 1, got {order}")
        if not (alpha > 0):
            raise ContractViolation(f"alpha must be > 0, got {alpha}")
        self.vocabulary = vocabulary
        self.order = order
        self.alpha = alpha
        self.counts = counts
        self._totals = {ctx: sum(c.values()) for ctx, c in counts.items()}

    def _context(self, prefix: list[str]) -> tuple:
        if self.order == 1:
            return ()
        ctx = [BOS_TOKEN] * max(0, self.order - 1 - len(prefix)) + prefix[-(self.order - 1):]
        return tuple(ctx)

    def next_scores(self, prefix) -> np.ndarray:
        prefix = list(prefix)
        for tok in prefix:
            if tok not in self.vocabulary:
                raise ContractViolation(f"prefix token not in vocabulary: {tok!r}")
        ctx = self._context(prefix)
        v = len(self.vocabulary)
        counter = self.counts.get(ctx)
        total = self._totals.get(ctx, 0)
        counts = np.full(v, self.alpha, dtype=float)
        if counter:
            for tok, c in counter.items():
                counts[self.vocabulary.index(tok)] += c
        return np.log(counts) - math.log(total + self.alpha * v)

    def save(self, path) -> None:
        """JSON artifact; round-trips losslessly (counts are integers)."""
        payload = {
            "format": MODEL_FORMAT,
            "version": MODEL_FORMAT_VERSION,
            "order": self.order,
            "alpha": self.alpha,
            "vocabulary": list(self.vocabulary.tokens),
            "counts": {
                " ".join(ctx): dict(sorted(counter.items()))
                for ctx, counter in sorted(self.counts.items())
            },
        }
        Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "NGramModel":
        path = Path(path)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read model file {path}: {exc}") from exc
        if payload.get("format") != MODEL_FORMAT:
            raise InputError(f"{path}: not a {MODEL_FORMAT} artifact")
        if payload.get("version") != MODEL_FORMAT_VERSION:
            raise InputError(f"{path}: unsupported model version {payload.get('version')}")
        counts = {
            tuple(ctx.split(" ")) if ctx else (): Counter(toks)
            for ctx, toks in payload["counts"].items()
        }
        return cls(Vocabulary(payload["vocabulary"]), payload["order"],
                   payload["alpha"], counts)


def train_ngram(lines, order: int, alpha: float = 0.1) -> NGramModel:
    """Count n-grams over a line corpus (one sentence per line).

    Sentences are padded with order-1 BOS tokens and closed with EOS. The
    vocabulary is the sorted set of corpus words plus EOS/UNK, so training is
    independent of line order.
    """
    tokenized = []
    words: set[str] = set()
    for line in lines:
        toks = tokenize(line)
        if toks:
            tokenized.append(toks)
            words.update(toks)
    if not tokenized:
        raise InputError("empty corpus: no non-empty sentences found")
    vocab = Vocabulary.from_words(words)

    counts: dict[tuple, Counter] = {}
    pad = [BOS_TOKEN] * (order - 1)
    for toks in tokenized:
        seq = pad + toks + [EOS_TOKEN]
        for i in range(order - 1, len(seq)):
            ctx = tuple(seq[i - order + 1:i])
            counts.setdefault(ctx, Counter())[seq[i]] += 1
    return NGramModel(vocab, order, alpha, counts)


def sequence_log_prob(backend, tokens) -> float:
    """log p(sequence) by the chain rule under the uncalibrated backend."""
    tokens = list(tokens)
    total = 0.0
    for t, tok in enumerate(tokens):
        scores = backend.next_scores(tokens[:t])
        total += float(scores[backend.vocabulary.index(tok)])
    return total


class PromptedBackend:
    """Conditions any backend on a fixed prompt, decoder-prompt style.

    Every query sees ``prompt + prefix``, so generations continue the prompt
    (the input sentence) without the prompt appearing in the output. Prompt
    tokens outside the vocabulary fall back to UNK.
    """

    def __init__(self, backend, prompt_tokens):
        self.backend = backend
        self.vocabulary = backend.vocabulary
        self.prompt = self.vocabulary.encode(list(prompt_tokens))

    def next_scores(self, prefix) -> np.ndarray:
        return self.backend.next_scores(self.prompt + list(prefix))


class RemoteBackend:
    """HTTP client for a model server exposing POST /logits.

    The engine-side vocabulary is authoritative: responses must carry a
    matching vocab_hash and a length-V finite vector, otherwise the call is
    rejected as a contract violation — never silently truncated.
    """

    def __init__(self, base_url: str, vocabulary: Vocabulary,
                 timeout: float = 30.0, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.vocabulary = vocabulary
        self.timeout = timeout
        self._http = session or requests.Session()

    def next_scores(self, prefix) -> np.ndarray:
        url = f"{self.base_url}/logits"
        try:
            resp = self._http.post(url, json={"prefix_tokens": list(prefix)},
                                   timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"model backend unreachable: {exc}", endpoint=url) from exc
        if resp.status_code != 200:
            raise TransportError(f"model backend returned HTTP {resp.status_code}", endpoint=url)
        try:
            payload = resp.json()
            log_probs = np.asarray(payload["log_probs"], dtype=float)
            vocab_hash = payload["vocab_hash"]
        except (ValueError, KeyError, TypeError) as exc:
            raise TransportError(f"malformed logits response: {exc}", endpoint=url) from exc
        if vocab_hash != self.vocabulary.content_hash():
            raise ContractViolation(
                "remote vocabulary does not match engine vocabulary "
                f"(theirs {vocab_hash[:12]}..., ours {self.vocabulary.content_hash()[:12]}...)")
        if log_probs.shape != (len(self.vocabulary),):
            raise ContractViolation(
                f"remote log_probs length {log_probs.shape} != vocabulary size {len(self.vocabulary)}")
        if not np.all(np.isfinite(log_probs)):
            raise ContractViolation("remote log_probs contain non-finite entries")
        return log_probs
