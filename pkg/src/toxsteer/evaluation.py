"""Metrics for comparing generated interpretation sets with human-written ones.

Generated and reference sets are paired per sentence with a minimum-cost
assignment (cost = 1 - METEOR by default), then scored: METEOR over matched
pairs, perplexity of the generated texts under the base model, Spearman rank
correlation between matched toxicity scores pooled over the corpus, and the
spread analysis (per-set standard deviation of interpretation toxicity,
bucketed by input-sentence toxicity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .backends import sequence_log_prob
from .errors import ContractViolation, InputError
from .vocab import tokenize

SPREAD_INTERVALS = ((0.0, 0.2), (0.2, 0.4), (0.4, 0.6), (0.6, 0.8), (0.8, 1.0))


@dataclass
class MatchedPairs:
    pairs: list[tuple[int, int]]
    total_cost: float


@dataclass
class EvalReport:
    meteor_mean: float                     # 0-100 scale
    perplexity: float
    spearman: Optional[float]              # None when rank correlation is undefined
    spread_buckets: list[dict] = field(default_factory=list)
    comet_mean: Optional[float] = None
    n_sentences: int = 0
    n_pairs: int = 0

    def to_dict(self) -> dict:
        out = {
            "meteor_mean": self.meteor_mean,
            "perplexity": self.perplexity,
            "spearman": self.spearman,
            "spread_buckets": self.spread_buckets,
            "n_sentences": self.n_sentences,
            "n_pairs": self.n_pairs,
        }
        if self.comet_mean is not None:
            out["comet_mean"] = self.comet_mean
        return out


def _lsa_cost(matrix: np.ndarray) -> float:
    if matrix.size == 0 or 0 in matrix.shape:
        return 0.0
    rows, cols = linear_sum_assignment(matrix)
    return float(matrix[rows, cols].sum())


def hungarian_match(cost) -> MatchedPairs:
    """Minimum-cost assignment of size min(m, n).

    Deterministic tie-break: among all optimal assignments, the
    lexicographically smallest pair list (pairs sorted by row) is returned.
    Implemented by fixing pairs greedily and certifying each fix keeps the
    optimum reachable.
    """
    matrix = np.asarray(cost, dtype=float)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise ContractViolation(f"cost matrix must be 2-d and non-empty, got shape {matrix.shape}")
    if np.any(np.isnan(matrix)):
        raise ContractViolation("cost matrix contains NaN")
    if not np.all(np.isfinite(matrix)):
        raise ContractViolation("cost matrix contains non-finite entries")

    m, n = matrix.shape
    size = min(m, n)
    best = _lsa_cost(matrix)
    atol = 1e-9 * max(1.0, float(np.abs(matrix).max()))

    pairs: list[tuple[int, int]] = []
    rows_left = list(range(m))
    cols_left = list(range(n))
    fixed = 0.0
    for r in range(m):
        if len(pairs) == size:
            break
        sub_rows = [x for x in rows_left if x != r]
        matched = False
        for c in cols_left:
            sub_cols = [y for y in cols_left if y != c]
            rest = _lsa_cost(matrix[np.ix_(sub_rows, sub_cols)])
            if abs(fixed + matrix[r, c] + rest - best) <= atol:
                pairs.append((r, c))
                fixed += float(matrix[r, c])
                rows_left = sub_rows
                cols_left = sub_cols
                matched = True
                break
        if not matched:
            # every optimal completion leaves this row unmatched (m > n)
            rows_left = sub_rows
    total = float(sum(matrix[r, c] for r, c in pairs))
    return MatchedPairs(pairs=pairs, total_cost=total)


def _meteor_alignment(candidate: list[str], reference: list[str]) -> tuple[int, int]:
    """Exact unigram matches and chunk count.

    Matches = multiset intersection size. The alignment walks the candidate
    left to right, preferring the reference position that continues the
    previous match (keeps chunks minimal for the common cases), else the
    earliest unused position.
    """
    from collections import Counter

    quota = Counter(candidate) & Counter(reference)
    matches = sum(quota.values())
    if matches == 0:
        return 0, 0

    used = [False] * len(reference)
    ref_positions: dict[str, list[int]] = {}
    for j, tok in enumerate(reference):
        ref_positions.setdefault(tok, []).append(j)

    chunks = 0
    prev_j = None
    remaining = dict(quota)
    for i, tok in enumerate(candidate):
        if remaining.get(tok, 0) <= 0:
            prev_j = None
            continue
        choice = None
        if prev_j is not None and prev_j + 1 < len(reference) \
                and reference[prev_j + 1] == tok and not used[prev_j + 1]:
            choice = prev_j + 1
        else:
            for j in ref_positions[tok]:
                if not used[j]:
                    choice = j
                    break
        if choice is None:
            prev_j = None
            continue
        used[choice] = True
        remaining[tok] -= 1
        if prev_j is None or choice != prev_j + 1:
            chunks += 1
        prev_j = choice
    return matches, chunks


def meteor(candidate, reference) -> float:
    """Exact-match unigram METEOR.

    P = matches/|candidate|, R = matches/|reference|,
    Fmean = 10PR/(R+9P), penalty = 0.5*(chunks/matches)^3,
    score = Fmean*(1-penalty). Zero when either side is empty or nothing
    matches. No stemming or synonym stage.
    """
    candidate = list(candidate)
    reference = list(reference)
    if not candidate or not reference:
        return 0.0
    matches, chunks = _meteor_alignment(candidate, reference)
    if matches == 0:
        return 0.0
    precision = matches / len(candidate)
    recall = matches / len(reference)
    fmean = 10.0 * precision * recall / (recall + 9.0 * precision)
    penalty = 0.5 * (chunks / matches) ** 3
    return fmean * (1.0 - penalty)


def perplexity(backend, tokens) -> float:
    """exp of the mean negative log-likelihood under the base model."""
    tokens = list(tokens)
    if not tokens:
        raise InputError("perplexity of an empty sequence is undefined")
    return float(math.exp(-sequence_log_prob(backend, tokens) / len(tokens)))


def _average_ranks(values: list[float]) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank range."""
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr), dtype=float)
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(x, y) -> Optional[float]:
    """Spearman rank correlation: Pearson over average ranks.

    Returns None when either side is constant (correlation undefined) rather
    than a silent NaN.
    """
    x = list(x)
    y = list(y)
    if len(x) != len(y):
        raise ContractViolation(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ContractViolation("need at least 2 observations")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        return None
    return float((dx * dy).sum() / (sx * sy))


def spread_analysis(dataset) -> list[dict]:
    """Per-set population std of interpretation toxicity, bucketed by the
    input sentence's toxicity.

    ``dataset`` yields (sentence_toxicity, iterable of interpretation
    toxicities); every set needs >= 2 entries. Buckets follow the five fixed
    intervals; an interval without sets reports mean_std None (absent), never
    zero. Bucket membership is [lo, hi), the last interval closed at 1.
    """
    per_bucket: list[list[float]] = [[] for _ in SPREAD_INTERVALS]
    for sentence_tox, toxicities in dataset:
        values = np.asarray(list(toxicities), dtype=float)
        if len(values) < 2:
            raise ContractViolation("spread analysis needs >= 2 interpretations per set")
        if not (0.0 <= sentence_tox <= 1.0):
            raise ContractViolation(f"sentence toxicity out of [0,1]: {sentence_tox}")
        std = float(values.std())
        for b, (lo, hi) in enumerate(SPREAD_INTERVALS):
            if lo <= sentence_tox < hi or (hi == 1.0 and sentence_tox == 1.0):
                per_bucket[b].append(std)
                break
    out = []
    for (lo, hi), stds in zip(SPREAD_INTERVALS, per_bucket):
        # mean over sorted values: exactly permutation-invariant
        out.append({
            "interval": [lo, hi],
            "count": len(stds),
            "mean_std": float(np.mean(sorted(stds))) if stds else None,
        })
    return out


def evaluate_run(generated_sets: dict, reference_sets: dict, backend, scorer,
                 cost_fn: Callable[[list[str], list[str]], float] | None = None,
                 comet_fn: Callable[[str, str, str], float] | None = None) -> EvalReport:
    """Score one generation run against references aligned by sentence id.

    ``generated_sets``/``reference_sets`` map id -> record dicts (see
    datasets.py for the shapes). Interpretation toxicity uses the recorded
    value when present, otherwise the scorer. Spearman is pooled over all
    matched pairs of the corpus. ``comet_fn(source, candidate, reference)``,
    when given, appends a pass-through semantic-similarity column.
    """
    gen_ids = set(generated_sets)
    ref_ids = set(reference_sets)
    if gen_ids != ref_ids:
        missing_gen = sorted(ref_ids - gen_ids)
        missing_ref = sorted(gen_ids - ref_ids)
        raise InputError(
            "sentence ids do not align: "
            f"missing from generated: {missing_gen or 'none'}; "
            f"missing from reference: {missing_ref or 'none'}")

    if cost_fn is None:
        cost_fn = lambda cand, ref: 1.0 - meteor(cand, ref)

    meteor_values: list[float] = []
    comet_values: list[float] = []
    gen_tox_pool: list[float] = []
    ref_tox_pool: list[float] = []
    perplexities: list[float] = []
    spread_rows: list[tuple[float, list[float]]] = []

    for sid in sorted(gen_ids):
        gen = generated_sets[sid]
        ref = reference_sets[sid]
        gen_items = gen["interpretations"]
        ref_items = ref["interpretations"]
        if not gen_items or not ref_items:
            raise InputError(f"sentence {sid!r} has an empty interpretation list")
        gen_tokens = [tokenize(item["text"]) for item in gen_items]
        ref_tokens = [tokenize(item["text"]) for item in ref_items]

        cost = np.array([[cost_fn(g, r) for r in ref_tokens] for g in gen_tokens])
        match = hungarian_match(cost)

        gen_tox = [_item_toxicity(item, scorer) for item in gen_items]
        ref_tox = [_item_toxicity(item, scorer) for item in ref_items]
        for g, r in match.pairs:
            meteor_values.append(meteor(gen_tokens[g], ref_tokens[r]))
            gen_tox_pool.append(gen_tox[g])
            ref_tox_pool.append(ref_tox[r])
            if comet_fn is not None:
                comet_values.append(comet_fn(gen["sentence"],
                                             gen_items[g]["text"],
                                             ref_items[r]["text"]))

        for toks in gen_tokens:
            if toks:
                encoded = backend.vocabulary.encode(toks)
                perplexities.append(perplexity(backend, encoded))

        sentence_tox = ref.get("sentence_toxicity")
        if sentence_tox is None:
            sentence_tox = float(scorer.score_sentence(ref["sentence"]))
        if len(gen_tox) >= 2:
            spread_rows.append((float(sentence_tox), gen_tox))

    rho = spearman(gen_tox_pool, ref_tox_pool) if len(gen_tox_pool) >= 2 else None
    return EvalReport(
        meteor_mean=100.0 * float(np.mean(meteor_values)) if meteor_values else 0.0,
        perplexity=float(np.mean(perplexities)) if perplexities else float("nan"),
        spearman=rho,
        spread_buckets=spread_analysis(spread_rows) if spread_rows else spread_analysis([]),
        comet_mean=100.0 * float(np.mean(comet_values)) if comet_values else None,
        n_sentences=len(gen_ids),
        n_pairs=len(meteor_values),
    )


def _item_toxicity(item: dict, scorer) -> float:
    if item.get("toxicity") is not None:
        return float(item["toxicity"])
    return float(scorer.score_sentence(item["text"]))
