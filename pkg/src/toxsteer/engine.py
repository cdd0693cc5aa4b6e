"""Per-step score calibration and the autoregressive decode loop.

Scores live in the log domain. Each step the engine queries the backend for
log-probabilities over the vocabulary, nudges them toward or away from toxic
tokens depending on where the running prefix sits relative to the target
toxicity, re-normalizes with a softmax, and selects a token (nucleus sampling
by default, greedy argmax as the alternative).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractViolation, GenerationError
from .vocab import EOS_TOKEN

# Type aliases: log-domain score vector and a probability simplex point,
# both of length V.
ScoreVector = np.ndarray
ProbabilityVector = np.ndarray


@dataclass
class CalibrationConfig:
    """Switches and knobs for the toxicity-control calibration.

    objective1 turns the per-step score calibration on. objective2 makes the
    control strength adaptive (1 / (target * 100), so control relaxes as the
    target rises); it requires objective1 and excludes a fixed strength.
    objective3 alternates the target across the interpretations of a set.
    """

    objective1: bool = True
    objective2: bool = False
    objective3: bool = False
    fixed_lambda: Optional[float] = None
    equality_tolerance: float = 1e-6
    lambda_floor_epsilon: float = 1e-3
    rescore_every: int = 1

    def __post_init__(self):
        if self.objective2 and not self.objective1:
            raise ContractViolation("objective2 requires objective1 (the adaptive "
                                    "strength only exists inside the calibration step)")
        if self.objective2 and self.fixed_lambda is not None:
            raise ContractViolation("objective2 and fixed_lambda are mutually exclusive")
        if self.fixed_lambda is not None:
            if not np.isfinite(self.fixed_lambda) or self.fixed_lambda <= 0:
                raise ContractViolation(f"fixed_lambda must be finite and > 0, got {self.fixed_lambda}")
        if self.equality_tolerance < 0:
            raise ContractViolation("equality_tolerance must be >= 0")
        if self.lambda_floor_epsilon <= 0:
            raise ContractViolation("lambda_floor_epsilon must be > 0")
        if self.rescore_every < 1:
            raise ContractViolation("rescore_every must be >= 1")


@dataclass
class SamplerConfig:
    mode: str = "nucleus"
    nucleus_p: float = 0.9
    rng_seed: int = 0

    def __post_init__(self):
        if self.mode not in ("nucleus", "greedy"):
            raise ContractViolation(f"sampler mode must be 'nucleus' or 'greedy', got {self.mode!r}")
        if self.mode == "nucleus" and not (0.0 < self.nucleus_p <= 1.0):
            raise ContractViolation(f"nucleus_p must be in (0, 1], got {self.nucleus_p}")


def _check_finite(name: str, values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise ContractViolation(f"{name} contains non-finite entries")


def calibrate_scores(scores: ScoreVector,
                     token_toxicity: np.ndarray,
                     prefix_toxicity: float,
                     target_toxicity: float,
                     lam: float,
                     tolerance: float = 1e-6) -> ScoreVector:
    """Shift log scores by +/- lam * tox(token) to steer toward the target.

    Below the target (beyond the tolerance band) toxic tokens are boosted;
    above it they are suppressed; inside the band scores pass through
    unchanged. Returns a new array, the input is never mutated.
    """
    scores = np.asarray(scores, dtype=float)
    token_toxicity = np.asarray(token_toxicity, dtype=float)
    if scores.shape != token_toxicity.shape:
        raise ContractViolation(
            f"scores and token_toxicity must have equal length: {scores.shape} vs {token_toxicity.shape}")
    _check_finite("scores", scores)
    _check_finite("token_toxicity", token_toxicity)
    if not np.isfinite(lam):
        raise ContractViolation("lambda must be finite")
    if not (0.0 <= prefix_toxicity <= 1.0) or not (0.0 <= target_toxicity <= 1.0):
        raise ContractViolation("prefix and target toxicity must lie in [0, 1]")

    if prefix_toxicity < target_toxicity - tolerance:
        return scores + lam * token_toxicity
    if prefix_toxicity > target_toxicity + tolerance:
        return scores - lam * token_toxicity
    return scores.copy()


def compute_lambda(config: CalibrationConfig, target_toxicity: float) -> float:
    """Control strength for the current target.

    Adaptive mode: 1 / (target * 100), floored at lambda_floor_epsilon so a
    zero target yields a large-but-finite strength instead of a singularity.
    Otherwise the configured fixed strength, defaulting to 1.
    """
    if config.objective2:
        return 1.0 / (max(target_toxicity, config.lambda_floor_epsilon) * 100.0)
    if config.fixed_lambda is not None:
        return config.fixed_lambda
    return 1.0


def renormalize(scores: ScoreVector) -> ProbabilityVector:
    """Softmax over calibrated scores, guarded against overflow."""
    scores = np.asarray(scores, dtype=float)
    _check_finite("scores", scores)
    shifted = scores - np.max(scores)
    expd = np.exp(shifted)
    return expd / expd.sum()


def nucleus_support(probs: ProbabilityVector, p: float) -> np.ndarray:
    """Indices of the smallest probability-sorted prefix with mass >= p.

    Sorted descending by probability; ties resolve to the lower index. The
    top-1 token is always included, so the support is never empty.
    """
    probs = np.asarray(probs, dtype=float)
    order = np.argsort(-probs, kind="stable")
    cum = np.cumsum(probs[order])
    # tiny slack so p == total mass does not truncate on rounding
    k = int(np.searchsorted(cum, p - 1e-12)) + 1
    k = min(k, len(probs))
    return order[:k]


def select_token(probs: ProbabilityVector,
                 sampler: SamplerConfig,
                 rng: Optional[np.random.Generator] = None) -> int:
    """Pick the next token index. Greedy takes the argmax (lowest index wins
    ties); nucleus samples from the renormalized top-p support."""
    probs = np.asarray(probs, dtype=float)
    _check_finite("probs", probs)
    if sampler.mode == "greedy":
        return int(np.argmax(probs))
    if rng is None:
        rng = np.random.default_rng(sampler.rng_seed)
    support = nucleus_support(probs, sampler.nucleus_p)
    mass = probs[support]
    mass = mass / mass.sum()
    return int(rng.choice(support, p=mass))


def generate_interpretation(session,
                            backend,
                            scorer,
                            max_len: int,
                            min_len: int = 0,
                            rng: Optional[np.random.Generator] = None,
                            trace: Optional[list] = None) -> list[str]:
    """Autoregressive decode of one interpretation under the session's target.

    Each step: backend scores -> (optional) calibration against the running
    prefix toxicity -> softmax -> token selection. Stops at EOS or max_len.
    An immediate EOS yields a legal empty sequence. The prefix toxicity is
    re-measured by the scorer every ``rescore_every`` steps (default: every
    step). ``min_len`` masks EOS until that many tokens are out (the usual
    minimum-length decoding constraint).

    ``trace``, when given a list, receives one dict per step with the lambda
    and prefix toxicity actually used.
    """
    config: CalibrationConfig = session.calibration
    vocab = backend.vocabulary
    if rng is None:
        rng = np.random.default_rng(session.sampler.rng_seed)
    eos_index = vocab.index(EOS_TOKEN) if EOS_TOKEN in vocab else None

    tox_vector = scorer.token_toxicity_vector(vocab)
    target = session.current_target_toxicity
    lam = compute_lambda(config, target)

    prefix: list[str] = []
    prefix_tox = 0.0  # empty prefix carries no toxicity
    for t in range(1, max_len + 1):
        try:
            scores = backend.next_scores(prefix)
        except Exception as exc:
            raise GenerationError(f"backend failed: {exc}", step=t) from exc

        if config.objective1:
            if (t - 1) % config.rescore_every == 0:
                prefix_tox = float(scorer.score_sequence(prefix))
            scores = calibrate_scores(scores, tox_vector, prefix_tox, target,
                                      lam, config.equality_tolerance)
        probs = renormalize(scores)
        if eos_index is not None and t <= min_len:
            probs = probs.copy()
            probs[eos_index] = 0.0
            probs = probs / probs.sum()
        idx = select_token(probs, session.sampler, rng)
        token = vocab.token(idx)
        if trace is not None:
            trace.append({"step": t, "lambda": lam, "prefix_toxicity": prefix_tox,
                          "target": target, "token": token})
        if token == EOS_TOKEN:
            break
        prefix.append(token)
    return prefix
