"""Session orchestration: one input sentence -> one interpretation set.

The session owns the moving target toxicity. With objective3 on, the target
is updated before each interpretation after the first: the new target mirrors
the previous interpretation's toxicity across the current target
(2*target - previous, clamped to [0, 1]), so consecutive interpretations land
on opposite sides of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .engine import CalibrationConfig, SamplerConfig, compute_lambda, generate_interpretation
from .errors import ContractViolation, GenerationError
from .vocab import detokenize


@dataclass
class DecodeSession:
    sentence: str
    base_target_toxicity: float
    current_target_toxicity: float
    calibration: CalibrationConfig
    sampler: SamplerConfig
    set_size: int = 2
    previous_toxicity: Optional[float] = None

    def __post_init__(self):
        for name in ("base_target_toxicity", "current_target_toxicity"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ContractViolation(f"{name} must be in [0,1], got {value}")
        if self.set_size < 1:
            raise ContractViolation(f"set_size must be >= 1, got {self.set_size}")


@dataclass
class Interpretation:
    text: str
    tokens: list[str]
    toxicity: float
    target_used: float
    lambda_used: float


@dataclass
class InterpretationSet:
    sentence: str
    interpretations: list[Interpretation] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.interpretations)

    def toxicities(self) -> list[float]:
        return [i.toxicity for i in self.interpretations]

    def targets(self) -> list[float]:
        return [i.target_used for i in self.interpretations]


def new_session(sentence: str, scorer, calibration: CalibrationConfig,
                sampler: SamplerConfig, set_size: int = 2,
                override_toxicity: Optional[float] = None) -> DecodeSession:
    """Measure the sentence toxicity (or take the override) and open a session."""
    measured = float(scorer.score_sentence(sentence))
    session = DecodeSession(sentence=sentence,
                            base_target_toxicity=measured,
                            current_target_toxicity=measured,
                            calibration=calibration,
                            sampler=sampler,
                            set_size=set_size)
    if override_toxicity is not None:
        override_target(session, override_toxicity)
    return session


def override_target(session: DecodeSession, value: float) -> DecodeSession:
    """Replace the sentence's toxicity score with an arbitrary target.

    The moderation hook: generation then steers toward the substituted value
    instead of the measured one. Sentence text is untouched.
    """
    if not (0.0 <= value <= 1.0):
        raise ContractViolation(f"override toxicity must be in [0,1], got {value}")
    session.base_target_toxicity = float(value)
    session.current_target_toxicity = float(value)
    return session


def update_target(current_target: float, previous_toxicity: float) -> float:
    """Mirror the previous interpretation's toxicity across the target.

    Both directional branches reduce to 2*current - previous; the result is
    clamped to [0, 1] since toxicity scores live there.
    """
    if not (0.0 <= current_target <= 1.0) or not (0.0 <= previous_toxicity <= 1.0):
        raise ContractViolation("update_target arguments must be in [0,1]")
    raw = 2.0 * current_target - previous_toxicity
    return min(1.0, max(0.0, raw))


def generate_set(session: DecodeSession, backend, scorer,
                 k: Optional[int] = None, max_len: int = 20, min_len: int = 0,
                 rng: Optional[np.random.Generator] = None,
                 trace: Optional[list] = None) -> InterpretationSet:
    """Generate k interpretations for the session's sentence.

    With objective3 on, the target update runs before every interpretation
    that has a predecessor, and the adaptive control strength is computed
    from the updated target. The recorded target_used/lambda_used make the
    recurrence auditable after the fact.
    """
    k = session.set_size if k is None else k
    if k < 1:
        raise ContractViolation(f"k must be >= 1, got {k}")
    if rng is None:
        rng = np.random.default_rng(session.sampler.rng_seed)

    result = InterpretationSet(sentence=session.sentence)
    for i in range(k):
        if session.calibration.objective3 and session.previous_toxicity is not None:
            session.current_target_toxicity = update_target(
                session.current_target_toxicity, session.previous_toxicity)
        try:
            tokens = generate_interpretation(session, backend, scorer, max_len,
                                             min_len=min_len, rng=rng, trace=trace)
        except GenerationError as exc:
            raise GenerationError(str(exc), interpretation=i) from exc
        toxicity = float(scorer.score_sequence(tokens))
        session.previous_toxicity = toxicity
        result.interpretations.append(Interpretation(
            text=detokenize(tokens),
            tokens=tokens,
            toxicity=toxicity,
            target_used=session.current_target_toxicity,
            lambda_used=compute_lambda(session.calibration,
                                       session.current_target_toxicity),
        ))
    return result
