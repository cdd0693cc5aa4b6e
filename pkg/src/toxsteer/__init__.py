"""toxsteer: decoding-time toxicity control for interpretation generation.

The engine calibrates per-step log scores toward a target toxicity, the
session controller alternates targets across an interpretation set, and the
evaluation module matches generated sets against human-written ones and
scores them.
"""

__version__ = "0.1.0"

from .engine import (CalibrationConfig, SamplerConfig, calibrate_scores,
                     compute_lambda, generate_interpretation, nucleus_support,
                     renormalize, select_token)
from .errors import (ContractViolation, GenerationError, InputError,
                     ToxsteerError, TransportError)
from .session import (DecodeSession, Interpretation, InterpretationSet,
                      generate_set, new_session, override_target, update_target)
from .toxicity import LexiconScorer, RemoteScorer, load_lexicon
from .backends import (MockBackend, NGramModel, RemoteBackend,
                       sequence_log_prob, train_ngram)
from .evaluation import (EvalReport, MatchedPairs, evaluate_run,
                         hungarian_match, meteor, perplexity, spearman,
                         spread_analysis)
from .vocab import BOS_TOKEN, EOS_TOKEN, UNK_TOKEN, Vocabulary, detokenize, tokenize

__all__ = [
    "__version__",
    "CalibrationConfig", "SamplerConfig", "calibrate_scores", "compute_lambda",
    "generate_interpretation", "nucleus_support", "renormalize", "select_token",
    "ContractViolation", "GenerationError", "InputError", "ToxsteerError",
    "TransportError",
    "DecodeSession", "Interpretation", "InterpretationSet", "generate_set",
    "new_session", "override_target", "update_target",
    "LexiconScorer", "RemoteScorer", "load_lexicon",
    "MockBackend", "NGramModel", "RemoteBackend", "sequence_log_prob", "train_ngram",
    "EvalReport", "MatchedPairs", "evaluate_run", "hungarian_match", "meteor",
    "perplexity", "spearman", "spread_analysis",
    "BOS_TOKEN", "EOS_TOKEN", "UNK_TOKEN", "Vocabulary", "detokenize", "tokenize",
]
