"""transformers-backed model wrappers (optional, needs the hf extra).

Loaded lazily so the bridge runs fully offline with the ngram/lexicon/overlap
schemes when no checkpoints are available.
"""

from __future__ import annotations

import numpy as np

from .models import vocab_hash


class HFCausalLM:
    def __init__(self, model_id: str):
        import torch
        from transformers import AutoModelForCausalLM, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForCausalLM.from_pretrained(model_id)
        self.model.eval()
        self._torch = torch
        ordered = [self.tokenizer.convert_ids_to_tokens(i)
                   for i in range(len(self.tokenizer))]
        self.tokens = ordered
        self.hash = vocab_hash(ordered)

    @property
    def size(self) -> int:
        return len(self.tokens)

    def encode(self, tokens):
        return tokens

    def validate(self, tokens):
        vocab = self.tokenizer.get_vocab()
        for tok in tokens:
            if tok not in vocab:
                return tok
        return None

    def log_probs(self, prefix: list[str]) -> np.ndarray:
        torch = self._torch
        if prefix:
            ids = self.tokenizer.convert_tokens_to_ids(prefix)
        else:
            ids = [self.tokenizer.bos_token_id or self.tokenizer.eos_token_id]
        with torch.no_grad():
            out = self.model(torch.tensor([ids]))
        logits = out.logits[0, -1, :]
        return torch.log_softmax(logits, dim=-1).cpu().numpy()


class HFToxicityClassifier:
    mapping_note = ("sum of probability mass over labels containing "
                    "toxic/hate/offensive/abusive; 1 - max(score) when the "
                    "model exposes no such label")

    def __init__(self, model_id: str):
        from transformers import pipeline

        self.pipe = pipeline("text-classification", model=model_id, top_k=None)

    def score(self, text: str) -> float:
        results = self.pipe(text)[0]
        # sum the probability mass of labels that look toxic/hateful;
        # the exact mapping is model-dependent and reported by /health
        toxic = [r["score"] for r in results
                 if any(key in r["label"].lower()
                        for key in ("toxic", "hate", "offensive", "abusive"))]
        value = float(sum(toxic)) if toxic else float(1.0 - max(r["score"] for r in results))
        return min(1.0, max(0.0, value))


class HFEmbeddingMetric:
    def __init__(self, model_id: str):
        from sentence_transformers import SentenceTransformer

        self.model = SentenceTransformer(model_id)

    def score(self, source: str, candidate: str, reference: str) -> float:
        import numpy as np

        vecs = self.model.encode([source, candidate, reference], normalize_embeddings=True)
        to_ref = float(np.dot(vecs[1], vecs[2]))
        to_src = float(np.dot(vecs[1], vecs[0]))
        return 0.5 * to_ref + 0.5 * to_src
