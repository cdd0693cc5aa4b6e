"""Vocabulary and the word-level tokenizer used by the toy stack.

Tokens are lowercase word strings; a vocabulary is an ordered, duplicate-free
list with a bijective token <-> index mapping. Three special tokens exist:
``EOS_TOKEN`` ends generation, ``UNK_TOKEN`` absorbs out-of-vocabulary words
when encoding external text, and ``BOS_TOKEN`` is only ever used internally
as context padding (it is not part of any vocabulary).
"""

from __future__ import annotations

import hashlib
import re

from .errors import ContractViolation

BOS_TOKEN = "<s>"
EOS_TOKEN = "</s>"
UNK_TOKEN = "<unk>"

_WORD_RE = re.compile(r"[a-z0-9']+")


def tokenize(text: str) -> list[str]:
    """Lowercase word tokenizer: runs of [a-z0-9'] become tokens."""
    return _WORD_RE.findall(text.lower())


def detokenize(tokens: list[str]) -> str:
    return " ".join(tokens)


class Vocabulary:
    """Ordered token list with O(1) index lookup."""

    def __init__(self, tokens):
        tokens = list(tokens)
        if len(tokens) < 2:
            raise ContractViolation(f"vocabulary needs at least 2 tokens, got {len(tokens)}")
        self._tokens = tuple(tokens)
        self._index = {tok: i for i, tok in enumerate(self._tokens)}
        if len(self._index) != len(self._tokens):
            raise ContractViolation("vocabulary tokens must be unique")

    @classmethod
    def from_words(cls, words) -> "Vocabulary":
        """Build [EOS, UNK] + sorted unique words; the layout the toy LM uses."""
        uniq = sorted(set(words) - {EOS_TOKEN, UNK_TOKEN, BOS_TOKEN})
        return cls([EOS_TOKEN, UNK_TOKEN] + uniq)

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def __iter__(self):
        return iter(self._tokens)

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    def index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise ContractViolation(f"token not in vocabulary: {token!r}") from None

    def token(self, index: int) -> str:
        return self._tokens[index]

    def encode(self, tokens, unk: bool = True) -> list[str]:
        """Map tokens onto the vocabulary, replacing unknowns with UNK_TOKEN.

        With unk=False an unknown token raises instead.
        """
        out = []
        for tok in tokens:
            if tok in self._index:
                out.append(tok)
            elif unk and UNK_TOKEN in self._index:
                out.append(UNK_TOKEN)
            else:
                raise ContractViolation(f"token not in vocabulary: {tok!r}")
        return out

    def content_hash(self) -> str:
        """sha256 over the ordered token list; the wire-level vocabulary id."""
        joined = "\n".join(self._tokens).encode("utf-8")
        return hashlib.sha256(joined).hexdigest()

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._tokens == other._tokens

    def __hash__(self) -> int:
        return hash(self._tokens)

    def __repr__(self) -> str:
        return f"Vocabulary({len(self._tokens)} tokens)"
