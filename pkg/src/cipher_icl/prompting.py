"""Prompt assembly: interleaved (cipher, plain) token sequences and loss masks.

The token vocabulary is exactly the 26 letters; token id == letter index, so
encoding and decoding are range-checked identities. A training sequence for a
prompt of l pairs is (c1, m1, c2, m2, ..., cl, ml): at even positions the next
token is a plaintext letter, and only those positions contribute to the loss.
An evaluation prefix with j worked examples is (c1, m1, ..., cj, mj, c_{j+1});
the model's job is to predict m_{j+1} from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ciphers, corpus
from .ciphers import ALPHABET_SIZE, LETTER_DTYPE, CipherKey

VOCAB_SIZE = ALPHABET_SIZE


@dataclass(frozen=True)
class Scheme:
    """Which cipher family to sample keys from.

    kind is "mono" or "vig"; for "vig", key_length fixes the length while
    key_length_range samples it uniformly per prompt (inclusive bounds).
    """

    kind: str
    key_length: int | None = None
    key_length_range: tuple[int, int] | None = None

    def __post_init__(self):
        if self.kind == "mono":
            if self.key_length is not None or self.key_length_range is not None:
                raise ValueError("mono scheme takes no key length")
        elif self.kind == "vig":
            if (self.key_length is None) == (self.key_length_range is None):
                raise ValueError("vig scheme needs key_length or key_length_range")
            if self.key_length_range is not None:
                lo, hi = self.key_length_range
                if not (ciphers.MIN_KEY_LENGTH <= lo <= hi <= ciphers.MAX_KEY_LENGTH):
                    raise ValueError(f"bad key length range {self.key_length_range}")
        else:
            raise ValueError(f"unknown scheme kind {self.kind!r}")

    @classmethod
    def mono(cls) -> "Scheme":
        return cls("mono")

    @classmethod
    def vigenere(cls, length: int) -> "Scheme":
        return cls("vig", key_length=length)

    @classmethod
    def vigenere_variable(cls, lo: int = 4, hi: int = 32) -> "Scheme":
        return cls("vig", key_length_range=(lo, hi))

    @property
    def key_len_label(self) -> str:
        """Key-length field as written in evaluation CSVs."""
        if self.kind == "mono":
            return "-"
        if self.key_length is not None:
            return str(self.key_length)
        return "{}-{}".format(*self.key_length_range)

    def sample_key(self, rng: np.random.Generator) -> CipherKey:
        if self.kind == "mono":
            return ciphers.sample_mono_key(rng)
        if self.key_length is not None:
            length = self.key_length
        else:
            lo, hi = self.key_length_range
            length = int(rng.integers(lo, hi + 1))
        return ciphers.sample_vigenere_key(rng, length)


@dataclass(frozen=True)
class Prompt:
    """A (ciphertext, plaintext) pair plus the key that produced it.

    The key is kept only so evaluation can answer oracle questions about the
    prompt; it is never exposed to the model or the baseline decoders.
    """

    ciphertext: np.ndarray
    plaintext: np.ndarray
    scheme: Scheme
    key: CipherKey

    def __post_init__(self):
        if self.ciphertext.shape != self.plaintext.shape:
            raise ValueError("ciphertext and plaintext lengths differ")

    def __len__(self) -> int:
        return self.plaintext.size


@dataclass(frozen=True)
class TrainingBatchItem:
    tokens: np.ndarray
    targets: np.ndarray
    loss_mask: np.ndarray


def encode(message: np.ndarray) -> np.ndarray:
    """Letters to token ids (the identity on valid indices)."""
    return np.asarray(message, dtype=LETTER_DTYPE)


def decode(tokens: np.ndarray) -> np.ndarray:
    """Token ids back to letters; rejects ids outside the 26-token vocabulary."""
    tokens = np.asarray(tokens)
    if tokens.size and (int(tokens.min()) < 0 or int(tokens.max()) >= VOCAB_SIZE):
        raise ValueError("token id outside [0, 25]")
    return tokens.astype(LETTER_DTYPE)


def make_prompt(scheme: Scheme, message: np.ndarray, rng: np.random.Generator) -> Prompt:
    """Encrypt a message under a freshly sampled key."""
    key = scheme.sample_key(rng)
    return Prompt(
        ciphertext=ciphers.encrypt(key, message),
        plaintext=np.asarray(message, dtype=LETTER_DTYPE),
        scheme=scheme,
        key=key,
    )


def sample_training_prompt(
    scheme: Scheme,
    stream: corpus.LetterStream,
    rng: np.random.Generator,
    context_length: int,
    split: str = "train",
) -> Prompt:
    """Fresh key + fresh corpus window of context_length/2 letters."""
    message = corpus.sample_message(stream, context_length // 2, split, rng)
    return make_prompt(scheme, message, rng)


def interleave(ciphertext: np.ndarray, plaintext: np.ndarray) -> np.ndarray:
    out = np.empty(2 * ciphertext.size, dtype=LETTER_DTYPE)
    out[0::2] = ciphertext
    out[1::2] = plaintext
    return out


def build_training_item(prompt: Prompt) -> TrainingBatchItem:
    """Token sequence, next-token targets, and the plaintext-only loss mask."""
    l = len(prompt)
    if l < 1:
        raise ValueError("prompt must contain at least one pair")
    tokens = interleave(encode(prompt.ciphertext), encode(prompt.plaintext))
    targets = np.empty_like(tokens)
    targets[:-1] = tokens[1:]
    targets[-1] = 0  # no next token; masked out below
    loss_mask = np.zeros(2 * l, dtype=bool)
    loss_mask[0::2] = True  # positions whose next token is a plaintext letter
    loss_mask[-1] = False
    return TrainingBatchItem(tokens=tokens, targets=targets, loss_mask=loss_mask)


def build_eval_prefix(prompt: Prompt, j: int) -> tuple[np.ndarray, int]:
    """The prefix with j worked pairs ending in the (j+1)-th ciphertext.

    Returns (tokens of length 2j+1, true answer letter) so callers can score
    the prediction.
    """
    if not 0 <= j < len(prompt):
        raise ValueError(f"j must be in [0, {len(prompt) - 1}], got {j}")
    tokens = interleave(encode(prompt.ciphertext), encode(prompt.plaintext))[: 2 * j + 1]
    return tokens, int(prompt.plaintext[j])
