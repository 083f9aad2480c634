"""Alphabet, key spaces, and encrypt/decrypt for both cipher schemes.

Letters are represented as integer indices 0..25 ('a'..'z'); messages are
1-D uint8 numpy arrays of such indices. All positions are 0-based: the
shift applied to message position j under a repeating key of length L is
shifts[j % L].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ALPHABET = "abcdefghijklmnopqrstuvwxyz"
ALPHABET_SIZE = 26

MIN_KEY_LENGTH = 1
MAX_KEY_LENGTH = 32

LETTER_DTYPE = np.uint8


def text_to_letters(text: str) -> np.ndarray:
    """Convert a lowercase a-z string to an index array. Raises on anything else."""
    arr = np.frombuffer(text.encode("ascii"), dtype=np.uint8).astype(np.int64) - ord("a")
    if arr.size and (arr.min() < 0 or arr.max() >= ALPHABET_SIZE):
        raise ValueError("message may only contain lowercase letters a-z")
    return arr.astype(LETTER_DTYPE)


def letters_to_text(letters: np.ndarray) -> str:
    letters = np.asarray(letters)
    if letters.size and (int(letters.min()) < 0 or int(letters.max()) >= ALPHABET_SIZE):
        raise ValueError("letter index out of range [0, 25]")
    return "".join(ALPHABET[i] for i in letters)


@dataclass(frozen=True)
class MonoKey:
    """A substitution key: ``table[p]`` is the ciphertext letter for plaintext ``p``."""

    table: np.ndarray
    inverse: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        table = np.asarray(self.table, dtype=LETTER_DTYPE)
        if table.shape != (ALPHABET_SIZE,) or len(set(table.tolist())) != ALPHABET_SIZE:
            raise ValueError("mono key must be a permutation of the 26 letters")
        inverse = np.empty(ALPHABET_SIZE, dtype=LETTER_DTYPE)
        inverse[table] = np.arange(ALPHABET_SIZE, dtype=LETTER_DTYPE)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "inverse", inverse)


@dataclass(frozen=True)
class VigenereKey:
    """A repeating shift vector; each entry in [0, 25], length in [1, 32]."""

    shifts: np.ndarray

    def __post_init__(self):
        shifts = np.asarray(self.shifts, dtype=LETTER_DTYPE)
        if not MIN_KEY_LENGTH <= shifts.size <= MAX_KEY_LENGTH:
            raise ValueError(
                f"key length must be in [{MIN_KEY_LENGTH}, {MAX_KEY_LENGTH}], got {shifts.size}"
            )
        if shifts.size and int(shifts.max()) >= ALPHABET_SIZE:
            raise ValueError("shifts must lie in [0, 25]")
        object.__setattr__(self, "shifts", shifts)

    def __len__(self) -> int:
        return self.shifts.size


CipherKey = MonoKey | VigenereKey


def sample_mono_key(rng: np.random.Generator) -> MonoKey:
    """Draw a uniformly random permutation of the alphabet (unbiased shuffle)."""
    return MonoKey(rng.permutation(ALPHABET_SIZE).astype(LETTER_DTYPE))


def sample_vigenere_key(rng: np.random.Generator, length: int) -> VigenereKey:
    """Draw a key of the given length with i.i.d. uniform shifts in [0, 25]."""
    if not MIN_KEY_LENGTH <= length <= MAX_KEY_LENGTH:
        raise ValueError(
            f"key length must be in [{MIN_KEY_LENGTH}, {MAX_KEY_LENGTH}], got {length}"
        )
    return VigenereKey(rng.integers(0, ALPHABET_SIZE, size=length, dtype=np.int64))


def mono_encrypt(key: MonoKey, message: np.ndarray) -> np.ndarray:
    return key.table[np.asarray(message, dtype=np.int64)]


def mono_decrypt(key: MonoKey, ciphertext: np.ndarray) -> np.ndarray:
    return key.inverse[np.asarray(ciphertext, dtype=np.int64)]


def _cyclic_shifts(key: VigenereKey, n: int) -> np.ndarray:
    reps = -(-n // len(key)) if n else 0
    return np.tile(key.shifts.astype(np.int64), max(reps, 1))[:n]


def vigenere_encrypt(key: VigenereKey, message: np.ndarray) -> np.ndarray:
    m = np.asarray(message, dtype=np.int64)
    return ((m + _cyclic_shifts(key, m.size)) % ALPHABET_SIZE).astype(LETTER_DTYPE)


def vigenere_decrypt(key: VigenereKey, ciphertext: np.ndarray) -> np.ndarray:
    c = np.asarray(ciphertext, dtype=np.int64)
    return ((c - _cyclic_shifts(key, c.size)) % ALPHABET_SIZE).astype(LETTER_DTYPE)


def encrypt(key: CipherKey, message: np.ndarray) -> np.ndarray:
    if isinstance(key, MonoKey):
        return mono_encrypt(key, message)
    return vigenere_encrypt(key, message)


def decrypt(key: CipherKey, ciphertext: np.ndarray) -> np.ndarray:
    if isinstance(key, MonoKey):
        return mono_decrypt(key, ciphertext)
    return vigenere_decrypt(key, ciphertext)
