"""Classical reference decoders operating only on in-context (cipher, plain) pairs.

Four decoders: exact-lookup and frequency-fallback for the substitution
cipher, offset-table lookup (with and without an 'e' fallback) for a
known-length repeating-shift cipher, and a key-length search that keeps one
offset table per candidate length, eliminating candidates that become
inconsistent. A decoder either emits a letter or abstains (ABSTAIN, always
scored as incorrect).

Every decoder exists in two forms: a stateful incremental class that accepts
pairs one position at a time (used when sweeping a whole prompt), and a plain
function that replays a prefix of pairs and answers a single query.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .ciphers import ALPHABET_SIZE

ABSTAIN = -1

LETTER_E = 4
DEFAULT_CANDIDATES = range(4, 33)

Pair = tuple[int, int]


class InconsistentPairsError(ValueError):
    """The observed pairs cannot come from a single key of the assumed form."""


class MonoNaiveDecoder:
    """Remembers observed cipher->plain mappings; abstains on unseen letters."""

    def __init__(self):
        self.table = np.full(ALPHABET_SIZE, ABSTAIN, dtype=np.int64)

    def observe(self, cipher: int, plain: int, pos: int) -> None:
        seen = self.table[cipher]
        if seen == ABSTAIN:
            self.table[cipher] = plain
        elif seen != plain:
            raise InconsistentPairsError(
                f"cipher letter {cipher} mapped to both {seen} and {plain}"
            )

    def predict(self, query: int, pos: int) -> int:
        return int(self.table[query])


class MonoFreqDecoder(MonoNaiveDecoder):
    """Falls back to the most frequent letter not yet used as a plaintext."""

    def __init__(self, order: Sequence[int]):
        super().__init__()
        self.order = [int(a) for a in order]
        self.used = np.zeros(ALPHABET_SIZE, dtype=bool)

    def observe(self, cipher: int, plain: int, pos: int) -> None:
        super().observe(cipher, plain, pos)
        self.used[plain] = True

    def predict(self, query: int, pos: int) -> int:
        seen = self.table[query]
        if seen != ABSTAIN:
            return int(seen)
        for letter in self.order:
            if not self.used[letter]:
                return letter
        return ABSTAIN  # unreachable for genuine substitution prompts


class VigKnownNaiveDecoder:
    """Infers the shift at each key position; abstains at uncovered positions."""

    def __init__(self, key_length: int):
        if key_length < 1:
            raise ValueError("key length must be >= 1")
        self.key_length = key_length
        self.offsets = np.full(key_length, ABSTAIN, dtype=np.int64)

    def observe(self, cipher: int, plain: int, pos: int) -> None:
        off = (cipher - plain) % ALPHABET_SIZE
        slot = pos % self.key_length
        seen = self.offsets[slot]
        if seen == ABSTAIN:
            self.offsets[slot] = off
        elif seen != off:
            raise InconsistentPairsError(
                f"key position {slot} implies offsets {seen} and {off}"
            )

    def predict(self, query: int, pos: int) -> int:
        off = self.offsets[pos % self.key_length]
        if off == ABSTAIN:
            return ABSTAIN
        return int((query - off) % ALPHABET_SIZE)


class VigKnownFreqDecoder(VigKnownNaiveDecoder):
    """Same table, but guesses 'e' instead of abstaining."""

    def predict(self, query: int, pos: int) -> int:
        letter = super().predict(query, pos)
        return LETTER_E if letter == ABSTAIN else letter


class VigSearchDecoder:
    """Key-length search over candidate periods with strict-agreement output.

    One offset table per candidate length; a candidate is eliminated as soon
    as two observed positions assign different offsets to one of its key
    positions. A letter is emitted only when every surviving candidate has a
    known offset at the query's key position and all of them imply the same
    plaintext; in every other case the decoder abstains. The true length is
    never eliminated, so an emitted letter is always correct.
    """

    def __init__(self, candidates: Sequence[int] = DEFAULT_CANDIDATES):
        candidates = [int(c) for c in candidates]
        if not candidates:
            raise ValueError("candidate range must be nonempty")
        if min(candidates) < 1:
            raise ValueError("candidate lengths must be >= 1")
        self.candidates = candidates
        self.tables = {c: np.full(c, ABSTAIN, dtype=np.int64) for c in candidates}
        self.alive = {c: True for c in candidates}

    def observe(self, cipher: int, plain: int, pos: int) -> None:
        off = (cipher - plain) % ALPHABET_SIZE
        for c in self.candidates:
            if not self.alive[c]:
                continue
            slot = pos % c
            seen = self.tables[c][slot]
            if seen == ABSTAIN:
                self.tables[c][slot] = off
            elif seen != off:
                self.alive[c] = False

    def survivors(self) -> list[int]:
        return [c for c in self.candidates if self.alive[c]]

    def predict(self, query: int, pos: int) -> int:
        answer = ABSTAIN
        for c in self.candidates:
            if not self.alive[c]:
                continue
            off = self.tables[c][pos % c]
            if off == ABSTAIN:
                return ABSTAIN
            letter = int((query - off) % ALPHABET_SIZE)
            if answer == ABSTAIN:
                answer = letter
            elif answer != letter:
                return ABSTAIN
        return answer


def _replay(decoder, pairs: Sequence[Pair]):
    for pos, (cipher, plain) in enumerate(pairs):
        decoder.observe(int(cipher), int(plain), pos)
    return decoder


def mono_naive_predict(pairs: Sequence[Pair], query: int) -> int:
    """Recorded plaintext for a seen cipher letter; ABSTAIN otherwise."""
    return _replay(MonoNaiveDecoder(), pairs).predict(int(query), len(pairs))


def mono_freq_predict(pairs: Sequence[Pair], query: int, order: Sequence[int]) -> int:
    """Like mono_naive_predict but unseen letters get the top unused letter."""
    return _replay(MonoFreqDecoder(order), pairs).predict(int(query), len(pairs))


def vig_known_naive_predict(
    pairs: Sequence[Pair], query: int, query_pos: int, key_length: int
) -> int:
    """Decrypt with the inferred offset at query_pos; ABSTAIN if uncovered."""
    return _replay(VigKnownNaiveDecoder(key_length), pairs).predict(int(query), query_pos)


def vig_known_freq_predict(
    pairs: Sequence[Pair], query: int, query_pos: int, key_length: int
) -> int:
    """Like vig_known_naive_predict but uncovered positions predict 'e'."""
    return _replay(VigKnownFreqDecoder(key_length), pairs).predict(int(query), query_pos)


def vig_search_predict(
    pairs: Sequence[Pair],
    query: int,
    query_pos: int,
    candidates: Sequence[int] = DEFAULT_CANDIDATES,
) -> int:
    """Strict-agreement answer across all surviving candidate key lengths."""
    return _replay(VigSearchDecoder(candidates), pairs).predict(int(query), query_pos)
