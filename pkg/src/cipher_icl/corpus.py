"""Text ingestion and message sampling.

Raw text is reduced to a stream of letter indices (lowercased, everything
that is not an ASCII letter dropped). The stream carries a train/validation
split boundary: training messages are contiguous windows drawn before it,
validation messages after. The processed stream can be cached on disk so
preprocessing runs once.

Cache file layout (little-endian):
    8 bytes  magic ``CICLCORP``
    4 bytes  u32 version (= 1)
    8 bytes  u64 letter count
    8 bytes  u64 split boundary
    N bytes  one byte per letter, values 0-25
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .ciphers import ALPHABET, ALPHABET_SIZE, LETTER_DTYPE

CACHE_MAGIC = b"CICLCORP"
CACHE_VERSION = 1

VALIDATION_FRACTION = 0.05

_LOWER = np.arange(ord("a"), ord("z") + 1, dtype=np.uint8)
_UPPER = np.arange(ord("A"), ord("Z") + 1, dtype=np.uint8)
_TO_LETTER = np.full(256, 255, dtype=np.uint8)
_TO_LETTER[_LOWER] = np.arange(26)
_TO_LETTER[_UPPER] = np.arange(26)


class CacheFormatError(ValueError):
    """Raised when a corpus cache file is corrupt or has the wrong format."""


@dataclass(frozen=True)
class LetterStream:
    """An immutable letter stream with a train/validation split boundary."""

    data: np.ndarray
    source: str = ""
    split_boundary: int = 0

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=LETTER_DTYPE)
        if data.size and int(data.max()) >= ALPHABET_SIZE:
            raise ValueError("stream contains values outside [0, 25]")
        if not 0 <= self.split_boundary <= data.size:
            raise ValueError("split boundary out of range")
        object.__setattr__(self, "data", data)

    def __len__(self) -> int:
        return self.data.size

    @property
    def train(self) -> np.ndarray:
        return self.data[: self.split_boundary]

    @property
    def validation(self) -> np.ndarray:
        return self.data[self.split_boundary :]


@dataclass(frozen=True)
class FrequencyOrder:
    """The 26 letters ranked most-frequent first (ties alphabetical)."""

    ranking: np.ndarray
    counts: np.ndarray

    def as_text(self) -> str:
        return "".join(ALPHABET[i] for i in self.ranking)


def preprocess_text(raw: str | bytes) -> np.ndarray:
    """Keep exactly the ASCII letters of the input, lowercased, in order.

    Bytes input is decoded as UTF-8 with undecodable bytes skipped; accented
    and other non-ASCII letters are dropped rather than transliterated.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8", errors="ignore")
    buf = np.frombuffer(raw.encode("utf-8", errors="ignore"), dtype=np.uint8)
    mapped = _TO_LETTER[buf]
    return mapped[mapped < ALPHABET_SIZE]


def build_stream(
    texts: Iterable[str | bytes],
    source: str = "",
    validation_fraction: float = VALIDATION_FRACTION,
) -> LetterStream:
    """Preprocess and concatenate texts; the final fraction becomes validation."""
    parts = [preprocess_text(t) for t in texts]
    data = np.concatenate(parts) if parts else np.empty(0, dtype=LETTER_DTYPE)
    boundary = data.size - int(data.size * validation_fraction)
    return LetterStream(data=data, source=source, split_boundary=boundary)


def load_text_files(paths: Iterable[str | Path]) -> LetterStream:
    """Build a stream from plain-text files, concatenated in argument order."""
    paths = [Path(p) for p in paths]
    texts = [p.read_bytes() for p in paths]
    return build_stream(texts, source=";".join(str(p) for p in paths))


def save_stream(stream: LetterStream, path: str | Path) -> None:
    with open(path, "wb") as f:
        f.write(CACHE_MAGIC)
        f.write(struct.pack("<I", CACHE_VERSION))
        f.write(struct.pack("<Q", len(stream)))
        f.write(struct.pack("<Q", stream.split_boundary))
        f.write(stream.data.tobytes())


def load_stream(path: str | Path) -> LetterStream:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != CACHE_MAGIC:
            raise CacheFormatError(f"bad magic {magic!r}, not a corpus cache")
        (version,) = struct.unpack("<I", f.read(4))
        if version != CACHE_VERSION:
            raise CacheFormatError(f"unsupported cache version {version}")
        count, boundary = struct.unpack("<QQ", f.read(16))
        body = f.read(count)
        if len(body) != count:
            raise CacheFormatError("truncated cache file")
        data = np.frombuffer(body, dtype=LETTER_DTYPE)
    return LetterStream(data=data, source=str(path), split_boundary=boundary)


def sample_message(
    stream: LetterStream,
    length: int,
    split: str,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw a contiguous window at a uniformly random offset within one split."""
    if length < 0:
        raise ValueError("length must be >= 0")
    if split == "train":
        lo, hi = 0, stream.split_boundary
    elif split == "validation":
        lo, hi = stream.split_boundary, len(stream)
    else:
        raise ValueError(f"split must be 'train' or 'validation', got {split!r}")
    if length > hi - lo:
        raise ValueError(f"requested {length} letters but {split} split has {hi - lo}")
    if length == 0:
        return np.empty(0, dtype=LETTER_DTYPE)
    start = int(rng.integers(lo, hi - length + 1))
    return stream.data[start : start + length]


def sample_uniform_message(length: int, rng: np.random.Generator) -> np.ndarray:
    """Each letter i.i.d. uniform over the alphabet."""
    if length < 0:
        raise ValueError("length must be >= 0")
    return rng.integers(0, ALPHABET_SIZE, size=length).astype(LETTER_DTYPE)


def letter_frequency_order(stream: LetterStream) -> FrequencyOrder:
    """Rank the 26 letters by descending count; ties (incl. zero) alphabetical."""
    counts = np.bincount(stream.data, minlength=ALPHABET_SIZE).astype(np.int64)
    ranking = np.array(
        sorted(range(ALPHABET_SIZE), key=lambda a: (-counts[a], a)), dtype=LETTER_DTYPE
    )
    return FrequencyOrder(ranking=ranking, counts=counts)
