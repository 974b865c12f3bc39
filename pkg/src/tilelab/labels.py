"""Deterministic i.i.d.-style uniform labels keyed by seed and vertex id.

Each vertex gets a 64-bit binary fraction in [0, 1), derived from a keyed
cryptographic hash of the vertex identifier, so labels are reproducible,
exchangeable across machines, and independent across vertices for all
practical purposes.  A label stream can be split into k substreams by digit
interleaving: substream j takes bits j, j+k, j+2k, ... of the fraction.  The
split is lossless -- the original label is reconstructible from its parts.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

LABEL_BITS = 64


class LabelSource:
    """Keyed map from hashable vertex ids to uniform 64-bit fractions."""

    def __init__(self, seed: int, salt: str = ""):
        self.seed = int(seed)
        self.salt = salt
        self._key = hashlib.blake2b(
            f"{self.seed}:{self.salt}".encode(), digest_size=16
        ).digest()

    def bits(self, vertex) -> int:
        """Raw 64-bit integer label for a vertex."""
        h = hashlib.blake2b(
            _encode_vertex(vertex), key=self._key, digest_size=8
        ).digest()
        return int.from_bytes(h, "big")

    def label(self, vertex) -> Fraction:
        """Uniform label in [0, 1) with 64 binary digits."""
        return Fraction(self.bits(vertex), 1 << LABEL_BITS)

    def float_label(self, vertex) -> float:
        return self.bits(vertex) / float(1 << LABEL_BITS)

    def split(self, k: int) -> list["SubStream"]:
        """k substreams by bit interleaving; together they determine label()."""
        if k < 1:
            raise ValueError("k must be >= 1")
        return [SubStream(self, k, j) for j in range(k)]

    def choose_min(self, vertices):
        """The vertex of minimal label; ties are impossible in practice but
        broken by the encoded id for full determinism."""
        return min(vertices, key=lambda v: (self.bits(v), _encode_vertex(v)))


class SubStream:
    """Every-k-th-bit substream of a LabelSource."""

    def __init__(self, source: LabelSource, k: int, offset: int):
        self.source = source
        self.k = k
        self.offset = offset
        self.nbits = len(range(offset, LABEL_BITS, k))

    def bits(self, vertex) -> int:
        raw = self.source.bits(vertex)
        out = 0
        # bit 0 of the fraction is the most significant bit of raw
        for pos in range(self.offset, LABEL_BITS, self.k):
            out = (out << 1) | ((raw >> (LABEL_BITS - 1 - pos)) & 1)
        return out

    def label(self, vertex) -> Fraction:
        return Fraction(self.bits(vertex), 1 << self.nbits)

    def float_label(self, vertex) -> float:
        return self.bits(vertex) / float(1 << self.nbits)

    def choose_min(self, vertices):
        return min(vertices, key=lambda v: (self.bits(v), _encode_vertex(v)))


def recombine(parts: list[int], k: int) -> int:
    """Inverse of splitting: rebuild the 64-bit label from substream bits."""
    widths = [len(range(j, LABEL_BITS, k)) for j in range(k)]
    if len(parts) != k:
        raise ValueError("need exactly k parts")
    raw = 0
    cursors = [w for w in widths]
    for pos in range(LABEL_BITS):
        j = pos % k
        cursors[j] -= 1
        bit = (parts[j] >> cursors[j]) & 1
        raw = (raw << 1) | bit
    return raw


def _encode_vertex(vertex) -> bytes:
    """Stable byte encoding of a vertex id (ints, strings, nested tuples)."""
    return json.dumps(_plain(vertex), separators=(",", ":")).encode()


def _plain(v):
    if isinstance(v, (int, str, float, bool)) or v is None:
        return v
    if isinstance(v, (tuple, list)):
        return [_plain(x) for x in v]
    raise TypeError(f"unsupported vertex id type: {type(v)!r}")
