"""Bloom-filter digests of masked identifiers for fast candidate screening.

One filter spans all features of an identifier, so the representation is
insensitive to token order within features and to feature order.  The
prefilter is sound with respect to compare(): it may pass hopeless pairs
(false positives) but never rejects a pair that compare would accept.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import ConfigMismatch
from .groups import GroupParams
from .tokenization import MatchConfig

DEFAULT_BITS = 1 << 20
DEFAULT_HASHES = 4


@dataclass(frozen=True)
class BloomFilter:
    """Bit array stored as a Python int; ``size`` bits, ``hash_count`` probes."""

    bits: int
    size: int
    hash_count: int

    def popcount(self) -> int:
        return self.bits.bit_count()


def _positions(element_bytes: bytes, size: int, hash_count: int):
    for index in range(hash_count):
        digest = hashlib.sha3_256(index.to_bytes(4, "big") + element_bytes).digest()
        yield int.from_bytes(digest, "big") % size


def bloom_encode(
    ident,
    group: GroupParams,
    size: int = DEFAULT_BITS,
    hash_count: int = DEFAULT_HASHES,
) -> BloomFilter:
    """Insert every token of every feature by ``hash_count`` digests mod size.

    Tokens are hashed via their fixed-width big-endian element encoding,
    the same bytes that travel on the wire.
    """
    if size < 1 or size & (size - 1):
        raise ValueError(f"filter size {size} is not a power of two")
    if hash_count < 1:
        raise ValueError("at least one hash probe is required")
    bits = 0
    for feature in ident.features:
        for value in feature:
            for pos in _positions(group.encode_element(value), size, hash_count):
                bits |= 1 << pos
    return BloomFilter(bits, size, hash_count)


def bloom_prefilter(x: BloomFilter, y: BloomFilter, cfg: MatchConfig) -> bool:
    """True when the pair may still satisfy compare(); False only when provably not.

    A compare() match needs at least one shared token value in every
    feature, and a shared value sets identical positions in both filters,
    so an empty intersection rules the pair out.  Any cutoff above one
    shared bit would need assumptions about token multiplicity and
    probe collisions, so this stays at the provable bound.
    """
    if (x.size, x.hash_count) != (y.size, y.hash_count):
        raise ConfigMismatch(
            f"filters disagree: size {x.size} vs {y.size}, "
            f"hashes {x.hash_count} vs {y.hash_count}"
        )
    if all(floor == 0 for floor in cfg.match_floors()):
        return True
    return (x.bits & y.bits) != 0
