"""Commutative masking of identifiers and identifier sets.

Masking raises every token to a secret exponent modulo p.  It is used as
a deterministic commutative layer, not as randomized encryption: layers
applied by different parties commute, and equal inputs stay equal, which
is exactly what union-by-equality needs.

Two modes exist.  "ordered" keeps token positions fixed so identifiers
stay comparable tokenwise.  "unordered" additionally draws a fresh
uniform permutation of token positions per identifier per feature, so
only the per-feature multiset survives an encryption pass.  In both
modes, set-level masking shuffles the order of identifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .groups import GroupParams, powmod
from .hashing import HashedIdentifier

ORDERED = "ordered"
UNORDERED = "unordered"
MODES = (ORDERED, UNORDERED)


@dataclass(frozen=True)
class EncryptedIdentifier:
    """Masked identifier: per-feature tuples of group elements.

    ``layer_count`` tracks how many exponentiations were applied; it is
    local bookkeeping for catching phase bugs and is never serialized,
    so the wire carries no metadata about encryption depth.
    """

    features: tuple[tuple[int, ...], ...]
    layer_count: int = 0


@dataclass
class EncryptedSet:
    """A party's worth of masked identifiers.

    ``provenance`` is the origin party id, used only for routing and
    bookkeeping; item order carries no meaning once the set has been
    through a shuffled masking pass.
    """

    items: list[EncryptedIdentifier] = field(default_factory=list)
    provenance: int = -1


def as_encrypted(ident: HashedIdentifier) -> EncryptedIdentifier:
    """View a hashed identifier as a zero-layer encrypted one."""
    return EncryptedIdentifier(ident.features, 0)


def _layers(ident) -> int:
    return getattr(ident, "layer_count", 0)


def encrypt_identifier(
    ident,
    exponent: int,
    group: GroupParams,
    mode: str = ORDERED,
    rng=None,
) -> EncryptedIdentifier:
    """Raise every token to ``exponent``; permute token positions if unordered.

    Feature order is never permuted.  The unordered permutation is drawn
    fresh per feature on every call.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == UNORDERED and rng is None:
        raise ValueError("unordered masking needs a randomness source")
    masked = []
    for feature in ident.features:
        powered = [powmod(value, exponent, group.p) for value in feature]
        if mode == UNORDERED:
            rng.shuffle(powered)
        masked.append(tuple(powered))
    return EncryptedIdentifier(tuple(masked), _layers(ident) + 1)


def encrypt_set(
    enc_set: EncryptedSet,
    exponent: int,
    group: GroupParams,
    mode: str = ORDERED,
    rng=None,
) -> EncryptedSet:
    """Mask every identifier with the same exponent, then shuffle the set.

    The item shuffle happens in both modes (it hides dataset ordering);
    unordered mode additionally permutes tokens inside each identifier.
    """
    if rng is None:
        raise ValueError("set masking needs a randomness source for the shuffle")
    items = [
        encrypt_identifier(item, exponent, group, mode, rng) for item in enc_set.items
    ]
    rng.shuffle(items)
    return EncryptedSet(items, enc_set.provenance)


def compose(ident, exponents, group: GroupParams) -> EncryptedIdentifier:
    """Apply a list of exponents in order; equals one pass with their product.

    An empty list is the identity.  Test utility for the commutativity
    property, not a protocol message.
    """
    current = ident if isinstance(ident, EncryptedIdentifier) else as_encrypted(ident)
    for exponent in exponents:
        current = encrypt_identifier(current, exponent, group, ORDERED)
    return current


# --- serialization --------------------------------------------------------
#
# Normative layout (consumed by the wire format and Bloom hashing):
#   identifier: u8 feature count, then per feature a u16 big-endian token
#               count followed by that many fixed-width big-endian group
#               elements (width = GroupParams.element_width);
#   set:        u32 big-endian item count, then the items back to back.
# layer_count is deliberately absent.


def encode_identifier(ident: EncryptedIdentifier, group: GroupParams) -> bytes:
    if len(ident.features) > 0xFF:
        raise ValueError("more than 255 features cannot be serialized")
    out = bytearray()
    out.append(len(ident.features))
    for feature in ident.features:
        if len(feature) > 0xFFFF:
            raise ValueError("more than 65535 tokens per feature cannot be serialized")
        out += len(feature).to_bytes(2, "big")
        for value in feature:
            out += group.encode_element(value)
    return bytes(out)


def decode_identifier(
    raw: bytes, group: GroupParams, offset: int = 0
) -> tuple[EncryptedIdentifier, int]:
    """Parse one identifier starting at ``offset``; returns (identifier, end)."""
    width = group.element_width
    if offset >= len(raw):
        raise ValueError("truncated identifier: missing feature count")
    feature_count = raw[offset]
    offset += 1
    features = []
    for _ in range(feature_count):
        if offset + 2 > len(raw):
            raise ValueError("truncated identifier: missing token count")
        token_count = int.from_bytes(raw[offset : offset + 2], "big")
        offset += 2
        end = offset + token_count * width
        if end > len(raw):
            raise ValueError("truncated identifier: missing token bytes")
        features.append(
            tuple(
                group.decode_element(raw[pos : pos + width])
                for pos in range(offset, end, width)
            )
        )
        offset = end
    return EncryptedIdentifier(tuple(features), 0), offset


def encode_set(enc_set: EncryptedSet, group: GroupParams) -> bytes:
    out = bytearray(len(enc_set.items).to_bytes(4, "big"))
    for item in enc_set.items:
        out += encode_identifier(item, group)
    return bytes(out)


def decode_set(raw: bytes, group: GroupParams, provenance: int = -1) -> EncryptedSet:
    if len(raw) < 4:
        raise ValueError("truncated set: missing item count")
    count = int.from_bytes(raw[:4], "big")
    offset = 4
    items = []
    for _ in range(count):
        item, offset = decode_identifier(raw, group, offset)
        items.append(item)
    if offset != len(raw):
        raise ValueError(f"{len(raw) - offset} trailing bytes after set payload")
    return EncryptedSet(items, provenance)
