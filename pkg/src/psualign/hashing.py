"""SHA3-based mapping of n-gram tokens onto the quadratic-residue subgroup."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .groups import GroupParams, project_to_qr
from .tokenization import TokenizedIdentifier


@dataclass(frozen=True)
class HashedIdentifier:
    """Per-feature tuples of group elements; same shape as the token source."""

    features: tuple[tuple[int, ...], ...]


def hash_token(token: str, group: GroupParams) -> int:
    """Digest a token with SHA3-256 and project it into the subgroup.

    The 32-byte digest is read as a big-endian integer.  The byte order
    must be fixed bit-exactly: parties that disagree here produce
    disjoint element sets and the union degenerates.
    """
    digest = hashlib.sha3_256(token.encode("utf-8")).digest()
    return project_to_qr(int.from_bytes(digest, "big"), group)


def hash_identifier(tokens: TokenizedIdentifier, group: GroupParams) -> HashedIdentifier:
    """Hash every token, preserving the feature/token shape."""
    return HashedIdentifier(
        tuple(
            tuple(hash_token(token, group) for token in feature)
            for feature in tokens.features
        )
    )
