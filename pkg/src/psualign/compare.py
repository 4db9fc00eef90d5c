"""Approximate equality of masked identifiers by per-feature token overlap."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ShapeMismatch
from .tokenization import MatchConfig


@dataclass(frozen=True)
class CompareResult:
    """Outcome of a threshold comparison.

    ``matched_indices`` lists, per feature, the token indices of the
    first argument whose value occurs somewhere in the second argument's
    feature.  ``is_match`` is true iff every feature reached its floor
    ceil(threshold * gram_count).
    """

    is_match: bool
    matched_indices: tuple[tuple[int, ...], ...]


def compare(x, y, cfg: MatchConfig) -> CompareResult:
    """Count, per feature, the tokens of ``x`` present in ``y``.

    Each index of ``x`` is counted once no matter how many tokens of
    ``y`` it equals.  Both inputs must be masked under the same total
    exponent for value equality to be meaningful.  The relation is
    reflexive and symmetric in ``is_match`` for equal-shape inputs but
    deliberately not transitive.
    """
    if len(x.features) != len(y.features):
        raise ShapeMismatch(
            f"feature counts differ: {len(x.features)} vs {len(y.features)}"
        )
    if len(x.features) != cfg.d_match:
        raise ShapeMismatch(
            f"identifiers have {len(x.features)} features, config expects {cfg.d_match}"
        )
    floors = cfg.match_floors()
    matched: list[tuple[int, ...]] = []
    is_match = True
    for feature_x, feature_y, floor in zip(x.features, y.features, floors):
        values_y = set(feature_y)
        hits = tuple(i for i, value in enumerate(feature_x) if value in values_y)
        matched.append(hits)
        if len(hits) < floor:
            is_match = False
    return CompareResult(is_match, tuple(matched))
