"""Deterministic synthetic corpora with controlled overlap and noise.

Each corpus holds one entity per row.  A configurable fraction of
entities is shared by every party (clean copies at party 0); at parties
k >= 1 a configurable number of shared rows is corrupted by exactly one
character substitution per identifier field.  The provenance map records
the true entity behind every row, which is what noisy-matching
evaluation scores against.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

STYLES = ("words", "random")
RANDOM_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"

FIRST_NAMES = (
    "alice", "amir", "ana", "anders", "anna", "arjun", "astrid", "bella",
    "boris", "carla", "carlos", "chen", "clara", "daan", "dana", "diego",
    "dmitri", "elena", "emeka", "emma", "erik", "fatima", "felix", "freya",
    "george", "hana", "hugo", "ines", "ivan", "jack", "jana", "jose",
    "julia", "kenji", "kira", "lars", "leila", "liam", "lucia", "maja",
    "marco", "mari", "mateo", "mia", "nadia", "noor", "omar", "paula",
    "pedro", "priya", "rosa", "sara", "sven", "tariq", "vera", "yuki",
)

LAST_NAMES = (
    "adler", "baker", "bauer", "becker", "bianchi", "blanc", "braun",
    "castro", "costa", "cruz", "dubois", "duran", "falk", "fischer",
    "garcia", "gruber", "haas", "hansen", "hoffman", "ivanov", "jansen",
    "jensen", "keller", "kim", "klein", "kowalski", "kumar", "lange",
    "lehmann", "lopez", "martin", "meyer", "moreau", "moretti", "nakamura",
    "nielsen", "novak", "okafor", "olsen", "petrov", "ricci", "romero",
    "rossi", "santos", "schmid", "silva", "smith", "suzuki", "tanaka",
    "torres", "vargas", "weber", "wolf", "yamamoto", "zhang", "zimmer",
)

STREET_WORDS = (
    "alder", "aspen", "birch", "bridge", "broad", "canal", "cedar",
    "chapel", "cherry", "church", "elm", "field", "forest", "garden",
    "grove", "harbor", "high", "hill", "king", "lake", "laurel", "linden",
    "main", "maple", "market", "meadow", "mill", "north", "oak", "orchard",
    "park", "pine", "queen", "river", "rose", "south", "spring", "station",
    "stone", "summer", "tower", "union", "walnut", "water", "west", "willow",
)


@dataclass
class CorpusRow:
    entity: int
    corrupted: bool
    fields: tuple[str, ...]


@dataclass
class Corpus:
    columns: tuple[str, ...]
    parties: list[list[CorpusRow]]
    meta: dict


def _make_value(column: str, style: str, id_length: int, rng: random.Random) -> str:
    if style == "random":
        return "".join(rng.choice(RANDOM_ALPHABET) for _ in range(id_length))
    if column == "street":
        return f"{rng.randint(1, 999)} {rng.choice(STREET_WORDS)} st"
    return f"{rng.choice(FIRST_NAMES)} {rng.choice(LAST_NAMES)}"


def _fresh_fields(
    columns, style, id_length, rng, used: set[tuple[str, ...]]
) -> tuple[str, ...]:
    while True:
        fields = tuple(_make_value(c, style, id_length, rng) for c in columns)
        if fields not in used:
            used.add(fields)
            return fields


def _substitute_once(value: str, limit: int, rng: random.Random) -> str:
    """Replace one character within the normalized prefix by a different one."""
    span = min(len(value), limit)
    position = rng.randrange(span)
    old = value[position]
    replacement = rng.choice([c for c in RANDOM_ALPHABET if c != old])
    return value[:position] + replacement + value[position + 1 :]


def generate_corpus(
    sizes,
    overlap: float,
    typo_rate: float,
    seed: int,
    style: str = "words",
    columns=("name",),
    id_length: int = 12,
) -> Corpus:
    """Build P parties' rows with ``floor(overlap * min(sizes))`` shared entities.

    At each party k >= 1, ``ceil(typo_rate * sizes[k])`` of its shared rows
    (capped at the shared count) are corrupted: one substitution per
    identifier field, always within the first ``id_length`` characters so
    the noise survives length normalization.  Same seed, same files.
    """
    if style not in STYLES:
        raise ValueError(f"style must be one of {STYLES}")
    sizes = list(sizes)
    if len(sizes) < 2:
        raise ValueError("a corpus needs at least two parties")
    if any(size < 0 for size in sizes):
        raise ValueError("sizes must be non-negative")
    if not 0 <= overlap <= 1:
        raise ValueError("overlap must be within [0, 1]")
    if not 0 <= typo_rate <= 1:
        raise ValueError("typo_rate must be within [0, 1]")
    columns = tuple(columns)

    rng = random.Random(f"corpus/{seed}")
    shared_count = math.floor(overlap * min(sizes))
    used: set[tuple[str, ...]] = set()
    shared = [
        CorpusRow(entity, False, _fresh_fields(columns, style, id_length, rng, used))
        for entity in range(shared_count)
    ]
    next_entity = shared_count

    parties: list[list[CorpusRow]] = []
    for party_id, size in enumerate(sizes):
        rows = [CorpusRow(row.entity, False, row.fields) for row in shared]
        if party_id > 0:
            corrupt_count = min(math.ceil(typo_rate * size), len(rows))
            for row in rows[:corrupt_count]:
                row.corrupted = True
                row.fields = tuple(
                    _substitute_once(value, id_length, rng) for value in row.fields
                )
        while len(rows) < size:
            rows.append(
                CorpusRow(
                    next_entity,
                    False,
                    _fresh_fields(columns, style, id_length, rng, used),
                )
            )
            next_entity += 1
        rng.shuffle(rows)
        parties.append(rows)

    meta = {
        "sizes": sizes,
        "overlap": overlap,
        "typo_rate": typo_rate,
        "seed": seed,
        "style": style,
        "columns": list(columns),
        "id_length": id_length,
        "shared_entities": shared_count,
    }
    return Corpus(columns=columns, parties=parties, meta=meta)


def write_corpus(corpus: Corpus, out_dir) -> tuple[list[Path], Path]:
    """Write party{k}.csv files plus provenance.json; returns their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_paths = []
    for party_id, rows in enumerate(corpus.parties):
        path = out_dir / f"party{party_id}.csv"
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(",".join(corpus.columns) + "\n")
            for row in rows:
                handle.write(",".join(row.fields) + "\n")
        csv_paths.append(path)
    provenance = {
        **corpus.meta,
        "parties": [
            [{"entity": row.entity, "corrupted": row.corrupted} for row in rows]
            for rows in corpus.parties
        ],
    }
    provenance_path = out_dir / "provenance.json"
    provenance_path.write_text(
        json.dumps(provenance, indent=2, sort_keys=True), encoding="utf-8"
    )
    return csv_paths, provenance_path


def load_provenance(path) -> list[list[dict]]:
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    return document["parties"]
