"""Three parties align customer records exactly, without revealing overlap.

Runs the ordered protocol in-process and prints each party's map from
local row to universal index, plus the message accounting.
"""

from fractions import Fraction

from psualign import FeatureSpec, MatchConfig, hash_identifier, tokenize_record
from psualign.config import SessionConfig
from psualign.simulate import run_local_session

match = MatchConfig(
    features=(FeatureSpec("name", 10, 3), FeatureSpec("city", 8, 2)),
    threshold=Fraction(1),
    ordered=True,
)
cfg = SessionConfig(
    party_count=3,
    variant="ordered",
    group_source="p512",
    match=match,
    datasets=(),
    seed=2024,
)

bank = [("alice moor", "lisbon"), ("bob tanner", "porto"), ("carol haas", "braga")]
insurer = [("bob tanner", "porto"), ("dana silva", "faro")]
telco = [("alice moor", "lisbon"), ("erik fuchs", "porto"), ("bob tanner", "porto")]

group = cfg.group()
hashed = [
    [hash_identifier(tokenize_record(row, match), group) for row in rows]
    for rows in (bank, insurer, telco)
]

outcome = run_local_session(cfg, hashed)

names = ["bank", "insurer", "telco"]
datasets = [bank, insurer, telco]
print(f"union size: {outcome.results[0].union_table.size}")
for result, label, rows in zip(outcome.results, names, datasets):
    print(f"\n{label}:")
    for local, universal in sorted(result.index_map.local_to_universal.items()):
        print(f"  row {local} {rows[local]!r:<32} -> universal index {universal}")

print("\nmessages on the wire:")
for kind, count in outcome.message_counts.items():
    if count:
        print(f"  {kind:<14} {count}")
print("\nshared rows got the same universal index; no party learned which.")
