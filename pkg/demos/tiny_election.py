#!/usr/bin/env python3
"""Walk a complete election through every protocol phase, printing what
each party sees: registration commitments, the Merkle root, an
eligibility proof, a Benaloh audit, a confirmed ballot, the final
tally, and the public verification report."""

import json
import random

from zkvote.registry import (
    MerklePath,
    build_proof_payload,
    derive_commitment,
    derive_nullifier_hash,
)
from zkvote.service import ElectionConfig, ElectionService
from zkvote.sim import make_counter_clock
from zkvote.verify import verify_election

rng = random.Random(2024)
config = ElectionConfig(
    election_id="demo",
    n_candidates=2,
    candidates=["alpha party", "beta party"],
    voter_bound=10,
    tier="test",
    eligible_voters=["alice", "bob", "carol"],
)
service = ElectionService(config, rng=rng, clock=make_counter_clock())

print("== commitment phase ==")
creds = {}
for name in config.eligible_voters:
    creds[name] = service.register(name)
    print(f"  {name}: commitment {creds[name]['commitment'][:16]}..")

root = service.registry_root()
print(f"  registry root {root['root'][:16]}.. ({root['leaf_count']} leaves)")

print("\n== verification phase (alice votes) ==")
cred = creds["alice"]
nullifier = bytes.fromhex(cred["internal_nullifier"])
commitment = derive_commitment("alice", nullifier)
info = service.registry_path_for(commitment.hex())
payload = build_proof_payload(
    root=bytes.fromhex(info["root"]),
    leaf=commitment,
    path=MerklePath(
        info["leaf_index"],
        tuple(bytes.fromhex(s) for s in info["siblings"]),
        tuple(info["path_bits"]),
    ),
    nullifier_hash=derive_nullifier_hash(service.external_nullifier, nullifier),
    external_nullifier=service.external_nullifier,
)
print(f"  QR payload ({len(payload)} chars): {payload[:48]}..")
token = service.create_session(payload)["token"]
print(f"  booth session opened: {token[:8]}..")

first = service.cast_vote(token, 2)["first"]
ballot = json.loads(first)
print(f"  ballot {ballot['index']} encrypted: U={ballot['U']} E={ballot['E']}")

print("  alice challenges the machine (audit):")
audited = service.decide(token, "audit")
second = json.loads(audited["second"])
print(f"    revealed r={second['r']} vote={second['vote']} -> she re-checks the equations")

print("  satisfied, she votes again and confirms:")
service.cast_vote(token, 2)
confirmed = service.decide(token, "confirm")
print(f"    confirmed ballot at board index {confirmed['receipt_index']}")

for name in ("bob", "carol"):
    cred = creds[name]
    nullifier = bytes.fromhex(cred["internal_nullifier"])
    commitment = derive_commitment(name, nullifier)
    info = service.registry_path_for(commitment.hex())
    payload = build_proof_payload(
        root=bytes.fromhex(info["root"]),
        leaf=commitment,
        path=MerklePath(
            info["leaf_index"],
            tuple(bytes.fromhex(s) for s in info["siblings"]),
            tuple(info["path_bits"]),
        ),
        nullifier_hash=derive_nullifier_hash(service.external_nullifier, nullifier),
        external_nullifier=service.external_nullifier,
    )
    token = service.create_session(payload)["token"]
    service.cast_vote(token, 1 if name == "bob" else 2)
    service.decide(token, "confirm")
    print(f"  {name} voted and confirmed")

try:
    service.create_session(payload)
except Exception as exc:
    print(f"  carol tries again -> {exc}")

print("\n== tallying phase ==")
final = json.loads(service.close()["final"])
print(f"  DRE posts t={final['t']} s={final['s']} m={final['m']}")

report = verify_election(service.board)
print(report.summary())
print("\ncandidates:", dict(zip(config.candidates, report.decoded_counts)))
