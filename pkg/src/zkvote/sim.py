"""Whole-election simulations: registration, Benaloh-challenge voting
loops, closing, verification, and optional adversarial edits.

A fixed seed makes a run bit-reproducible (one seeded RNG drives key
generation, nullifiers, ballot randomness, decisions, and the padding
leaves; block timestamps come from a counting clock). Besides the
protocol files (registry, board, tally, report) the simulator writes a
shadow-truth file with the plaintext votes and randomness; it exists
only so tests can validate aggregates and is never read by any
verification path.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from . import receipts
from .board import rehash_records
from .errors import ConfigError, ReceiptFormatError
from .groups import derive_custom_group, derive_group
from .registry import (
    build_proof_payload,
    derive_commitment,
    derive_nullifier_hash,
)
from .service import ElectionConfig, ElectionService, Rejection
from .verify import audit_consistency, verify_election

ADVERSARIES = ("none", "mutate_receipt", "forge_tally", "replay_nullifier")


@dataclass
class SimulationSpec:
    voters: int = 100
    candidates: int = 2
    voter_bound: int | None = None  # default: voters + 1
    audit_probability: float = 0.2
    seed: int = 0
    adversary: str = "none"
    tier: str = "test"
    custom_q_bits: int | None = None
    out_dir: str | None = None
    election_id: str | None = None

    def __post_init__(self):
        if self.voters < 0:
            raise ConfigError("voters must be non-negative")
        if self.candidates < 2:
            raise ConfigError("need at least two candidates")
        if not 0.0 <= self.audit_probability <= 1.0:
            raise ConfigError("audit probability must be within [0, 1]")
        if self.adversary not in ADVERSARIES:
            raise ConfigError(f"unknown adversary {self.adversary!r}")
        if self.voter_bound is None:
            self.voter_bound = self.voters + 1
        if self.candidates >= 3 and self.voter_bound <= self.voters:
            raise ConfigError("voter bound N must exceed the voter count")
        if self.election_id is None:
            self.election_id = f"sim-{self.seed}"


def make_counter_clock(start: int = 1_700_000_000):
    state = {"t": start}

    def clock() -> int:
        state["t"] += 1
        return state["t"]

    return clock


def simulate(spec: SimulationSpec) -> dict:
    """Run one full election per the spec; returns the summary dict."""
    rng = random.Random(spec.seed)
    out = Path(spec.out_dir) if spec.out_dir else None
    if out:
        out.mkdir(parents=True, exist_ok=True)

    voter_ids = [f"voter-{i:04d}" for i in range(spec.voters)]
    config = ElectionConfig(
        election_id=spec.election_id,
        n_candidates=spec.candidates,
        voter_bound=spec.voter_bound,
        tier=spec.tier,
        eligible_voters=voter_ids,
        registry_path=str(out / "registry.txt") if out else None,
        board_path=str(out / "board.log") if out else None,
        ledger_path=str(out / "ledger.txt") if out else None,
        state_path=str(out / "dre-state.json") if out else None,
    )
    if spec.custom_q_bits:
        group = derive_custom_group(spec.custom_q_bits, spec.election_id.encode())
    else:
        group = derive_group(spec.tier, spec.election_id.encode())
    service = ElectionService(config, rng=rng, clock=make_counter_clock(), group_params=group)

    credentials = {vid: service.register(vid) for vid in voter_ids}

    payloads: dict[str, str] = {}
    shadow = {"confirmed": [], "audited": [], "histogram": [0] * spec.candidates}
    n_audits = 0
    if spec.voters:
        root_info = service.registry_root()
        external = bytes.fromhex(root_info["external_nullifier"])
        for vid in voter_ids:
            cred = credentials[vid]
            nullifier = bytes.fromhex(cred["internal_nullifier"])
            commitment = derive_commitment(vid, nullifier)
            assert commitment.hex() == cred["commitment"]
            path_info = service.registry_path_for(commitment.hex())
            payload = build_proof_payload(
                root=bytes.fromhex(path_info["root"]),
                leaf=commitment,
                path=_path_from_info(path_info),
                nullifier_hash=derive_nullifier_hash(external, nullifier),
                external_nullifier=external,
            )
            payloads[vid] = payload
            token = service.create_session(payload)["token"]
            n_audits += _vote_with_benaloh(service, token, spec, rng, shadow)

    double_votes = 0
    if spec.adversary == "replay_nullifier":
        for vid in voter_ids:
            try:
                service.create_session(payloads[vid])
            except Rejection as exc:
                if exc.reason == "double_vote":
                    double_votes += 1

    final_text = service.close()["final"]
    report = verify_election(service.board, final_text)

    if out:
        (out / "tally.json").write_text(final_text + "\n", encoding="utf-8")
        (out / "config.json").write_text(config.to_json() + "\n", encoding="utf-8")
        (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
        shadow_doc = {
            "WARNING": (
                "shadow truth for tests only: plaintext votes and randomness; "
                "no protocol or verification path reads this file"
            ),
            "seed": spec.seed,
            **shadow,
        }
        (out / "shadow-truth.json").write_text(
            json.dumps(shadow_doc, indent=2) + "\n", encoding="utf-8"
        )
        if spec.adversary == "mutate_receipt":
            mutate_receipt_on_board(out / "board.log")
        elif spec.adversary == "forge_tally":
            forge_tally_files(out / "board.log", out / "tally.json")

    summary = {
        "election_id": spec.election_id,
        "voters": spec.voters,
        "candidates": spec.candidates,
        "ballots": service.board.last_ballot_index,
        "audited": service.board.n_audited,
        "confirmed": service.board.n_confirmed,
        "double_vote_rejections": double_votes,
        "adversary": spec.adversary,
        "head_hash": service.board.head_hash,
        "decoded_counts": report.decoded_counts,
        "shadow_histogram": shadow["histogram"],
        "verified": report.overall and report.chain_ok,
    }
    if out:
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return summary


def _vote_with_benaloh(service, token, spec, rng, shadow) -> int:
    """Drive one booth session: audit with the configured probability,
    then confirm. Returns the number of audits performed."""
    audits = 0
    while True:
        candidate = rng.randrange(1, spec.candidates + 1)
        first_text = service.cast_vote(token, candidate)["first"]
        pending = service.dre.pending  # test-only hook: retain r for the shadow record
        record = {
            "index": pending.index,
            "candidate": candidate,
            "vote": pending.vote,
            "r": pending.r,
            "alpha": pending.alpha,
        }
        if rng.random() < spec.audit_probability:
            result = service.decide(token, "audit")
            audits += 1
            merged = receipts.merge_receipt(record["index"], first_text, result["second"])
            parsed = receipts.parse_receipt(merged, service.params, spec.candidates)
            if not audit_consistency(parsed, service.board.pubkey, service.params):
                raise AssertionError("honest audit failed its consistency check")
            shadow["audited"].append(record)
            continue
        service.decide(token, "confirm")
        shadow["confirmed"].append(record)
        shadow["histogram"][candidate - 1] += 1
        return audits


def _path_from_info(info: dict):
    from .registry import MerklePath

    return MerklePath(
        leaf_index=info["leaf_index"],
        siblings=tuple(bytes.fromhex(s) for s in info["siblings"]),
        path_bits=tuple(info["path_bits"]),
    )


# -- adversarial post-hoc edits -------------------------------------------


def _load_board_lines(board_path) -> tuple[list[str], dict, bytes, int]:
    lines = [l for l in Path(board_path).read_text(encoding="utf-8").splitlines() if l.strip()]
    genesis = receipts.parse_genesis(json.loads(lines[0])["payload"])
    key = None
    for line in lines:
        payload = json.loads(line)["payload"]
        doc = json.loads(payload)
        if doc.get("kind") == "final_tally":
            key = bytes.fromhex(doc["receipt_key"])
    if key is None:
        raise ReceiptFormatError("board has no final tally; adversary edits need the revealed key")
    return lines, genesis, key, genesis["n_candidates"]


def mutate_receipt_on_board(board_path) -> int:
    """Adversary with board write access: multiply one confirmed ballot's
    E by g1, re-tag with the revealed receipt key, and re-mine the chain.
    Returns the mutated ballot index."""
    lines, genesis, key, n_candidates = _load_board_lines(board_path)
    params = genesis["params"]
    target = None
    for i, line in enumerate(lines):
        payload = json.loads(line)["payload"]
        doc = json.loads(payload)
        if doc.get("kind") != "receipt":
            continue
        if json.loads(doc["second"]).get("variant") == "confirmed":
            target = i
    if target is None:
        raise ReceiptFormatError("no confirmed receipt to mutate")
    record = json.loads(lines[target])
    receipt_doc = json.loads(record["payload"])
    first = json.loads(receipt_doc["first"])
    e = params.element_from_hex(first["E"])
    first["E"] = params.element_hex(params.mul(e, params.g1))
    first.pop("auth_tag")
    first_text = receipts.tag_document(first, key)
    record["payload"] = receipts.merge_receipt(
        receipt_doc["index"], first_text, receipt_doc["second"]
    )
    lines[target] = receipts.canonical_json(record)
    Path(board_path).write_text("\n".join(rehash_records(lines)) + "\n", encoding="utf-8")
    return receipt_doc["index"]


def forge_tally_files(board_path, tally_path) -> None:
    """Adversary bumps the published tally t by one, re-tags with the
    revealed key, and re-mines; the tally equations must catch it."""
    lines, genesis, key, _ = _load_board_lines(board_path)
    params = genesis["params"]
    new_text = None
    for i, line in enumerate(lines):
        record = json.loads(line)
        doc = json.loads(record["payload"])
        if doc.get("kind") != "final_tally":
            continue
        t = params.scalar_from_hex(doc["t"])
        doc["t"] = params.scalar_hex((t + 1) % params.q)
        doc.pop("auth_tag")
        new_text = receipts.tag_document(doc, key)
        record["payload"] = new_text
        lines[i] = receipts.canonical_json(record)
    Path(board_path).write_text("\n".join(rehash_records(lines)) + "\n", encoding="utf-8")
    if new_text is not None:
        Path(tally_path).write_text(new_text + "\n", encoding="utf-8")
