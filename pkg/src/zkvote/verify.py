"""Anyone-can-run verification of a finished election.

The verifier trusts nothing the DRE published: it re-verifies every
proof on the board, recomputes the running U-products from the
receipts themselves, re-encrypts every audited ballot from its
revealed (r, v), and checks the four tally equations

    prod U = g1^s   prod V = g2^s   prod E = h^s g1^t   prod W = c^s d^m

over the confirmed receipts only, using the posted (t, s, m) as claims
to be checked. Finally the tally t is decoded into per-candidate
counts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import receipts
from .dre import (
    audited_consistency,
    compute_alpha,
    pk_s1_context,
    pk_s_context,
    pwf_context,
    vote_encodings,
)
from .errors import DecodeError, IncompleteElectionError, ReceiptFormatError, WrongVariantError
from .hashing import hash_bytes
from .proofs import verify_dlog, verify_wellformed


@dataclass
class VerificationReport:
    election: str
    chain_ok: bool
    tags_ok: bool
    wellformed_ok: bool = True
    wellformed_failures: list = field(default_factory=list)  # (index, reason)
    audit_ok: bool = True
    audit_failures: list = field(default_factory=list)
    tally_ok: bool = True
    tally_failures: list = field(default_factory=list)  # failing equation names
    decoded_counts: list | None = None
    decode_error: str | None = None
    n_audited: int = 0
    n_confirmed: int = 0

    @property
    def overall(self) -> bool:
        return self.wellformed_ok and self.audit_ok and self.tally_ok

    def to_dict(self) -> dict:
        return {
            "election": self.election,
            "overall": self.overall,
            "chain_ok": self.chain_ok,
            "tags_ok": self.tags_ok,
            "wellformed_ok": self.wellformed_ok,
            "wellformed_failures": self.wellformed_failures,
            "audit_ok": self.audit_ok,
            "audit_failures": self.audit_failures,
            "tally_ok": self.tally_ok,
            "tally_failures": self.tally_failures,
            "decoded_counts": self.decoded_counts,
            "decode_error": self.decode_error,
            "n_audited": self.n_audited,
            "n_confirmed": self.n_confirmed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def summary(self) -> str:
        mark = lambda ok: "PASS" if ok else "FAIL"
        lines = [
            f"election {self.election}: {mark(self.overall)}",
            f"  well-formedness  {mark(self.wellformed_ok)}"
            + (f"  failures: {self.wellformed_failures}" if self.wellformed_failures else ""),
            f"  audited ballots  {mark(self.audit_ok)}"
            + (f"  failures: {self.audit_failures}" if self.audit_failures else ""),
            f"  tally equations  {mark(self.tally_ok)}"
            + (f"  failing: {self.tally_failures}" if self.tally_failures else ""),
            f"  chain integrity  {mark(self.chain_ok)}   receipt tags  {mark(self.tags_ok)}",
            f"  ballots: {self.n_confirmed} confirmed, {self.n_audited} audited",
        ]
        if self.decoded_counts is not None:
            lines.append(f"  decoded counts: {self.decoded_counts}")
        if self.decode_error:
            lines.append(f"  decode error: {self.decode_error}")
        return "\n".join(lines)


def audit_consistency(receipt: receipts.ParsedReceipt, pubkey, params) -> bool:
    """Spec check for a single audited receipt (wrong variant raises)."""
    if receipt.variant != "audited":
        raise WrongVariantError("receipt is not an audited ballot")
    return audited_consistency(
        receipt.u,
        receipt.v,
        receipt.e,
        receipt.w,
        receipt.alpha,
        receipt.revealed_r,
        receipt.revealed_vote,
        pubkey,
        params,
    )


def decode_tally(t: int, n_candidates: int, voter_bound: int, n_confirmed: int) -> list[int]:
    """Per-candidate counts from the tally value. Two candidates:
    (|C| - t, t). Otherwise base-N digit extraction, digit j-1 being
    candidate j's count."""
    if n_candidates == 2:
        if not 0 <= t <= n_confirmed:
            raise DecodeError(f"tally {t} outside 0..{n_confirmed}")
        return [n_confirmed - t, t]
    counts = []
    remaining = t
    for _ in range(n_candidates):
        counts.append(remaining % voter_bound)
        remaining //= voter_bound
    if remaining:
        raise DecodeError("tally exceeds N^n; voter bound violated or value corrupted")
    if sum(counts) != n_confirmed:
        raise DecodeError(
            f"decoded counts sum to {sum(counts)}, expected {n_confirmed} confirmed ballots"
        )
    return counts


def verify_election(board, final_text: str | None = None) -> VerificationReport:
    """Run the three public checks over a board; the final tally comes
    from the board itself unless supplied explicitly.

    Every non-genesis block must be a verifying receipt (with contiguous
    ballot indices) or the single final-tally record; anything else is a
    well-formedness failure, so damaged payloads count as detections
    rather than being skipped."""
    from .board import payload_shape, verify_chain

    params = board.params
    pubkey = board.pubkey
    genesis = board.genesis
    n_candidates = genesis["n_candidates"]
    voter_bound = genesis["voter_bound"]
    election = board.election_id
    if final_text is None:
        final_text = board.final_text
    if final_text is None:
        raise IncompleteElectionError("no final tally was published")
    final = receipts.parse_final_tally(final_text, params)

    key = final["receipt_key"]
    tags_ok = hash_bytes(key) == genesis["receipt_key_commitment"]
    tags_ok &= receipts.verify_doc_tag(final_text, key)

    report = VerificationReport(
        election=election, chain_ok=verify_chain(board), tags_ok=tags_ok
    )

    encodings = vote_encodings(n_candidates, voter_bound)
    prod_all = 1
    prod_u = prod_v = prod_e = prod_w = 1
    expected_index = 1
    board_final: str | None = None
    for block in board.blocks[1:]:
        kind, shallow_index, _ = payload_shape(block.payload)
        if kind == "final_tally":
            if board_final is not None:
                report.wellformed_ok = False
                report.wellformed_failures.append((block.height, "duplicate final tally"))
            board_final = block.payload
            continue
        label = shallow_index if shallow_index is not None else f"height {block.height}"
        if board_final is not None:
            report.wellformed_ok = False
            report.wellformed_failures.append((label, "receipt after the final tally"))
        try:
            parsed = receipts.parse_receipt(block.payload, params, n_candidates)
        except ReceiptFormatError as exc:
            report.wellformed_ok = False
            report.wellformed_failures.append((label, f"parse: {exc}"))
            expected_index += 1
            continue
        index = parsed.index
        if index != expected_index:
            report.wellformed_ok = False
            report.wellformed_failures.append(
                (index, f"ballot index out of order (expected {expected_index})")
            )
        expected_index += 1
        ok, reason = _check_first_part(parsed, encodings, prod_all, board)
        prod_all = params.mul(prod_all, parsed.u)
        if not ok:
            report.wellformed_ok = False
            report.wellformed_failures.append((index, reason))
        if parsed.variant == "audited":
            report.n_audited += 1
            if parsed.revealed_vote not in encodings:
                report.audit_ok = False
                report.audit_failures.append((index, "revealed vote is not a valid encoding"))
            elif not audit_consistency(parsed, pubkey, params):
                report.audit_ok = False
                report.audit_failures.append((index, "re-encryption of revealed (r, v) failed"))
        else:
            report.n_confirmed += 1
            n_next = params.mul(prod_u, parsed.u)
            if not verify_dlog(
                parsed.pk_s, params.g1, n_next, pk_s_context(election, index), params
            ):
                report.wellformed_ok = False
                report.wellformed_failures.append((index, "P_K{s} failed"))
            prod_u = n_next
            prod_v = params.mul(prod_v, parsed.v)
            prod_e = params.mul(prod_e, parsed.e)
            prod_w = params.mul(prod_w, parsed.w)
        if not receipts.verify_doc_tag(parsed.first_text, key) or not receipts.verify_doc_tag(
            parsed.second_text, key
        ):
            report.tags_ok = False

    if board_final is not None and board_final != final_text:
        report.tally_ok = False
        report.tally_failures.append("final-tally-mismatch")

    t, s, m = final["t"], final["s"], final["m"]
    c, d, h = pubkey
    equations = (
        ("product-U = g1^s", prod_u == params.exp(params.g1, s)),
        ("product-V = g2^s", prod_v == params.exp(params.g2, s)),
        ("product-E = h^s g1^t", prod_e == params.mul(params.exp(h, s), params.exp(params.g1, t))),
        ("product-W = c^s d^m", prod_w == params.mul(params.exp(c, s), params.exp(d, m))),
    )
    for name, holds in equations:
        if not holds:
            report.tally_ok = False
            report.tally_failures.append(name)

    try:
        report.decoded_counts = decode_tally(t, n_candidates, voter_bound, report.n_confirmed)
    except DecodeError as exc:
        report.decode_error = str(exc)
        report.tally_ok = False
        report.tally_failures.append("tally-decode")
    return report


def _check_first_part(parsed, encodings, prod_all, board) -> tuple[bool, str]:
    params = board.params
    election = board.election_id
    if parsed.election != election:
        return False, "wrong election"
    if parsed.alpha != compute_alpha(parsed.u, parsed.v, parsed.e, params):
        return False, "alpha does not match H(U, V, E)"
    if not verify_wellformed(
        parsed.pwf,
        encodings,
        params,
        board.pubkey,
        parsed.ciphertext,
        parsed.alpha,
        pwf_context(election, parsed.index),
    ):
        return False, "well-formedness proof failed"
    n1_next = params.mul(prod_all, parsed.u)
    if not verify_dlog(
        parsed.pk_s1, params.g1, n1_next, pk_s1_context(election, parsed.index), params
    ):
        return False, "P_K{s1} failed against the reconstructed product"
    return True, ""
