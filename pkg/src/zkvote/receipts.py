"""Receipt and board-record wire formats.

Every document is a single line of canonical JSON (UTF-8, compact
separators, fixed field order). The merged receipt embeds the two part
documents verbatim as strings, so the bytes a voter holds can be
compared byte-for-byte against the board's copy. Proof fields carry the
canonical binary proof layout as lowercase hex:

* dlog proof: element A | scalar e | scalar z
* well-formedness proof: per branch A_U | A_V | A_E | A_W | e | z,
  branches in candidate order

with fixed-width big-endian encodings (element and scalar widths are
those of the group in the genesis record).

"Signing" a receipt means an HMAC-SHA256 tag under the per-machine
receipt key; the genesis record commits to the key's hash and the
final-tally record reveals the key so anyone can check tags offline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import InvalidParametersError, ReceiptFormatError
from .groups import GroupParams
from .hashing import auth_tag, check_tag, hash_bytes
from .proofs import DlogProof, WellFormedProof

WIRE_VERSION = 1


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, separators=(",", ":"))


def tag_document(doc: dict, key: bytes) -> str:
    doc["auth_tag"] = auth_tag(key, canonical_json(doc).encode())
    return canonical_json(doc)


def verify_doc_tag(text: str, key: bytes) -> bool:
    """Re-derive a document's auth tag; order-preserving round trip."""
    try:
        doc = json.loads(text)
        tag = doc.pop("auth_tag")
        return check_tag(key, canonical_json(doc).encode(), tag)
    except (ValueError, KeyError, TypeError):
        return False


def make_genesis(
    election_id: str,
    params: GroupParams,
    pubkey,
    n_candidates: int,
    voter_bound: int,
    external_nullifier: bytes,
    receipt_key: bytes,
) -> str:
    doc = {
        "v": WIRE_VERSION,
        "kind": "genesis",
        "election": election_id,
        "tier": params.tier,
        "p": "%x" % params.p,
        "q": "%x" % params.q,
        "g1": params.element_hex(params.g1),
        "g2": params.element_hex(params.g2),
        "c": params.element_hex(pubkey.c),
        "d": params.element_hex(pubkey.d),
        "h": params.element_hex(pubkey.h),
        "n_candidates": n_candidates,
        "voter_bound": voter_bound,
        "external_nullifier": external_nullifier.hex(),
        "receipt_key_commitment": hash_bytes(receipt_key).hex(),
    }
    return canonical_json(doc)


def make_first_part(
    election_id: str,
    index: int,
    ciphertext,
    alpha: int,
    pwf: WellFormedProof,
    pk_s1: DlogProof,
    params: GroupParams,
    receipt_key: bytes,
) -> str:
    u, v, e, w = ciphertext
    doc = {
        "v": WIRE_VERSION,
        "kind": "ballot_first",
        "election": election_id,
        "index": index,
        "U": params.element_hex(u),
        "V": params.element_hex(v),
        "E": params.element_hex(e),
        "W": params.element_hex(w),
        "alpha": params.scalar_hex(alpha),
        "pwf": pwf.to_bytes(params).hex(),
        "pk_s1": pk_s1.to_bytes(params).hex(),
    }
    return tag_document(doc, receipt_key)


def make_second_audited(
    election_id: str, index: int, r: int, vote: int, params: GroupParams, receipt_key: bytes
) -> str:
    doc = {
        "v": WIRE_VERSION,
        "kind": "ballot_second",
        "election": election_id,
        "index": index,
        "variant": "audited",
        "r": params.scalar_hex(r),
        "vote": params.scalar_hex(vote),
    }
    return tag_document(doc, receipt_key)


def make_second_confirmed(
    election_id: str, index: int, pk_s: DlogProof, params: GroupParams, receipt_key: bytes
) -> str:
    doc = {
        "v": WIRE_VERSION,
        "kind": "ballot_second",
        "election": election_id,
        "index": index,
        "variant": "confirmed",
        "pk_s": pk_s.to_bytes(params).hex(),
    }
    return tag_document(doc, receipt_key)


def merge_receipt(index: int, first_text: str, second_text: str) -> str:
    doc = {
        "v": WIRE_VERSION,
        "kind": "receipt",
        "index": index,
        "first": first_text,
        "second": second_text,
    }
    return canonical_json(doc)


def make_final_tally(
    election_id: str, t: int, s: int, m: int, params: GroupParams, receipt_key: bytes
) -> str:
    doc = {
        "v": WIRE_VERSION,
        "kind": "final_tally",
        "election": election_id,
        "t": params.scalar_hex(t),
        "s": params.scalar_hex(s),
        "m": params.scalar_hex(m),
        "receipt_key": receipt_key.hex(),
    }
    return tag_document(doc, receipt_key)


@dataclass(frozen=True)
class ParsedReceipt:
    index: int
    election: str
    first_text: str
    second_text: str
    u: int
    v: int
    e: int
    w: int
    alpha: int
    pwf: WellFormedProof
    pk_s1: DlogProof
    variant: str  # "audited" | "confirmed"
    revealed_r: int | None
    revealed_vote: int | None
    pk_s: DlogProof | None

    @property
    def ciphertext(self):
        return (self.u, self.v, self.e, self.w)


def parse_receipt(text: str, params: GroupParams, n_candidates: int) -> ParsedReceipt:
    """Parse and structurally validate a merged receipt. Raises
    ReceiptFormatError on any malformation; performs no proof checks."""
    try:
        doc = json.loads(text)
        if doc.get("v") != WIRE_VERSION or doc.get("kind") != "receipt":
            raise ValueError("not a receipt document")
        first = json.loads(doc["first"])
        second = json.loads(doc["second"])
        if first.get("kind") != "ballot_first" or second.get("kind") != "ballot_second":
            raise ValueError("wrong part kinds")
        index = int(doc["index"])
        if first["index"] != index or second["index"] != index:
            raise ValueError("part indices disagree")
        if first["election"] != second["election"]:
            raise ValueError("part elections disagree")
        u = params.element_from_hex(first["U"])
        v = params.element_from_hex(first["V"])
        e = params.element_from_hex(first["E"])
        w = params.element_from_hex(first["W"])
        alpha = params.scalar_from_hex(first["alpha"])
        pwf = WellFormedProof.from_bytes(bytes.fromhex(first["pwf"]), params, n_candidates)
        pk_s1 = DlogProof.from_bytes(bytes.fromhex(first["pk_s1"]), params)
        variant = second["variant"]
        revealed_r = revealed_vote = pk_s = None
        if variant == "audited":
            revealed_r = params.scalar_from_hex(second["r"])
            revealed_vote = params.scalar_from_hex(second["vote"])
        elif variant == "confirmed":
            pk_s = DlogProof.from_bytes(bytes.fromhex(second["pk_s"]), params)
        else:
            raise ValueError(f"unknown receipt variant {variant!r}")
        return ParsedReceipt(
            index=index,
            election=first["election"],
            first_text=doc["first"],
            second_text=doc["second"],
            u=u,
            v=v,
            e=e,
            w=w,
            alpha=alpha,
            pwf=pwf,
            pk_s1=pk_s1,
            variant=variant,
            revealed_r=revealed_r,
            revealed_vote=revealed_vote,
            pk_s=pk_s,
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise ReceiptFormatError(f"bad receipt: {exc}") from exc


def parse_final_tally(text: str, params: GroupParams) -> dict:
    try:
        doc = json.loads(text)
        if doc.get("v") != WIRE_VERSION or doc.get("kind") != "final_tally":
            raise ValueError("not a final-tally document")
        return {
            "election": doc["election"],
            "t": params.scalar_from_hex(doc["t"]),
            "s": params.scalar_from_hex(doc["s"]),
            "m": params.scalar_from_hex(doc["m"]),
            "receipt_key": bytes.fromhex(doc["receipt_key"]),
            "text": text,
        }
    except (ValueError, KeyError, TypeError) as exc:
        raise ReceiptFormatError(f"bad final tally: {exc}") from exc


def parse_genesis(text: str) -> dict:
    from .groups import GroupParams as _GP, verify_group_params

    try:
        doc = json.loads(text)
        if doc.get("v") != WIRE_VERSION or doc.get("kind") != "genesis":
            raise ValueError("not a genesis document")
        p = int(doc["p"], 16)
        q = int(doc["q"], 16)
        params = verify_group_params(
            _GP(
                p=p,
                q=q,
                g1=int(doc["g1"], 16),
                g2=int(doc["g2"], 16),
                tier=doc["tier"],
            )
        )
        return {
            "election": doc["election"],
            "params": params,
            "c": params.element_from_hex(doc["c"]),
            "d": params.element_from_hex(doc["d"]),
            "h": params.element_from_hex(doc["h"]),
            "n_candidates": int(doc["n_candidates"]),
            "voter_bound": int(doc["voter_bound"]),
            "external_nullifier": bytes.fromhex(doc["external_nullifier"]),
            "receipt_key_commitment": bytes.fromhex(doc["receipt_key_commitment"]),
        }
    except (ValueError, KeyError, TypeError, InvalidParametersError) as exc:
        raise ReceiptFormatError(f"bad genesis: {exc}") from exc
