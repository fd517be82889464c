"""Voter registration, the Merkle commitment tree, and the nullifier ledger.

Registration turns (voter_id, fresh 32-byte internal nullifier) into an
identity commitment ``H(H(voter_id | 0x1f | nullifier))``; only the
commitment is kept. Commitments become the leaves of a power-of-two
padded Merkle tree whose root is the public eligibility registry.

A voter proves eligibility by disclosing their leaf plus the Merkle
path (mode ``merkle_disclosure``). This reveals *which* leaf voted,
unlike a SNARK-backed membership proof; the payload carries a mode
field so an opaque proof system can be slotted in later. Double voting
is prevented by the nullifier ledger: the hash of (per-election public
external nullifier, H(internal nullifier)) is recorded at most once.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass

from .errors import (
    AlreadyRegisteredError,
    LedgerError,
    NotEligibleError,
    ReceiptFormatError,
)
from .hashing import DIGEST_LEN, hash_bytes

# Separator between voter_id and nullifier before hashing; prevents
# ("AB","C") / ("A","BC") ambiguity.
_ID_SEP = b"\x1f"

PROOF_MODES = ("merkle_disclosure",)


@dataclass(frozen=True)
class VoterCredential:
    """Returned to the voter exactly once; never stored server-side."""

    voter_id: str
    internal_nullifier: bytes


def derive_identity_secret(voter_id: str, internal_nullifier: bytes) -> bytes:
    return hash_bytes(voter_id.encode() + _ID_SEP + internal_nullifier)


def derive_commitment(voter_id: str, internal_nullifier: bytes) -> bytes:
    return hash_bytes(derive_identity_secret(voter_id, internal_nullifier))


def external_nullifier_for(election_id: str) -> bytes:
    """Per-election public nullifier value."""
    return hash_bytes(b"external-nullifier|" + election_id.encode())


def derive_nullifier_hash(external_nullifier: bytes, internal_nullifier: bytes) -> bytes:
    """The one-vote-per-election token: H(external | H(internal))."""
    return hash_bytes(external_nullifier + hash_bytes(internal_nullifier))


class Registry:
    """Commitment-phase state: the eligible roll and registered commitments.

    Duplicate detection keys on H(voter_id); raw voter ids never enter
    the stored state.
    """

    def __init__(self, eligible_ids):
        self._eligible = {hash_bytes(v.encode()) for v in eligible_ids}
        self._registered: set[bytes] = set()
        self.commitments: list[bytes] = []

    def register_voter(self, voter_id: str, rng) -> tuple[VoterCredential, bytes]:
        key = hash_bytes(voter_id.encode())
        if key not in self._eligible:
            raise NotEligibleError(f"voter {voter_id!r} is not on the roll")
        if key in self._registered:
            raise AlreadyRegisteredError(f"voter {voter_id!r} already registered")
        nullifier = rng.randbytes(DIGEST_LEN)
        commitment = derive_commitment(voter_id, nullifier)
        self._registered.add(key)
        self.commitments.append(commitment)
        return VoterCredential(voter_id, nullifier), commitment

    def __len__(self) -> int:
        return len(self.commitments)


@dataclass
class MerkleTree:
    depth: int
    leaves: list[bytes]
    levels: list[list[bytes]]  # levels[0] == leaves, levels[depth][0] == root

    @property
    def root(self) -> bytes:
        return self.levels[self.depth][0]

    def leaf_index(self, leaf: bytes) -> int | None:
        try:
            return self.leaves.index(leaf)
        except ValueError:
            return None


@dataclass(frozen=True)
class MerklePath:
    leaf_index: int
    siblings: tuple[bytes, ...]
    path_bits: tuple[int, ...]  # per level: 0 = node is the left child


def build_tree(commitments: list[bytes], rng) -> MerkleTree:
    """Build a Merkle tree, padding with hashes of random entries up to
    the next power of two (minimum depth 1, so paths always exist)."""
    if not commitments:
        raise ValueError("cannot build a tree from an empty commitment list")
    depth = max(1, math.ceil(math.log2(len(commitments))))
    size = 1 << depth
    leaves = list(commitments)
    while len(leaves) < size:
        leaves.append(hash_bytes(rng.randbytes(DIGEST_LEN)))
    return _tree_from_leaves(leaves, depth)


def _tree_from_leaves(leaves: list[bytes], depth: int) -> MerkleTree:
    levels = [list(leaves)]
    for _ in range(depth):
        prev = levels[-1]
        levels.append([hash_bytes(prev[i] + prev[i + 1]) for i in range(0, len(prev), 2)])
    return MerkleTree(depth=depth, leaves=list(leaves), levels=levels)


def prove_membership(tree: MerkleTree, leaf_index: int) -> MerklePath:
    if not 0 <= leaf_index < len(tree.leaves):
        raise ValueError("leaf index out of range")
    siblings = []
    bits = []
    idx = leaf_index
    for level in range(tree.depth):
        bit = idx & 1
        siblings.append(tree.levels[level][idx ^ 1])
        bits.append(bit)
        idx >>= 1
    return MerklePath(leaf_index, tuple(siblings), tuple(bits))


def verify_membership(root: bytes, leaf: bytes, path: MerklePath) -> bool:
    if len(path.siblings) != len(path.path_bits) or not path.siblings:
        return False
    node = leaf
    for sibling, bit in zip(path.siblings, path.path_bits):
        if len(sibling) != DIGEST_LEN or bit not in (0, 1):
            return False
        node = hash_bytes(node + sibling) if bit == 0 else hash_bytes(sibling + node)
    return node == root


class NullifierLedger:
    """Append-only set of seen nullifier hashes; persisted before acking."""

    def __init__(self, external_nullifier: bytes, path=None):
        self.external_nullifier = external_nullifier
        self.path = path
        self.seen: set[bytes] = set()

    def check_and_record(self, nullifier_hash: bytes) -> str:
        """Returns "accepted" or "double_vote"; the hash is stored on accept."""
        if nullifier_hash in self.seen:
            return "double_vote"
        if self.path is not None:
            try:
                with open(self.path, "a", encoding="ascii") as fh:
                    fh.write(nullifier_hash.hex() + "\n")
                    fh.flush()
            except OSError as exc:
                raise LedgerError(f"could not persist ledger: {exc}") from exc
        self.seen.add(nullifier_hash)
        return "accepted"

    @classmethod
    def load(cls, external_nullifier: bytes, path) -> "NullifierLedger":
        ledger = cls(external_nullifier, path=path)
        try:
            with open(path, encoding="ascii") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        ledger.seen.add(bytes.fromhex(line))
        except FileNotFoundError:
            pass
        return ledger


@dataclass(frozen=True)
class ProofPayload:
    """The "QR payload": everything the polling verifier needs."""

    mode: str
    root: bytes
    leaf: bytes
    path: MerklePath
    nullifier_hash: bytes
    external_nullifier: bytes


def build_proof_payload(
    root: bytes,
    leaf: bytes,
    path: MerklePath,
    nullifier_hash: bytes,
    external_nullifier: bytes,
) -> str:
    """Encode the eligibility proof as base64url text for transport."""
    doc = {
        "v": 1,
        "kind": "eligibility_proof",
        "mode": "merkle_disclosure",
        "root": root.hex(),
        "leaf": leaf.hex(),
        "leaf_index": path.leaf_index,
        "siblings": [s.hex() for s in path.siblings],
        "path_bits": list(path.path_bits),
        "nullifier_hash": nullifier_hash.hex(),
        "external_nullifier": external_nullifier.hex(),
    }
    raw = json.dumps(doc, separators=(",", ":")).encode()
    return base64.urlsafe_b64encode(raw).decode("ascii")


def parse_proof_payload(payload: str) -> ProofPayload:
    try:
        doc = json.loads(base64.urlsafe_b64decode(payload.encode("ascii")))
        if doc.get("v") != 1 or doc.get("kind") != "eligibility_proof":
            raise ValueError("not an eligibility proof")
        if doc.get("mode") not in PROOF_MODES:
            raise ValueError(f"unsupported proof mode {doc.get('mode')!r}")
        path = MerklePath(
            leaf_index=int(doc["leaf_index"]),
            siblings=tuple(bytes.fromhex(s) for s in doc["siblings"]),
            path_bits=tuple(int(b) for b in doc["path_bits"]),
        )
        return ProofPayload(
            mode=doc["mode"],
            root=bytes.fromhex(doc["root"]),
            leaf=bytes.fromhex(doc["leaf"]),
            path=path,
            nullifier_hash=bytes.fromhex(doc["nullifier_hash"]),
            external_nullifier=bytes.fromhex(doc["external_nullifier"]),
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise ReceiptFormatError(f"bad proof payload: {exc}") from exc


def write_registry(path, tree: MerkleTree, n_real: int) -> None:
    """Registry file: header (hash algorithm, depth, real-leaf count),
    then one lowercase-hex leaf per line (padding leaves included so the
    root reproduces on load)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# zkvote-registry v1 hash=sha256 depth={tree.depth} leaves={n_real}\n")
        for leaf in tree.leaves:
            fh.write(leaf.hex() + "\n")


def load_registry(path) -> tuple[MerkleTree, int]:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip()
        fields = dict(
            part.split("=", 1) for part in header.lstrip("# ").split() if "=" in part
        )
        if fields.get("hash") != "sha256":
            raise ReceiptFormatError("registry file: unsupported hash algorithm")
        depth = int(fields["depth"])
        n_real = int(fields["leaves"])
        leaves = [bytes.fromhex(line.strip()) for line in fh if line.strip()]
    if len(leaves) != 1 << depth:
        raise ReceiptFormatError("registry file: leaf count does not match depth")
    return _tree_from_leaves(leaves, depth), n_real
