"""End-to-end verifiable e-voting, desk scale.

Merkle-tree voter registration with nullifier-based double-vote
prevention, DRE-ip ballot encryption with non-interactive
zero-knowledge well-formedness proofs, an append-only hash-chained
bulletin board, and a public tally verifier.
"""

from .board import Board, verify_chain
from .dre import DrePublicKey, DreState, encode_vote, init_election, keygen
from .groups import GroupParams, derive_custom_group, derive_group, random_scalar
from .hashing import hash_bytes
from .proofs import (
    DlogProof,
    WellFormedProof,
    poly_identity_demo,
    prove_dlog,
    prove_wellformed,
    verify_dlog,
    verify_wellformed,
)
from .registry import (
    MerklePath,
    MerkleTree,
    NullifierLedger,
    Registry,
    build_tree,
    derive_commitment,
    derive_nullifier_hash,
    prove_membership,
    verify_membership,
)
from .service import ElectionConfig, ElectionService, build_app
from .sim import SimulationSpec, simulate
from .transcript import Transcript, hash_to_scalar
from .verify import VerificationReport, audit_consistency, decode_tally, verify_election

__version__ = "0.1.0"

__all__ = [
    "Board",
    "DlogProof",
    "DrePublicKey",
    "DreState",
    "ElectionConfig",
    "ElectionService",
    "GroupParams",
    "MerklePath",
    "MerkleTree",
    "NullifierLedger",
    "Registry",
    "SimulationSpec",
    "Transcript",
    "VerificationReport",
    "WellFormedProof",
    "audit_consistency",
    "build_app",
    "build_tree",
    "decode_tally",
    "derive_commitment",
    "derive_custom_group",
    "derive_group",
    "derive_nullifier_hash",
    "encode_vote",
    "hash_bytes",
    "hash_to_scalar",
    "init_election",
    "keygen",
    "poly_identity_demo",
    "prove_dlog",
    "prove_membership",
    "prove_wellformed",
    "random_scalar",
    "simulate",
    "verify_chain",
    "verify_dlog",
    "verify_election",
    "verify_membership",
    "verify_wellformed",
    "Transcript",
]
