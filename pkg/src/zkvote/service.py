"""Election service: registration, the single voting booth, the board
feed, and verification, exposed over a local HTTP API.

``ElectionService`` is the transport-agnostic core (the CLI simulator
drives it directly); ``build_app`` wraps it in FastAPI. Booth-mutating
calls are funneled through one lock, matching the single physical
booth; board and report reads are snapshot reads.

Rejections carry machine-readable reason codes: ``busy``,
``bad_payload``, ``wrong_election``, ``bad_membership``,
``double_vote``, ``protocol_order``, ``registration_closed``,
``not_eligible``, ``already_registered``, ``unauthorized``,
``incomplete_election``, ``not_found``, ``internal_alarm``.
"""

import json
import logging
import random
import threading
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

from . import receipts
from .board import Board, verify_chain
from .dre import DreState, DrePublicKey, init_election, keygen
from .errors import (
    AlreadyRegisteredError,
    ConfigError,
    IncompleteElectionError,
    NotEligibleError,
    NotFoundError,
    ProtocolOrderError,
    ReceiptFormatError,
    ZkvoteError,
)
from .groups import derive_group
from .hashing import DIGEST_LEN
from .registry import (
    NullifierLedger,
    Registry,
    build_tree,
    external_nullifier_for,
    load_registry,
    parse_proof_payload,
    prove_membership,
    verify_membership,
    write_registry,
)
from .verify import verify_election

logger = logging.getLogger("zkvote.service")


class Rejection(ZkvoteError):
    def __init__(self, reason: str, detail: str = "", status: int = 400):
        super().__init__(detail or reason)
        self.reason = reason
        self.detail = detail
        self.status = status


@dataclass
class ElectionConfig:
    election_id: str
    n_candidates: int
    candidates: list[str] = field(default_factory=list)
    voter_bound: int = 10_000
    tier: str = "standard"
    eligible_voters: list[str] = field(default_factory=list)
    registry_path: str | None = None
    board_path: str | None = None
    ledger_path: str | None = None
    state_path: str | None = None
    bind: str = "127.0.0.1:8722"
    admin_token: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.n_candidates < 2:
            raise ConfigError("need at least two candidates")
        if not self.candidates:
            self.candidates = [f"candidate-{j}" for j in range(1, self.n_candidates + 1)]
        if len(self.candidates) != self.n_candidates:
            raise ConfigError("candidate label count does not match n_candidates")
        if not self.election_id:
            raise ConfigError("election_id must be non-empty")

    @classmethod
    def from_file(cls, path) -> "ElectionConfig":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def with_data_dir(self, directory) -> "ElectionConfig":
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        self.registry_path = self.registry_path or str(d / "registry.txt")
        self.board_path = self.board_path or str(d / "board.log")
        self.ledger_path = self.ledger_path or str(d / "ledger.txt")
        self.state_path = self.state_path or str(d / "dre-state.json")
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass
class BoothSession:
    token: str
    nullifier_hash: bytes
    state: str  # awaiting_vote | pending_decision | closed
    last_first_part: str | None = None


class ElectionService:
    def __init__(self, config: ElectionConfig, rng=None, clock=None, group_params=None):
        self.config = config
        self.rng = rng if rng is not None else random.SystemRandom()
        self.clock = clock or (lambda: int(time.time()))
        self.params = group_params or derive_group(config.tier, config.election_id.encode())
        self.external_nullifier = external_nullifier_for(config.election_id)
        self.registry = Registry(config.eligible_voters)
        self.tree = None
        self._registration_closed = False
        self.ledger = (
            NullifierLedger.load(self.external_nullifier, config.ledger_path)
            if config.ledger_path
            else NullifierLedger(self.external_nullifier)
        )
        self.session: BoothSession | None = None
        self._lock = threading.RLock()
        self.halted = False
        self._init_dre_and_board()

    def _init_dre_and_board(self) -> None:
        cfg = self.config
        board_file = Path(cfg.board_path) if cfg.board_path else None
        if board_file is not None and board_file.exists() and board_file.stat().st_size:
            self._restore()
            return
        pubkey = keygen(self.params, self.rng)
        receipt_key = self.rng.randbytes(DIGEST_LEN)
        self.dre = init_election(
            pubkey, cfg.n_candidates, cfg.voter_bound, cfg.election_id, receipt_key, self.rng
        )
        genesis = receipts.make_genesis(
            cfg.election_id,
            self.params,
            pubkey,
            cfg.n_candidates,
            cfg.voter_bound,
            self.external_nullifier,
            receipt_key,
        )
        self.board = Board.create(
            genesis, path=cfg.board_path, receipt_key=receipt_key, clock=self.clock
        )
        self._snapshot_state()

    def _restore(self) -> None:
        """Reload board, registry and DRE snapshot after a restart."""
        cfg = self.config
        if not cfg.state_path or not Path(cfg.state_path).exists():
            raise ConfigError("board file exists but there is no DRE state snapshot")
        with open(cfg.state_path, encoding="utf-8") as fh:
            state_doc = json.load(fh)
        receipt_key = bytes.fromhex(state_doc["receipt_key"])
        self.board = Board.load(cfg.board_path, receipt_key=receipt_key, clock=self.clock)
        genesis = self.board.genesis
        self.params = genesis["params"]
        pubkey = DrePublicKey(genesis["c"], genesis["d"], genesis["h"], self.params)
        self.dre = DreState.restore(
            state_doc["dre"],
            pubkey,
            cfg.n_candidates,
            cfg.voter_bound,
            cfg.election_id,
            receipt_key,
            self.rng,
        )
        if self.dre.next_index != self.board.last_ballot_index + 1:
            raise ConfigError("DRE snapshot and board disagree on the next ballot index")
        if cfg.registry_path and Path(cfg.registry_path).exists():
            self.tree, _ = load_registry(cfg.registry_path)
            self._registration_closed = True
        logger.info("restored election %s at board height %d", cfg.election_id, self.board.height)

    def _snapshot_state(self) -> None:
        # receipt key rides along so a restart can keep tagging receipts;
        # the snapshot itself never contains per-ballot secrets
        if not self.config.state_path:
            return
        doc = {"receipt_key": self.dre.receipt_key.hex(), "dre": self.dre.snapshot()}
        with open(self.config.state_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)

    # -- commitment phase ------------------------------------------------

    def register(self, voter_id: str, admin_token: str | None = None) -> dict:
        self._check_admin(admin_token)
        with self._lock:
            if self._registration_closed:
                raise Rejection("registration_closed", "the registry tree is already frozen", 409)
            try:
                credential, commitment = self.registry.register_voter(voter_id, self.rng)
            except NotEligibleError as exc:
                raise Rejection("not_eligible", str(exc), 403) from exc
            except AlreadyRegisteredError as exc:
                raise Rejection("already_registered", str(exc), 409) from exc
            logger.info("registered one voter (%d commitments)", len(self.registry))
            return {
                "voter_id": voter_id,
                "internal_nullifier": credential.internal_nullifier.hex(),
                "commitment": commitment.hex(),
            }

    def _check_admin(self, token: str | None) -> None:
        if self.config.admin_token is not None and token != self.config.admin_token:
            raise Rejection("unauthorized", "admin token required", 401)

    def _frozen_tree(self):
        with self._lock:
            if self.tree is None:
                if not self.registry.commitments:
                    raise Rejection("registration_closed", "no voters registered", 409)
                self.tree = build_tree(self.registry.commitments, self.rng)
                self._registration_closed = True
                if self.config.registry_path:
                    write_registry(self.config.registry_path, self.tree, len(self.registry))
                logger.info(
                    "registry frozen: depth %d, %d commitments", self.tree.depth, len(self.registry)
                )
            return self.tree

    def registry_root(self) -> dict:
        tree = self._frozen_tree()
        return {
            "root": tree.root.hex(),
            "leaf_count": len(tree.leaves),
            "registered": len(self.registry),
            "external_nullifier": self.external_nullifier.hex(),
        }

    def registry_path_for(self, commitment_hex: str) -> dict:
        tree = self._frozen_tree()
        try:
            commitment = bytes.fromhex(commitment_hex)
        except ValueError as exc:
            raise Rejection("bad_payload", "commitment is not hex", 400) from exc
        index = tree.leaf_index(commitment)
        if index is None:
            raise Rejection("not_found", "commitment is not in the registry", 404)
        path = prove_membership(tree, index)
        return {
            "leaf_index": path.leaf_index,
            "siblings": [s.hex() for s in path.siblings],
            "path_bits": list(path.path_bits),
            "root": tree.root.hex(),
        }

    # -- booth ------------------------------------------------------------

    def create_session(self, payload: str) -> dict:
        with self._lock:
            self._check_halted()
            if self.session is not None and self.session.state != "closed":
                raise Rejection("busy", "another voter is in the booth", 409)
            tree = self._frozen_tree()
            try:
                proof = parse_proof_payload(payload)
            except ReceiptFormatError as exc:
                raise Rejection("bad_payload", str(exc), 400) from exc
            if proof.external_nullifier != self.external_nullifier:
                raise Rejection("wrong_election", "external nullifier mismatch", 403)
            if proof.root != tree.root:
                raise Rejection("wrong_election", "stale or foreign registry root", 403)
            if not verify_membership(proof.root, proof.leaf, proof.path):
                raise Rejection("bad_membership", "Merkle membership proof failed", 403)
            if self.ledger.check_and_record(proof.nullifier_hash) == "double_vote":
                raise Rejection("double_vote", "this nullifier has already voted", 409)
            token = self.rng.randbytes(16).hex()
            self.session = BoothSession(
                token=token, nullifier_hash=proof.nullifier_hash, state="awaiting_vote"
            )
            logger.info("booth session opened")
            return {"token": token}

    def _session_for(self, token: str, expected_state: str) -> BoothSession:
        sess = self.session
        if sess is None or sess.token != token or sess.state == "closed":
            raise Rejection("not_found", "no such session", 404)
        if sess.state != expected_state:
            raise Rejection(
                "protocol_order",
                f"session is {sess.state}, expected {expected_state}",
                409,
            )
        return sess

    def cast_vote(self, token: str, candidate: int) -> dict:
        with self._lock:
            self._check_halted()
            sess = self._session_for(token, "awaiting_vote")
            if not 1 <= candidate <= self.config.n_candidates:
                raise Rejection("bad_payload", "candidate index out of range", 400)
            try:
                first_text = self.dre.encrypt_ballot(candidate)
            except ProtocolOrderError as exc:
                raise Rejection("protocol_order", str(exc), 409) from exc
            sess.state = "pending_decision"
            sess.last_first_part = first_text
            logger.info("ballot %d encrypted", self.dre.pending.index)
            return {"first": first_text}

    def decide(self, token: str, choice: str) -> dict:
        with self._lock:
            self._check_halted()
            sess = self._session_for(token, "pending_decision")
            if choice not in ("audit", "confirm"):
                raise Rejection("bad_payload", "choice must be audit or confirm", 400)
            index = self.dre.pending.index
            if choice == "audit":
                second, merged = self.dre.decide_audit()
                sess.state = "awaiting_vote"
            else:
                second, merged = self.dre.decide_confirm()
                sess.state = "closed"
            block = self.board.append_receipt(merged)
            if block is None:
                self.halted = True
                logger.error("board rejected the DRE's own receipt; halting the booth")
                raise Rejection(
                    "internal_alarm", "board rejected a receipt produced by this booth", 500
                )
            self._snapshot_state()
            logger.info("ballot %d %sed at height %d", index, choice, block.height)
            return {"second": second, "receipt_index": index, "choice": choice}

    def _check_halted(self) -> None:
        if self.halted:
            raise Rejection("internal_alarm", "booth halted after an internal alarm", 500)

    # -- close and public reads -------------------------------------------

    def close(self) -> dict:
        with self._lock:
            self._check_halted()
            try:
                final_text = self.dre.publish_final()
            except ProtocolOrderError as exc:
                raise Rejection("protocol_order", str(exc), 409) from exc
            self.board.append_final(final_text)
            self._snapshot_state()
            if self.session is not None:
                self.session = None
            logger.info("election closed; final tally posted")
            return {"final": final_text}

    def verify(self) -> dict:
        try:
            report = verify_election(self.board)
        except IncompleteElectionError as exc:
            raise Rejection("incomplete_election", str(exc), 409) from exc
        return {"report": report.to_dict(), "summary": report.summary()}

    def board_blocks(self, from_height: int = 0) -> list[dict]:
        return [json.loads(b.to_line()) for b in self.board.blocks if b.height >= from_height]

    def board_receipt(self, index: int) -> dict:
        try:
            return {"receipt": self.board.get_receipt(index)}
        except NotFoundError as exc:
            raise Rejection("not_found", str(exc), 404) from exc

    def election_info(self) -> dict:
        p = self.params
        return {
            "election_id": self.config.election_id,
            "n_candidates": self.config.n_candidates,
            "candidates": self.config.candidates,
            "voter_bound": self.config.voter_bound,
            "tier": p.tier,
            "p": "%x" % p.p,
            "q": "%x" % p.q,
            "g1": p.element_hex(p.g1),
            "g2": p.element_hex(p.g2),
            "c": p.element_hex(self.dre.pubkey.c),
            "d": p.element_hex(self.dre.pubkey.d),
            "h": p.element_hex(self.dre.pubkey.h),
            "external_nullifier": self.external_nullifier.hex(),
            "closed": self.dre.published,
            "chain_ok": verify_chain(self.board),
            "head_hash": self.board.head_hash,
        }


def build_app(service: ElectionService):
    from fastapi import FastAPI, Header
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import JSONResponse
    from pydantic import BaseModel

    class RegisterBody(BaseModel):
        voter_id: str

    class SessionBody(BaseModel):
        payload: str

    class VoteBody(BaseModel):
        candidate: int

    class DecisionBody(BaseModel):
        choice: str

    app = FastAPI(title=f"zkvote election {service.config.election_id}")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(Rejection)
    async def _rejection_handler(_, exc: Rejection):
        return JSONResponse(
            status_code=exc.status, content={"reason": exc.reason, "detail": exc.detail}
        )

    @app.post("/register")
    def register(body: RegisterBody, x_admin_token: str | None = Header(default=None)):
        return service.register(body.voter_id, admin_token=x_admin_token)

    @app.get("/election")
    def election():
        return service.election_info()

    @app.get("/registry/root")
    def registry_root():
        return service.registry_root()

    @app.get("/registry/path/{commitment}")
    def registry_path(commitment: str):
        return service.registry_path_for(commitment)

    @app.post("/session")
    def create_session(body: SessionBody):
        return service.create_session(body.payload)

    @app.post("/session/{token}/vote")
    def cast_vote(token: str, body: VoteBody):
        return service.cast_vote(token, body.candidate)

    @app.post("/session/{token}/decision")
    def decide(token: str, body: DecisionBody):
        return service.decide(token, body.choice)

    @app.get("/board/blocks")
    def board_blocks(frm: int = 0):
        return service.board_blocks(frm)

    @app.get("/board/receipt/{index}")
    def board_receipt(index: int):
        return service.board_receipt(index)

    @app.post("/close")
    def close():
        return service.close()

    @app.get("/verify")
    def verify():
        return service.verify()

    return app
