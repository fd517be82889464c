"""Hash-chained, append-only bulletin board with proof gatekeeping.

Every block records one payload document (genesis, merged ballot
receipt, or the final tally). The chain links on header hashes
(height, prev, payload hash, timestamp); "mining" is hash-chaining
only, there is no proof of work.

A receipt is appended only after the board itself re-verifies it:
alpha recomputation, the well-formedness proof, the running-sum proof
P_K{s1} against the board's own product of all U values, the
second-part proof or the audited (r, v) consistency equations, and the
receipt tags when the key is known. Failing receipts are dropped and
logged, never appended. The board is therefore self-contained: its
genesis record carries the group, the public key and the election
configuration needed to re-run every check offline.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass

from . import receipts
from .dre import audited_consistency, compute_alpha, pk_s1_context, pk_s_context, pwf_context, vote_encodings
from .errors import ConfigError, NotFoundError, ProtocolOrderError, ReceiptFormatError
from .hashing import hash_bytes
from .proofs import verify_dlog, verify_wellformed

logger = logging.getLogger("zkvote.board")

GENESIS_PREV = "0" * 64


@dataclass(frozen=True)
class Block:
    height: int
    prev_hash: str
    payload_hash: str
    timestamp: int
    payload: str

    def header_hash(self) -> str:
        header = receipts.canonical_json(
            {
                "height": self.height,
                "prev": self.prev_hash,
                "payload_hash": self.payload_hash,
                "time": self.timestamp,
            }
        )
        return hash_bytes(header.encode()).hex()

    def to_line(self) -> str:
        return receipts.canonical_json(
            {
                "height": self.height,
                "prev": self.prev_hash,
                "payload_hash": self.payload_hash,
                "time": self.timestamp,
                "payload": self.payload,
            }
        )

    @classmethod
    def from_line(cls, line: str) -> "Block":
        try:
            doc = json.loads(line)
            return cls(
                height=int(doc["height"]),
                prev_hash=doc["prev"],
                payload_hash=doc["payload_hash"],
                timestamp=int(doc["time"]),
                payload=doc["payload"],
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise ReceiptFormatError(f"bad block record: {exc}") from exc


def make_block(height: int, prev_hash: str, payload: str, timestamp: int) -> Block:
    return Block(
        height=height,
        prev_hash=prev_hash,
        payload_hash=hash_bytes(payload.encode()).hex(),
        timestamp=timestamp,
        payload=payload,
    )


class Board:
    """One election's chain. Single appender; readers see committed blocks."""

    def __init__(self, blocks: list[Block], path=None, receipt_key: bytes | None = None, clock=None):
        if not blocks:
            raise ConfigError("a board needs at least a genesis block")
        self.genesis = receipts.parse_genesis(blocks[0].payload)
        self.election_id = self.genesis["election"]
        self.params = self.genesis["params"]
        self.pubkey = (self.genesis["c"], self.genesis["d"], self.genesis["h"])
        self.path = path
        self.receipt_key = receipt_key
        self.clock = clock or (lambda: int(time.time()))
        self.blocks: list[Block] = []
        self._ballots: dict[int, Block] = {}
        self.final_text: str | None = None
        self._products: tuple[int, int] | None = (1, 1)  # (prod_all, prod_confirmed)
        self.n_audited = 0
        self.n_confirmed = 0
        self.last_ballot_index = 0
        self.rejections: list[tuple[int | None, str]] = []
        self.blocks.append(blocks[0])
        for block in blocks[1:]:
            self._absorb(block)

    @classmethod
    def create(
        cls, genesis_payload: str, path=None, receipt_key: bytes | None = None, clock=None
    ) -> "Board":
        clock = clock or (lambda: int(time.time()))
        genesis = make_block(0, GENESIS_PREV, genesis_payload, clock())
        board = cls([genesis], path=path, receipt_key=receipt_key, clock=clock)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(genesis.to_line() + "\n")
        return board

    @classmethod
    def load(cls, path, receipt_key: bytes | None = None, clock=None) -> "Board":
        with open(path, encoding="utf-8") as fh:
            blocks = [Block.from_line(line) for line in fh if line.strip()]
        return cls(blocks, path=path, receipt_key=receipt_key, clock=clock)

    @property
    def head_hash(self) -> str:
        return self.blocks[-1].header_hash()

    @property
    def height(self) -> int:
        return self.blocks[-1].height

    def _absorb(self, block: Block) -> None:
        """Index an existing block while rebuilding from storage.

        Only a shallow parse happens here, so a board with tampered or
        malformed payloads still loads; verify_election re-parses and
        re-verifies everything and reports the damage. Running products
        are rebuilt lazily when the live feed appends again."""
        self.blocks.append(block)
        kind, index, variant = payload_shape(block.payload)
        if kind == "receipt" and index is not None:
            self._ballots[index] = block
            self.last_ballot_index = max(self.last_ballot_index, index)
            if variant == "confirmed":
                self.n_confirmed += 1
            elif variant == "audited":
                self.n_audited += 1
            self._products = None
        elif kind == "final_tally":
            self.final_text = block.payload

    def _running_products(self) -> tuple[int, int]:
        """(product of all U, product of confirmed U) over stored receipts.

        Raises ReceiptFormatError when a stored receipt does not parse;
        a live feed cannot safely append to a corrupted board."""
        if self._products is None:
            prod_all = prod_confirmed = 1
            for _, text in self.ballot_receipts():
                parsed = receipts.parse_receipt(text, self.params, self.genesis["n_candidates"])
                prod_all = self.params.mul(prod_all, parsed.u)
                if parsed.variant == "confirmed":
                    prod_confirmed = self.params.mul(prod_confirmed, parsed.u)
            self._products = (prod_all, prod_confirmed)
        return self._products

    def append_receipt(self, receipt_text: str) -> Block | None:
        """Verify a merged receipt and mine it into the chain.

        Returns the new block, or None when the receipt was dropped (the
        rejection reason is logged and recorded). An index gap is an
        ordering error, not a rejection."""
        if self.final_text is not None:
            raise ProtocolOrderError("board is closed; final tally already posted")
        try:
            parsed = receipts.parse_receipt(
                receipt_text, self.params, self.genesis["n_candidates"]
            )
        except ReceiptFormatError as exc:
            return self._reject(None, f"parse: {exc}")
        if parsed.index != self.last_ballot_index + 1:
            raise ProtocolOrderError(
                f"ballot index {parsed.index} does not follow {self.last_ballot_index}"
            )
        prod_all, prod_confirmed = self._running_products()
        reason = self._verify_receipt(parsed, prod_all, prod_confirmed)
        if reason is not None:
            return self._reject(parsed.index, reason)
        block = make_block(self.height + 1, self.head_hash, receipt_text, self.clock())
        self.blocks.append(block)
        self._ballots[parsed.index] = block
        self.last_ballot_index = parsed.index
        prod_all = self.params.mul(prod_all, parsed.u)
        if parsed.variant == "confirmed":
            self.n_confirmed += 1
            prod_confirmed = self.params.mul(prod_confirmed, parsed.u)
        else:
            self.n_audited += 1
        self._products = (prod_all, prod_confirmed)
        self._persist(block)
        return block

    def _verify_receipt(
        self, parsed: receipts.ParsedReceipt, prod_all: int, prod_confirmed: int
    ) -> str | None:
        params = self.params
        if parsed.election != self.election_id:
            return "wrong election"
        if parsed.alpha != compute_alpha(parsed.u, parsed.v, parsed.e, params):
            return "alpha does not match H(U, V, E)"
        encodings = vote_encodings(self.genesis["n_candidates"], self.genesis["voter_bound"])
        if not verify_wellformed(
            parsed.pwf,
            encodings,
            params,
            self.pubkey,
            parsed.ciphertext,
            parsed.alpha,
            pwf_context(self.election_id, parsed.index),
        ):
            return "well-formedness proof failed"
        n1_next = params.mul(prod_all, parsed.u)
        if not verify_dlog(
            parsed.pk_s1,
            params.g1,
            n1_next,
            pk_s1_context(self.election_id, parsed.index),
            params,
        ):
            return "P_K{s1} failed against the reconstructed product"
        if parsed.variant == "audited":
            if parsed.revealed_vote not in encodings:
                return "revealed vote is not a valid encoding"
            if not audited_consistency(
                parsed.u,
                parsed.v,
                parsed.e,
                parsed.w,
                parsed.alpha,
                parsed.revealed_r,
                parsed.revealed_vote,
                self.pubkey,
                params,
            ):
                return "audited ballot inconsistent with revealed (r, v)"
        else:
            n_next = params.mul(prod_confirmed, parsed.u)
            if not verify_dlog(
                parsed.pk_s,
                params.g1,
                n_next,
                pk_s_context(self.election_id, parsed.index),
                params,
            ):
                return "P_K{s} failed against the reconstructed product"
        if self.receipt_key is not None:
            if not receipts.verify_doc_tag(parsed.first_text, self.receipt_key):
                return "first-part tag invalid"
            if not receipts.verify_doc_tag(parsed.second_text, self.receipt_key):
                return "second-part tag invalid"
        return None

    def _reject(self, index: int | None, reason: str) -> None:
        self.rejections.append((index, reason))
        logger.warning("receipt rejected (index=%s): %s", index, reason)
        return None

    def append_final(self, tally_text: str) -> Block:
        if self.final_text is not None:
            raise ProtocolOrderError("final tally already posted")
        doc = receipts.parse_final_tally(tally_text, self.params)
        if doc["election"] != self.election_id:
            raise ConfigError("final tally is for a different election")
        if hash_bytes(doc["receipt_key"]) != self.genesis["receipt_key_commitment"]:
            raise ConfigError("revealed receipt key does not match the genesis commitment")
        block = make_block(self.height + 1, self.head_hash, tally_text, self.clock())
        self.final_text = tally_text
        self.blocks.append(block)
        self._persist(block)
        return block

    def _persist(self, block: Block) -> None:
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(block.to_line() + "\n")

    def get_receipt(self, ballot_index: int) -> str:
        """The exact stored receipt bytes for byte-for-byte voter checks."""
        try:
            return self._ballots[ballot_index].payload
        except KeyError:
            raise NotFoundError(f"no receipt with ballot index {ballot_index}") from None

    def ballot_receipts(self) -> list[tuple[int, str]]:
        return [(i, self._ballots[i].payload) for i in sorted(self._ballots)]


def verify_chain(board: Board) -> bool:
    return first_chain_break(board) is None


def first_chain_break(board: Board) -> int | None:
    """Height of the first block whose hashes fail to re-verify, if any."""
    prev = GENESIS_PREV
    for expected_height, block in enumerate(board.blocks):
        if block.height != expected_height:
            return expected_height
        if block.prev_hash != prev:
            return block.height
        if block.payload_hash != hash_bytes(block.payload.encode()).hex():
            return block.height
        prev = block.header_hash()
    return None


def rehash_records(lines: list[str]) -> list[str]:
    """Recompute payload hashes and chain links over raw block lines.

    This is what an adversary with board write access can always do
    after editing payloads; tamper evidence must come from the proofs,
    not the hash chain. Used by the adversarial simulations and tests."""
    prev = GENESIS_PREV
    out = []
    for line in lines:
        block = Block.from_line(line)
        fixed = make_block(block.height, prev, block.payload, block.timestamp)
        out.append(fixed.to_line())
        prev = fixed.header_hash()
    return out


def payload_shape(payload: str) -> tuple[str, int | None, str | None]:
    """Shallow classification of a block payload: (kind, ballot index,
    second-part variant); never raises."""
    try:
        doc = json.loads(payload)
        kind = doc.get("kind", "")
        if kind != "receipt":
            return kind, None, None
        index = int(doc["index"])
        variant = json.loads(doc["second"]).get("variant")
        return kind, index, variant
    except (ValueError, KeyError, TypeError):
        return "", None, None
