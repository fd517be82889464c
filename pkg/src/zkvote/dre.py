"""The DRE machine: key generation, ballot encryption, Benaloh
audit/confirm decisions, and final-tally publication.

State is a strictly single-writer machine. Secret running aggregates:

* ``t``  -- sum of confirmed vote encodings (the tally)
* ``s``  -- sum of confirmed randomness r
* ``s1`` -- sum of randomness over every encrypted ballot
* ``m``  -- sum of r*alpha over confirmed ballots
* ``n``  -- product of confirmed U values
* ``n1`` -- product of all U values

A ballot's (r, vote) live only in the single pending slot between
encryption and the voter's decision: an audit reveals them in the
receipt, a confirmation folds them into the aggregates and erases
them. Key-generation scalars are dropped before keygen returns.
Snapshots for restart are taken at decision boundaries only, so an
undecided ballot's contributions are rolled back implicitly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import receipts
from .errors import ConfigError, ProtocolOrderError, ReceiptFormatError
from .groups import GroupParams, random_scalar
from .proofs import prove_dlog, prove_wellformed
from .transcript import Transcript


@dataclass(frozen=True)
class DrePublicKey:
    c: int
    d: int
    h: int
    params: GroupParams


def keygen(params: GroupParams, rng) -> DrePublicKey:
    """Generate the election key; the five secret exponents never leave
    this function ("secretly deleted by the DRE")."""
    q = params.q
    x1, x2, y1, y2, z = (rng.randrange(q) for _ in range(5))
    c = params.mul(params.exp(params.g1, x1), params.exp(params.g2, x2))
    d = params.mul(params.exp(params.g1, y1), params.exp(params.g2, y2))
    h = params.exp(params.g1, z)
    del x1, x2, y1, y2, z
    return DrePublicKey(c=c, d=d, h=h, params=params)


def encode_vote(candidate: int, n_candidates: int, voter_bound: int) -> int:
    """Vote encoding: {0, 1} for two candidates, N^(j-1) for three or more."""
    if not 1 <= candidate <= n_candidates:
        raise ValueError(f"candidate {candidate} out of range 1..{n_candidates}")
    if n_candidates == 2:
        return candidate - 1
    return voter_bound ** (candidate - 1)


def vote_encodings(n_candidates: int, voter_bound: int) -> list[int]:
    return [encode_vote(j, n_candidates, voter_bound) for j in range(1, n_candidates + 1)]


def compute_alpha(u: int, v: int, e: int, params: GroupParams) -> int:
    """alpha = H(U, V, E), argument order fixed."""
    t = Transcript("alpha")
    t.absorb_element(u, params)
    t.absorb_element(v, params)
    t.absorb_element(e, params)
    return t.challenge(params.q)


def pwf_context(election_id: str, index: int) -> Transcript:
    return Transcript("pwf").absorb_text(election_id).absorb_int(index)


def pk_s1_context(election_id: str, index: int) -> Transcript:
    return Transcript("pk-s1").absorb_text(election_id).absorb_int(index)


def pk_s_context(election_id: str, index: int) -> Transcript:
    return Transcript("pk-s").absorb_text(election_id).absorb_int(index)


def audited_consistency(
    u: int,
    v: int,
    e: int,
    w: int,
    alpha: int,
    r: int,
    vote: int,
    pubkey: tuple[int, int, int],
    params: GroupParams,
) -> bool:
    """Re-encryption check for an opened ballot: the revealed (r, vote)
    must reproduce all four ciphertext components, with alpha recomputed
    from (U, V, E)."""
    c, d, h = pubkey
    if alpha != compute_alpha(u, v, e, params):
        return False
    return (
        params.exp(params.g1, r) == u
        and params.exp(params.g2, r) == v
        and params.mul(params.exp(h, r), params.exp(params.g1, vote)) == e
        and params.exp(params.mul(c, params.exp(d, alpha)), r) == w
    )


@dataclass
class PendingBallot:
    index: int
    candidate: int
    r: int
    vote: int
    u: int
    v: int
    e: int
    w: int
    alpha: int
    first_text: str


class DreState:
    def __init__(
        self,
        pubkey: DrePublicKey,
        n_candidates: int,
        voter_bound: int,
        election_id: str,
        receipt_key: bytes,
        rng,
    ):
        self.pubkey = pubkey
        self.params = pubkey.params
        self.n_candidates = n_candidates
        self.voter_bound = voter_bound
        self.election_id = election_id
        self.receipt_key = receipt_key
        self.rng = rng
        self.t = 0
        self.s = 0
        self.s1 = 0
        self.m = 0
        self.n = 1
        self.n1 = 1
        self.audited_ids: set[int] = set()
        self.confirmed_ids: set[int] = set()
        self.pending: PendingBallot | None = None
        self.next_index = 1
        self.published = False

    @property
    def encodings(self) -> list[int]:
        return vote_encodings(self.n_candidates, self.voter_bound)

    def encrypt_ballot(self, candidate: int) -> str:
        """Encrypt a vote, update the all-ballot aggregates, and emit the
        signed first-part receipt. The ballot waits in the pending slot."""
        if self.published:
            raise ProtocolOrderError("election already closed")
        if self.pending is not None:
            raise ProtocolOrderError("a ballot is already awaiting audit/confirm")
        vote = encode_vote(candidate, self.n_candidates, self.voter_bound)
        params, pk = self.params, self.pubkey
        index = self.next_index
        r = random_scalar(params.q, self.rng)
        u = params.exp(params.g1, r)
        v = params.exp(params.g2, r)
        e = params.mul(params.exp(pk.h, r), params.exp(params.g1, vote))
        alpha = compute_alpha(u, v, e, params)
        w = params.exp(params.mul(pk.c, params.exp(pk.d, alpha)), r)

        s1_next = (self.s1 + r) % params.q
        n1_next = params.mul(self.n1, u)

        pwf = prove_wellformed(
            r,
            candidate,
            self.encodings,
            params,
            (pk.c, pk.d, pk.h),
            (u, v, e, w),
            alpha,
            pwf_context(self.election_id, index),
            self.rng,
        )
        pk_s1 = prove_dlog(
            s1_next,
            params.g1,
            n1_next,
            pk_s1_context(self.election_id, index),
            params,
            self.rng,
        )
        first_text = receipts.make_first_part(
            self.election_id, index, (u, v, e, w), alpha, pwf, pk_s1, params, self.receipt_key
        )
        # commit only after every proof succeeded, so a failure above
        # cannot leave half-updated aggregates
        self.s1 = s1_next
        self.n1 = n1_next
        self.next_index += 1
        self.pending = PendingBallot(
            index=index,
            candidate=candidate,
            r=r,
            vote=vote,
            u=u,
            v=v,
            e=e,
            w=w,
            alpha=alpha,
            first_text=first_text,
        )
        return first_text

    def decide_audit(self) -> tuple[str, str]:
        """Open the pending ballot: reveal (r, vote) in the audited second
        part. Returns (second_part, merged_receipt)."""
        p = self._take_pending()
        second = receipts.make_second_audited(
            self.election_id, p.index, p.r, p.vote, self.params, self.receipt_key
        )
        self.audited_ids.add(p.index)
        return second, receipts.merge_receipt(p.index, p.first_text, second)

    def decide_confirm(self) -> tuple[str, str]:
        """Cast the pending ballot: fold (r, vote) into the confirmed
        aggregates, prove knowledge of the running sum s, erase them."""
        if self.pending is None:
            raise ProtocolOrderError("no ballot is awaiting a decision")
        p = self.pending
        params = self.params
        s_next = (self.s + p.r) % params.q
        n_next = params.mul(self.n, p.u)
        pk_s = prove_dlog(
            s_next,
            params.g1,
            n_next,
            pk_s_context(self.election_id, p.index),
            params,
            self.rng,
        )
        second = receipts.make_second_confirmed(
            self.election_id, p.index, pk_s, params, self.receipt_key
        )
        self.t = self.t + p.vote  # integer lift; < q by the init bound check
        self.s = s_next
        self.m = (self.m + p.r * p.alpha) % params.q
        self.n = n_next
        self.confirmed_ids.add(p.index)
        self.pending = None
        merged = receipts.merge_receipt(p.index, p.first_text, second)
        p.r = p.vote = 0  # secure-delete stand-in; the slot is dropped next
        return second, merged

    def _take_pending(self) -> PendingBallot:
        if self.pending is None:
            raise ProtocolOrderError("no ballot is awaiting a decision")
        p = self.pending
        self.pending = None
        return p

    def publish_final(self) -> str:
        """Post (t, s, m); afterwards the secret aggregates are erased."""
        if self.pending is not None:
            raise ProtocolOrderError("pending ballot must be audited or confirmed first")
        if self.published:
            raise ProtocolOrderError("final tally already published")
        text = receipts.make_final_tally(
            self.election_id, self.t, self.s, self.m, self.params, self.receipt_key
        )
        self.published = True
        self.s = self.s1 = self.m = None
        return text

    def snapshot(self) -> str:
        """Serialize for restart. Refuses while a ballot is pending, so a
        reload never resurrects (or silently drops) an undecided ballot."""
        if self.pending is not None:
            raise ProtocolOrderError("cannot snapshot with a pending ballot")
        params = self.params
        doc = {
            "v": 1,
            "kind": "dre_state",
            "election": self.election_id,
            "published": self.published,
            "t": self.t,
            "s": None if self.s is None else params.scalar_hex(self.s),
            "s1": None if self.s1 is None else params.scalar_hex(self.s1),
            "m": None if self.m is None else params.scalar_hex(self.m),
            "n": params.element_hex(self.n),
            "n1": params.element_hex(self.n1),
            "audited": sorted(self.audited_ids),
            "confirmed": sorted(self.confirmed_ids),
            "next_index": self.next_index,
        }
        return receipts.canonical_json(doc)

    @classmethod
    def restore(
        cls,
        text: str,
        pubkey: DrePublicKey,
        n_candidates: int,
        voter_bound: int,
        election_id: str,
        receipt_key: bytes,
        rng,
    ) -> "DreState":
        try:
            doc = json.loads(text)
            if doc.get("kind") != "dre_state" or doc.get("election") != election_id:
                raise ValueError("not a matching DRE state snapshot")
            state = cls(pubkey, n_candidates, voter_bound, election_id, receipt_key, rng)
            params = pubkey.params
            state.published = bool(doc["published"])
            state.t = int(doc["t"])
            state.s = None if doc["s"] is None else params.scalar_from_hex(doc["s"])
            state.s1 = None if doc["s1"] is None else params.scalar_from_hex(doc["s1"])
            state.m = None if doc["m"] is None else params.scalar_from_hex(doc["m"])
            state.n = params.element_from_hex(doc["n"])
            state.n1 = params.element_from_hex(doc["n1"])
            state.audited_ids = set(doc["audited"])
            state.confirmed_ids = set(doc["confirmed"])
            state.next_index = int(doc["next_index"])
            return state
        except (ValueError, KeyError, TypeError) as exc:
            raise ReceiptFormatError(f"bad DRE snapshot: {exc}") from exc


def init_election(
    pubkey: DrePublicKey,
    n_candidates: int,
    voter_bound: int,
    election_id: str,
    receipt_key: bytes,
    rng,
) -> DreState:
    """Fresh DRE state: zero scalars, identity accumulators, index 1.

    Rejects configurations whose maximum possible tally would not fit
    below the group order (the decode step needs the integer value)."""
    if n_candidates < 2:
        raise ConfigError("need at least two candidates")
    q = pubkey.params.q
    if n_candidates == 2:
        if not 0 < voter_bound < q:
            raise ConfigError("voter bound must be positive and below the group order")
    else:
        if voter_bound <= 0:
            raise ConfigError("voter bound N must be positive for three or more candidates")
        if voter_bound**n_candidates > q:
            raise ConfigError(
                "N^n_candidates exceeds the group order; the tally could not be decoded"
            )
    return DreState(pubkey, n_candidates, voter_bound, election_id, receipt_key, rng)
