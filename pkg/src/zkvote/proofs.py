"""Non-interactive sigma-protocol proofs.

Two constructions, both made non-interactive with Fiat-Shamir
transcripts from :mod:`zkvote.transcript`:

* Schnorr proof of knowledge of a discrete log: knowledge of x with
  statement = base^x. The verification equation is
  base^z == A * statement^e with e re-derived from the transcript.

* The ballot well-formedness proof: a 1-out-of-n disjunction where
  branch j claims a single exponent r simultaneously satisfies
  U = g1^r, V = g2^r, E/g1^enc_j = h^r and W = (c*d^alpha)^r. Built as
  the standard OR-composition (simulate every branch except the real
  one, split the global challenge so the shares sum to it mod q).

Verifiers return False on malformed input; they never raise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ProverError
from .groups import GroupParams, random_scalar
from .transcript import Transcript

Pubkey = tuple[int, int, int]  # (c, d, h)
Ciphertext = tuple[int, int, int, int]  # (U, V, E, W)


@dataclass(frozen=True)
class DlogProof:
    a: int  # commitment, group element
    e: int  # challenge
    z: int  # response

    def to_bytes(self, params: GroupParams) -> bytes:
        return (
            params.encode_element(self.a)
            + params.encode_scalar(self.e)
            + params.encode_scalar(self.z)
        )

    @classmethod
    def from_bytes(cls, raw: bytes, params: GroupParams) -> "DlogProof":
        el, sl = params.element_len, params.scalar_len
        if len(raw) != el + 2 * sl:
            raise ValueError("dlog proof has wrong length")
        a = params.decode_element(raw[:el])
        e = params.decode_scalar(raw[el : el + sl])
        z = params.decode_scalar(raw[el + sl :])
        return cls(a, e, z)


def prove_dlog(
    witness: int,
    base: int,
    statement: int,
    context: Transcript,
    params: GroupParams,
    rng,
) -> DlogProof:
    """Prove knowledge of witness with statement = base^witness."""
    witness %= params.q
    if params.exp(base, witness) != statement:
        raise ProverError("statement does not match witness")
    k = random_scalar(params.q, rng)
    a = params.exp(base, k)
    e = _dlog_challenge(context, base, statement, a, params)
    z = (k + e * witness) % params.q
    return DlogProof(a, e, z)


def verify_dlog(
    proof: DlogProof,
    base: int,
    statement: int,
    context: Transcript,
    params: GroupParams,
) -> bool:
    try:
        if not (params.is_element(proof.a) and params.is_element(statement)):
            return False
        if not (0 <= proof.e < params.q and 0 <= proof.z < params.q):
            return False
        if proof.e != _dlog_challenge(context, base, statement, proof.a, params):
            return False
        lhs = params.exp(base, proof.z)
        rhs = params.mul(proof.a, params.exp(statement, proof.e))
        return lhs == rhs
    except (ValueError, OverflowError):
        return False


def _dlog_challenge(
    context: Transcript, base: int, statement: int, a: int, params: GroupParams
) -> int:
    t = context.clone()
    t.absorb_bytes(params.fingerprint())
    t.absorb_element(base, params)
    t.absorb_element(statement, params)
    t.absorb_element(a, params)
    return t.challenge(params.q)


@dataclass(frozen=True)
class WfBranch:
    a_u: int
    a_v: int
    a_e: int
    a_w: int
    e: int
    z: int


@dataclass(frozen=True)
class WellFormedProof:
    branches: tuple[WfBranch, ...]

    def to_bytes(self, params: GroupParams) -> bytes:
        out = b""
        for b in self.branches:
            out += params.encode_element(b.a_u)
            out += params.encode_element(b.a_v)
            out += params.encode_element(b.a_e)
            out += params.encode_element(b.a_w)
            out += params.encode_scalar(b.e)
            out += params.encode_scalar(b.z)
        return out

    @classmethod
    def from_bytes(cls, raw: bytes, params: GroupParams, n: int) -> "WellFormedProof":
        el, sl = params.element_len, params.scalar_len
        stride = 4 * el + 2 * sl
        if n < 2 or len(raw) != n * stride:
            raise ValueError("well-formedness proof has wrong length")
        branches = []
        for i in range(n):
            chunk = raw[i * stride : (i + 1) * stride]
            branches.append(
                WfBranch(
                    a_u=params.decode_element(chunk[:el]),
                    a_v=params.decode_element(chunk[el : 2 * el]),
                    a_e=params.decode_element(chunk[2 * el : 3 * el]),
                    a_w=params.decode_element(chunk[3 * el : 4 * el]),
                    e=params.decode_scalar(chunk[4 * el : 4 * el + sl]),
                    z=params.decode_scalar(chunk[4 * el + sl :]),
                )
            )
        return cls(tuple(branches))


def _wf_bases(pubkey: Pubkey, alpha: int, params: GroupParams) -> tuple[int, int, int, int]:
    c, d, h = pubkey
    w_base = params.mul(c, params.exp(d, alpha))
    return params.g1, params.g2, h, w_base


def _wf_targets(
    ciphertext: Ciphertext, enc: int, params: GroupParams
) -> tuple[int, int, int, int]:
    u, v, e, w = ciphertext
    e_shifted = params.mul(e, params.inv(params.exp(params.g1, enc)))
    return u, v, e_shifted, w


def _wf_challenge(
    context: Transcript,
    encodings: list[int],
    params: GroupParams,
    pubkey: Pubkey,
    ciphertext: Ciphertext,
    alpha: int,
    commitments: list[tuple[int, int, int, int]],
) -> int:
    t = context.clone()
    t.absorb_bytes(params.fingerprint())
    for x in pubkey:
        t.absorb_element(x, params)
    for x in ciphertext:
        t.absorb_element(x, params)
    t.absorb_scalar(alpha, params)
    for enc in encodings:
        t.absorb_int(enc)
    for quad in commitments:
        for x in quad:
            t.absorb_element(x, params)
    return t.challenge(params.q)


def prove_wellformed(
    r: int,
    candidate: int,
    encodings: list[int],
    params: GroupParams,
    pubkey: Pubkey,
    ciphertext: Ciphertext,
    alpha: int,
    context: Transcript,
    rng,
) -> WellFormedProof:
    """Prove the ciphertext encrypts one of the allowed vote encodings.

    ``candidate`` is the true 1-based branch; the prover refuses when the
    ciphertext was not honestly computed from (r, candidate).
    """
    n = len(encodings)
    if not 1 <= candidate <= n:
        raise ProverError("candidate index out of range")
    q = params.q
    bases = _wf_bases(pubkey, alpha, params)
    u, v, e_ct, w = ciphertext
    true_enc = encodings[candidate - 1]
    honest = (
        params.exp(params.g1, r) == u
        and params.exp(params.g2, r) == v
        and params.mul(params.exp(pubkey[2], r), params.exp(params.g1, true_enc)) == e_ct
        and params.exp(bases[3], r) == w
    )
    if not honest:
        raise ProverError("ciphertext is not consistent with (r, candidate)")

    commitments: list[tuple[int, int, int, int] | None] = [None] * n
    fake_e: list[int] = [0] * n
    fake_z: list[int] = [0] * n
    k = random_scalar(q, rng)
    for j in range(n):
        if j == candidate - 1:
            commitments[j] = tuple(params.exp(b, k) for b in bases)
            continue
        ej = random_scalar(q, rng)
        zj = random_scalar(q, rng)
        targets = _wf_targets(ciphertext, encodings[j], params)
        # A = base^z * target^(-e); target^q = 1 so -e is q - e
        commitments[j] = tuple(
            params.mul(params.exp(b, zj), params.exp(t, q - ej))
            for b, t in zip(bases, targets)
        )
        fake_e[j], fake_z[j] = ej, zj

    global_e = _wf_challenge(
        context, encodings, params, pubkey, ciphertext, alpha, commitments
    )
    e_true = (global_e - sum(fake_e)) % q
    z_true = (k + e_true * r) % q

    branches = []
    for j in range(n):
        a_u, a_v, a_e, a_w = commitments[j]
        if j == candidate - 1:
            branches.append(WfBranch(a_u, a_v, a_e, a_w, e_true, z_true))
        else:
            branches.append(WfBranch(a_u, a_v, a_e, a_w, fake_e[j], fake_z[j]))
    return WellFormedProof(tuple(branches))


def verify_wellformed(
    proof: WellFormedProof,
    encodings: list[int],
    params: GroupParams,
    pubkey: Pubkey,
    ciphertext: Ciphertext,
    alpha: int,
    context: Transcript,
) -> bool:
    try:
        n = len(encodings)
        if len(proof.branches) != n:
            return False
        q = params.q
        for x in ciphertext:
            if not params.is_element(x):
                return False
        for b in proof.branches:
            for x in (b.a_u, b.a_v, b.a_e, b.a_w):
                if not params.is_element(x):
                    return False
            if not (0 <= b.e < q and 0 <= b.z < q):
                return False
        commitments = [(b.a_u, b.a_v, b.a_e, b.a_w) for b in proof.branches]
        global_e = _wf_challenge(
            context, encodings, params, pubkey, ciphertext, alpha, commitments
        )
        if sum(b.e for b in proof.branches) % q != global_e:
            return False
        bases = _wf_bases(pubkey, alpha, params)
        for j, b in enumerate(proof.branches):
            targets = _wf_targets(ciphertext, encodings[j], params)
            quads = zip(bases, targets, (b.a_u, b.a_v, b.a_e, b.a_w))
            for base, target, commitment in quads:
                lhs = params.exp(base, b.z)
                rhs = params.mul(commitment, params.exp(target, b.e))
                if lhs != rhs:
                    return False
        return True
    except (ValueError, OverflowError):
        return False


@dataclass(frozen=True)
class PolyDemoResult:
    point: int
    values: tuple[int, int]
    consistent: bool
    soundness_bound: Fraction


def poly_identity_demo(
    coeffs_a: list[int], coeffs_b: list[int], q: int, rng
) -> PolyDemoResult:
    """Probabilistic polynomial-identity check at one random point.

    Two distinct polynomials of degree at most d agree on at most d
    points of Z_q, so a false "consistent" verdict happens with
    probability at most d/q; that bound is reported alongside the
    verdict.
    """
    if not coeffs_a or not coeffs_b:
        raise ValueError("coefficient lists must be non-empty")
    d = max(len(coeffs_a), len(coeffs_b)) - 1
    if d >= q:
        raise ValueError("degree must be below the field size")
    point = rng.randrange(q)
    va = _eval_poly(coeffs_a, point, q)
    vb = _eval_poly(coeffs_b, point, q)
    return PolyDemoResult(
        point=point,
        values=(va, vb),
        consistent=va == vb,
        soundness_bound=Fraction(d, q),
    )


def _eval_poly(coeffs: list[int], x: int, q: int) -> int:
    # Horner, coefficients in ascending order
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc
