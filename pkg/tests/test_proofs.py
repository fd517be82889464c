import dataclasses
import random

import pytest

from zkvote.dre import compute_alpha
from zkvote.errors import ProverError
from zkvote.groups import random_scalar
from zkvote.proofs import (
    DlogProof,
    WellFormedProof,
    poly_identity_demo,
    prove_dlog,
    prove_wellformed,
    verify_dlog,
    verify_wellformed,
)
from zkvote.transcript import Transcript


def ctx(tag="ctx"):
    return Transcript(tag).absorb_text("proof-tests")


def make_keypair(params, rng):
    w = random_scalar(params.q, rng)
    return w, params.exp(params.g1, w)


def make_ballot(params, rng, pubkey, encodings, candidate):
    """Honest ciphertext for the given candidate; returns (r, ct, alpha)."""
    c, d, h = pubkey
    r = random_scalar(params.q, rng)
    u = params.exp(params.g1, r)
    v = params.exp(params.g2, r)
    e = params.mul(params.exp(h, r), params.exp(params.g1, encodings[candidate - 1]))
    alpha = compute_alpha(u, v, e, params)
    w = params.exp(params.mul(c, params.exp(d, alpha)), r)
    return r, (u, v, e, w), alpha


def make_pubkey(params, rng):
    return tuple(params.exp(params.g1, random_scalar(params.q, rng)) for _ in range(3))


# -- discrete-log proofs -----------------------------------------------------


def test_dlog_completeness_random_instances(tiny, standard):
    for params, count in ((tiny, 100), (standard, 10)):
        rng = random.Random(1)
        for _ in range(count):
            w, stmt = make_keypair(params, rng)
            proof = prove_dlog(w, params.g1, stmt, ctx(), params, rng)
            assert verify_dlog(proof, params.g1, stmt, ctx(), params)


def test_dlog_zero_witness_identity_statement(tiny):
    rng = random.Random(2)
    proof = prove_dlog(0, tiny.g1, 1, ctx(), tiny, rng)
    assert verify_dlog(proof, tiny.g1, 1, ctx(), tiny)


def test_dlog_prover_refuses_wrong_statement(tiny):
    rng = random.Random(3)
    w, stmt = make_keypair(tiny, rng)
    with pytest.raises(ProverError):
        prove_dlog(w, tiny.g1, tiny.mul(stmt, tiny.g1), ctx(), tiny, rng)


def test_dlog_fails_against_other_statement(tiny):
    rng = random.Random(4)
    w, stmt = make_keypair(tiny, rng)
    proof = prove_dlog(w, tiny.g1, stmt, ctx(), tiny, rng)
    assert not verify_dlog(proof, tiny.g1, tiny.mul(stmt, tiny.g1), ctx(), tiny)
    assert not verify_dlog(proof, tiny.g2, stmt, ctx(), tiny)


def test_dlog_replay_under_other_domain_tag_fails(tiny):
    rng = random.Random(5)
    w, stmt = make_keypair(tiny, rng)
    proof = prove_dlog(w, tiny.g1, stmt, ctx("pk-s"), tiny, rng)
    assert not verify_dlog(proof, tiny.g1, stmt, ctx("pk-s1"), tiny)
    other = Transcript("pk-s").absorb_text("other-context")
    assert not verify_dlog(proof, tiny.g1, stmt, other, tiny)


def test_dlog_single_component_mutations_fail(tiny):
    rng = random.Random(6)
    w, stmt = make_keypair(tiny, rng)
    proof = prove_dlog(w, tiny.g1, stmt, ctx(), tiny, rng)
    mutants = [
        dataclasses.replace(proof, a=tiny.mul(proof.a, tiny.g1)),
        dataclasses.replace(proof, e=(proof.e + 1) % tiny.q),
        dataclasses.replace(proof, z=(proof.z + 1) % tiny.q),
    ]
    for m in mutants:
        assert not verify_dlog(m, tiny.g1, stmt, ctx(), tiny)


def test_dlog_serialization_round_trip(tiny):
    rng = random.Random(7)
    w, stmt = make_keypair(tiny, rng)
    proof = prove_dlog(w, tiny.g1, stmt, ctx(), tiny, rng)
    raw = proof.to_bytes(tiny)
    assert DlogProof.from_bytes(raw, tiny) == proof
    with pytest.raises(ValueError):
        DlogProof.from_bytes(raw + b"\x00", tiny)


# -- well-formedness proofs --------------------------------------------------


def test_wellformed_completeness_both_branches(tiny):
    rng = random.Random(8)
    pub = make_pubkey(tiny, rng)
    encodings = [0, 1]
    for cand in (1, 2):
        r, ct, alpha = make_ballot(tiny, rng, pub, encodings, cand)
        proof = prove_wellformed(r, cand, encodings, tiny, pub, ct, alpha, ctx(), rng)
        assert verify_wellformed(proof, encodings, tiny, pub, ct, alpha, ctx())
        assert sum(b.e for b in proof.branches) % tiny.q == _global_challenge(
            proof, encodings, tiny, pub, ct, alpha
        )


def _global_challenge(proof, encodings, params, pub, ct, alpha):
    from zkvote.proofs import _wf_challenge

    commitments = [(b.a_u, b.a_v, b.a_e, b.a_w) for b in proof.branches]
    return _wf_challenge(ctx(), encodings, params, pub, ct, alpha, commitments)


def test_wellformed_prover_refuses_invalid_encoding(tiny):
    # an encoding of 2 is not a valid two-candidate ballot; the honest
    # prover cannot produce a proof for it
    rng = random.Random(9)
    pub = make_pubkey(tiny, rng)
    c, d, h = pub
    r = random_scalar(tiny.q, rng)
    u, v = tiny.exp(tiny.g1, r), tiny.exp(tiny.g2, r)
    e = tiny.mul(tiny.exp(h, r), tiny.exp(tiny.g1, 2))
    alpha = compute_alpha(u, v, e, tiny)
    w = tiny.exp(tiny.mul(c, tiny.exp(d, alpha)), r)
    for cand in (1, 2):
        with pytest.raises(ProverError):
            prove_wellformed(r, cand, [0, 1], tiny, pub, (u, v, e, w), alpha, ctx(), rng)
    with pytest.raises(ProverError):
        prove_wellformed(r, 3, [0, 1], tiny, pub, (u, v, e, w), alpha, ctx(), rng)


def test_wellformed_cross_verification_matrix(midsize):
    # 4 candidates, N=1000: every honest ballot verifies only against its
    # own ciphertext
    params = midsize
    rng = random.Random(10)
    pub = make_pubkey(params, rng)
    n, big_n = 4, 1000
    encodings = [big_n ** (j - 1) for j in range(1, n + 1)]
    ballots = {}
    for cand in range(1, n + 1):
        r, ct, alpha = make_ballot(params, rng, pub, encodings, cand)
        proof = prove_wellformed(r, cand, encodings, params, pub, ct, alpha, ctx(), rng)
        ballots[cand] = (ct, alpha, proof)
    for prove_j, (ct, alpha, proof) in ballots.items():
        for verify_j, (ct2, alpha2, _) in ballots.items():
            ok = verify_wellformed(proof, encodings, params, pub, ct2, alpha2, ctx())
            assert ok == (prove_j == verify_j)


def test_wellformed_tampered_ciphertext_fails(tiny):
    rng = random.Random(11)
    pub = make_pubkey(tiny, rng)
    encodings = [0, 1]
    r, ct, alpha = make_ballot(tiny, rng, pub, encodings, 1)
    proof = prove_wellformed(r, 1, encodings, tiny, pub, ct, alpha, ctx(), rng)
    u, v, e, w = ct
    assert not verify_wellformed(
        proof, encodings, tiny, pub, (u, v, tiny.mul(e, tiny.g1), w), alpha, ctx()
    )
    # alpha recomputed from a mutated U differs; proof must not transfer
    mutated_u = tiny.mul(u, tiny.g1)
    new_alpha = compute_alpha(mutated_u, v, e, tiny)
    assert not verify_wellformed(
        proof, encodings, tiny, pub, (mutated_u, v, e, w), new_alpha, ctx()
    )


def test_wellformed_wrong_branch_count_fails(tiny):
    rng = random.Random(12)
    pub = make_pubkey(tiny, rng)
    encodings = [0, 1]
    r, ct, alpha = make_ballot(tiny, rng, pub, encodings, 2)
    proof = prove_wellformed(r, 2, encodings, tiny, pub, ct, alpha, ctx(), rng)
    assert not verify_wellformed(proof, [0, 1, 2], tiny, pub, ct, alpha, ctx())


def test_wellformed_serialization_round_trip(tiny):
    rng = random.Random(13)
    pub = make_pubkey(tiny, rng)
    encodings = [0, 1]
    r, ct, alpha = make_ballot(tiny, rng, pub, encodings, 2)
    proof = prove_wellformed(r, 2, encodings, tiny, pub, ct, alpha, ctx(), rng)
    raw = proof.to_bytes(tiny)
    assert WellFormedProof.from_bytes(raw, tiny, 2) == proof
    with pytest.raises(ValueError):
        WellFormedProof.from_bytes(raw, tiny, 3)


# -- polynomial identity demo ------------------------------------------------


def test_poly_demo_identical_polynomials_always_consistent(tiny):
    rng = random.Random(14)
    coeffs = [5, 0, 3, 1019 - 1]
    for _ in range(200):
        res = poly_identity_demo(coeffs, list(coeffs), tiny.q, rng)
        assert res.consistent


def test_poly_demo_constant_difference_never_consistent(tiny):
    # x and x+1 differ by the constant 1: no agreement points at all
    rng = random.Random(15)
    for _ in range(200):
        res = poly_identity_demo([0, 1], [1, 1], tiny.q, rng)
        assert not res.consistent


def test_poly_demo_reports_degree_over_field_bound(tiny):
    rng = random.Random(16)
    res = poly_identity_demo([1, 2, 3, 4, 5, 6], [1], tiny.q, rng)
    assert res.soundness_bound.numerator == 5
    assert res.soundness_bound.denominator == tiny.q


def test_poly_demo_rejects_empty_input(tiny):
    with pytest.raises(ValueError):
        poly_identity_demo([], [1], tiny.q, random.Random(17))
