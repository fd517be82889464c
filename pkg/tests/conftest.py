import random

import pytest

from zkvote.dre import init_election, keygen
from zkvote.groups import derive_custom_group, derive_group


@pytest.fixture(scope="session")
def tiny():
    return derive_group("test", b"unit-test-seed")


@pytest.fixture(scope="session")
def standard():
    return derive_group("standard", b"unit-test-seed")


@pytest.fixture(scope="session")
def midsize():
    # big enough for 4-candidate base-N encodings, cheap to exponentiate
    return derive_custom_group(64, b"unit-test-seed")


def make_dre(params, seed=0, n_candidates=2, voter_bound=500, election_id="unit"):
    rng = random.Random(seed)
    pubkey = keygen(params, rng)
    receipt_key = rng.randbytes(32)
    return init_election(pubkey, n_candidates, voter_bound, election_id, receipt_key, rng)


def run_small_election(
    params,
    seed=0,
    plan=(("confirm", 1), ("audit", 2), ("confirm", 2)),
    n_candidates=2,
    voter_bound=500,
    election_id="unit",
    close=True,
    board_path=None,
):
    """Drive a scripted election through the DRE and a gatekeeping board.

    plan is a sequence of (decision, candidate) pairs; returns the pair
    (dre, board) after optionally posting the final tally."""
    import zkvote.board as board_mod
    from zkvote.receipts import make_genesis
    from zkvote.registry import external_nullifier_for

    rng = random.Random(seed)
    pubkey = keygen(params, rng)
    receipt_key = rng.randbytes(32)
    dre = init_election(pubkey, n_candidates, voter_bound, election_id, receipt_key, rng)
    genesis = make_genesis(
        election_id,
        params,
        pubkey,
        n_candidates,
        voter_bound,
        external_nullifier_for(election_id),
        receipt_key,
    )
    clock_state = {"t": 1_700_000_000}

    def clock():
        clock_state["t"] += 1
        return clock_state["t"]

    board = board_mod.Board.create(
        genesis, path=board_path, receipt_key=receipt_key, clock=clock
    )
    for decision, candidate in plan:
        dre.encrypt_ballot(candidate)
        _, merged = dre.decide_audit() if decision == "audit" else dre.decide_confirm()
        block = board.append_receipt(merged)
        assert block is not None, board.rejections
    if close:
        board.append_final(dre.publish_final())
    return dre, board


def brute_dlog(params, base, target):
    """Exhaustive discrete log; only sane on the tiny test group."""
    x = 1
    for k in range(params.q):
        if x == target:
            return k
        x = params.mul(x, base)
    raise AssertionError("target is not in the subgroup generated by base")
