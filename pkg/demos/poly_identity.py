#!/usr/bin/env python3
"""Probabilistic polynomial-identity checking: equal polynomials always
agree at a random point; unequal degree-d polynomials agree with
probability at most d/q. Monte-Carlo estimate against the bound."""

import random

from zkvote.groups import TEST_Q
from zkvote.proofs import poly_identity_demo

rng = random.Random(7)
q = TEST_Q

same = [3, 1, 4, 1, 5]
res = poly_identity_demo(same, list(same), q, rng)
print(f"identical polynomials at x={res.point}: consistent={res.consistent}")

res = poly_identity_demo([0, 1], [1, 1], q, rng)
print(f"x vs x+1 at x={res.point}: consistent={res.consistent}")
print(f"reported soundness bound: {res.soundness_bound} (degree/field size)\n")

trials = 20_000
hits = 0
for _ in range(trials):
    roots = rng.sample(range(q), 5)
    diff = [1]
    for root in roots:
        diff = [(lo - root * hi) % q for lo, hi in zip([0] + diff, diff + [0])]
    f = [rng.randrange(q) for _ in range(6)]
    g = [(a + b) % q for a, b in zip(f, diff)]
    if poly_identity_demo(f, g, q, rng).consistent:
        hits += 1

print(f"worst-case unequal pairs (difference with 5 roots), {trials} trials:")
print(f"false-consistent rate {hits / trials:.5f} vs bound 5/{q} = {5 / q:.5f}")
