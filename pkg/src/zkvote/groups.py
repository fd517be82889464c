"""Prime-order Schnorr subgroups of Z_p* and scalar/element encodings.

Two built-in security tiers:

* ``test`` -- p = 2039, q = 1019 (p = 2q+1). Small enough that discrete
  logs can be brute-forced in tests, so every algebraic claim is
  falsifiable by exhaustion.
* ``standard`` -- a fixed 2048-bit prime p with a 256-bit prime-order
  subgroup (q | p-1). The constants were derived once from the tag
  ``zkvote standard group v1`` (q = next prime after a SHA-256-derived
  256-bit start; p = q*k + 1 scanned upward from 2048 SHA-256-derived
  bits) and verified with two independent primality checkers before
  being frozen here.

Generators are never fixed: they are derived from a caller seed by
hash-to-group (x^((p-1)/q) for hashed x), so no party knows
log_g1(g2). Elements are validated for subgroup membership whenever
they are decoded from bytes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import ConfigError, EntropyError, InvalidParametersError

try:
    from gmpy2 import powmod as _powmod
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _powmod = pow

TEST_P = 2039
TEST_Q = 1019

STANDARD_Q = int(
    "c9d56555fe384e98a4c30f8ddc32710e46898a03d97b8c4549798da1b70372f3", 16
)
STANDARD_P = int(
    "94c54e6a83d6db57047ab1bcf8c3e9597b1e0facffb3a4833dd42d56bf7dd904"
    "096e768483f013820fde3d544efdd0557dc248423d9eb83f5d8a77c5f3d39104"
    "2ddc2b5af87705eb1c873e789fea118b3052c29211f46916549bbc59eb9e3714"
    "d2683ae61f5d37aa4ec52f311ce8462d10eeec88f4cb875027ce329248199e09"
    "d3c4090c98dc7960b5637370edb74418fdd103fcff17bfc17b0fe3ae3b07d918"
    "f60e46d453abca37f4d7af005e4e7d5c3f7bedfd0b38e3cf5e8e1603ccbee493"
    "9922e6d8e897e44b58120d651c4eda199dbd1d6074120f777e552e153daaa2bd"
    "31614ef88d3d092efcfb87fba03de8913730cd1c28e89b944e5d28a03d23b60f",
    16,
)


def modexp(base: int, exp: int, mod: int) -> int:
    return int(_powmod(base, exp, mod))


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin. Deterministic bases below 3.3e24, plus 40 rounds whose
    bases are derived from n itself (reproducible, not attacker-steerable
    without breaking SHA-256)."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1

    def witness(a: int) -> bool:
        x = modexp(a, d, n)
        if x == 1 or x == n - 1:
            return False
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                return False
        return True

    if n < 3317044064679887385961981:
        bases = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    else:
        seed = n.to_bytes((n.bit_length() + 7) // 8, "big")
        bases = tuple(
            2 + int.from_bytes(hashlib.sha256(seed + bytes([i])).digest(), "big") % (n - 3)
            for i in range(40)
        )
    return not any(witness(a) for a in bases)


@dataclass(frozen=True)
class GroupParams:
    """A verified cyclic group of prime order q inside Z_p*, with two
    independent generators."""

    p: int
    q: int
    g1: int
    g2: int
    tier: str

    @property
    def scalar_len(self) -> int:
        return (self.q.bit_length() + 7) // 8

    @property
    def element_len(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def exp(self, base: int, e: int) -> int:
        return modexp(base, e % self.q, self.p)

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def inv(self, a: int) -> int:
        # inverse of an order-q subgroup member; a^q = 1 so a^(q-1) = a^-1
        # (much cheaper than Fermat with exponent p-2 when q << p)
        return modexp(a, self.q - 1, self.p)

    def is_element(self, x: int) -> bool:
        """Membership in the order-q subgroup (identity included)."""
        return 0 < x < self.p and modexp(x, self.q, self.p) == 1

    def encode_scalar(self, v: int) -> bytes:
        return (v % self.q).to_bytes(self.scalar_len, "big")

    def decode_scalar(self, raw: bytes) -> int:
        if len(raw) != self.scalar_len:
            raise ValueError("scalar encoding has wrong length")
        v = int.from_bytes(raw, "big")
        if v >= self.q:
            raise ValueError("scalar encoding out of range")
        return v

    def encode_element(self, x: int) -> bytes:
        return x.to_bytes(self.element_len, "big")

    def decode_element(self, raw: bytes) -> int:
        if len(raw) != self.element_len:
            raise ValueError("element encoding has wrong length")
        x = int.from_bytes(raw, "big")
        if not self.is_element(x):
            raise ValueError("encoding is not in the order-q subgroup")
        return x

    def scalar_hex(self, v: int) -> str:
        return self.encode_scalar(v).hex()

    def element_hex(self, x: int) -> str:
        return self.encode_element(x).hex()

    def scalar_from_hex(self, s: str) -> int:
        return self.decode_scalar(bytes.fromhex(s))

    def element_from_hex(self, s: str) -> int:
        return self.decode_element(bytes.fromhex(s))

    def fingerprint(self) -> bytes:
        """Digest binding (p, q, g1, g2); absorbed into proof transcripts."""
        h = hashlib.sha256()
        for v in (self.p, self.q, self.g1, self.g2):
            raw = v.to_bytes((v.bit_length() + 7) // 8 or 1, "big")
            h.update(len(raw).to_bytes(4, "big"))
            h.update(raw)
        return h.digest()


def _hash_to_group(p: int, q: int, seed: bytes, label: bytes) -> int:
    """Map seed material into the order-q subgroup; never returns identity."""
    cofactor = (p - 1) // q
    counter = 0
    while True:
        material = hashlib.sha256(b"h2g|" + label + b"|" + seed + counter.to_bytes(4, "big")).digest()
        x = int.from_bytes(material, "big") % p
        g = modexp(x, cofactor, p)
        if g != 1:
            return g
        counter += 1


def _derive_generators(p: int, q: int, seed: bytes) -> tuple[int, int]:
    g1 = _hash_to_group(p, q, seed, b"g1")
    bump = 0
    while True:
        g2 = _hash_to_group(p, q, seed + bump.to_bytes(2, "big"), b"g2")
        if g2 != g1:
            return g1, g2
        bump += 1


def _verify_params(params: GroupParams) -> GroupParams:
    if not is_probable_prime(params.q):
        raise InvalidParametersError("q is not prime")
    if not is_probable_prime(params.p):
        raise InvalidParametersError("p is not prime")
    if (params.p - 1) % params.q != 0:
        raise InvalidParametersError("q does not divide p-1")
    for g in (params.g1, params.g2):
        if g <= 1 or g >= params.p:
            raise InvalidParametersError("generator out of range")
        if modexp(g, params.q, params.p) != 1:
            raise InvalidParametersError("generator does not have order q")
    if params.g1 == params.g2:
        raise InvalidParametersError("generators must be distinct")
    return params


_VERIFIED: set[GroupParams] = set()


def verify_group_params(params: GroupParams) -> GroupParams:
    """Validate primality/order invariants; memoized per parameter set
    (deserialized boards re-check their genesis parameters once)."""
    if params not in _VERIFIED:
        _verify_params(params)
        _VERIFIED.add(params)
    return params


def derive_group(tier: str, seed: bytes) -> GroupParams:
    """Deterministically derive verified GroupParams for a security tier.

    The modulus is fixed per tier; the seed drives only generator
    derivation, so the same seed always yields the same parameters.
    """
    if tier == "test":
        p, q = TEST_P, TEST_Q
    elif tier == "standard":
        p, q = STANDARD_P, STANDARD_Q
    else:
        raise ConfigError(f"unknown security tier {tier!r}")
    g1, g2 = _derive_generators(p, q, seed)
    return _verify_params(GroupParams(p=p, q=q, g1=g1, g2=g2, tier=tier))


def derive_custom_group(q_bits: int, seed: bytes) -> GroupParams:
    """Derive a fresh safe-prime group (p = 2q+1) with a q of the given size.

    Used where the vote-encoding range needs a q larger than the test
    tier but full standard-tier arithmetic would be needlessly slow
    (e.g. multi-candidate simulations).
    """
    if q_bits < 16:
        raise ConfigError("q_bits too small for a meaningful group")
    material = hashlib.sha256(b"customq|" + seed).digest()
    while len(material) * 8 < q_bits:
        material += hashlib.sha256(material).digest()
    q = int.from_bytes(material, "big") % (1 << q_bits)
    q |= (1 << (q_bits - 1)) | 1
    while True:
        if is_probable_prime(q) and is_probable_prime(2 * q + 1):
            break
        q += 2
    p = 2 * q + 1
    g1, g2 = _derive_generators(p, q, seed)
    return _verify_params(GroupParams(p=p, q=q, g1=g1, g2=g2, tier="custom"))


def random_scalar(q: int, rng) -> int:
    """Uniform scalar in [1, q-1] (zero excluded, matching Z_q^*)."""
    try:
        v = rng.randrange(1, q)
    except (OSError, NotImplementedError) as exc:
        raise EntropyError("randomness source failed") from exc
    return v
