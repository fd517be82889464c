"""SHA-256 digests and keyed receipt tags.

Digests are raw 32-byte strings everywhere in memory; files and wire
messages carry them as lowercase hex.
"""

import hashlib
import hmac

DIGEST_LEN = 32


def hash_bytes(message: bytes) -> bytes:
    """SHA-256 digest of a byte string."""
    return hashlib.sha256(message).digest()


def hash_hex(message: bytes) -> str:
    return hashlib.sha256(message).hexdigest()


def auth_tag(key: bytes, body: bytes) -> str:
    """HMAC-SHA256 receipt tag, lowercase hex (stand-in for a receipt signature)."""
    return hmac.new(key, body, hashlib.sha256).hexdigest()


def check_tag(key: bytes, body: bytes, tag: str) -> bool:
    return hmac.compare_digest(auth_tag(key, body), tag)
