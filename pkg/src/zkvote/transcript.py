"""Fiat-Shamir transcripts.

A transcript is a domain tag plus an ordered list of absorbed items.
Every item is serialized as a 1-byte type tag, a 4-byte big-endian
length, and the payload, which removes any ambiguity between adjacent
items (scalars and elements are absorbed at their group's fixed
width). The challenge is SHA-256 over the serialized transcript,
reduced mod q. Distinct domain tags therefore yield independent
challenge streams.
"""

from __future__ import annotations

from .errors import ConfigError
from .groups import GroupParams
from .hashing import hash_bytes

_TAG_DOMAIN = 0x00
_TAG_SCALAR = 0x01
_TAG_ELEMENT = 0x02
_TAG_BYTES = 0x03


class Transcript:
    def __init__(self, domain_tag: str):
        if not domain_tag:
            raise ConfigError("transcript domain tag must be non-empty")
        self.domain_tag = domain_tag
        self._items: list[bytes] = [_frame(_TAG_DOMAIN, domain_tag.encode())]

    def absorb_bytes(self, data: bytes) -> "Transcript":
        self._items.append(_frame(_TAG_BYTES, data))
        return self

    def absorb_text(self, text: str) -> "Transcript":
        return self.absorb_bytes(text.encode())

    def absorb_int(self, n: int) -> "Transcript":
        return self.absorb_bytes(str(n).encode())

    def absorb_scalar(self, v: int, params: GroupParams) -> "Transcript":
        self._items.append(_frame(_TAG_SCALAR, params.encode_scalar(v)))
        return self

    def absorb_element(self, x: int, params: GroupParams) -> "Transcript":
        self._items.append(_frame(_TAG_ELEMENT, params.encode_element(x)))
        return self

    def clone(self) -> "Transcript":
        t = Transcript(self.domain_tag)
        t._items = list(self._items)
        return t

    def serialize(self) -> bytes:
        return b"".join(self._items)

    def challenge(self, q: int) -> int:
        return hash_to_scalar(self, q)


def _frame(type_tag: int, payload: bytes) -> bytes:
    return bytes([type_tag]) + len(payload).to_bytes(4, "big") + payload


def hash_to_scalar(t: Transcript, q: int) -> int:
    """SHA-256 of the serialized transcript, reduced mod q."""
    return int.from_bytes(hash_bytes(t.serialize()), "big") % q
