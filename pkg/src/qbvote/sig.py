"""Lamport one-time signatures over SHA-256.

Hash-based, so no structure for Shor's algorithm to attack; one key signs one
ballot, which matches the one-vote-per-ballot discipline of the protocol.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .entropy import EntropySource

__all__ = [
    "OtsKeyPair",
    "OtsSignature",
    "OneTimeKeyReuse",
    "keygen",
    "sign",
    "verify",
    "public_key_digest",
    "serialize_public",
    "deserialize_public",
    "serialize_signature",
    "deserialize_signature",
]

DIGEST_BITS = 256


class OneTimeKeyReuse(RuntimeError):
    """A Lamport key signed twice; the second reveal would leak forgeries."""


def _h(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class OtsSignature:
    revealed: tuple[bytes, ...]  # 256 preimages, one per digest bit

    def __post_init__(self):
        if len(self.revealed) != DIGEST_BITS:
            raise ValueError("signature must reveal exactly 256 preimages")


@dataclass
class OtsKeyPair:
    # secret[i] / public[i] hold the (bit=0, bit=1) pair for digest bit i
    secret: tuple[tuple[bytes, bytes], ...]
    public: tuple[tuple[bytes, bytes], ...]
    used: bool = False


def keygen(entropy: EntropySource) -> OtsKeyPair:
    """Fresh keypair: 2x256 random 256-bit preimages and their digests."""
    secret = tuple(
        (entropy.next_bytes(32), entropy.next_bytes(32)) for _ in range(DIGEST_BITS)
    )
    public = tuple((_h(s0), _h(s1)) for s0, s1 in secret)
    return OtsKeyPair(secret=secret, public=public)


def _digest_bits(message: bytes) -> str:
    return format(int.from_bytes(_h(message), "big"), f"0{DIGEST_BITS}b")


def sign(kp: OtsKeyPair, message: bytes) -> OtsSignature:
    if kp.used:
        raise OneTimeKeyReuse("this one-time key has already signed a message")
    kp.used = True
    bits = _digest_bits(message)
    return OtsSignature(tuple(kp.secret[i][int(b)] for i, b in enumerate(bits)))


def verify(public: tuple[tuple[bytes, bytes], ...], message: bytes, sig: OtsSignature) -> bool:
    if len(public) != DIGEST_BITS or len(sig.revealed) != DIGEST_BITS:
        return False
    bits = _digest_bits(message)
    return all(
        _h(sig.revealed[i]) == public[i][int(b)] for i, b in enumerate(bits)
    )


def public_key_digest(public: tuple[tuple[bytes, bytes], ...]) -> bytes:
    """Compact commitment to a public key, published alongside (VID,BID)
    commitments so miners can check signatures without the full key roster."""
    h = hashlib.sha256()
    for d0, d1 in public:
        h.update(d0)
        h.update(d1)
    return h.digest()


def serialize_public(public: tuple[tuple[bytes, bytes], ...]) -> str:
    return "".join(d0.hex() + d1.hex() for d0, d1 in public)


def deserialize_public(hexstr: str) -> tuple[tuple[bytes, bytes], ...]:
    if len(hexstr) != DIGEST_BITS * 2 * 64:
        raise ValueError("public key must be 512 hex digests of 32 bytes")
    raw = bytes.fromhex(hexstr)
    return tuple(
        (raw[64 * i : 64 * i + 32], raw[64 * i + 32 : 64 * i + 64])
        for i in range(DIGEST_BITS)
    )


def serialize_signature(sig: OtsSignature) -> str:
    return "".join(p.hex() for p in sig.revealed)


def deserialize_signature(hexstr: str) -> OtsSignature:
    if len(hexstr) != DIGEST_BITS * 64:
        raise ValueError("signature must be 256 hex preimages of 32 bytes")
    raw = bytes.fromhex(hexstr)
    return OtsSignature(tuple(raw[32 * i : 32 * i + 32] for i in range(DIGEST_BITS)))
