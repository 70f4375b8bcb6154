"""Threshold secret sharing for the authority's database key.

Shamir's scheme over GF(257), one field element per secret byte: any k of n
trustees reconstruct the key, any smaller coalition learns nothing (every
candidate secret stays equally consistent with their shares).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .entropy import EntropySource

__all__ = [
    "ShareSet",
    "Share",
    "BadThreshold",
    "InsufficientShares",
    "DuplicateIndex",
    "FIELD_MODULUS",
    "split",
    "reconstruct",
    "share_records",
    "share_from_record",
]

FIELD_MODULUS = 257  # smallest prime covering byte values 0..255


class BadThreshold(ValueError):
    pass


class InsufficientShares(ValueError):
    pass


class DuplicateIndex(ValueError):
    pass


@dataclass(frozen=True)
class Share:
    index: int  # evaluation point, 1..n
    payload: tuple[int, ...]  # one field element per secret byte


@dataclass(frozen=True)
class ShareSet:
    threshold: int
    total: int
    shares: tuple[Share, ...]
    field_modulus: int = FIELD_MODULUS


def _eval_poly(coeffs: list[int], x: int, p: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def split(secret: bytes, k: int, n: int, entropy: EntropySource) -> ShareSet:
    """Split ``secret`` into n shares, any k of which reconstruct it.

    One random degree-(k-1) polynomial per byte, constant term = byte value,
    evaluated at x = 1..n.
    """
    if not 1 <= k <= n <= 255:
        raise BadThreshold(f"need 1 <= k <= n <= 255, got k={k}, n={n}")
    if not secret:
        raise ValueError("secret must be nonempty")

    polys = [
        [b] + [entropy.randint_below(FIELD_MODULUS) for _ in range(k - 1)]
        for b in secret
    ]
    shares = tuple(
        Share(index=x, payload=tuple(_eval_poly(poly, x, FIELD_MODULUS) for poly in polys))
        for x in range(1, n + 1)
    )
    return ShareSet(threshold=k, total=n, shares=shares)


def reconstruct(shares: list[Share], threshold: int) -> bytes:
    """Lagrange-interpolate each byte polynomial at 0.

    A corrupted payload yields a wrong secret, not an error; callers detect
    that via a key checksum.
    """
    if len(shares) < threshold:
        raise InsufficientShares(f"need {threshold} shares, got {len(shares)}")
    use = shares[:threshold]
    xs = [s.index for s in use]
    if len(set(xs)) != len(xs):
        raise DuplicateIndex("shares must have distinct indices")

    p = FIELD_MODULUS
    weights = []
    for j, xj in enumerate(xs):
        num, den = 1, 1
        for m, xm in enumerate(xs):
            if m == j:
                continue
            num = (num * (-xm)) % p
            den = (den * (xj - xm)) % p
        weights.append((num * pow(den, -1, p)) % p)

    length = len(use[0].payload)
    out = bytearray()
    for i in range(length):
        v = sum(w * s.payload[i] for w, s in zip(weights, use)) % p
        out.append(v % 256)
    return bytes(out)


def share_records(ss: ShareSet, election_id: str) -> list[str]:
    """One JSON line per trustee: index, field modulus, hex payload, election id."""
    lines = []
    for s in ss.shares:
        payload_hex = "".join(format(v, "04x") for v in s.payload)
        lines.append(
            json.dumps(
                {
                    "index": s.index,
                    "field_modulus": ss.field_modulus,
                    "payload_hex": payload_hex,
                    "election_id": election_id,
                },
                sort_keys=True,
            )
        )
    return lines


def share_from_record(line: str) -> Share:
    rec = json.loads(line)
    hexstr = rec["payload_hex"]
    payload = tuple(int(hexstr[i : i + 4], 16) for i in range(0, len(hexstr), 4))
    return Share(index=rec["index"], payload=payload)
