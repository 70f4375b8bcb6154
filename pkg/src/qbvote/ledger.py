"""Hash-linked permissioned blockchain of vote records.

Canonical serialization is length-prefixed fields in declaration order with
big-endian fixed-width integers, so hashes are stable across platforms.

On-chain vote records carry the commitment digest H(vid || bid), never the
identifiers themselves: everything public needs only the digest (eligibility
matching, dedup, recount), and keeping the raw ids off the public surface is
what the anonymity byte-scan checks.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

from .config import ElectionConfig
from .entropy import Id256
from . import sig as ots

__all__ = [
    "VoteRecord",
    "Block",
    "Chain",
    "ChainVerdict",
    "HeightMismatch",
    "PrevHashMismatch",
    "ZERO32",
    "pair_digest",
    "vote_message",
    "block_hash",
    "make_genesis",
    "append_block",
    "validate_chain",
    "chain_to_json",
    "chain_from_json",
]

ZERO32 = bytes(32)
BLOCK_VOTE_CAP = 1000


class HeightMismatch(ValueError):
    pass


class PrevHashMismatch(ValueError):
    pass


def _u64(v: int) -> bytes:
    return v.to_bytes(8, "big", signed=True)


def _lp(data: bytes) -> bytes:
    return len(data).to_bytes(4, "big") + data


def pair_digest(vid: Id256, bid: Id256) -> bytes:
    """Commitment digest over the fixed-width 32||32 byte concatenation."""
    return hashlib.sha256(vid.bytes + bid.bytes).digest()


def vote_message(digest: bytes, choice: int, cast_at: int) -> bytes:
    """The byte string a voter signs: commitment digest, choice, timestamp."""
    return _lp(digest) + _u64(choice) + _u64(cast_at)


@dataclass(frozen=True)
class VoteRecord:
    pair_digest: bytes  # H(vid || bid), the public eligibility anchor
    choice: int
    cast_at: int  # virtual-clock milliseconds, claimed by the voter and signed
    signature: ots.OtsSignature
    signer_public: tuple[tuple[bytes, bytes], ...]

    @classmethod
    def create(
        cls, vid: Id256, bid: Id256, choice: int, cast_at: int, keypair: ots.OtsKeyPair
    ) -> "VoteRecord":
        digest = pair_digest(vid, bid)
        signature = ots.sign(keypair, vote_message(digest, choice, cast_at))
        return cls(digest, choice, cast_at, signature, keypair.public)

    def signed_message(self) -> bytes:
        return vote_message(self.pair_digest, self.choice, self.cast_at)

    def canonical_bytes(self) -> bytes:
        return (
            _lp(self.pair_digest)
            + _u64(self.choice)
            + _u64(self.cast_at)
            + _lp(b"".join(self.signature.revealed))
            + _lp(b"".join(d0 + d1 for d0, d1 in self.signer_public))
        )


def body_hash(votes: tuple[VoteRecord, ...]) -> bytes:
    h = hashlib.sha256()
    for v in votes:
        h.update(_lp(v.canonical_bytes()))
    return h.digest()


@dataclass(frozen=True)
class Block:
    height: int
    prev_hash: bytes
    body_hash: bytes
    votes: tuple[VoteRecord, ...]
    miner_id: int  # roster index; -1 for genesis
    created_at: int
    # endorsements attach after hashing and are excluded from block_hash
    endorsements: tuple[tuple[int, str], ...] = ()


def block_hash(block: Block) -> bytes:
    return hashlib.sha256(
        _u64(block.height)
        + _lp(block.prev_hash)
        + _lp(block.body_hash)
        + _u64(block.miner_id)
        + _u64(block.created_at)
    ).digest()


def make_genesis(config: ElectionConfig) -> Block:
    return Block(
        height=0,
        prev_hash=ZERO32,
        body_hash=hashlib.sha256(config.digest()).digest(),
        votes=(),
        miner_id=-1,
        created_at=config.registration_open,
    )


@dataclass(frozen=True)
class Chain:
    blocks: tuple[Block, ...]
    config_digest: bytes

    @classmethod
    def genesis(cls, config: ElectionConfig) -> "Chain":
        return cls(blocks=(make_genesis(config),), config_digest=config.digest())

    @property
    def tip(self) -> Block:
        return self.blocks[-1]

    def __len__(self) -> int:
        return len(self.blocks)

    def all_votes(self) -> list[tuple[int, int, VoteRecord]]:
        """(height, index-in-block, record) in chain order."""
        return [
            (b.height, i, v)
            for b in self.blocks
            for i, v in enumerate(b.votes)
        ]


def append_block(chain: Chain, block: Block) -> Chain:
    """Extend the chain; the old snapshot stays valid (chains are immutable)."""
    if block.height != len(chain.blocks):
        raise HeightMismatch(f"expected height {len(chain.blocks)}, got {block.height}")
    if block.prev_hash != block_hash(chain.tip):
        raise PrevHashMismatch("block does not extend the current tip")
    return Chain(blocks=chain.blocks + (block,), config_digest=chain.config_digest)


@dataclass(frozen=True)
class ChainVerdict:
    valid: bool
    first_bad_height: int | None = None


def validate_chain(chain: Chain) -> ChainVerdict:
    """Recompute every body hash and link; report the lowest disagreeing height."""
    prev = None
    for expect_h, block in enumerate(chain.blocks):
        if block.height != expect_h:
            return ChainVerdict(False, expect_h)
        if block.height == 0:
            ok_prev = block.prev_hash == ZERO32
            expected_body = hashlib.sha256(chain.config_digest).digest() if not block.votes else None
            ok_body = block.body_hash == expected_body
        else:
            ok_prev = block.prev_hash == block_hash(prev)
            ok_body = block.body_hash == body_hash(block.votes)
        if not (ok_prev and ok_body):
            return ChainVerdict(False, block.height)
        prev = block
    return ChainVerdict(True)


# ---------------------------------------------------------------------------
# Chain file format: JSON, hex digests, readable without the consensus engine.
# ---------------------------------------------------------------------------


def _vote_to_dict(v: VoteRecord) -> dict:
    return {
        "pair_digest": v.pair_digest.hex(),
        "choice": v.choice,
        "cast_at": v.cast_at,
        "signature": ots.serialize_signature(v.signature),
        "signer_public": ots.serialize_public(v.signer_public),
    }


def _vote_from_dict(d: dict) -> VoteRecord:
    return VoteRecord(
        pair_digest=bytes.fromhex(d["pair_digest"]),
        choice=d["choice"],
        cast_at=d["cast_at"],
        signature=ots.deserialize_signature(d["signature"]),
        signer_public=ots.deserialize_public(d["signer_public"]),
    )


def chain_to_json(chain: Chain) -> str:
    return json.dumps(
        {
            "config_digest": chain.config_digest.hex(),
            "blocks": [
                {
                    "height": b.height,
                    "prev_hash": b.prev_hash.hex(),
                    "body_hash": b.body_hash.hex(),
                    "miner_id": b.miner_id,
                    "created_at": b.created_at,
                    "endorsements": [[m, v] for m, v in b.endorsements],
                    "votes": [_vote_to_dict(v) for v in b.votes],
                }
                for b in chain.blocks
            ],
        },
        indent=1,
    )


def chain_from_json(text: str) -> Chain:
    doc = json.loads(text)
    blocks = tuple(
        Block(
            height=b["height"],
            prev_hash=bytes.fromhex(b["prev_hash"]),
            body_hash=bytes.fromhex(b["body_hash"]),
            votes=tuple(_vote_from_dict(v) for v in b["votes"]),
            miner_id=b["miner_id"],
            created_at=b["created_at"],
            endorsements=tuple((m, v) for m, v in b["endorsements"]),
        )
        for b in doc["blocks"]
    )
    return Chain(blocks=blocks, config_digest=bytes.fromhex(doc["config_digest"]))
