"""Deterministic public tallying from the chain and the commitment list.

Anyone can run this: it consumes only public artifacts. Among committed votes
sharing one commitment digest, the earliest cast time wins (chain order breaks
ties); votes under a revoked ballot never count, even if cast while the
ballot was still active, so a coerced early vote cannot beat the free re-vote.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from . import sig as ots
from .authority import Commitment
from .ledger import Chain, VoteRecord, block_hash, validate_chain

__all__ = ["TallyResult", "ChainInvalid", "tally"]


class ChainInvalid(RuntimeError):
    pass


@dataclass
class TallyResult:
    counts: dict[int, int]
    counted: list[tuple[str, int]]  # (commitment digest hex, block height)
    rejected: list[dict]  # locator + reason
    total_cast: int
    total_counted: int
    chain_tip_hash: str = ""
    commitments_hash: str = ""

    def to_dict(self) -> dict:
        return {
            "counts": {str(k): v for k, v in self.counts.items()},
            "counted": [list(c) for c in self.counted],
            "rejected": self.rejected,
            "total_cast": self.total_cast,
            "total_counted": self.total_counted,
            "chain_tip_hash": self.chain_tip_hash,
            "commitments_hash": self.commitments_hash,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _record_verdict(
    v: VoteRecord,
    by_digest: dict[bytes, Commitment],
    num_candidates: int,
    cutoff: int,
) -> str | None:
    c = by_digest.get(v.pair_digest)
    if c is None:
        return "InvalidBallot"
    if c.status == "revoked":
        return "RevokedBallot"
    if ots.public_key_digest(v.signer_public) != c.ots_public_digest:
        return "BadSignature"
    if not ots.verify(v.signer_public, v.signed_message(), v.signature):
        return "BadSignature"
    if not 0 <= v.choice < num_candidates:
        return "BadChoice"
    if v.cast_at > cutoff:
        return "AfterCutoff"
    return None


def tally(
    chain: Chain,
    commitments: tuple[Commitment, ...],
    cutoff: int,
    num_candidates: int,
) -> TallyResult:
    """Scan blocks in height order; count each commitment digest once, for the
    valid record with the smallest cast_at (chain position breaks ties)."""
    verdict = validate_chain(chain)
    if not verdict.valid:
        raise ChainInvalid(f"chain invalid at height {verdict.first_bad_height}")

    by_digest = {c.digest: c for c in commitments}

    rejected: list[dict] = []
    valid_by_digest: dict[bytes, list[tuple[int, int, int, VoteRecord]]] = {}
    total_cast = 0
    for height, index, v in chain.all_votes():
        total_cast += 1
        reason = _record_verdict(v, by_digest, num_candidates, cutoff)
        if reason is not None:
            rejected.append(
                {
                    "height": height,
                    "index": index,
                    "pair_digest": v.pair_digest.hex(),
                    "reason": reason,
                }
            )
            continue
        valid_by_digest.setdefault(v.pair_digest, []).append((v.cast_at, height, index, v))

    counts = {i: 0 for i in range(num_candidates)}
    winners: list[tuple[int, int, bytes, VoteRecord]] = []
    for digest, group in valid_by_digest.items():
        group.sort(key=lambda t: t[:3])
        _, height, index, winner = group[0]
        winners.append((height, index, digest, winner))
        for _, h, i, loser in group[1:]:
            rejected.append(
                {
                    "height": h,
                    "index": i,
                    "pair_digest": loser.pair_digest.hex(),
                    "reason": "Duplicate",
                }
            )

    counted = []
    for height, _, digest, winner in sorted(winners):
        counts[winner.choice] += 1
        counted.append((digest.hex(), height))

    return TallyResult(
        counts=counts,
        counted=counted,
        rejected=rejected,
        total_cast=total_cast,
        total_counted=len(counted),
        chain_tip_hash=block_hash(chain.tip).hex(),
        commitments_hash=hashlib.sha256(
            b"".join(c.digest + c.status.encode() for c in commitments)
        ).hexdigest(),
    )
