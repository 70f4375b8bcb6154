"""DPoS block production: miner rotation, vote authentication, endorsement.

Miners take turns in roster order; an unavailable miner loses its turn and
the right passes to the next available one. A proposed block commits only if
a strict majority of the full roster independently re-validates it; otherwise
it is recorded as an orphan and its votes return to the pool.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import qkd
from . import sig as ots
from .authority import Commitment
from .config import ElectionConfig
from .entropy import EntropySource
from .ledger import (
    BLOCK_VOTE_CAP,
    Block,
    Chain,
    VoteRecord,
    append_block,
    block_hash,
    body_hash,
)

__all__ = [
    "Miner",
    "MinerRoster",
    "VotePool",
    "Endorsement",
    "AuthVerdict",
    "NoMinerAvailable",
    "NotYourSlot",
    "current_miner",
    "authenticate_vote",
    "ConsensusEngine",
]

COMPOSITION_TAGS = ("candidate_pool", "voting_pool", "civil_society", "independent")


class NoMinerAvailable(RuntimeError):
    pass


class NotYourSlot(RuntimeError):
    pass


@dataclass
class Miner:
    name: str
    tag: str
    available: bool = True


@dataclass
class MinerRoster:
    miners: list[Miner]

    def __post_init__(self):
        if len(self.miners) < 3:
            raise ValueError("roster needs at least 3 miners")
        names = [m.name for m in self.miners]
        if len(set(names)) != len(names):
            raise ValueError("miner identities must be distinct")

    @classmethod
    def from_names(cls, names: tuple[str, ...]) -> "MinerRoster":
        return cls(
            [Miner(n, COMPOSITION_TAGS[i % len(COMPOSITION_TAGS)]) for i, n in enumerate(names)]
        )

    def __len__(self) -> int:
        return len(self.miners)

    def majority(self) -> int:
        return len(self.miners) // 2 + 1


def current_miner(roster: MinerRoster, slot: int) -> int:
    """Round-robin by slot index; an unavailable scheduled miner's right goes
    to the next available one."""
    n = len(roster)
    for step in range(n):
        idx = (slot + step) % n
        if roster.miners[idx].available:
            return idx
    raise NoMinerAvailable("no miner is available")


@dataclass
class AuthVerdict:
    accept: bool
    reason: str | None = None


def authenticate_vote(
    v: VoteRecord,
    commitments: tuple[Commitment, ...],
    num_candidates: int,
    cutoff: int,
) -> AuthVerdict:
    """Eligibility check: the record's digest must match an active published
    commitment and its signature must verify under the committed key."""
    match = next((c for c in commitments if c.digest == v.pair_digest), None)
    if match is None:
        return AuthVerdict(False, "InvalidBallot")
    if match.status == "revoked":
        return AuthVerdict(False, "RevokedBallot")
    if ots.public_key_digest(v.signer_public) != match.ots_public_digest:
        return AuthVerdict(False, "BadSignature")
    if not ots.verify(v.signer_public, v.signed_message(), v.signature):
        return AuthVerdict(False, "BadSignature")
    if not 0 <= v.choice < num_candidates:
        return AuthVerdict(False, "BadChoice")
    if v.cast_at > cutoff:
        return AuthVerdict(False, "AfterCutoff")
    return AuthVerdict(True)


@dataclass
class VotePool:
    pending: list[tuple[int, VoteRecord]] = field(default_factory=list)

    def add(self, arrival_ts: int, vote: VoteRecord) -> None:
        self.pending.append((arrival_ts, vote))

    def __len__(self) -> int:
        return len(self.pending)


@dataclass(frozen=True)
class Endorsement:
    miner_id: int
    block_digest: bytes
    verdict: str  # "approve" | "reject"
    tag: qkd.WcTag | None = None


class ConsensusEngine:
    """One logical consensus actor per election, driven by the virtual clock.

    Miner-to-miner endorsement traffic is authenticated with Wegman-Carter
    tags under pairwise BB84-derived keys, re-keyed automatically when a pair
    key runs out of mask material.
    """

    def __init__(
        self,
        config: ElectionConfig,
        roster: MinerRoster,
        entropy: EntropySource,
    ):
        self.config = config
        self.roster = roster
        self.entropy = entropy
        self.pool = VotePool()
        self.chain = Chain.genesis(config)
        self.rejection_log: list[dict] = []
        self.orphan_log: list[dict] = []
        self.proposer_history: list[int] = []
        self._rotation_pointer = 0
        self._pair_keys: dict[tuple[int, int], qkd.AuthKey] = {}

    # -- link keys ------------------------------------------------------------

    def _pair_key(self, a: int, b: int) -> qkd.AuthKey:
        pair = (min(a, b), max(a, b))
        key = self._pair_keys.get(pair)
        if key is None or key.tags_remaining < 1:
            key = qkd.AuthKey(self._fresh_key_bits(1024))
            self._pair_keys[pair] = key
        return key

    def _fresh_key_bits(self, min_bits: int) -> str:
        bits = ""
        channel = qkd.ChannelModel(noise_prob=self.config.qkd_noise_prob)
        while len(bits) < min_bits:
            try:
                session = qkd.run_bb84(
                    self.config.qkd_pulses,
                    channel,
                    self.entropy,
                    self.config.qkd_abort_threshold,
                    self.config.qkd_sample_fraction,
                )
            except qkd.InsufficientSiftedBits:
                continue
            if session.delivered:
                bits += session.key
        return bits

    # -- pool -------------------------------------------------------------

    def submit_vote(self, arrival_ts: int, vote: VoteRecord) -> None:
        self.pool.add(arrival_ts, vote)

    # -- block production ---------------------------------------------------

    def next_proposer(self) -> int | None:
        """Advance the rotation one turn; unavailable miners are passed over,
        so the realized proposer sequence is the roster cycle with the
        unavailable miners' turns deleted."""
        n = len(self.roster)
        for step in range(n):
            idx = (self._rotation_pointer + step) % n
            if self.roster.miners[idx].available:
                self._rotation_pointer = (idx + 1) % n
                return idx
        return None

    def propose_block(
        self,
        miner_id: int,
        expected_proposer: int,
        commitments: tuple[Commitment, ...],
        now: int,
    ) -> Block:
        if miner_id != expected_proposer:
            raise NotYourSlot(f"miner {miner_id} proposed out of turn")
        accepted: list[VoteRecord] = []
        keep: list[tuple[int, VoteRecord]] = []
        for arrival_ts, vote in self.pool.pending:
            if len(accepted) >= BLOCK_VOTE_CAP:
                keep.append((arrival_ts, vote))
                continue
            verdict = authenticate_vote(
                vote, commitments, len(self.config.candidates), self.config.cutoff
            )
            if verdict.accept:
                accepted.append(vote)
            else:
                self.rejection_log.append(
                    {
                        "arrival_ts": arrival_ts,
                        "pair_digest": vote.pair_digest.hex(),
                        "reason": verdict.reason,
                    }
                )
        self.pool.pending = keep
        votes = tuple(accepted)
        return Block(
            height=len(self.chain),
            prev_hash=block_hash(self.chain.tip),
            body_hash=body_hash(votes),
            votes=votes,
            miner_id=miner_id,
            created_at=now,
        )

    def _miner_validates(self, block: Block, commitments: tuple[Commitment, ...]) -> bool:
        """Independent re-check a single endorser runs on a proposed block."""
        if block.height != len(self.chain):
            return False
        if block.prev_hash != block_hash(self.chain.tip):
            return False
        if block.body_hash != body_hash(block.votes):
            return False
        if len(block.votes) > BLOCK_VOTE_CAP:
            return False
        return all(
            authenticate_vote(
                v, commitments, len(self.config.candidates), self.config.cutoff
            ).accept
            for v in block.votes
        )

    def endorse_and_commit(
        self, block: Block, commitments: tuple[Commitment, ...]
    ) -> tuple[str, list[Endorsement]]:
        """Gather endorsements and commit on strict majority of the full
        roster; otherwise orphan the block and requeue its votes."""
        digest = block_hash(block)
        endorsements: list[Endorsement] = []
        for idx, miner in enumerate(self.roster.miners):
            if not miner.available or idx == block.miner_id:
                continue
            verdict = "approve" if self._miner_validates(block, commitments) else "reject"
            key = self._pair_key(idx, block.miner_id if block.miner_id >= 0 else idx)
            message = digest + verdict.encode()
            endorsements.append(Endorsement(idx, digest, verdict, qkd.wc_tag(key, message)))
        # proposer endorses its own block
        if block.miner_id >= 0 and self.roster.miners[block.miner_id].available:
            endorsements.append(Endorsement(block.miner_id, digest, "approve"))

        approvals = sum(
            1
            for e in endorsements
            if e.verdict == "approve"
            and (
                e.tag is None
                or qkd.wc_verify(
                    self._pair_key(e.miner_id, block.miner_id),
                    digest + e.verdict.encode(),
                    e.tag,
                )
            )
        )
        if approvals >= self.roster.majority():
            sealed = replace(
                block,
                endorsements=tuple((e.miner_id, e.verdict) for e in endorsements),
            )
            self.chain = append_block(self.chain, sealed)
            return "committed", endorsements
        self.orphan_log.append(
            {
                "block_digest": digest.hex(),
                "approvals": approvals,
                "roster_size": len(self.roster),
            }
        )
        # orphaned votes go back to the front of the pool in block order
        self.pool.pending = [(block.created_at, v) for v in block.votes] + self.pool.pending
        return "orphaned", endorsements

    def run_slot(self, commitments: tuple[Commitment, ...], now: int) -> str:
        """One DPoS turn: pick the proposer, build a block from the pending
        pool, and run endorsement. Returns the slot outcome."""
        proposer = self.next_proposer()
        if proposer is None:
            return "no_miner"
        if not self.pool.pending:
            return "idle"
        self.proposer_history.append(proposer)
        block = self.propose_block(proposer, proposer, commitments, now)
        if not block.votes:
            return "idle"
        outcome, _ = self.endorse_and_commit(block, commitments)
        return outcome
