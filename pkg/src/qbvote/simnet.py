"""Deterministic election simulator: scripted voters, lossy network, faults.

A single discrete-event loop under a virtual clock drives registration,
ballot issuance, casting (including re-votes), DPoS block production, tally,
and audit. All environment randomness (latency, drops, adversary choices)
comes from the scenario-level seed; protocol entropy comes from per-party
seeded sources, so the two are independently controllable and a transcript is
a pure function of (scenario, seed).

Votes travel over the lossy simulated network; identifier delivery rides the
QKD-backed authenticated channel and is not subject to drops.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from . import sig as ots
from .audit import AuditReport, audit_election
from .authority import VotingAuthority, commitments_to_json
from .config import ElectionConfig
from .consensus import ConsensusEngine, MinerRoster
from .entropy import Id256, SeededTestSource
from .ledger import Chain, VoteRecord, chain_to_json
from .tally import TallyResult, tally

__all__ = [
    "NetConfig",
    "VoterScript",
    "Scenario",
    "Transcript",
    "ScenarioInvalid",
    "run_scenario",
    "deliver",
    "scenario_from_dict",
    "scenario_to_dict",
]


class ScenarioInvalid(ValueError):
    pass


@dataclass(frozen=True)
class NetConfig:
    latency_min_ms: int = 5
    latency_max_ms: int = 50
    drop_prob: float = 0.0
    # None | "replay_votes" | "flood_duplicates" | "tamper_in_flight"
    adversary: str | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ValueError("drop_prob must be in [0, 1]")
        if self.latency_min_ms > self.latency_max_ms or self.latency_min_ms < 0:
            raise ValueError("bad latency range")
        if self.adversary not in (None, "replay_votes", "flood_duplicates", "tamper_in_flight"):
            raise ValueError(f"unknown adversary {self.adversary!r}")


@dataclass
class VoterScript:
    credential: str
    choice: int
    revote: bool = False  # coerced first vote, then re-ballot + free vote
    coerced_choice: int = 0
    late: bool = False  # casts after the cutoff
    duplicates: int = 1  # copies of the same signed vote sent out
    cast_offset_ms: int | None = None  # offset from voting_open; default scripted spread


@dataclass
class Scenario:
    config: ElectionConfig
    voters: list[VoterScript]
    # miner index -> (first_slot, last_slot) unavailable, inclusive
    unavailable: dict[int, tuple[int, int]] = field(default_factory=dict)
    forged_votes: int = 0  # adversarial submissions with random (vid, bid)
    malicious_proposer: bool = False  # a proposer that packs a forged vote into a block

    def validate(self) -> None:
        for v in self.voters:
            if not 0 <= v.choice < len(self.config.candidates):
                raise ScenarioInvalid(f"voter {v.credential}: choice out of range")
            if v.revote and not 0 <= v.coerced_choice < len(self.config.candidates):
                raise ScenarioInvalid(f"voter {v.credential}: coerced choice out of range")
        for idx in self.unavailable:
            if not 0 <= idx < len(self.config.miners):
                raise ScenarioInvalid(f"unavailable miner index {idx} out of range")


@dataclass
class Transcript:
    chain: Chain
    commitments: tuple
    tally_result: TallyResult
    audit_report: AuditReport
    message_log: list[dict]
    rejection_log: list[dict]
    orphan_log: list[dict]
    proposer_history: list[int]
    voter_secrets: dict[str, dict]  # credential -> vid/bid hex (test-only knowledge)

    def digest(self) -> str:
        blob = (
            chain_to_json(self.chain)
            + commitments_to_json(self.commitments)
            + self.tally_result.to_json()
            + self.audit_report.to_json()
            + json.dumps(self.message_log, sort_keys=True)
        )
        return hashlib.sha256(blob.encode()).hexdigest()

    def write(self, outdir: str | Path) -> None:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "chain.json").write_text(chain_to_json(self.chain))
        (out / "commitments.json").write_text(commitments_to_json(self.commitments))
        (out / "tally.json").write_text(self.tally_result.to_json())
        (out / "audit.json").write_text(self.audit_report.to_json())
        (out / "messages.json").write_text(json.dumps(self.message_log, indent=1))
        (out / "rejections.json").write_text(json.dumps(self.rejection_log, indent=1))
        (out / "orphans.json").write_text(json.dumps(self.orphan_log, indent=1))


def deliver(send_ts: int, net: NetConfig, rng: random.Random) -> int | None:
    """Schedule one message: arrival time, or None when dropped."""
    latency = rng.randint(net.latency_min_ms, net.latency_max_ms)
    if net.drop_prob > 0 and rng.random() < net.drop_prob:
        return None
    return send_ts + latency


def _tampered_copy(vote: VoteRecord) -> VoteRecord:
    """In-flight bit flip on a signed field; authentication must catch it."""
    return VoteRecord(
        pair_digest=vote.pair_digest,
        choice=vote.choice,
        cast_at=vote.cast_at ^ 1,
        signature=vote.signature,
        signer_public=vote.signer_public,
    )


@dataclass
class _VoterState:
    script: VoterScript
    entropy: SeededTestSource
    vid: Id256 | None = None
    bid: Id256 | None = None
    keypair: ots.OtsKeyPair | None = None


def run_scenario(scenario: Scenario, net: NetConfig) -> Transcript:
    scenario.validate()
    config = scenario.config
    env_rng = random.Random(net.seed)

    va = VotingAuthority(config, SeededTestSource(config.seed))
    roster = MinerRoster.from_names(config.miners)
    engine = ConsensusEngine(config, roster, SeededTestSource(config.seed ^ 0x5EED))
    adversary_entropy = SeededTestSource(config.seed ^ 0xBAD)

    voters = [
        _VoterState(script=s, entropy=SeededTestSource(config.seed + 1000003 * (i + 1)))
        for i, s in enumerate(scenario.voters)
    ]

    message_log: list[dict] = []
    events: list[tuple[int, int, str, object]] = []
    seq = 0

    def push(ts: int, kind: str, payload: object) -> None:
        nonlocal seq
        heapq.heappush(events, (ts, seq, kind, payload))
        seq += 1

    # -- phase scheduling ---------------------------------------------------

    for i, vs in enumerate(voters):
        push(config.registration_open + 1 + i, "register", vs)
        push(config.voting_open + 1 + i, "issue_ballot", vs)
        if vs.script.late:
            base = config.cutoff + 1000 + i
        elif vs.script.cast_offset_ms is not None:
            base = config.voting_open + vs.script.cast_offset_ms
        else:
            base = config.voting_open + 100 + 7 * i
        if vs.script.revote:
            push(base, "cast", (vs, vs.script.coerced_choice))
            push(base + 3 * config.slot_ms, "reissue", vs)
            push(base + 4 * config.slot_ms, "cast", (vs, vs.script.choice))
        else:
            push(base, "cast", (vs, vs.script.choice))

    if scenario.forged_votes:
        push(config.voting_open + 50, "forge", scenario.forged_votes)
    if scenario.malicious_proposer:
        push(config.voting_open + 2 * config.slot_ms + 1, "malicious_block", None)

    n_slots = (config.cutoff - config.voting_open) // config.slot_ms + 10
    for k in range(1, n_slots + 1):
        push(config.voting_open + k * config.slot_ms, "slot", k)

    # -- event handlers -------------------------------------------------------

    def send_vote(vs_or_none, vote: VoteRecord, send_ts: int, copies: int) -> None:
        for c in range(copies):
            tampered = net.adversary == "tamper_in_flight" and env_rng.random() < 0.5
            arrival = deliver(send_ts, net, env_rng)
            entry = {
                "kind": "vote",
                "send_ts": send_ts,
                "arrival_ts": arrival,
                "dropped": arrival is None,
                "tampered": tampered,
                "copy": c,
                "pair_digest": vote.pair_digest.hex(),
            }
            message_log.append(entry)
            if arrival is None:
                continue
            payload = _tampered_copy(vote) if tampered else vote
            push(arrival, "vote_arrival", payload)
            if net.adversary == "replay_votes" and env_rng.random() < 0.5:
                replay_at = arrival + env_rng.randint(1, 2 * config.slot_ms)
                message_log.append({**entry, "kind": "vote_replay", "arrival_ts": replay_at})
                push(replay_at, "vote_arrival", payload)

    def handle(ts: int, kind: str, payload) -> None:
        if kind == "register":
            vs = payload
            vs.keypair = ots.keygen(vs.entropy)
            pkg = va.register(
                vs.script.credential,
                lambda _c: True,
                ots.public_key_digest(vs.keypair.public),
                ts,
            )
            vs.vid = Id256.from_bytes(pkg.open())
            message_log.append({"kind": "register", "send_ts": ts, "credential_ok": True})
        elif kind == "issue_ballot":
            vs = payload
            pkg = va.issue_ballot(vs.vid, ts)
            vs.bid = Id256.from_bytes(pkg.open())
            message_log.append({"kind": "ballot", "send_ts": ts})
        elif kind == "reissue":
            vs = payload
            vs.keypair = ots.keygen(vs.entropy)
            pkg = va.reissue_ballot(
                vs.vid, ts, ots.public_key_digest(vs.keypair.public)
            )
            vs.bid = Id256.from_bytes(pkg.open())
            message_log.append({"kind": "reballot", "send_ts": ts})
        elif kind == "cast":
            vs, choice = payload
            copies = vs.script.duplicates
            if net.adversary == "flood_duplicates":
                copies = max(copies, 10)
            vote = VoteRecord.create(vs.vid, vs.bid, choice, ts, vs.keypair)
            send_vote(vs, vote, ts, copies)
        elif kind == "forge":
            for _ in range(payload):
                kp = ots.keygen(adversary_entropy)
                vote = VoteRecord.create(
                    adversary_entropy.generate_id(),
                    adversary_entropy.generate_id(),
                    0,
                    ts,
                    kp,
                )
                send_vote(None, vote, ts, 1)
        elif kind == "vote_arrival":
            engine.submit_vote(ts, payload)
        elif kind == "malicious_block":
            # a rogue proposer packs a forged vote into a block directly,
            # bypassing its own validation
            from .ledger import Block, block_hash, body_hash

            kp = ots.keygen(adversary_entropy)
            forged = VoteRecord.create(
                adversary_entropy.generate_id(),
                adversary_entropy.generate_id(),
                0,
                ts,
                kp,
            )
            honest = tuple(v for _, v in engine.pool.pending)
            engine.pool.pending = []
            votes = honest + (forged,)
            block = Block(
                height=len(engine.chain),
                prev_hash=block_hash(engine.chain.tip),
                body_hash=body_hash(votes),
                votes=votes,
                miner_id=0,
                created_at=ts,
            )
            outcome, _ = engine.endorse_and_commit(block, va.publish_commitments())
            message_log.append({"kind": "malicious_block", "send_ts": ts, "outcome": outcome})
        elif kind == "slot":
            k = payload
            for idx, miner in enumerate(roster.miners):
                window = scenario.unavailable.get(idx)
                miner.available = not (window and window[0] <= k <= window[1])
            outcome = engine.run_slot(va.publish_commitments(), ts)
            if outcome not in ("idle", "no_miner"):
                message_log.append({"kind": "slot", "send_ts": ts, "slot": k, "outcome": outcome})

    while events:
        ts, _, kind, payload = heapq.heappop(events)
        handle(ts, kind, payload)

    # -- tally and audit ----------------------------------------------------

    commitments = va.publish_commitments()
    result = tally(engine.chain, commitments, config.cutoff, len(config.candidates))
    secrets = {
        vs.script.credential: {
            "vid": vs.vid.hex if vs.vid else None,
            "bid": vs.bid.hex if vs.bid else None,
        }
        for vs in voters
    }
    report = audit_election(
        engine.chain,
        commitments,
        result,
        config.cutoff,
        len(config.candidates),
        known_credentials=[vs.script.credential for vs in voters],
        known_vids=[vs.vid.hex for vs in voters if vs.vid],
    )

    return Transcript(
        chain=engine.chain,
        commitments=commitments,
        tally_result=result,
        audit_report=report,
        message_log=message_log,
        rejection_log=engine.rejection_log,
        orphan_log=engine.orphan_log,
        proposer_history=engine.proposer_history,
        voter_secrets=secrets,
    )


# ---------------------------------------------------------------------------
# Scenario files: plain JSON, human-editable.
# ---------------------------------------------------------------------------


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "config": s.config.to_dict(),
        "voters": [
            {
                "credential": v.credential,
                "choice": v.choice,
                "revote": v.revote,
                "coerced_choice": v.coerced_choice,
                "late": v.late,
                "duplicates": v.duplicates,
                "cast_offset_ms": v.cast_offset_ms,
            }
            for v in s.voters
        ],
        "unavailable": {str(k): list(v) for k, v in s.unavailable.items()},
        "forged_votes": s.forged_votes,
        "malicious_proposer": s.malicious_proposer,
    }


def scenario_from_dict(d: dict) -> Scenario:
    return Scenario(
        config=ElectionConfig.from_dict(d["config"]),
        voters=[VoterScript(**v) for v in d["voters"]],
        unavailable={int(k): tuple(v) for k, v in d.get("unavailable", {}).items()},
        forged_votes=d.get("forged_votes", 0),
        malicious_proposer=d.get("malicious_proposer", False),
    )
