"""Public verification: chain integrity, recounts, and voter-side inclusion.

Everything here is derivable from public artifacts alone; the audit never
touches trustee shares or the encrypted voter database.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import sig as ots
from .authority import Commitment, commitments_to_json
from .entropy import Id256
from .ledger import Chain, chain_to_json, pair_digest, validate_chain
from .tally import TallyResult, tally

__all__ = ["AuditReport", "VoteLocation", "audit_election", "verify_my_vote"]


@dataclass
class AuditReport:
    chain_ok: bool
    first_bad_height: int | None
    recount_matches_announced: bool
    commitment_valid: int
    commitment_invalid: int
    signature_pass: int
    signature_fail: int
    anonymity_scan_clean: bool
    findings: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.findings

    def to_dict(self) -> dict:
        return {
            "chain_ok": self.chain_ok,
            "first_bad_height": self.first_bad_height,
            "recount_matches_announced": self.recount_matches_announced,
            "commitment_check": {
                "valid": self.commitment_valid,
                "invalid": self.commitment_invalid,
            },
            "signature_check": {
                "pass": self.signature_pass,
                "fail": self.signature_fail,
            },
            "anonymity_scan_clean": self.anonymity_scan_clean,
            "findings": self.findings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def audit_election(
    chain: Chain,
    commitments: tuple[Commitment, ...],
    announced: TallyResult,
    cutoff: int,
    num_candidates: int,
    known_credentials: list[str] = (),
    known_vids: list[str] = (),
) -> AuditReport:
    """Re-derive everything announceable and scan the public surface.

    ``known_credentials``/``known_vids`` are test-harness knowledge: an
    auditor who knows a secret must not find it in any public artifact.
    """
    findings: list[str] = []

    chain_verdict = validate_chain(chain)
    if not chain_verdict.valid:
        findings.append(f"chain invalid at height {chain_verdict.first_bad_height}")

    commitment_valid = commitment_invalid = 0
    signature_pass = signature_fail = 0
    by_digest = {c.digest: c for c in commitments}
    for height, index, v in chain.all_votes():
        c = by_digest.get(v.pair_digest)
        if c is None:
            commitment_invalid += 1
            findings.append(f"vote {height}/{index} matches no published commitment")
        else:
            commitment_valid += 1
        key_ok = c is not None and ots.public_key_digest(v.signer_public) == c.ots_public_digest
        if key_ok and ots.verify(v.signer_public, v.signed_message(), v.signature):
            signature_pass += 1
        else:
            signature_fail += 1
            findings.append(f"vote {height}/{index} fails signature verification")

    recount_matches = False
    if chain_verdict.valid:
        recount = tally(chain, commitments, cutoff, num_candidates)
        recount_matches = recount.counts == announced.counts
        if not recount_matches:
            findings.append(
                f"recount {recount.counts} disagrees with announced {announced.counts}"
            )

    public_blob = chain_to_json(chain) + commitments_to_json(commitments)
    scan_clean = True
    for token in list(known_credentials) + list(known_vids):
        if token and token in public_blob:
            scan_clean = False
            findings.append("secret material found in public artifacts")
            break

    return AuditReport(
        chain_ok=chain_verdict.valid,
        first_bad_height=chain_verdict.first_bad_height,
        recount_matches_announced=recount_matches,
        commitment_valid=commitment_valid,
        commitment_invalid=commitment_invalid,
        signature_pass=signature_pass,
        signature_fail=signature_fail,
        anonymity_scan_clean=scan_clean,
        findings=findings,
    )


@dataclass(frozen=True)
class VoteLocation:
    found: bool
    height: int | None = None
    index: int | None = None
    counted: bool | None = None


def verify_my_vote(
    chain: Chain,
    commitments: tuple[Commitment, ...],
    vid: Id256,
    bid: Id256,
    cutoff: int,
    num_candidates: int,
) -> list[VoteLocation]:
    """Locate the voter's own records on chain. Requires the voter's (vid, bid),
    which only the voter holds; returns one location per matching record."""
    digest = pair_digest(vid, bid)
    result = tally(chain, commitments, cutoff, num_candidates)
    counted_set = {(d, h) for d, h in result.counted}
    locations = []
    for height, index, v in chain.all_votes():
        if v.pair_digest == digest:
            winner = (digest.hex(), height) in counted_set and not any(
                r["height"] == height and r["index"] == index
                for r in result.rejected
            )
            locations.append(VoteLocation(True, height, index, winner))
    return locations or [VoteLocation(False)]
