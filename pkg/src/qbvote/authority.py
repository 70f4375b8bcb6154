"""The voting authority: registration, VID/BID issuance, public commitments.

The authority is a single logical actor. Its public surface is the
append-only commitment list (digests and statuses only); the link between a
credential and its VID/BID lives solely in the database, which is sealed
under a key split among trustees.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Callable

from . import qkd
from . import secretshare
from . import sig as ots
from .config import ElectionConfig
from .entropy import EntropySource, Id256
from .ledger import pair_digest

__all__ = [
    "VotingAuthority",
    "VoterRecord",
    "Commitment",
    "EncryptedDb",
    "DeliveryPackage",
    "CredentialRejected",
    "AlreadyRegistered",
    "NotRegistered",
    "ElectionClosed",
    "BallotAlreadyActive",
    "NoActiveBallot",
    "KeyChecksumMismatch",
    "unseal_database",
    "commitments_to_json",
]


class CredentialRejected(ValueError):
    pass


class AlreadyRegistered(ValueError):
    pass


class NotRegistered(KeyError):
    pass


class ElectionClosed(RuntimeError):
    pass


class BallotAlreadyActive(RuntimeError):
    pass


class NoActiveBallot(RuntimeError):
    pass


class KeyChecksumMismatch(RuntimeError):
    pass


@dataclass
class VoterRecord:
    credential_id: str
    vid: Id256
    ots_public_digest: bytes
    active_bid: Id256 | None = None
    revoked_bids: list[Id256] = None

    def __post_init__(self):
        if self.revoked_bids is None:
            self.revoked_bids = []


@dataclass(frozen=True)
class Commitment:
    digest: bytes  # H(vid || bid)
    ots_public_digest: bytes
    status: str  # "active" | "revoked"; flips are monotone
    published_at: int
    revoked_at: int | None = None


@dataclass(frozen=True)
class DeliveryPackage:
    """Identifier delivery: payload one-time-pad encrypted under a QKD session
    key, signed by a fresh authority one-time key. ``key_bits`` is the
    receiving end of the QKD session (held by the voter, never published)."""

    ciphertext: qkd.OtpCiphertext
    key_bits: str
    va_signature: ots.OtsSignature
    va_public: tuple[tuple[bytes, bytes], ...]
    session_record: dict

    def open(self) -> bytes:
        payload = qkd.OneTimePad(self.key_bits).decrypt(self.ciphertext)
        if not ots.verify(self.va_public, payload, self.va_signature):
            raise ValueError("authority signature on delivery failed to verify")
        return payload


@dataclass(frozen=True)
class EncryptedDb:
    ciphertext: bytes
    key_checksum: bytes
    trustee_shares: secretshare.ShareSet


def _keystream(key: bytes, length: int) -> bytes:
    out = bytearray()
    counter = 0
    while len(out) < length:
        out.extend(hashlib.sha256(key + counter.to_bytes(8, "big")).digest())
        counter += 1
    return bytes(out[:length])


class VotingAuthority:
    def __init__(self, config: ElectionConfig, entropy: EntropySource):
        self.config = config
        self.entropy = entropy
        self.channel = qkd.ChannelModel(noise_prob=config.qkd_noise_prob)
        self._records: dict[str, VoterRecord] = {}
        self._by_vid: dict[str, VoterRecord] = {}
        self._commitments: list[Commitment] = []

    # -- delivery plumbing --------------------------------------------------

    def _qkd_key(self, min_bits: int) -> tuple[str, dict]:
        """Establish a link key of at least ``min_bits``, retrying aborted
        sessions and concatenating deliveries if one session is short."""
        key = ""
        record = None
        for _ in range(50):
            try:
                session = qkd.run_bb84(
                    self.config.qkd_pulses,
                    self.channel,
                    self.entropy,
                    self.config.qkd_abort_threshold,
                    self.config.qkd_sample_fraction,
                )
            except qkd.InsufficientSiftedBits:
                continue
            if not session.delivered:
                continue
            key += session.key
            record = session.to_record()
            if len(key) >= min_bits:
                return key, record
        raise RuntimeError("QKD link could not deliver enough key material")

    def _deliver(self, payload: bytes) -> DeliveryPackage:
        va_key = ots.keygen(self.entropy)
        signature = ots.sign(va_key, payload)
        key_bits, session_record = self._qkd_key(8 * len(payload))
        pad = qkd.OneTimePad(key_bits)
        return DeliveryPackage(
            ciphertext=pad.encrypt(payload),
            key_bits=key_bits,
            va_signature=signature,
            va_public=va_key.public,
            session_record=session_record,
        )

    # -- registration and ballots -------------------------------------------

    def register(
        self,
        credential: str,
        verifier: Callable[[str], bool],
        ots_public_digest: bytes,
        now: int,
    ) -> DeliveryPackage:
        """Check the credential, mint a fresh VID, deliver it encrypted."""
        if now >= self.config.voting_open:
            raise ElectionClosed("registration closes when voting opens")
        if credential in self._records:
            raise AlreadyRegistered(credential)
        if not verifier(credential):
            raise CredentialRejected(credential)
        vid = self.entropy.generate_id()
        record = VoterRecord(credential, vid, ots_public_digest)
        self._records[credential] = record
        self._by_vid[vid.hex] = record
        return self._deliver(vid.bytes)

    def issue_ballot(self, vid: Id256, now: int) -> DeliveryPackage:
        record = self._lookup(vid)
        if now >= self.config.cutoff:
            raise ElectionClosed("election is over")
        if record.active_bid is not None:
            raise BallotAlreadyActive("use reissue_ballot for a replacement")
        bid = self.entropy.generate_id()
        record.active_bid = bid
        self._commitments.append(
            Commitment(
                digest=pair_digest(vid, bid),
                ots_public_digest=record.ots_public_digest,
                status="active",
                published_at=now,
            )
        )
        return self._deliver(bid.bytes)

    def reissue_ballot(
        self, vid: Id256, now: int, new_ots_public_digest: bytes | None = None
    ) -> DeliveryPackage:
        """Re-vote support: revoke the active ballot, publish a fresh one."""
        record = self._lookup(vid)
        if now >= self.config.cutoff:
            raise ElectionClosed("election is over")
        if record.active_bid is None:
            raise NoActiveBallot(vid.hex)
        old_digest = pair_digest(vid, record.active_bid)
        for i, c in enumerate(self._commitments):
            if c.digest == old_digest and c.status == "active":
                self._commitments[i] = replace(c, status="revoked", revoked_at=now)
                break
        record.revoked_bids.append(record.active_bid)
        record.active_bid = None
        if new_ots_public_digest is not None:
            record.ots_public_digest = new_ots_public_digest
        return self.issue_ballot(vid, now)

    def _lookup(self, vid: Id256) -> VoterRecord:
        record = self._by_vid.get(vid.hex)
        if record is None:
            raise NotRegistered(vid.hex)
        return record

    def publish_commitments(self) -> tuple[Commitment, ...]:
        """Immutable snapshot; entries are never deleted, only flipped."""
        return tuple(self._commitments)

    @property
    def voter_count(self) -> int:
        return len(self._records)

    # -- database sealing -----------------------------------------------------

    def seal_database(self, k: int, n: int) -> EncryptedDb:
        """Encrypt the voter table under a fresh key and split it k-of-n."""
        if not self._records:
            raise ValueError("no records to seal")
        rows = [
            {
                "credential_id": r.credential_id,
                "vid": r.vid.hex,
                "active_bid": r.active_bid.hex if r.active_bid else None,
                "revoked_bids": [b.hex for b in r.revoked_bids],
                "ots_public_digest": r.ots_public_digest.hex(),
            }
            for r in self._records.values()
        ]
        plaintext = json.dumps(rows, sort_keys=True).encode()
        key = self.entropy.next_bytes(32)
        ciphertext = bytes(
            p ^ s for p, s in zip(plaintext, _keystream(key, len(plaintext)))
        )
        shares = secretshare.split(key, k, n, self.entropy)
        return EncryptedDb(
            ciphertext=ciphertext,
            key_checksum=hashlib.sha256(key).digest(),
            trustee_shares=shares,
        )


def unseal_database(db: EncryptedDb, shares: list[secretshare.Share], threshold: int) -> list[dict]:
    key = secretshare.reconstruct(shares, threshold)
    if hashlib.sha256(key).digest() != db.key_checksum:
        raise KeyChecksumMismatch("reconstructed key fails the checksum")
    plaintext = bytes(
        c ^ s for c, s in zip(db.ciphertext, _keystream(key, len(db.ciphertext)))
    )
    return json.loads(plaintext.decode())


def commitments_from_json(text: str) -> tuple[Commitment, ...]:
    return tuple(
        Commitment(
            digest=bytes.fromhex(c["digest"]),
            ots_public_digest=bytes.fromhex(c["ots_public_digest"]),
            status=c["status"],
            published_at=c["published_at"],
            revoked_at=c["revoked_at"],
        )
        for c in json.loads(text)
    )


def commitments_to_json(commitments: tuple[Commitment, ...]) -> str:
    """Commitment list file: append-only records with statuses and timestamps."""
    return json.dumps(
        [
            {
                "digest": c.digest.hex(),
                "ots_public_digest": c.ots_public_digest.hex(),
                "status": c.status,
                "published_at": c.published_at,
                "revoked_at": c.revoked_at,
            }
            for c in commitments
        ],
        indent=1,
    )
