import pytest

from qbvote import sig as ots
from qbvote.authority import (
    AlreadyRegistered,
    BallotAlreadyActive,
    CredentialRejected,
    ElectionClosed,
    KeyChecksumMismatch,
    NoActiveBallot,
    NotRegistered,
    VotingAuthority,
    commitments_from_json,
    commitments_to_json,
    unseal_database,
)
from qbvote.entropy import Id256, SeededTestSource
from qbvote.ledger import pair_digest
from qbvote.secretshare import InsufficientShares, Share

from conftest import make_config


def _va(seed=1, **kw):
    return VotingAuthority(make_config(seed=seed, **kw), SeededTestSource(seed))


def _register(va, credential="cred-0", now=10, seed=50):
    kp = ots.keygen(SeededTestSource(seed))
    pkg = va.register(credential, lambda _c: True, ots.public_key_digest(kp.public), now)
    return Id256.from_bytes(pkg.open()), kp


class TestRegister:
    def test_fresh_credential(self):
        va = _va()
        vid, _ = _register(va)
        assert va.voter_count == 1
        assert len(vid.hex) == 64

    def test_duplicate_credential(self):
        va = _va()
        _register(va)
        with pytest.raises(AlreadyRegistered):
            _register(va)

    def test_verifier_rejects(self):
        va = _va()
        with pytest.raises(CredentialRejected):
            va.register("bad", lambda _c: False, bytes(32), 10)
        assert va.voter_count == 0

    def test_registration_closes_at_voting_open(self):
        va = _va()
        with pytest.raises(ElectionClosed):
            va.register("late", lambda _c: True, bytes(32), va.config.voting_open)

    def test_delivery_is_encrypted_and_signed(self):
        va = _va()
        kp = ots.keygen(SeededTestSource(51))
        pkg = va.register("cred-x", lambda _c: True, ots.public_key_digest(kp.public), 10)
        vid_bytes = pkg.open()
        assert pkg.ciphertext.data != vid_bytes  # pad actually applied
        assert pkg.session_record["outcome"] == "delivered"


class TestIssueBallot:
    def test_commitment_published(self):
        va = _va()
        vid, _ = _register(va)
        pkg = va.issue_ballot(vid, 2000)
        bid = Id256.from_bytes(pkg.open())
        commitments = va.publish_commitments()
        assert len(commitments) == 1
        assert commitments[0].status == "active"
        assert commitments[0].digest == pair_digest(vid, bid)

    def test_unregistered_vid(self):
        va = _va()
        with pytest.raises(NotRegistered):
            va.issue_ballot(Id256("ab" * 32), 2000)

    def test_double_issue_needs_reissue(self):
        va = _va()
        vid, _ = _register(va)
        va.issue_ballot(vid, 2000)
        with pytest.raises(BallotAlreadyActive):
            va.issue_ballot(vid, 2001)

    def test_election_closed(self):
        va = _va()
        vid, _ = _register(va)
        with pytest.raises(ElectionClosed):
            va.issue_ballot(vid, va.config.cutoff)


class TestReissueBallot:
    def test_revokes_and_publishes(self):
        va = _va()
        vid, _ = _register(va)
        va.issue_ballot(vid, 2000)
        va.reissue_ballot(vid, 3000)
        commitments = va.publish_commitments()
        assert [c.status for c in commitments] == ["revoked", "active"]
        assert commitments[0].revoked_at == 3000

    def test_no_active_ballot(self):
        va = _va()
        vid, _ = _register(va)
        with pytest.raises(NoActiveBallot):
            va.reissue_ballot(vid, 2000)

    def test_three_reissues(self):
        va = _va()
        vid, _ = _register(va)
        va.issue_ballot(vid, 2000)
        for t in (3000, 4000):
            va.reissue_ballot(vid, t)
        commitments = va.publish_commitments()
        assert [c.status for c in commitments] == ["revoked", "revoked", "active"]
        assert len({c.digest for c in commitments}) == 3


class TestPublishCommitments:
    def test_empty_before_issuance(self):
        assert _va().publish_commitments() == ()

    def test_counts_after_issuances(self):
        va = _va()
        for i in range(3):
            vid, _ = _register(va, f"cred-{i}", now=10 + i, seed=60 + i)
            va.issue_ballot(vid, 2000 + i)
        assert len(va.publish_commitments()) == 3
        assert all(c.status == "active" for c in va.publish_commitments())

    def test_reissue_appends_without_deletion(self):
        va = _va()
        vids = []
        for i in range(3):
            vid, _ = _register(va, f"cred-{i}", now=10 + i, seed=60 + i)
            va.issue_ballot(vid, 2000 + i)
            vids.append(vid)
        va.reissue_ballot(vids[1], 5000)
        commitments = va.publish_commitments()
        assert len(commitments) == 4
        statuses = [c.status for c in commitments]
        assert statuses.count("revoked") == 1 and statuses.count("active") == 3

    def test_soundness_active_commitments_match_records(self):
        va = _va()
        pairs = []
        for i in range(4):
            vid, _ = _register(va, f"cred-{i}", now=10 + i, seed=70 + i)
            bid = Id256.from_bytes(va.issue_ballot(vid, 2000 + i).open())
            pairs.append((vid, bid))
        active = [c for c in va.publish_commitments() if c.status == "active"]
        assert {c.digest for c in active} == {pair_digest(v, b) for v, b in pairs}

    def test_serialization_round_trip(self):
        va = _va()
        vid, _ = _register(va)
        va.issue_ballot(vid, 2000)
        va.reissue_ballot(vid, 3000)
        text = commitments_to_json(va.publish_commitments())
        assert commitments_from_json(text) == va.publish_commitments()


class TestSealDatabase:
    def _sealed(self):
        va = _va()
        pairs = []
        for i in range(3):
            vid, _ = _register(va, f"cred-{i}", now=10 + i, seed=80 + i)
            bid = Id256.from_bytes(va.issue_ballot(vid, 2000 + i).open())
            pairs.append((vid, bid))
        return va, pairs, va.seal_database(3, 5)

    def test_round_trip_with_threshold_shares(self):
        va, pairs, db = self._sealed()
        rows = unseal_database(db, list(db.trustee_shares.shares[:3]), 3)
        assert {r["vid"] for r in rows} == {v.hex for v, _ in pairs}
        assert {r["active_bid"] for r in rows} == {b.hex for _, b in pairs}

    def test_below_threshold_fails(self):
        _, _, db = self._sealed()
        with pytest.raises(InsufficientShares):
            unseal_database(db, list(db.trustee_shares.shares[:2]), 3)

    def test_corrupt_share_detected_by_checksum(self):
        _, _, db = self._sealed()
        good = list(db.trustee_shares.shares[:3])
        payload = list(good[0].payload)
        payload[0] = (payload[0] + 1) % 257
        with pytest.raises(KeyChecksumMismatch):
            unseal_database(db, [Share(good[0].index, tuple(payload))] + good[1:], 3)

    def test_ciphertext_hides_vids(self):
        va, pairs, db = self._sealed()
        blob = db.ciphertext
        for vid, bid in pairs:
            assert vid.hex.encode() not in blob
            assert bid.hex.encode() not in blob
            assert vid.bytes not in blob

    def test_empty_db_rejected(self):
        with pytest.raises(ValueError):
            _va().seal_database(2, 3)


class TestAnonymitySurface:
    def test_public_surface_contains_no_secrets(self):
        va = _va()
        credentials, vids = [], []
        for i in range(5):
            cred = f"secret-credential-{i}"
            vid, _ = _register(va, cred, now=10 + i, seed=90 + i)
            va.issue_ballot(vid, 2000 + i)
            credentials.append(cred)
            vids.append(vid.hex)
        public = commitments_to_json(va.publish_commitments())
        for token in credentials + vids:
            assert token not in public
