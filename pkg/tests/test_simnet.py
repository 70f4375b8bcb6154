import pytest

from qbvote.simnet import (
    NetConfig,
    Scenario,
    ScenarioInvalid,
    VoterScript,
    run_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

from conftest import make_config


def _scenario(n_voters=6, cutoff=20_000, n_miners=5, seed=7, **kw):
    return Scenario(
        config=make_config(n_miners=n_miners, cutoff=cutoff, seed=seed),
        voters=[VoterScript(f"cred-{i}", i % 3) for i in range(n_voters)],
        **kw,
    )


class TestDeterminism:
    def test_same_seeds_identical_transcript(self):
        net = NetConfig(drop_prob=0.2, seed=11)
        a = run_scenario(_scenario(), net)
        b = run_scenario(_scenario(), net)
        assert a.digest() == b.digest()

    def test_env_seed_changes_transcript_not_result(self):
        a = run_scenario(_scenario(), NetConfig(seed=1))
        b = run_scenario(_scenario(), NetConfig(seed=2))
        assert a.digest() != b.digest()  # different latencies at least
        assert a.tally_result.counts == b.tally_result.counts

    def test_protocol_seed_changes_identifiers(self):
        a = run_scenario(_scenario(seed=7), NetConfig(seed=1))
        b = run_scenario(_scenario(seed=8), NetConfig(seed=1))
        assert a.voter_secrets["cred-0"]["vid"] != b.voter_secrets["cred-0"]["vid"]


class TestHonestRun:
    def test_all_votes_counted_and_audit_clean(self):
        t = run_scenario(_scenario(n_voters=9), NetConfig())
        assert t.tally_result.counts == {0: 3, 1: 3, 2: 3}
        assert t.tally_result.total_counted == 9
        assert t.audit_report.clean

    def test_commitments_published_one_per_voter(self):
        t = run_scenario(_scenario(n_voters=9), NetConfig())
        assert len(t.commitments) == 9
        assert all(c.status == "active" for c in t.commitments)


class TestNetworkFaults:
    def test_total_loss_zero_counts(self):
        t = run_scenario(_scenario(), NetConfig(drop_prob=1.0, seed=3))
        assert t.tally_result.total_counted == 0
        assert sum(t.tally_result.counts.values()) == 0
        assert t.audit_report.clean  # an empty chain is still consistent

    def test_duplicates_counted_once(self):
        s = _scenario(n_voters=4)
        for v in s.voters:
            v.duplicates = 5
        t = run_scenario(s, NetConfig(seed=5))
        assert t.tally_result.total_counted == 4
        dup = [r for r in t.tally_result.rejected if r["reason"] == "Duplicate"]
        assert len(dup) == 4 * 4


class TestAdversaries:
    def test_replayed_votes_do_not_change_counts(self):
        base = run_scenario(_scenario(), NetConfig(seed=9))
        replayed = run_scenario(_scenario(), NetConfig(adversary="replay_votes", seed=9))
        assert replayed.tally_result.counts == base.tally_result.counts
        assert replayed.audit_report.clean

    def test_flood_duplicates_do_not_change_counts(self):
        base = run_scenario(_scenario(), NetConfig(seed=9))
        flooded = run_scenario(_scenario(), NetConfig(adversary="flood_duplicates", seed=9))
        assert flooded.tally_result.counts == base.tally_result.counts

    def test_tampered_copies_rejected_as_bad_signature(self):
        t = run_scenario(_scenario(n_voters=8), NetConfig(adversary="tamper_in_flight", seed=13))
        tampered_sent = sum(1 for m in t.message_log if m.get("tampered"))
        assert tampered_sent > 0  # the adversary actually acted at this seed
        bad = [r for r in t.rejection_log if r["reason"] == "BadSignature"]
        assert len(bad) == tampered_sent
        # tampering only wastes the copy; untampered copies still count
        assert t.audit_report.clean

    def test_forged_votes_rejected(self):
        t = run_scenario(_scenario(forged_votes=5), NetConfig(seed=4))
        invalid = [r for r in t.rejection_log if r["reason"] == "InvalidBallot"]
        assert len(invalid) == 5
        assert t.tally_result.total_counted == 6

    def test_malicious_proposer_block_orphaned(self):
        t = run_scenario(_scenario(malicious_proposer=True), NetConfig(seed=6))
        assert t.orphan_log  # the forged block was refused by endorsers
        outcomes = [m["outcome"] for m in t.message_log if m["kind"] == "malicious_block"]
        assert outcomes == ["orphaned"]
        assert t.tally_result.total_counted == 6  # honest votes still land
        assert t.audit_report.clean


class TestVoterBehaviors:
    def test_late_voter_rejected_after_cutoff(self):
        s = _scenario(n_voters=3)
        s.voters[1].late = True
        t = run_scenario(s, NetConfig(seed=2))
        assert t.tally_result.total_counted == 2
        late = [r for r in t.rejection_log if r["reason"] == "AfterCutoff"]
        assert len(late) == 1

    def test_coerced_revote_counts_free_choice(self):
        s = _scenario(n_voters=3)
        s.voters[0].revote = True
        s.voters[0].choice = 2
        s.voters[0].coerced_choice = 1
        t = run_scenario(s, NetConfig(seed=2))
        # coerced vote is on chain but revoked; free vote counts
        assert t.tally_result.counts[2] >= 1
        revoked = [r for r in t.tally_result.rejected if r["reason"] == "RevokedBallot"]
        assert len(revoked) == 1
        assert t.tally_result.total_counted == 3
        assert t.audit_report.clean

    def test_miner_outage_does_not_lose_votes(self):
        s = _scenario(n_voters=6, unavailable={0: (1, 4), 1: (1, 4)})
        t = run_scenario(s, NetConfig(seed=8))
        assert t.tally_result.total_counted == 6
        assert 0 not in t.proposer_history[:2]


class TestScenarioFiles:
    def test_round_trip(self):
        s = _scenario(n_voters=2, forged_votes=3, unavailable={1: (2, 5)})
        s.voters[0].revote = True
        restored = scenario_from_dict(scenario_to_dict(s))
        assert scenario_to_dict(restored) == scenario_to_dict(s)
        assert restored.config == s.config

    def test_validation_rejects_bad_choice(self):
        s = _scenario(n_voters=1)
        s.voters[0].choice = 99
        with pytest.raises(ScenarioInvalid):
            run_scenario(s, NetConfig())

    def test_validation_rejects_bad_miner_index(self):
        s = _scenario(unavailable={42: (0, 1)})
        with pytest.raises(ScenarioInvalid):
            run_scenario(s, NetConfig())
