"""Walk one small election end to end and print what happens at each stage.

Run with: python3 demos/run_election.py
"""

from qbvote.config import ElectionConfig
from qbvote.simnet import NetConfig, Scenario, VoterScript, run_scenario

config = ElectionConfig(
    election_id="demo-club-vote",
    candidates=("alice", "bob", "carol"),
    registration_open=0,
    voting_open=1_000,
    cutoff=60_000,
    miners=tuple(f"miner-{i}" for i in range(7)),
    seed=2024,
)

voters = [VoterScript(f"member-{i:02d}", choice=i % 3) for i in range(12)]
# member-00 is coerced into voting for candidate 1, then re-ballots and
# votes their real choice
voters[0] = VoterScript("member-00", choice=2, revote=True, coerced_choice=1)
# member-11 tries to vote after the cutoff
voters[11] = VoterScript("member-11", choice=0, late=True)

scenario = Scenario(config=config, voters=voters, forged_votes=3)
transcript = run_scenario(scenario, NetConfig(latency_min_ms=5, latency_max_ms=40, seed=1))

print(f"election: {config.election_id}, {len(voters)} voters, {len(config.miners)} miners")
print(f"chain height: {len(transcript.chain) - 1}")
print()
print("counts:")
for i, name in enumerate(config.candidates):
    print(f"  {name:8s} {transcript.tally_result.counts[i]}")
print()
print(f"votes on chain: {transcript.tally_result.total_cast}")
print(f"votes counted:  {transcript.tally_result.total_counted}")
print("rejections:")
for r in transcript.tally_result.rejected:
    print(f"  block {r['height']} index {r['index']}: {r['reason']}")
print()
print(f"audit findings: {transcript.audit_report.findings or 'none'}")
print(f"transcript digest: {transcript.digest()}")
