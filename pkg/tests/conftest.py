import pytest

from qbvote import sig as ots
from qbvote.authority import VotingAuthority
from qbvote.config import ElectionConfig
from qbvote.consensus import ConsensusEngine, MinerRoster
from qbvote.entropy import Id256, SeededTestSource


def make_config(
    n_miners=5,
    candidates=("alpha", "beta", "gamma"),
    voting_open=1_000,
    cutoff=100_000,
    seed=7,
    **kw,
):
    return ElectionConfig(
        election_id="test-election",
        candidates=candidates,
        registration_open=0,
        voting_open=voting_open,
        cutoff=cutoff,
        miners=tuple(f"miner-{i}" for i in range(n_miners)),
        seed=seed,
        **kw,
    )


class ElectionFixture:
    """A registered electorate with issued ballots, ready to cast votes."""

    def __init__(self, n_voters=5, seed=7, n_miners=5, **config_kw):
        self.config = make_config(n_miners=n_miners, seed=seed, **config_kw)
        self.va = VotingAuthority(self.config, SeededTestSource(seed))
        self.roster = MinerRoster.from_names(self.config.miners)
        self.engine = ConsensusEngine(self.config, self.roster, SeededTestSource(seed + 1))
        self.voters = []
        for i in range(n_voters):
            entropy = SeededTestSource(seed + 100 + i)
            kp = ots.keygen(entropy)
            pkg = self.va.register(
                f"cred-{i}", lambda _c: True, ots.public_key_digest(kp.public), 10 + i
            )
            vid = Id256.from_bytes(pkg.open())
            pkg = self.va.issue_ballot(vid, self.config.voting_open + 1 + i)
            bid = Id256.from_bytes(pkg.open())
            self.voters.append(
                {"credential": f"cred-{i}", "vid": vid, "bid": bid, "keypair": kp, "entropy": entropy}
            )

    @property
    def commitments(self):
        return self.va.publish_commitments()


@pytest.fixture
def election_factory():
    return ElectionFixture
