"""Sealing the voter registry and recovering it with trustee shares.

After the election, the authority encrypts its voter database and splits the
key 3-of-5 among trustees. No single trustee (or any two) can link voters to
ballots; any three can, e.g. for a court-ordered audit.

Run with: python3 demos/trustee_recovery.py
"""

from qbvote import sig as ots
from qbvote.authority import VotingAuthority, unseal_database
from qbvote.config import ElectionConfig
from qbvote.entropy import Id256, SeededTestSource
from qbvote.secretshare import InsufficientShares

config = ElectionConfig(
    election_id="demo-recovery",
    candidates=("yes", "no"),
    registration_open=0,
    voting_open=1_000,
    cutoff=60_000,
    miners=("m0", "m1", "m2"),
    seed=5,
)

va = VotingAuthority(config, SeededTestSource(5))
for i in range(4):
    kp = ots.keygen(SeededTestSource(100 + i))
    pkg = va.register(f"citizen-{i}", lambda _c: True, ots.public_key_digest(kp.public), 10 + i)
    vid = Id256.from_bytes(pkg.open())
    va.issue_ballot(vid, 2_000 + i)

db = va.seal_database(3, 5)
print(f"sealed registry: {len(db.ciphertext)} bytes of ciphertext")
print(f"trustee shares issued: {len(db.trustee_shares.shares)} (threshold 3)")
print()

try:
    unseal_database(db, list(db.trustee_shares.shares[:2]), 3)
except InsufficientShares:
    print("2 shares: reconstruction refused (as intended)")

rows = unseal_database(db, list(db.trustee_shares.shares[:3]), 3)
print(f"3 shares: registry recovered, {len(rows)} voters")
for row in rows:
    print(f"  credential={row['credential_id']}  vid={row['vid'][:16]}...  bid={row['active_bid'][:16]}...")
