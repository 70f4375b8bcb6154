"""BB84 key exchange under three channel conditions.

An intercept-resend attacker measures every pulse in a random basis and
resends what it saw. Half its measurements use the wrong basis, and each of
those corrupts the sifted bit with probability 1/2, so the attacker leaves a
~25% error rate behind, far above the 11% abort threshold.

Run with: python3 demos/eavesdropper.py
"""

from qbvote.entropy import SeededTestSource
from qbvote.qkd import ChannelModel, run_bb84

PULSES = 10_000

for label, channel in [
    ("clean channel", ChannelModel()),
    ("5% detector noise", ChannelModel(noise_prob=0.05)),
    ("intercept-resend attacker", ChannelModel(eavesdrop_fraction=1.0)),
]:
    session = run_bb84(PULSES, channel, SeededTestSource(7))
    record = session.to_record()
    print(f"{label}:")
    print(f"  pulses sent        {PULSES}")
    print(f"  sifted bits        {record['sifted_count']}")
    print(f"  sampled for QBER   {record['sampled_count']}")
    print(f"  estimated QBER     {record['qber_estimate']:.4f}")
    print(f"  outcome            {record['outcome']}")
    if session.delivered:
        print(f"  delivered key bits {record['key_bits']}")
    print()
