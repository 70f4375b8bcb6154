"""BB84 key establishment over a simulated qubit channel.

Covers the link-key layer of the election: sifting, QBER estimation with
abort, an optional intercept-resend eavesdropper, Wegman-Carter tags for the
classical channel, and one-time-pad encryption of delivered payloads.

No error correction or privacy amplification: at this scale a key is either
delivered error-free or the session aborts and is retried.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .entropy import EntropySource, bits_to_bytes, bytes_to_bits

__all__ = [
    "ChannelModel",
    "Bb84Session",
    "AuthKey",
    "WcTag",
    "OneTimePad",
    "OtpCiphertext",
    "LengthMismatch",
    "EmptySample",
    "InsufficientSiftedBits",
    "KeyExhausted",
    "sift",
    "estimate_qber",
    "run_bb84",
    "wc_tag",
    "wc_verify",
]

DEFAULT_QBER_ABORT_THRESHOLD = 0.11  # standard BB84 security margin
DEFAULT_SAMPLE_FRACTION = 0.5

# Largest 64-bit prime; field for the polynomial-evaluation universal hash.
WC_PRIME = 2**64 - 59
WC_MASK_BITS = 64


class LengthMismatch(ValueError):
    pass


class EmptySample(ValueError):
    pass


class InsufficientSiftedBits(RuntimeError):
    pass


class KeyExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class ChannelModel:
    """Qubit channel: bit-flip noise plus an optional intercept-resend attacker.

    ``eavesdrop_fraction`` is the probability each pulse is attacked; 0 means
    no eavesdropper.
    """

    noise_prob: float = 0.0
    eavesdrop_fraction: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.noise_prob <= 0.5:
            raise ValueError("noise_prob must be in [0, 0.5]")
        if not 0.0 <= self.eavesdrop_fraction <= 1.0:
            raise ValueError("eavesdrop_fraction must be in [0, 1]")


@dataclass
class Bb84Session:
    pulses: int
    alice_bits: str
    alice_bases: str
    bob_bases: str
    bob_bits: str
    sifted_indices: list[int]
    sifted_key: str
    sample_indices: list[int]
    qber_estimate: float
    delivered: bool
    key: str = ""
    abort_reason: str = ""

    def to_record(self) -> dict:
        """Audit-log form: counts, hex-packed bases, qber, outcome."""
        return {
            "pulses": self.pulses,
            "alice_bases_hex": _pack_hex(self.alice_bases),
            "bob_bases_hex": _pack_hex(self.bob_bases),
            "sifted_count": len(self.sifted_indices),
            "sampled_count": len(self.sample_indices),
            "qber_estimate": self.qber_estimate,
            "outcome": "delivered" if self.delivered else f"aborted:{self.abort_reason}",
            "key_bits": len(self.key),
        }


def _pack_hex(bits: str) -> str:
    pad = (-len(bits)) % 8
    return bits_to_bytes(bits + "0" * pad).hex()


def sift(alice_bases: str, bob_bases: str, bob_bits: str) -> tuple[list[int], str]:
    """Keep the positions where both parties used the same basis."""
    if not (len(alice_bases) == len(bob_bases) == len(bob_bits)):
        raise LengthMismatch("bases/bits must have equal length")
    indices = [i for i, (a, b) in enumerate(zip(alice_bases, bob_bases)) if a == b]
    return indices, "".join(bob_bits[i] for i in indices)


def estimate_qber(alice_sample: str, bob_sample: str) -> float:
    if len(alice_sample) != len(bob_sample):
        raise LengthMismatch("samples must have equal length")
    if not alice_sample:
        raise EmptySample("cannot estimate QBER from an empty sample")
    errors = sum(1 for a, b in zip(alice_sample, bob_sample) if a != b)
    return errors / len(alice_sample)


def run_bb84(
    pulses: int,
    channel: ChannelModel,
    entropy: EntropySource,
    qber_abort_threshold: float = DEFAULT_QBER_ABORT_THRESHOLD,
    sample_fraction: float = DEFAULT_SAMPLE_FRACTION,
) -> Bb84Session:
    """Run one prepare-and-measure BB84 session.

    Basis convention: 0 = rectilinear, 1 = diagonal. The eavesdropper measures
    a pulse in a random basis and re-prepares in that basis, which induces
    ~25% error on attacked sifted positions.
    """
    if pulses < 64:
        raise ValueError("pulses must be >= 64")
    if not (0.0 < qber_abort_threshold < 1.0 and 0.0 < sample_fraction < 1.0):
        raise ValueError("thresholds must be in (0, 1)")

    alice_bits = entropy.next_bits(pulses)
    alice_bases = entropy.next_bits(pulses)
    bob_bases = entropy.next_bits(pulses)

    bob_bits = []
    for i in range(pulses):
        bit = alice_bits[i]
        basis = alice_bases[i]
        if channel.eavesdrop_fraction > 0 and entropy.bernoulli(channel.eavesdrop_fraction):
            eve_basis = entropy.next_bits(1)
            if eve_basis != basis:
                bit = entropy.next_bits(1)  # measurement in the wrong basis
                basis = eve_basis  # re-prepared state
        if bob_bases[i] == basis:
            measured = bit
        else:
            measured = entropy.next_bits(1)
        if channel.noise_prob > 0 and entropy.bernoulli(channel.noise_prob):
            measured = "1" if measured == "0" else "0"
        bob_bits.append(measured)
    bob_bits = "".join(bob_bits)

    sifted_indices, sifted_bob = sift(alice_bases, bob_bases, bob_bits)
    sifted_alice = "".join(alice_bits[i] for i in sifted_indices)

    # Random subset of sifted positions is disclosed for error estimation.
    order = list(range(len(sifted_indices)))
    for i in range(len(order) - 1, 0, -1):
        j = entropy.randint_below(i + 1)
        order[i], order[j] = order[j], order[i]
    sample_count = max(1, round(sample_fraction * len(order))) if order else 0
    sample_pos = sorted(order[:sample_count])
    keep_pos = sorted(order[sample_count:])

    session = Bb84Session(
        pulses=pulses,
        alice_bits=alice_bits,
        alice_bases=alice_bases,
        bob_bases=bob_bases,
        bob_bits=bob_bits,
        sifted_indices=sifted_indices,
        sifted_key=sifted_bob,
        sample_indices=[sifted_indices[p] for p in sample_pos],
        qber_estimate=0.0,
        delivered=False,
    )

    if len(keep_pos) < 16:
        raise InsufficientSiftedBits(
            f"only {len(keep_pos)} sifted bits left after sampling"
        )

    alice_sample = "".join(sifted_alice[p] for p in sample_pos)
    bob_sample = "".join(sifted_bob[p] for p in sample_pos)
    session.qber_estimate = estimate_qber(alice_sample, bob_sample)

    if session.qber_estimate > qber_abort_threshold:
        session.abort_reason = "qber_above_threshold"
        return session

    session.delivered = True
    session.key = "".join(sifted_alice[p] for p in keep_pos)
    return session


# ---------------------------------------------------------------------------
# Wegman-Carter authentication: polynomial-evaluation universal hash over a
# 64-bit prime field, masked with fresh one-time-pad bits per tag.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WcTag:
    mask_offset: int
    value: int


@dataclass
class AuthKey:
    """Shared authentication key; both endpoints hold identical copies.

    The first 64 bits fix the hash evaluation point; every tag consumes a
    fresh 64-bit mask segment tracked by ``usage_counter``.
    """

    key_material: str
    usage_counter: int = 0

    def __post_init__(self):
        if len(self.key_material) < 256:
            raise ValueError("AuthKey needs >= 256 key bits")

    @property
    def _point(self) -> int:
        return int(self.key_material[:WC_MASK_BITS], 2) % WC_PRIME

    def _mask_at(self, offset: int) -> int:
        end = offset + WC_MASK_BITS
        if offset < WC_MASK_BITS or end > len(self.key_material):
            raise KeyExhausted("authentication key capacity exceeded")
        return int(self.key_material[offset:end], 2)

    @property
    def tags_remaining(self) -> int:
        used = WC_MASK_BITS * (1 + self.usage_counter)
        return max(0, (len(self.key_material) - used) // WC_MASK_BITS)


def _poly_hash(point: int, message: bytes) -> int:
    acc = len(message) % WC_PRIME
    for i in range(0, len(message), 8):
        chunk = int.from_bytes(message[i : i + 8], "big")
        acc = (acc * point + chunk) % WC_PRIME
    return acc


def wc_tag(key: AuthKey, message: bytes) -> WcTag:
    offset = WC_MASK_BITS * (1 + key.usage_counter)
    mask = key._mask_at(offset)
    key.usage_counter += 1
    value = _poly_hash(key._point, message) ^ mask
    return WcTag(mask_offset=offset, value=value)


def wc_verify(key: AuthKey, message: bytes, tag: WcTag) -> bool:
    try:
        mask = key._mask_at(tag.mask_offset)
    except KeyExhausted:
        return False
    return _poly_hash(key._point, message) ^ mask == tag.value


# ---------------------------------------------------------------------------
# One-time pad over QKD key bits.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OtpCiphertext:
    key_offset: int
    data: bytes


@dataclass
class OneTimePad:
    """Pad over a delivered key bit string; each encryption consumes a fresh
    segment. Decryption reads at the ciphertext's recorded offset without
    consuming, so the receiving copy of the pad stays in sync.
    """

    key_bits: str
    cursor: int = 0
    consumed: list[tuple[int, int]] = field(default_factory=list)

    def remaining_bits(self) -> int:
        return len(self.key_bits) - self.cursor

    def encrypt(self, payload: bytes) -> OtpCiphertext:
        need = 8 * len(payload)
        if self.cursor + need > len(self.key_bits):
            raise KeyExhausted(
                f"pad has {self.remaining_bits()} bits left, payload needs {need}"
            )
        offset = self.cursor
        self.cursor += need
        self.consumed.append((offset, need))
        return OtpCiphertext(offset, self._xor_at(offset, payload))

    def decrypt(self, ct: OtpCiphertext) -> bytes:
        if ct.key_offset + 8 * len(ct.data) > len(self.key_bits):
            raise KeyExhausted("ciphertext offset beyond pad capacity")
        return self._xor_at(ct.key_offset, ct.data)

    def _xor_at(self, offset: int, data: bytes) -> bytes:
        seg = self.key_bits[offset : offset + 8 * len(data)]
        return bytes(b ^ k for b, k in zip(data, bits_to_bytes(seg)))
