"""Randomness sources for identifiers and protocol entropy.

The production analogue is a quantum random number generator built from a
single-photon source and a beamsplitter: only one detector clicks per photon,
and which one is intrinsically random. Here that device is modelled as an
i.i.d. Bernoulli bit stream, alongside a seeded test source for reproducible
runs and a constant source for fixtures.

Bit streams are plain strings of '0'/'1'; wire/file renderings are lowercase
hex.
"""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass

__all__ = [
    "EntropySource",
    "ConstantSource",
    "SeededTestSource",
    "SimulatedBeamsplitter",
    "Id256",
    "HealthReport",
    "SampleTooSmall",
    "health_check",
    "bits_to_bytes",
    "bytes_to_bits",
    "bits_to_hex",
    "hex_to_bits",
]

MIN_HEALTH_SAMPLE = 100


class SampleTooSmall(ValueError):
    """Health-check sample shorter than the minimum required length."""


def bits_to_bytes(bits: str) -> bytes:
    if len(bits) % 8 != 0:
        raise ValueError("bit length must be a multiple of 8")
    return int(bits, 2).to_bytes(len(bits) // 8, "big") if bits else b""


def bytes_to_bits(data: bytes) -> str:
    return "".join(format(b, "08b") for b in data)


def bits_to_hex(bits: str) -> str:
    return bits_to_bytes(bits).hex()


def hex_to_bits(hexstr: str) -> str:
    return bytes_to_bits(bytes.fromhex(hexstr))


class EntropySource:
    """Stateful bit stream: consecutive calls continue the stream, no rewind.

    A source is single-owner; independent parties hold independent sources.
    """

    def next_bits(self, n: int) -> str:
        if n < 1:
            raise ValueError("n must be >= 1")
        bits = self._draw(n)
        assert len(bits) == n
        return bits

    def _draw(self, n: int) -> str:
        raise NotImplementedError

    def next_bytes(self, n: int) -> bytes:
        return bits_to_bytes(self.next_bits(8 * n))

    def generate_id(self) -> "Id256":
        """Mint a 256-bit identifier from fresh entropy."""
        return Id256.from_bits(self.next_bits(256))

    def randint_below(self, bound: int) -> int:
        """Uniform integer in [0, bound) via rejection sampling."""
        if bound < 1:
            raise ValueError("bound must be >= 1")
        nbits = max(1, (bound - 1).bit_length())
        while True:
            v = int(self.next_bits(nbits), 2)
            if v < bound:
                return v

    def bernoulli(self, p: float) -> bool:
        """Bernoulli(p) trial from 32 fresh bits."""
        return int(self.next_bits(32), 2) < p * (1 << 32)


class ConstantSource(EntropySource):
    """Emits a fixed bit forever. Test fixture only."""

    def __init__(self, bit: int):
        if bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        self.bit = bit

    def _draw(self, n: int) -> str:
        return str(self.bit) * n


class SeededTestSource(EntropySource):
    """Deterministic PRNG stream; equal seeds yield identical bit streams."""

    def __init__(self, seed: int):
        self.seed = seed
        self._rng = random.Random(seed)

    def _draw(self, n: int) -> str:
        return format(self._rng.getrandbits(n), f"0{n}b")


class SimulatedBeamsplitter(EntropySource):
    """Single-photon beamsplitter model: each photon clicks detector 1 with
    probability ``detector_bias``, independently of every other photon.

    Ideal detectors, no dead time. Pass a seed to make a run reproducible;
    otherwise the simulation is seeded from the OS.
    """

    def __init__(self, detector_bias: float = 0.5, seed: int | None = None):
        if not 0.0 <= detector_bias <= 1.0:
            raise ValueError("detector_bias must be in [0, 1]")
        self.detector_bias = detector_bias
        self._rng = random.Random(seed if seed is not None else os.urandom(16))

    def _draw(self, n: int) -> str:
        b = self.detector_bias
        if b == 0.5:
            return format(self._rng.getrandbits(n), f"0{n}b")
        return "".join("1" if self._rng.random() < b else "0" for _ in range(n))


@dataclass(frozen=True)
class Id256:
    """256-bit opaque identifier (the VID/BID shape); renders as 64 hex chars."""

    hex: str

    def __post_init__(self):
        if len(self.hex) != 64 or self.hex != self.hex.lower():
            raise ValueError("Id256 must be 64 lowercase hex chars")
        bytes.fromhex(self.hex)  # validates charset

    @classmethod
    def from_bits(cls, bits: str) -> "Id256":
        if len(bits) != 256:
            raise ValueError("Id256 needs exactly 256 bits")
        return cls(bits_to_hex(bits))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Id256":
        if len(data) != 32:
            raise ValueError("Id256 needs exactly 32 bytes")
        return cls(data.hex())

    @property
    def bytes(self) -> bytes:
        return bytes.fromhex(self.hex)

    @property
    def bits(self) -> str:
        return hex_to_bits(self.hex)

    def __str__(self) -> str:
        return self.hex


@dataclass(frozen=True)
class HealthReport:
    monobit_pass: bool
    runs_pass: bool
    sample_size: int
    ones_fraction: float


def health_check(sample: str) -> HealthReport:
    """Monobit and Wald-Wolfowitz runs tests at the 3-sigma level.

    Guards the trusted-device assumption: a stuck or heavily biased source
    fails monobit, a periodic one fails runs.
    """
    n = len(sample)
    if n < MIN_HEALTH_SAMPLE:
        raise SampleTooSmall(f"need >= {MIN_HEALTH_SAMPLE} bits, got {n}")
    ones = sample.count("1")
    frac = ones / n
    monobit_pass = abs(frac - 0.5) <= 3.0 * math.sqrt(0.25 / n)

    n1, n0 = ones, n - ones
    if n1 == 0 or n0 == 0:
        runs_pass = False
    else:
        runs = 1 + sum(1 for i in range(1, n) if sample[i] != sample[i - 1])
        mean = 1 + 2 * n1 * n0 / n
        var = 2 * n1 * n0 * (2 * n1 * n0 - n) / (n * n * (n - 1))
        runs_pass = abs(runs - mean) <= 3.0 * math.sqrt(var)

    return HealthReport(monobit_pass, runs_pass, n, frac)
