"""Election configuration shared by the authority, consensus, and tooling."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

__all__ = ["ElectionConfig"]


@dataclass(frozen=True)
class ElectionConfig:
    election_id: str
    candidates: tuple[str, ...]
    # virtual-clock milliseconds; registration < voting open < cutoff
    registration_open: int
    voting_open: int
    cutoff: int
    miners: tuple[str, ...]
    trustee_threshold: int = 3
    trustee_count: int = 5
    qkd_pulses: int = 1024
    qkd_noise_prob: float = 0.0
    qkd_abort_threshold: float = 0.11
    qkd_sample_fraction: float = 0.5
    slot_ms: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("at least one candidate required")
        if len(self.miners) < 3:
            raise ValueError("at least 3 miners required")
        if len(set(self.miners)) != len(self.miners):
            raise ValueError("miner identities must be distinct")
        if not self.registration_open < self.voting_open < self.cutoff:
            raise ValueError("need registration_open < voting_open < cutoff")
        if not 1 <= self.trustee_threshold <= self.trustee_count:
            raise ValueError("trustee threshold must be within the trustee count")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["candidates"] = list(self.candidates)
        d["miners"] = list(self.miners)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ElectionConfig":
        d = dict(d)
        d["candidates"] = tuple(d["candidates"])
        d["miners"] = tuple(d["miners"])
        return cls(**d)

    def digest(self) -> bytes:
        """Stable digest over the canonical JSON form."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).digest()
