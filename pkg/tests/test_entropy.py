import math

import pytest
from hypothesis import given, strategies as st

from qbvote.entropy import (
    ConstantSource,
    Id256,
    SampleTooSmall,
    SeededTestSource,
    SimulatedBeamsplitter,
    bits_to_hex,
    bytes_to_bits,
    health_check,
    hex_to_bits,
)


class TestNextBits:
    def test_constant_source(self):
        assert ConstantSource(0).next_bits(8) == "00000000"
        assert ConstantSource(1).next_bits(4) == "1111"

    def test_seeded_source_reproducible(self):
        assert SeededTestSource(42).next_bits(16) == SeededTestSource(42).next_bits(16)

    def test_stream_continues_without_reuse(self):
        s = SeededTestSource(42)
        first, second = s.next_bits(64), s.next_bits(64)
        fresh = SeededTestSource(42)
        assert fresh.next_bits(64) == first
        assert fresh.next_bits(64) == second

    def test_beamsplitter_half_bias_fraction(self):
        # 3-sigma binomial interval at n=100000 is 0.5 +/- 0.00474
        bits = SimulatedBeamsplitter(0.5, seed=1).next_bits(100_000)
        assert 0.494 <= bits.count("1") / 100_000 <= 0.506

    @pytest.mark.parametrize("bias", [0.1, 0.3, 0.8])
    def test_beamsplitter_biased(self, bias):
        n = 100_000
        failures = 0
        for seed in range(20):
            bits = SimulatedBeamsplitter(bias, seed=seed).next_bits(n)
            tol = 4 * math.sqrt(bias * (1 - bias) / n)
            if abs(bits.count("1") / n - bias) > tol:
                failures += 1
        assert failures == 0

    @given(st.integers(min_value=1, max_value=500))
    def test_length_contract(self, n):
        assert len(SeededTestSource(0).next_bits(n)) == n

    def test_n_below_one_rejected(self):
        with pytest.raises(ValueError):
            SeededTestSource(0).next_bits(0)


class TestGenerateId:
    def test_constant_zero_source(self):
        assert ConstantSource(0).generate_id().hex == "0" * 64

    def test_hex_length(self):
        assert len(SimulatedBeamsplitter(0.5, seed=3).generate_id().hex) == 64

    def test_no_collisions_across_batches(self):
        src = SimulatedBeamsplitter(0.5, seed=9)
        collisions = sum(
            1 for _ in range(1000) if src.generate_id() == src.generate_id()
        )
        assert collisions <= 1

    @given(st.binary(min_size=32, max_size=32))
    def test_round_trip(self, data):
        i = Id256.from_bytes(data)
        assert Id256(i.hex).bytes == data
        assert Id256.from_bits(i.bits) == i

    def test_rejects_bad_hex(self):
        with pytest.raises(ValueError):
            Id256("ab" * 31)
        with pytest.raises(ValueError):
            Id256("G" * 64)


class TestBitHelpers:
    @given(st.binary(max_size=64))
    def test_bits_bytes_round_trip(self, data):
        assert hex_to_bits(bits_to_hex(bytes_to_bits(data))) == bytes_to_bits(data)


def _runs_oracle(sample: str):
    """Wald-Wolfowitz runs statistic computed directly from its formula."""
    n = len(sample)
    n1 = sample.count("1")
    n0 = n - n1
    runs = 1 + sum(1 for i in range(1, n) if sample[i] != sample[i - 1])
    mean = 1 + 2 * n1 * n0 / n
    var = 2 * n1 * n0 * (2 * n1 * n0 - n) / (n * n * (n - 1))
    return runs, mean, math.sqrt(var)


class TestHealthCheck:
    def test_all_zero_fails_monobit(self):
        report = health_check("0" * 1000)
        assert not report.monobit_pass

    def test_alternating_passes_monobit_fails_runs(self):
        sample = "01" * 1000
        runs, mean, sd = _runs_oracle(sample)
        assert runs > mean + 3 * sd  # oracle agrees this is out of band
        report = health_check(sample)
        assert report.monobit_pass
        assert not report.runs_pass

    def test_seeded_stream_passes_both(self):
        report = health_check(SeededTestSource(5).next_bits(10_000))
        assert report.monobit_pass and report.runs_pass

    @pytest.mark.parametrize("seed", range(10))
    def test_seeded_streams_always_pass(self, seed):
        report = health_check(SeededTestSource(seed).next_bits(10_000))
        assert report.monobit_pass and report.runs_pass

    def test_constant_stream_always_fails(self):
        for bit in (0, 1):
            report = health_check(ConstantSource(bit).next_bits(500))
            assert not (report.monobit_pass or report.runs_pass)

    def test_small_sample_rejected(self):
        with pytest.raises(SampleTooSmall):
            health_check("01" * 49)

    def test_report_fields(self):
        report = health_check("0" * 100)
        assert report.sample_size == 100
        assert report.ones_fraction == 0.0
