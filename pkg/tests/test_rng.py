"""Generator correctness against published splitmix64 reference output."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from treevote.rng import SeededRng, derive_seed, random_integer

# Reference sequence for splitmix64 seeded with 1234567, from the
# widely mirrored C test vector (first five outputs).
SPLITMIX64_SEED_1234567 = (
    6457827717110365317,
    3203168211198807973,
    9817491932198370423,
    4593380528125082431,
    16408922859458223821,
)


class TestSeededRng:
    def test_reference_vector(self):
        rng = SeededRng(1234567)
        outs = [rng.next_u64() for _ in range(5)]
        assert outs == list(SPLITMIX64_SEED_1234567)

    def test_canonical_seed_zero_anchor(self):
        # first output for seed 0 is the classic published value
        assert SeededRng(0).next_u64() == 0xE220A8397B1DCDAF

    def test_determinism(self):
        a = SeededRng(42)
        b = SeededRng(42)
        assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]

    def test_seed_zero_works(self):
        rng = SeededRng(0)
        first = rng.next_u64()
        assert 0 <= first < 2**64
        assert first != 0

    def test_state_masked_to_64_bits(self):
        rng = SeededRng(2**64 + 5)
        assert rng.state == 5

    @given(st.integers(min_value=0, max_value=2**64 - 1))
    def test_outputs_in_range(self, seed):
        rng = SeededRng(seed)
        for _ in range(4):
            assert 0 <= rng.next_u64() < 2**64

    @given(st.integers(min_value=0, max_value=2**64 - 1))
    def test_next_float_unit_interval(self, seed):
        rng = SeededRng(seed)
        for _ in range(4):
            x = rng.next_float()
            assert 0.0 <= x < 1.0


class TestRandomInteger:
    def test_bounds_inclusive(self):
        rng = SeededRng(7)
        values = {random_integer(rng, 3, 5) for _ in range(200)}
        assert values == {3, 4, 5}

    def test_single_point_range(self):
        rng = SeededRng(7)
        assert random_integer(rng, 9, 9) == 9

    def test_bad_range(self):
        rng = SeededRng(7)
        with pytest.raises(ValueError):
            random_integer(rng, 5, 3)

    @given(
        st.integers(min_value=0, max_value=2**64 - 1),
        st.integers(min_value=-50, max_value=50),
        st.integers(min_value=0, max_value=100),
    )
    def test_in_range(self, seed, a, width):
        rng = SeededRng(seed)
        value = random_integer(rng, a, a + width)
        assert a <= value <= a + width


class TestDeriveSeed:
    def test_full_mix_of_master_plus_index(self):
        # deriving must run the complete splitmix64 step on (master + i)
        master = 1234566
        assert derive_seed(master, 1) == SPLITMIX64_SEED_1234567[0]

    def test_distinct_for_neighbor_indices(self):
        seeds = [derive_seed(99, i) for i in range(1, 200)]
        assert len(set(seeds)) == len(seeds)

    def test_does_not_advance_source_state(self):
        rng = SeededRng(5)
        before = rng.state
        derive_seed(rng.state, 3)
        assert rng.state == before

    def test_matches_member_stream_convention(self):
        # member i's first draw equals next_u64 of an rng seeded state+i
        master = 42
        for i in (1, 2, 7):
            member = SeededRng(derive_seed(master, i))
            probe = SeededRng(master + i)
            assert member.state == probe.next_u64() == derive_seed(master, i)
