"""Tests for seed derivation."""

import pytest

from bellsurvey.seeding import SETTINGS_STREAM, derive_seed, splitmix64


class TestDeriveSeed:
    def test_reference_sequence(self):
        # splitmix64 outputs for state 0
        assert derive_seed(0, 0) == 0xE220A8397B1DCDAF
        assert derive_seed(0, 1) == 0x6E789E6AA1B965F4
        assert derive_seed(0, 2) == 0x06C45D188009454F

    def test_streams_are_distinct(self):
        seeds = {derive_seed(2024, k) for k in range(1000)}
        assert len(seeds) == 1000

    def test_settings_stream_tag(self):
        assert SETTINGS_STREAM == int.from_bytes(b"settings", "big")
        assert derive_seed(7, SETTINGS_STREAM) not in {derive_seed(7, k) for k in range(100)}

    @pytest.mark.parametrize("master", [0, 1, 2 ** 63, 2 ** 64 - 1])
    def test_fits_in_64_bits(self, master):
        assert 0 <= derive_seed(master, 5) < 2 ** 64
        assert 0 <= splitmix64(master) < 2 ** 64
