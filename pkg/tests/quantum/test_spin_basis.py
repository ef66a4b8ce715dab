import numpy as np
import pytest

from qbm.lab.quantum.spin_basis import (
    SiteError,
    SpinConfig,
    SpinCountError,
    basis_spins,
    check_spin_count,
    flip,
    flip_indices,
    index_of,
    max_spins,
    site_signs,
    spin_value,
    spins_to_indices,
)


class TestSpinConfig:
    def test_index_encoding(self):
        # bit b = 1 means s_b = -1, site 0 is the least significant bit
        assert SpinConfig.from_spins([1, 1, 1]).index == 0
        assert SpinConfig.from_spins([-1, 1, 1]).index == 1
        assert SpinConfig.from_spins([1, -1, -1]).index == 6

    def test_spins(self):
        assert SpinConfig(3, 5).spins == (-1, 1, -1)
        assert SpinConfig(3, 5).label == "-+-"

    def test_flip(self):
        config = SpinConfig.from_spins([1, -1, 1])
        flipped = flip(config, 2)
        assert flipped.spins == (1, -1, -1)
        assert flip(flipped, 2) == config

    def test_spin_value(self):
        config = SpinConfig.from_spins([1, -1, 1])
        assert [spin_value(config, i) for i in range(3)] == [1, -1, 1]

    def test_site_out_of_range(self):
        config = SpinConfig(2, 0)
        with pytest.raises(SiteError):
            flip(config, 2)
        with pytest.raises(SiteError):
            spin_value(config, -1)

    def test_invalid_index(self):
        with pytest.raises(ValueError):
            SpinConfig(2, 4)

    def test_invalid_spin_value(self):
        with pytest.raises(ValueError):
            index_of([1, 0])


def test_basis_spins():
    spins = basis_spins(3)
    assert spins.shape == (8, 3)
    for s in range(8):
        assert tuple(spins[s]) == SpinConfig(3, s).spins


@pytest.mark.parametrize("sites", [(), (0,), (1,), (0, 2), (0, 1, 2)])
def test_site_signs(sites):
    spins = basis_spins(3)
    expected = np.prod(spins[:, list(sites)], axis=1) if sites else np.ones(8)
    np.testing.assert_array_equal(site_signs(3, sites), expected)


def test_flip_indices():
    targets = flip_indices(3, (0, 2))
    spins = basis_spins(3)
    for s in range(8):
        flipped = spins[s].copy()
        flipped[[0, 2]] *= -1
        assert targets[s] == index_of(flipped)


def test_spins_to_indices():
    spins = basis_spins(4)
    np.testing.assert_array_equal(spins_to_indices(spins), np.arange(16))


class TestSpinCount:
    def test_default_limit(self, monkeypatch):
        monkeypatch.delenv("QBM_LAB_MAX_N", raising=False)
        assert max_spins() == 12
        assert check_spin_count(12) == 12
        with pytest.raises(SpinCountError):
            check_spin_count(13)

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("QBM_LAB_MAX_N", "14")
        assert check_spin_count(13) == 13

    def test_explicit_limit(self):
        with pytest.raises(SpinCountError):
            check_spin_count(5, limit=4)

    def test_invalid_env(self, monkeypatch):
        monkeypatch.setenv("QBM_LAB_MAX_N", "many")
        with pytest.raises(SpinCountError):
            max_spins()

    @pytest.mark.parametrize("n", [0, -1])
    def test_non_positive(self, n):
        with pytest.raises(SpinCountError):
            check_spin_count(n)
