import numpy as np
import pytest

from focuspipe.model import BAND_BY_NAME, BANDS, band_bins


def test_alpha_bins_120hz_n120():
    # 1 Hz resolution: positive-frequency bins 8..13 plus mirrors 107..112
    bins = band_bins(BAND_BY_NAME["alpha"], 120.0, 120)
    assert bins == set(range(8, 14)) | set(range(107, 113))


def test_gamma_bins_120hz_n120():
    bins = band_bins(BAND_BY_NAME["gamma"], 120.0, 120)
    assert bins == set(range(31, 51)) | set(range(70, 90))


def test_delta_empty_when_resolution_too_coarse():
    assert band_bins(BAND_BY_NAME["delta"], 120.0, 4) == set()


@pytest.mark.parametrize("rate", [120.0, 200.0, 250.0])
@pytest.mark.parametrize("n", [64, 100, 128, 250, 512])
def test_bins_two_sided_symmetry(rate, n):
    for band in BANDS:
        bins = band_bins(band, rate, n)
        for k in bins:
            assert (n - k) % n in bins


def test_band_bin_sets_disjoint_at_1hz_resolution():
    for rate, n in [(120.0, 120), (200.0, 200), (250.0, 250)]:
        seen = set()
        for band in BANDS:
            bins = band_bins(band, rate, n)
            assert not (bins & seen)
            seen |= bins


def test_band_frequency_ranges():
    expected = {
        "delta": (1, 3),
        "theta": (4, 7),
        "alpha": (8, 13),
        "beta": (14, 30),
        "gamma": (31, 50),
    }
    assert {b.name.value: (b.lo, b.hi) for b in BANDS} == expected


def test_band_bins_rejects_bad_args():
    with pytest.raises(ValueError):
        band_bins(BANDS[0], 0.0, 16)
    with pytest.raises(ValueError):
        band_bins(BANDS[0], 100.0, 1)
