"""Spreading-code family properties, checked against brute force."""

import numpy as np
import pytest

from bansim.phy.kasami import kasami63, kasami63_bits, mseq, periodic_crosscorrelation

SET_SIZE = 8


def brute_force_correlation(a, b, shift):
    # Independent of the library routine: plain python sum over one shift.
    n = len(a)
    return sum(int(a[i]) * int(b[(i + shift) % n]) for i in range(n))


def test_every_code_has_length_63_and_antipodal_values():
    for idx in range(SET_SIZE):
        code = kasami63(idx)
        assert len(code) == 63
        assert set(np.unique(code)) <= {-1, 1}


def test_codes_are_distinct():
    codes = [tuple(kasami63(i)) for i in range(SET_SIZE)]
    assert len(set(codes)) == SET_SIZE


def test_autocorrelation_peak_is_63():
    for idx in range(SET_SIZE):
        code = kasami63(idx)
        assert brute_force_correlation(code, code, 0) == 63


def test_mseq_is_balanced():
    u = mseq()
    assert len(u) == 63
    assert int(u.sum()) in (31, 32)


def test_index_out_of_range_rejected():
    with pytest.raises(ValueError):
        kasami63(8)
    with pytest.raises(ValueError):
        kasami63(-1)


def test_full_set_correlations_are_three_valued():
    # Brute force over every pair and every shift; off-peak values of the
    # small set must stay inside {-1, -9, +7}.
    codes = [kasami63(i) for i in range(SET_SIZE)]
    seen = set()
    for i in range(SET_SIZE):
        for j in range(SET_SIZE):
            for shift in range(63):
                if i == j and shift == 0:
                    continue
                seen.add(brute_force_correlation(codes[i], codes[j], shift))
    assert seen <= {-1, -9, 7}, f"unexpected correlation values: {sorted(seen)}"


def test_library_correlation_matches_brute_force():
    a, b = kasami63(1), kasami63(5)
    lib = periodic_crosscorrelation(a, b)
    for shift in (0, 1, 17, 62):
        assert lib[shift] == brute_force_correlation(a, b, shift)


def test_bits_and_chips_agree():
    for idx in range(SET_SIZE):
        bits = kasami63_bits(idx)
        assert np.array_equal(1 - 2 * bits.astype(int), kasami63(idx))
