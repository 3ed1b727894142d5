import itertools
import math

import numpy as np
import pytest

from dimmax import (DigitWord, capped_log_deriv, cf_value, cylinder_geometry,
                    cylinder_interval, digits_of, log_deriv)

from oracles import GOLDEN_LYAPUNOV


def test_cf_value_examples():
    assert cf_value([2]) == 0.5
    assert cf_value([1, 1]) == 0.5
    assert cf_value([1, 1, 1]) == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_cf_value_deep_word_matches_fraction():
    # [1,2,3,4] = 1/(1+1/(2+1/(3+1/4))) = 30/43
    assert cf_value([1, 2, 3, 4]) == pytest.approx(30.0 / 43.0, abs=1e-15)


def test_digit_word_validation():
    with pytest.raises(ValueError):
        DigitWord(())
    with pytest.raises(ValueError):
        DigitWord((0, 1))
    with pytest.raises(ValueError):
        DigitWord((1, -3))
    w = DigitWord.of([1, 2])
    assert len(w) == 2 and list(w) == [1, 2]
    assert w.extended(5).digits == (1, 2, 5)
    assert w.sibling().digits == (1, 3)


def test_cylinder_interval_examples():
    assert cylinder_interval([1]) == (0.5, 1.0)
    lo, hi = cylinder_interval([2])
    assert lo == pytest.approx(1.0 / 3.0, abs=1e-15) and hi == 0.5
    lo, hi = cylinder_interval([1, 1])
    assert lo == 0.5 and hi == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_cylinder_interval_by_digit_extraction():
    # every x sampled inside [1,1] must have first two digits (1,1)
    lo, hi = cylinder_interval([1, 1])
    for x in np.linspace(lo + 1e-9, hi - 1e-9, 23):
        assert digits_of(float(x), 2) == [1, 1]


def test_log_deriv_examples():
    assert log_deriv(0.5) == pytest.approx(2 * math.log(2), abs=1e-15)
    assert log_deriv(1 / math.e) == pytest.approx(2.0, abs=1e-14)
    # golden-mean fixed point of the digit-1 branch, via a deep all-ones word
    x = cf_value([1] * 40)
    assert log_deriv(x) == pytest.approx(GOLDEN_LYAPUNOV, abs=1e-12)


def test_log_deriv_domain():
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            log_deriv(bad)


def test_capped_log_deriv():
    assert capped_log_deriv(0.5, 10) == pytest.approx(2 * math.log(2), abs=1e-15)
    assert capped_log_deriv(0.001, 10) == pytest.approx(2 * math.log(10), abs=1e-15)
    assert capped_log_deriv(1.0 / 7, 7) == pytest.approx(2 * math.log(7), abs=1e-12)
    with pytest.raises(ValueError):
        capped_log_deriv(0.5, 1)


def _words(alphabet, depth):
    return itertools.product(range(1, alphabet + 1), repeat=depth)


def test_endpoint_consistency_exhaustive_small_depth():
    # exhaustive over alphabet {1..10} up to depth 4 (deeper depths are sampled below)
    for depth in (1, 2, 3, 4):
        for word in _words(10, depth):
            lo, hi = cylinder_interval(word)
            v = cf_value(word)
            assert lo <= v <= hi


def test_endpoint_consistency_sampled_depth_12():
    rng = np.random.default_rng(3)
    for _ in range(300):
        depth = rng.integers(5, 13)
        word = [int(d) for d in rng.integers(1, 11, size=depth)]
        lo, hi = cylinder_interval(word)
        assert lo <= cf_value(word) <= hi


def test_monotone_refinement():
    rng = np.random.default_rng(4)
    for _ in range(200):
        depth = rng.integers(1, 10)
        word = [int(d) for d in rng.integers(1, 8, size=depth)]
        lo, hi = cylinder_interval(word)
        for k in range(1, 7):
            clo, chi = cylinder_interval(word + [k])
            assert lo - 1e-15 <= clo and chi <= hi + 1e-15
            assert (chi - clo) <= (hi - lo) + 1e-15


def test_parity_orientation():
    # after normalization lo <= hi, extensions sort by last digit:
    # even total length increasing, odd decreasing
    base_even = [1, 2]          # extensions have odd length 3
    vals = [cf_value(base_even + [k]) for k in range(1, 6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    base_odd = [2]              # extensions have even length 2
    vals = [cf_value(base_odd + [k]) for k in range(1, 6)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_round_trip_random_points():
    rng = np.random.default_rng(5)
    for _ in range(200):
        x = float(rng.uniform(1e-3, 1 - 1e-3))
        word = digits_of(x, 8)
        if len(word) < 8:  # rational hit; skip
            continue
        lo, hi = cylinder_interval(word)
        assert lo - 1e-12 <= x <= hi + 1e-12
        assert lo - 1e-12 <= cf_value(word) <= hi + 1e-12


def test_cylinder_geometry_brackets():
    rng = np.random.default_rng(6)
    for _ in range(100):
        depth = rng.integers(1, 9)
        word = [int(d) for d in rng.integers(1, 9, size=depth)]
        g = cylinder_geometry(word)
        assert g.lo <= g.value <= g.hi
        # -2*log(value) directly: value can be exactly 1.0 (the word of all ones)
        assert g.logderiv_lo <= -2.0 * math.log(g.value) <= g.logderiv_hi
        child = cylinder_geometry(word + [3])
        assert (child.hi - child.lo) < (g.hi - g.lo)
