import numpy as np
import pytest

import dimmax as dm
from dimmax.tails import default_fit_range

import oracles


def test_fit_exact_power_law():
    k = np.arange(1, 65, dtype=float)
    p = dm.ProbVec.normalized(k ** -1.5)
    fit = dm.fit_tail_exponent(p, 1, 64)
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_square_law():
    k = np.arange(1, 101, dtype=float)
    p = dm.ProbVec.normalized(k ** -2.0)
    fit = dm.fit_tail_exponent(p, 4, 80)
    assert fit.slope == pytest.approx(-2.0, abs=1e-12)


def test_fit_validation():
    p = dm.ProbVec.normalized(np.arange(1, 11, dtype=float) ** -2)
    with pytest.raises(ValueError):
        dm.fit_tail_exponent(p, 5, 7)       # fewer than 4 points
    with pytest.raises(ValueError):
        dm.fit_tail_exponent(p, 2, 12)      # beyond support
    with pytest.raises(ValueError):
        dm.fit_tail_exponent(p, 0, 8)
    zero_tail = dm.ProbVec(np.array([0.5, 0.5, 0.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        dm.fit_tail_exponent(zero_tail, 1, 5)


def test_default_fit_range():
    assert default_fit_range(256) == (8, 64)
    lo, hi = default_fit_range(64)
    assert lo >= 8 and hi >= lo + 3


def test_ratio_bounds_at_optimizer_output(disc):
    res = dm.maximize_on_simplex(32, tol=1e-9, disc=disc)
    audit = dm.check_ratio_bounds(res.p, res.dimension, slack=10 * res.residual)
    assert audit.ok
    assert audit.pairs_checked == 32 * 31 // 2
    assert audit.worst_margin < 0  # strictly inside the bounds


def test_ratio_bounds_uniform_violations():
    p = dm.ProbVec.uniform(8)
    audit = dm.check_ratio_bounds(p, 0.6, slack=1e-9)
    assert not audit.ok
    # log(p_j/p_i) = 0 while the lower bound 2d log(i/(j+1)) > 0 once i >= j+2
    pairs = {(v.i, v.j) for v in audit.violations}
    assert (3, 1) in pairs
    for v in audit.violations:
        assert v.margin > 0


def test_ratio_bounds_two_digit_oracle(disc):
    p1, d_star = oracles.best_two_digit()
    audit = dm.check_ratio_bounds(dm.ProbVec(np.array([p1, 1 - p1])), d_star,
                                  slack=1e-7)
    assert audit.pairs_checked == 1 and audit.ok


def test_ratio_bounds_validation():
    p = dm.ProbVec.uniform(4)
    with pytest.raises(ValueError):
        dm.check_ratio_bounds(p, 1.5)
    with pytest.raises(ValueError):
        dm.check_ratio_bounds(dm.ProbVec(np.array([0.5, 0.5, 0.0])), 0.5)


def test_monotone_weights_from_bounds(disc):
    res = dm.maximize_on_simplex(24, tol=1e-9, disc=disc)
    assert np.all(np.diff(res.p.weights) < 0)


def test_exponent_tracks_dimension_on_interior_windows(disc):
    # the tail law is asymptotic: windows further right track -2d more tightly
    res = dm.maximize_on_simplex(256, tol=1e-9, disc=disc)
    d = res.dimension
    dev = {}
    for (a, b) in [(10, 64), (32, 128), (96, 224)]:
        fit = dm.fit_tail_exponent(res.p, a, b)
        dev[(a, b)] = abs(fit.slope + 2 * d)
    assert dev[(32, 128)] < dev[(10, 64)]
    assert dev[(96, 224)] < dev[(32, 128)]
    assert dev[(32, 128)] < 0.05
    # compensated weights stay within a narrow factor over the default window
    table = dm.tail_table(res.p, d)
    comp = table[9:64, 2]
    assert comp.max() / comp.min() < 3.0


def test_fit_range_sensitivity(disc):
    # moving the cutoffs inside the documented family moves the slope a little
    res = dm.maximize_on_simplex(256, tol=1e-9, disc=disc)
    slopes = [dm.fit_tail_exponent(res.p, a, b).slope
              for (a, b) in [(8, 64), (10, 64), (12, 64), (8, 56), (10, 72)]]
    assert max(slopes) - min(slopes) <= 0.02


def test_tail_table_shape():
    p = dm.ProbVec.normalized(np.arange(1, 9, dtype=float) ** -2)
    table = dm.tail_table(p, 0.9)
    assert table.shape == (8, 3)
    assert np.all(table[:, 0] == np.arange(1, 9))
    assert table[3, 2] == pytest.approx(p.weights[3] * 4 ** 1.8, rel=1e-12)
