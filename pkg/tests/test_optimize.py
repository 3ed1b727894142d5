import numpy as np
import pytest

import dimmax as dm
from dimmax.optimize import default_init, worker_count

import oracles


def test_two_digit_matches_oracle(disc):
    p1_star, d_star = oracles.best_two_digit()
    res = dm.maximize_on_simplex(2, tol=1e-9, disc=disc)
    assert res.converged
    assert abs(res.dimension - d_star) < 1e-8
    assert abs(res.p.weights[0] - p1_star) < 1e-6


def test_init_at_optimum_is_fixed_point(disc):
    base = dm.maximize_on_simplex(2, tol=1e-8, disc=disc)
    again = dm.maximize_on_simplex(2, init=base.p, tol=1e-8, disc=disc)
    assert again.state.iter <= 1
    assert again.residual <= 1e-8


def test_methods_agree(disc):
    fp = dm.maximize_on_simplex(3, method="fixed_point", tol=1e-9, disc=disc)
    eg = dm.maximize_on_simplex(3, method="exp_gradient", tol=1e-9, disc=disc)
    assert fp.converged and eg.converged
    assert abs(fp.dimension - eg.dimension) < 1e-9
    assert np.abs(fp.p.weights - eg.p.weights).max() < 1e-6


def test_multistart_agreement(disc):
    rng = np.random.default_rng(41)
    targets = []
    for method in ("fixed_point", "exp_gradient"):
        for w0 in oracles.interior_battery(rng, 3, 5, floor=0.05):
            res = dm.maximize_on_simplex(3, init=dm.ProbVec(w0), tol=1e-9,
                                         method=method, disc=disc)
            assert res.converged
            targets.append(res.p.weights)
    targets = np.asarray(targets)
    assert np.abs(targets - targets[0]).max() < 1e-6


def test_ascent_of_dimension(disc):
    start = default_init(4)
    d0 = oracles.dimension_of(start.weights)
    res = dm.maximize_on_simplex(4, method="exp_gradient", tol=1e-9, disc=disc)
    assert res.dimension >= d0 - 1e-12
    # residual history reaches tolerance monotonically at the tail
    hist = res.state.residual_history
    assert hist[-1] <= 1e-9 <= hist[0]


def test_optimum_weights_strictly_decreasing(disc):
    for n in (2, 5, 16):
        res = dm.maximize_on_simplex(n, tol=1e-9, disc=disc)
        w = res.p.weights
        assert np.all(np.diff(w) < 0)


def test_monotone_in_n(disc):
    ds = [dm.maximize_on_simplex(n, tol=1e-9, disc=disc).dimension
          for n in range(2, 9)]
    for a, b in zip(ds, ds[1:]):
        assert b >= a - 1e-10


def test_non_convergence_flagged(disc):
    res = dm.maximize_on_simplex(8, tol=1e-13, max_iter=3, disc=disc)
    assert not res.converged
    assert res.residual > 1e-13
    assert res.p.is_interior


def test_invalid_arguments(disc):
    with pytest.raises(ValueError):
        dm.maximize_on_simplex(1, disc=disc)
    with pytest.raises(ValueError):
        dm.maximize_on_simplex(3, init=dm.ProbVec.uniform(2), disc=disc)
    with pytest.raises(ValueError):
        dm.maximize_on_simplex(2, init=dm.ProbVec(np.array([0.0, 1.0])), disc=disc)
    with pytest.raises(ValueError):
        dm.maximize_on_simplex(3, method="newton", disc=disc)


def test_warm_equals_cold(disc):
    cold = dm.maximize_on_simplex(16, tol=1e-10, disc=disc)
    sw = dm.sweep_n([8, 16], tol=1e-10, disc=disc)
    warm = sw.per_n[-1]
    assert np.abs(cold.p.weights - warm.p.weights).max() < 1e-7


def test_sweep_monotone_and_bounded(disc):
    sw = dm.sweep_n([2, 4, 8, 16], tol=1e-9, disc=disc)
    ds = sw.dimensions
    assert np.all(np.diff(ds) > 0)
    assert np.all(ds > 0.5) and np.all(ds < 1 - 5e-5)
    assert all(e.converged for e in sw.per_n)
    assert sw.D_estimate >= ds.max()
    assert "beta" in sw.extrapolation_note


def test_sweep_leading_coordinate_stabilization(disc):
    # leading coordinates converge at rate ~1/n; assert the observed decrease
    sw = dm.sweep_n([32, 64, 128, 256], tol=1e-9, disc=disc)
    p32, p64, p128, p256 = [e.p.weights for e in sw.per_n]
    gap_small = np.abs(p64[:4] - p32[:4]).max()
    gap_large = np.abs(p256[:4] - p128[:4]).max()
    assert gap_large < gap_small
    assert gap_large < 1e-3


def test_sweep_validation(disc):
    with pytest.raises(ValueError):
        dm.sweep_n([4, 2], disc=disc)
    with pytest.raises(ValueError):
        dm.sweep_n([1, 2], disc=disc)
    with pytest.raises(ValueError):
        dm.sweep_n([], disc=disc)


def test_sweep_cold_parallel(disc, monkeypatch):
    monkeypatch.setenv("DIMMAX_THREADS", "2")
    assert worker_count() == 2
    sw = dm.sweep_n([2, 4], tol=1e-9, disc=disc, warm_start=False)
    assert all(e.converged for e in sw.per_n)
    monkeypatch.setenv("DIMMAX_THREADS", "nonsense")
    assert worker_count() == 1


def test_extrapolation_with_fit_residual(disc):
    sw = dm.sweep_n([4, 8, 16, 32], tol=1e-9, disc=disc)
    assert sw.fit_residual == sw.fit_residual  # finite when 4 levels converge
    assert sw.D_estimate > sw.dimensions.max()
