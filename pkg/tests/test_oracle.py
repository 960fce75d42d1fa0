"""Non-rigorous oracle layer: determinism, closed forms, and
self-consistency between samplers and quadrature."""

import numpy as np
import pytest

from lyapcert.errors import OracleFailure, UsageError
from lyapcert.oracle import (
    FtleSample,
    empirical_mle,
    fk_lambda_pitchfork,
    fk_lambda_shear,
    simulate_ftle_pitchfork,
    simulate_ftle_shear,
    stationary_density_pitchfork,
    stationary_density_shear,
)


def test_dt_precondition():
    with pytest.raises(UsageError):
        simulate_ftle_pitchfork(1.0, 1.0, t=1.0, count=10, dt=0.5)


def test_determinism_bit_identical():
    a = simulate_ftle_pitchfork(1.0, 1.0, t=2.0, count=64, dt=0.01, seed=9)
    b = simulate_ftle_pitchfork(1.0, 1.0, t=2.0, count=64, dt=0.01, seed=9)
    assert np.array_equal(a.values, b.values)
    c = simulate_ftle_shear(1.0, 5.0, 1.0, t=2.0, count=64, dt=0.01, seed=9)
    d = simulate_ftle_shear(1.0, 5.0, 1.0, t=2.0, count=64, dt=0.01, seed=9)
    assert np.array_equal(c.values, d.values)
    e = simulate_ftle_shear(1.0, 5.0, 1.0, t=2.0, count=64, dt=0.01, seed=10)
    assert not np.array_equal(c.values, e.values)


def test_shear_b_zero_exact():
    s = simulate_ftle_shear(2.0, 0.0, 1.0, t=5.0, count=32, dt=0.01, seed=1)
    assert np.all(s.values == -2.0)


def test_pitchfork_small_noise_equilibrium():
    # sigma -> 0: X sits at sqrt(alpha), lambda_t -> alpha - 3 alpha = -2a
    s = simulate_ftle_pitchfork(1.0, 1e-4, t=5.0, count=16, dt=0.001,
                                seed=2)
    assert abs(s.mean + 2.0) < 1e-2


def test_fk_pitchfork_sign_and_symmetry():
    v0, e0 = fk_lambda_pitchfork(0.0, 1.0)
    assert v0 < 0 and e0 < 1e-6
    v1, _ = fk_lambda_pitchfork(1.0, 1.0)
    assert v1 < 0  # lambda(alpha) < 0 for all alpha


def test_fk_shear_b_zero_uniform():
    v, _ = fk_lambda_shear(1.5, 0.0, 1.0)
    assert v == pytest.approx(-1.5, abs=1e-12)


def test_fk_shear_small_b_negative():
    # b < 2 alpha: drift-dominated, uniformly negative exponents
    v, _ = fk_lambda_shear(1.0, 1.0, 1.0)
    assert v < 0


def test_mc_agrees_with_fk_pitchfork():
    v, _ = fk_lambda_pitchfork(1.0, 1.0)
    s = simulate_ftle_pitchfork(1.0, 1.0, t=50.0, count=4000, dt=0.02,
                                seed=11)
    assert abs(s.mean - v) <= 3.5 * s.stderr


def test_positive_fraction_decays_like_rate():
    """P(lambda_t > 0) decays roughly like exp(-t I(0)) with
    I(0) ~ 0.4552 for alpha = sigma = 1 (slope within a factor 2)."""
    fracs = {}
    for t in (8.0, 16.0):
        s = simulate_ftle_pitchfork(1.0, 1.0, t=t, count=50000, dt=0.05,
                                    seed=13)
        fracs[t] = (s.values > 0).mean()
    assert 0 < fracs[16.0] < fracs[8.0] < 1
    slope = -(np.log(fracs[16.0]) - np.log(fracs[8.0])) / 8.0
    assert 0.4552 / 2 <= slope <= 0.4552 * 2


def test_stationary_densities_normalized():
    g, d = stationary_density_pitchfork(1.0, 1.0)
    assert np.trapezoid(d, g) == pytest.approx(1.0, abs=1e-8)
    g2, d2 = stationary_density_shear(1.0, 5.0, 1.0)
    assert np.trapezoid(d2, g2) == pytest.approx(1.0, abs=1e-6)
    assert np.all(d2 >= 0)


def test_empirical_mle_basics():
    s = simulate_ftle_shear(1.0, 0.0, 1.0, t=5.0, count=128, dt=0.01,
                            seed=3)
    est, ci = empirical_mle(s, 0.0)
    assert est == 0.0
    est2, (lo, hi) = empirical_mle(s, 1.5)
    # degenerate samples: Lambda(p) = -alpha p exactly
    assert est2 == pytest.approx(-1.5, abs=1e-12)
    assert lo <= est2 <= hi


def test_empirical_mle_overflow_guard():
    s = FtleSample(t=10.0, values=np.full(8, 50.0), model="synthetic")
    with pytest.raises(OracleFailure):
        empirical_mle(s, 3.0)


def test_ftle_sample_rejects_nonfinite():
    with pytest.raises(OracleFailure):
        FtleSample(t=1.0, values=np.array([1.0, np.inf]), model="x")
