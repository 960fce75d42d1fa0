"""Hermite-basis operator application and eigenvalue bounds, checked
against high-precision quadrature and grid-scan oracles."""

import math

import mpmath
import numpy as np
import pytest

from lyapcert.errors import DomainError, VerificationError
from lyapcert.hermite import (
    HermiteExpansion,
    PitchforkParams,
    apply_H_hermite,
    apply_ddx,
    apply_schrodinger,
    apply_x,
    assemble_matrices,
    certify_quadratic_lower_bound,
    eval_potential,
    float_trial_block,
    potential_coeffs,
    rayleigh_ritz_upper,
)
from lyapcert.intervals import IArray, Interval


def _params(alpha, sigma, p):
    return PitchforkParams(alpha=Interval(alpha), sigma=Interval(sigma),
                           p=Interval(p))


def _hermite_fn(m, beta, x):
    """phi_m(x) in the scale-beta basis, extended precision."""
    z = beta * x
    h = mpmath.hermite(m, z)
    norm = mpmath.sqrt(beta / (mpmath.mpf(2) ** m
                               * mpmath.factorial(m) * mpmath.sqrt(mpmath.pi)))
    return norm * h * mpmath.exp(-z * z / 2)


def test_sigma_positive_required():
    with pytest.raises(DomainError):
        _params(1.0, 0.0, 0.5)


def test_potential_value_direct():
    # V_p(x) = (alpha - 3x^2)(1/2 - p) + (x^3 - alpha x)^2 / (2 sigma^2)
    pr = _params(0.0, 1.0, 0.0)
    v = eval_potential(pr, Interval(1.0))
    # alpha=0, p=0, x=1: (0-3)(1/2) + (1-0)^2/2 = -1
    assert v.lo <= -1.0 <= v.hi
    assert v.width < 1e-12


def test_potential_interval_contains_grid_min():
    pr = _params(1.0, 1.0, 0.0)
    enc = eval_potential(pr, Interval(-2.0, 2.0))
    grid = np.linspace(-2, 2, 2001)
    vals = [(eval_potential(pr, Interval(float(x)))).mid for x in grid]
    assert enc.lo <= min(vals) + 1e-12
    assert enc.hi >= max(vals) - 1e-12


def test_apply_x_and_ddx_vs_quadrature():
    """<x phi_0, phi_1> and <phi_0', phi_1> against 50-digit quadrature."""
    mpmath.mp.dps = 30
    beta = 1.3
    e0 = HermiteExpansion(beta=Interval(beta),
                          coeffs=IArray(np.array([1.0])))
    bx = apply_x(e0.coeffs.reshape(-1, 1), Interval(beta))
    bd = apply_ddx(e0.coeffs.reshape(-1, 1), Interval(beta))
    ref_x = mpmath.quad(
        lambda x: x * _hermite_fn(0, beta, x) * _hermite_fn(1, beta, x),
        [-mpmath.inf, mpmath.inf])
    ref_d = mpmath.quad(
        lambda x: mpmath.diff(lambda y: _hermite_fn(0, beta, y), x)
        * _hermite_fn(1, beta, x),
        [-mpmath.inf, mpmath.inf])
    assert bx[1, 0].lo <= float(ref_x) <= bx[1, 0].hi
    assert bd[1, 0].lo <= float(ref_d) <= bd[1, 0].hi


def test_kinetic_term_expands_over_h0_h2():
    """-(sigma^2/2) phi_0'' lands on span{phi_0, phi_2} with the harmonic
    oscillator coefficients, cross-checked by quadrature."""
    mpmath.mp.dps = 30
    beta = 1.0
    block = IArray(np.array([[1.0]]))
    kin = apply_ddx(apply_ddx(block, Interval(beta)), Interval(beta)) * \
        Interval(-0.5)
    for m in (0, 2):
        ref = mpmath.quad(
            lambda x: -0.5
            * mpmath.diff(lambda y: _hermite_fn(0, beta, y), x, 2)
            * _hermite_fn(m, beta, x),
            [-mpmath.inf, mpmath.inf])
        assert kin[m, 0].lo - 1e-12 <= float(ref) <= kin[m, 0].hi + 1e-12
    # odd rows vanish up to outward rounding
    assert kin[1, 0].contains_zero() and kin[1, 0].width < 1e-300


def test_assembled_matrices_vs_quadrature():
    """Generic parameters: A1 entries contain adaptive-quadrature values
    of <H f_i, f_j> for low Hermite trial functions."""
    mpmath.mp.dps = 30
    pr = _params(1.0, 1.0, 0.7)
    beta = 1.4
    trials = [
        HermiteExpansion(beta=Interval(beta),
                         coeffs=IArray(np.eye(3)[m][: m + 1]))
        for m in range(3)
    ]
    a0, a1, _ = assemble_matrices(pr, trials)
    c0, c2, c4, c6 = [iv.mid for iv in potential_coeffs(pr)]

    def H_f(m, x):
        kin = -0.5 * mpmath.diff(lambda y: _hermite_fn(m, beta, y), x, 2)
        pot = (c0 + c2 * x**2 + c4 * x**4 + c6 * x**6) \
            * _hermite_fn(m, beta, x)
        return kin + pot

    for i in range(3):
        for j in range(3):
            ref = mpmath.quad(lambda x: H_f(i, x) * _hermite_fn(j, beta, x),
                              [-mpmath.inf, mpmath.inf])
            assert a1[i, j].lo - 1e-10 <= float(ref) <= a1[i, j].hi + 1e-10
            ref0 = 1.0 if i == j else 0.0
            assert a0[i, j].lo - 1e-12 <= ref0 <= a0[i, j].hi + 1e-12


def test_apply_H_exact_on_finite_expansion():
    pr = _params(1.0, 1.0, 0.3)
    f = HermiteExpansion(beta=Interval(1.2),
                         coeffs=IArray(np.array([0.5, -0.25, 1.0])))
    out = apply_H_hermite(pr, f)
    assert len(out.coeffs.lo) == len(f.coeffs.lo) + 6


def test_rayleigh_ritz_dominates_float_eigs():
    pr = _params(1.0, 1.0, 0.5)
    poly = [iv.mid for iv in potential_coeffs(pr)]
    beta = 1.6
    block = float_trial_block(40, poly, 1.0, beta, 6)
    trials = [
        HermiteExpansion(beta=Interval(beta), coeffs=IArray(block[:, m]))
        for m in range(6)
    ]
    a0, a1, _ = assemble_matrices(pr, trials)
    uppers = rayleigh_ritz_upper(a0, a1)
    # large dense float discretization as oracle for true eigenvalues
    import lyapcert.hermite as h
    Hbig = h.float_hamiltonian(200, poly, 1.0, beta)[:200]
    Hbig = (Hbig + Hbig.T) / 2
    ref = np.linalg.eigvalsh(Hbig)
    for m, ub in enumerate(uppers):
        assert ub >= ref[m] - 1e-9


def test_quadratic_lower_bound_certifies():
    pr = _params(1.0, 1.0, 0.0)
    q = certify_quadratic_lower_bound(pr)
    assert q.a.lo > 0.0
    # spot-check the minorant on a grid
    for x in np.linspace(-4, 4, 81):
        v = eval_potential(pr, Interval(float(x)))
        m = q.a * Interval(float(x)).sqr() + q.b
        assert m.lo <= v.hi + 1e-12
