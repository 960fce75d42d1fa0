"""Verified linear algebra against extended-precision and exact oracles."""

from fractions import Fraction

import mpmath
import numpy as np
import pytest

from lyapcert.errors import ClusterError, VerificationError
from lyapcert.intervals import IArray, Interval
from lyapcert.verified_linalg import (
    inorm2_upper,
    interval_cholesky_succeeds,
    is_positive_definite,
    min_eig_lower_bound,
    verified_linear_solve,
    verified_sym_gevp,
)


def _random_spd(rng, n, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.exp(rng.uniform(0, np.log(cond), n))
    a = (q * d) @ q.T
    return (a + a.T) / 2  # exact symmetry, so point IArrays intersect


def test_cholesky_definite_and_not():
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    assert interval_cholesky_succeeds(IArray(a))
    assert is_positive_definite(IArray(a))
    b = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
    assert not is_positive_definite(IArray(b))


def test_min_eig_lower_bound_sound():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = _random_spd(rng, 5)
        lb = min_eig_lower_bound(IArray(a))
        assert lb <= np.linalg.eigvalsh(a)[0] + 1e-12


def test_inorm2_upper_dominates():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = rng.standard_normal((5, 5))
        ub = inorm2_upper(IArray(a))
        assert ub >= np.linalg.norm(a, 2) - 1e-12


def test_gevp_contains_extended_precision_eigs():
    """100 random 8x8 SPD pencils: every returned enclosure contains the
    corresponding extended-precision generalized eigenvalue."""
    mpmath.mp.dps = 50
    rng = np.random.default_rng(2024)
    certified = 0
    for trial in range(100):
        a1 = _random_spd(rng, 8, cond=50.0)
        a1 = 0.5 * (a1 + a1.T) * rng.choice([-1.0, 1.0])
        a0 = _random_spd(rng, 8, cond=20.0)
        try:
            enc = verified_sym_gevp(IArray(a1), IArray(a0))
        except ClusterError:
            # nearly degenerate random pencil: refusing to match indices
            # is the documented sound behavior
            continue
        certified += 1
        # reduce to a standard symmetric problem in extended precision
        L = mpmath.cholesky(mpmath.matrix(a0.tolist()))
        Linv = L**-1
        M = Linv * mpmath.matrix(a1.tolist()) * Linv.T
        M = (M + M.T) / 2
        ref = sorted(mpmath.mp.eigsy(M, eigvals_only=True))
        got = sorted(enc.values, key=lambda iv: iv.lo)
        for iv, ev in zip(got, ref[: len(got)]):
            assert mpmath.mpf(iv.lo) <= ev <= mpmath.mpf(iv.hi)
    assert certified >= 80


def test_linear_solve_contains_exact_rational_solution():
    # 2x2 Hilbert-type system with exactly representable entries
    a = np.array([[1.0, 0.5], [0.5, 1.0 / 4.0]])
    a[1, 1] = 0.375  # keep it nonsingular and dyadic
    b = np.array([1.0, 0.25])
    x = verified_linear_solve(IArray(a), IArray(b))
    fa = [[Fraction(v) for v in row] for row in a]
    det = fa[0][0] * fa[1][1] - fa[0][1] * fa[1][0]
    fx0 = (Fraction(1) * fa[1][1] - fa[0][1] * Fraction(1, 4)) / det
    fx1 = (fa[0][0] * Fraction(1, 4) - Fraction(1) * fa[1][0]) / det
    assert Fraction(x[0].lo) <= fx0 <= Fraction(x[0].hi)
    assert Fraction(x[1].lo) <= fx1 <= Fraction(x[1].hi)


def test_linear_solve_random_residual():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((6, 6)) + 6 * np.eye(6)
    b = rng.standard_normal(6)
    x = verified_linear_solve(IArray(a), IArray(b))
    xf = np.linalg.solve(a, b)
    for i in range(6):
        assert x[i].lo <= xf[i] <= x[i].hi or abs(x[i].mid - xf[i]) < 1e-9


def test_gevp_rejects_indefinite_mass():
    a1 = np.eye(3)
    a0 = np.diag([1.0, -1.0, 1.0])
    with pytest.raises(VerificationError):
        verified_sym_gevp(IArray(a1), IArray(a0))
