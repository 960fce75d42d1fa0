"""Pointwise Newton-Kantorovich certification for the planar shear
model: closed forms, residual oracles, and bound quality."""

import numpy as np
import pytest

from lyapcert.errors import DomainError, UsageError
from lyapcert.intervals import Interval
from lyapcert.shear import (
    ShearParams,
    apply_Lp,
    eval_Fp,
    moment_lyapunov_shear_point,
    newton_approx_eigenpair,
    nk_validate,
)


def _params(alpha, b, sigma, p):
    return ShearParams(alpha=Interval(alpha), b=Interval(b),
                       sigma=Interval(sigma), p=Interval(p))


def test_sigma_positive_required():
    with pytest.raises(DomainError):
        _params(1.0, 5.0, 0.0, 1.0)


def test_newton_residual_small():
    approx = newton_approx_eigenpair(_params(1.0, 5.0, 1.0, 1.0), 60)
    assert approx.residual < 1e-12
    assert approx.real_pair


def test_self_consistency_across_N():
    lam_small = newton_approx_eigenpair(_params(1.0, 5.0, 1.0, 1.0), 24).lam
    lam_big = newton_approx_eigenpair(_params(1.0, 5.0, 1.0, 1.0), 60).lam
    assert abs(lam_small - lam_big) < 1e-10


def test_certificate_quality_standard_params():
    params = _params(1.0, 5.0, 1.0, 1.0)
    approx = newton_approx_eigenpair(params, 60)
    cert = nk_validate(approx, params)
    assert cert.Y < 1e-9
    assert cert.Z1 < 0.5  # comfortably inside the contraction regime
    assert cert.r_min < 1e-10
    assert cert.Z2 > 0.0


def test_moment_lyapunov_closed_form_b_zero():
    """b = 0 decouples the angle: Lambda(p) = -alpha p exactly."""
    rng = np.random.default_rng(123)
    for _ in range(20):
        alpha = rng.uniform(-2.0, 2.0)
        p = rng.uniform(-3.0, 3.0)
        lam, _ = moment_lyapunov_shear_point(_params(alpha, 0.0, 1.0, p),
                                             N=16)
        assert lam.lo <= -alpha * p <= lam.hi
        assert lam.width <= 1e-10


def test_moment_lyapunov_zero_at_p_zero():
    lam, _ = moment_lyapunov_shear_point(_params(1.0, 5.0, 1.0, 0.0))
    assert lam.contains_zero()
    assert lam.width <= 1e-8


def test_enclosure_intersects_across_resolutions():
    l1, _ = moment_lyapunov_shear_point(_params(1.0, 5.0, 1.0, 1.0), N=40)
    l2, _ = moment_lyapunov_shear_point(_params(1.0, 5.0, 1.0, 1.0), N=80)
    assert l1.intersects(l2)


def test_apply_Lp_matches_dense_float():
    """Interval operator application agrees with a dense float matrix on
    the interior frequencies (the dense truncation drops the boundary
    coupling, so compare |n| <= N-1)."""
    params = _params(1.0, 5.0, 1.0, 0.7)
    approx = newton_approx_eigenpair(params, 24)
    from lyapcert.shear import FourierSeq, _float_Lp_matrix
    from lyapcert.intervals import CArray

    N = 24
    f = approx.f
    out = apply_Lp(FourierSeq(N, CArray(f)), params)
    ref = _float_Lp_matrix(N, params) @ f
    for n in range(-(N - 1), N):
        e = out.coeffs[n + out.N]
        r = ref[n + N]
        assert e.re.lo - 1e-10 <= r.real <= e.re.hi + 1e-10
        assert e.im.lo - 1e-10 <= r.imag <= e.im.hi + 1e-10
