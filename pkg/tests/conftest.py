"""Shared fixtures.

The expensive certified computations (a full-range shear continuation
certificate and pitchfork rate runs) are session-scoped so that the
acceptance tests can share them.
"""

import time

import pytest

from lyapcert.continuation import extended_nk_validate
from lyapcert.homotopy import moment_lyapunov_pitchfork
from lyapcert.hermite import PitchforkParams
from lyapcert.intervals import Interval
from lyapcert.shear import ShearParams


def pitchfork_evaluator(alpha, sigma):
    alpha = Interval._coerce(alpha)
    sigma = Interval._coerce(sigma)

    def ev(p):
        pr = PitchforkParams(alpha=alpha, sigma=sigma,
                             p=Interval._coerce(p))
        return moment_lyapunov_pitchfork(pr).lam

    return ev


@pytest.fixture(scope="session")
def shear_cert_full():
    """Criterion-scale parameter-uniform shear certificate:
    alpha=1, b=5, sigma=1 over p in [-4, 6], eta=1.01."""
    params = ShearParams(alpha=Interval(1.0), b=Interval(5.0),
                         sigma=Interval(1.0), p=Interval(0.0))
    t0 = time.time()
    cert = extended_nk_validate(
        params, (Interval.from_decimal("-4"), Interval.from_decimal("6")),
        N=60, K=80, eta=1.01)
    return cert, time.time() - t0


@pytest.fixture(scope="session")
def shear_cert_narrow():
    """Cheap shear certificate on a narrow parameter range around 0,
    for tests that only need certified derivatives at p = 0."""
    params = ShearParams(alpha=Interval(1.0), b=Interval(5.0),
                         sigma=Interval(1.0), p=Interval(0.0))
    return extended_nk_validate(
        params, (Interval(-0.5), Interval(1.0)), N=50, K=24, eta=1.01)
