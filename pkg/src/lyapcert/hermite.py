"""Schrodinger operators with even polynomial potentials in a Hermite basis.

The pitchfork model leads to H f = -(sigma^2/2) f'' + V(x) f with
V(x) = c0 + c2 x^2 + c4 x^4 + c6 x^6.  Everything here is expressed in
the orthonormal scaled Hermite-function basis phi_m(x) = sqrt(beta)
psi_m(beta x): multiplication by x and differentiation are two-band
ladder operators on coefficient vectors, so H maps a finite expansion to
a finite expansion and every inner product is a coefficient dot product.
No quadrature enters the certified path.

Two-sided eigenvalue bounds come from the classical variational pair:
Rayleigh-Ritz upper bounds from a trial subspace, and Lehmann-Maehly
lower bounds which additionally need a separating value nu between the
last enclosed eigenvalue and the next one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, UsageError, VerificationError
from .intervals import (
    IArray,
    Interval,
    imatmul,
    ipad_rows,
    ipowi,
    isqrt,
    isqrt_arr,
)
from .verified_linalg import sym_part, verified_sym_gevp


@dataclass(frozen=True)
class PitchforkParams:
    """Drift alpha, noise sigma > 0, tilt p (all intervals)."""

    alpha: Interval
    sigma: Interval
    p: Interval

    def __post_init__(self):
        if self.sigma.lo <= 0.0:
            raise DomainError("sigma must be strictly positive")


@dataclass
class HermiteExpansion:
    """Finite expansion sum_m coeffs[m] * phi_m in the scale-beta basis."""

    beta: Interval
    coeffs: IArray

    def __post_init__(self):
        if self.coeffs.ndim != 1:
            raise DomainError("expansion coefficients must be a vector")


@dataclass(frozen=True)
class QuadraticLowerBound:
    """Certified a x^2 + b <= V(x) on all of R, with a > 0."""

    a: Interval
    b: Interval


@dataclass
class TwoSidedEnclosure:
    """Index-matched eigenvalue bounds lowers[m] <= lambda_m <= uppers[m]."""

    lowers: list
    uppers: list

    def __post_init__(self):
        for lo, hi in zip(self.lowers, self.uppers):
            if lo > hi:
                raise VerificationError("crossed eigenvalue bounds")


def potential_coeffs(params: PitchforkParams) -> list:
    """Even-power coefficients [c0, c2, c4, c6] of the tilted potential.

    V_p(x) = (alpha - 3x^2)(1/2 - p) + (x^3 - alpha x)^2 / (2 sigma^2).
    """
    alpha, sigma, p = params.alpha, params.sigma, params.p
    half_minus_p = Interval(0.5) - p
    two_s2 = Interval(2) * sigma.sqr()
    c0 = alpha * half_minus_p
    c2 = Interval(-3) * half_minus_p + alpha.sqr() / two_s2
    c4 = -(alpha + alpha) / two_s2
    c6 = Interval(1) / two_s2
    return [c0, c2, c4, c6]


def eval_even_poly(coeffs: list, x: Interval) -> Interval:
    """Horner evaluation of c0 + c2 t + c4 t^2 + c6 t^3 at t = x^2."""
    t = x.sqr()
    acc = coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * t + c
    return acc


def eval_potential(params: PitchforkParams, x: Interval) -> Interval:
    return eval_even_poly(potential_coeffs(params), x)


# -- ladder operators on coefficient blocks ----------------------------

_sqrt_cache: dict = {}


def _half_sqrts(n: int) -> IArray:
    """Interval enclosures of sqrt(m/2) for m = 0..n-1 (cached)."""
    got = _sqrt_cache.get(n)
    if got is None:
        got = isqrt_arr(IArray(np.arange(n) / 2.0, np.arange(n) / 2.0))
        _sqrt_cache[n] = got
    return got


def _shifted(block: IArray, s: IArray) -> tuple:
    """Pieces s[m] c_m placed at rows m+1 and m-1 of an (L+1)-row block."""
    L = block.shape[0]
    scaled_up = IArray(s.lo[1 : L + 1, None], s.hi[1 : L + 1, None]) * block
    up = ipad_rows(IArray(scaled_up.lo, scaled_up.hi), 1)
    up = IArray(np.roll(up.lo, 1, axis=0), np.roll(up.hi, 1, axis=0))
    scaled_dn = IArray(s.lo[1:L, None], s.hi[1:L, None]) * block[1:, :]
    down = ipad_rows(scaled_dn, 2)
    return up, down


def apply_x(block: IArray, beta: Interval) -> IArray:
    """Multiply-by-x on a coefficient block: (L, m) -> (L+1, m).

    x phi_m = (1/beta)(sqrt((m+1)/2) phi_{m+1} + sqrt(m/2) phi_{m-1}).
    """
    L = block.shape[0]
    s = _half_sqrts(L + 1)
    up, down = _shifted(block, s)
    return (up + down) * (Interval(1) / beta)


def apply_ddx(block: IArray, beta: Interval) -> IArray:
    """d/dx on a coefficient block: (L, m) -> (L+1, m).

    phi_m' = beta(sqrt(m/2) phi_{m-1} - sqrt((m+1)/2) phi_{m+1}).
    """
    L = block.shape[0]
    s = _half_sqrts(L + 1)
    up, down = _shifted(block, s)
    return (down - up) * beta


def apply_schrodinger(
    block: IArray, poly: list, sigma: Interval, beta: Interval
) -> IArray:
    """Apply H = -(sigma^2/2) d2/dx2 + (even poly of degree 6) columnwise.

    Exact on finite expansions: output has six extra rows.
    """
    if block.ndim != 2:
        raise UsageError("apply_schrodinger expects a 2-d coefficient block")
    c0, c2, c4, c6 = poly
    kin = apply_ddx(apply_ddx(block, beta), beta) * (
        -(sigma.sqr()) * Interval(0.5)
    )
    # Horner in the x^2 operator: ((c6 X^2 + c4) X^2 + c2) X^2 + c0
    acc = block * c6
    acc = apply_x(apply_x(acc, beta), beta)
    acc = acc + ipad_rows(block * c4, 2)
    acc = apply_x(apply_x(acc, beta), beta)
    acc = acc + ipad_rows(block * c2, 4)
    acc = apply_x(apply_x(acc, beta), beta)
    acc = acc + ipad_rows(block * c0, 6)
    return acc + ipad_rows(kin, 4)


def apply_H_hermite(params: PitchforkParams, f: HermiteExpansion) -> HermiteExpansion:
    """Image of a single expansion under the tilted pitchfork operator."""
    block = f.coeffs.reshape(-1, 1)
    out = apply_schrodinger(block, potential_coeffs(params), params.sigma, f.beta)
    return HermiteExpansion(beta=f.beta, coeffs=out.reshape(-1))


# -- matrix assembly ----------------------------------------------------


def _gram(a: IArray, b: IArray) -> IArray:
    """Symmetrized interval Gram matrix a^T b for same-height blocks."""
    g = imatmul(a.T, b)
    return sym_part(g)


def assemble_matrices(
    params: PitchforkParams, trials: list, need_a2: bool = False
):
    """A0 = <f_i, f_j>, A1 = <H f_i, f_j>, optionally A2 = <H f_i, H f_j>."""
    beta = trials[0].beta
    for f in trials:
        if f.beta != beta:
            raise UsageError("mixed basis scales in trial set")
    L = max(len(f.coeffs) for f in trials)
    block = IArray.zeros((L, len(trials)))
    for j, f in enumerate(trials):
        block.lo[: len(f.coeffs), j] = f.coeffs.lo
        block.hi[: len(f.coeffs), j] = f.coeffs.hi
    images = apply_schrodinger(block, potential_coeffs(params), params.sigma, beta)
    padded = ipad_rows(block, 6)
    a0 = _gram(block, block)
    a1 = _gram(images, padded)
    a2 = _gram(images, images) if need_a2 else None
    return a0, a1, a2


def rayleigh_ritz_upper(a0: IArray, a1: IArray) -> list:
    """Certified upper bounds: lambda_m <= uppers[m] for the trial count."""
    enc = verified_sym_gevp(a1, a0)
    return [iv.hi for iv in enc.values]


def lehmann_maehly_lower(
    a0: IArray, a1: IArray, a2: IArray, nu: Interval
) -> list:
    """Certified lower bounds from the separating value nu.

    Caller must have certified uppers[M] < nu <= lambda_{M+1}.  Forms
    B1 = A1 - nu A0 and B2 = A2 - 2 nu A1 + nu^2 A0 and uses the top
    eigenvalues mu of B1 v = mu B2 v: lowers[m] = nu + 1/mu_{M-m}.
    """
    b1 = a1 - _scale(a0, nu)
    b2 = a2 - _scale(a1, Interval(2) * nu) + _scale(a0, nu.sqr())
    return lm_from_b(b1, b2, nu)


def lm_from_b(b1: IArray, b2: IArray, nu: Interval) -> list:
    enc = verified_sym_gevp(sym_part(b1), sym_part(b2))
    mu = enc.values
    top = mu[-1]
    if top.hi >= 0.0:
        raise VerificationError("separating-value test mu_M < 0 failed")
    count = len(mu)
    lowers = []
    for m in range(count):
        lowers.append((nu + Interval(1) / mu[count - 1 - m]).lo)
    return lowers


def _scale(a: IArray, c: Interval) -> IArray:
    return a * c


# -- quadratic minorant --------------------------------------------------


def certify_quadratic_lower_bound(
    params: PitchforkParams, a_hint: float | None = None
) -> QuadraticLowerBound:
    """Find and certify a x^2 + b <= V_p(x) on all of R.

    Heuristic proposal in floats (grid minimum of V - a x^2 plus slack),
    then a machine check: interval evaluation of the difference on an
    adaptive subdivision of a compact core, and for the tail a
    monotonicity argument driven by the positive x^6 coefficient.
    """
    poly = potential_coeffs(params)
    if poly[3].lo <= 0.0:
        raise VerificationError("leading potential coefficient not positive")
    a_float = a_hint if a_hint is not None else max(1.0, poly[1].mid + 3.0)
    xs = np.linspace(-8.0, 8.0, 32001)
    mids = [c.mid for c in poly]
    vals = mids[0] + mids[1] * xs**2 + mids[2] * xs**4 + mids[3] * xs**6
    b_guess = float(np.min(vals - a_float * xs**2))
    a = Interval(a_float)
    # widen the slack until certification passes: interval-valued
    # parameters push the attainable minimum below the midpoint estimate
    slack = 1e-6
    last_err = None
    for _ in range(24):
        b = Interval(b_guess - slack)
        h = [poly[0] - b, poly[1] - a, poly[2], poly[3]]
        try:
            _certify_even_poly_nonneg(h)
            return QuadraticLowerBound(a=a, b=b)
        except VerificationError as exc:
            last_err = exc
            slack *= 4.0
    raise VerificationError(
        "no certifiable quadratic minorant found"
    ) from last_err


def _certify_even_poly_nonneg(h: list, radius: float = 16.0) -> None:
    """Certify h(x) = e0 + e2 x^2 + e4 x^4 + e6 x^6 >= 0 on R, e6 > 0.

    Tail |x| >= R: with t = x^2, phi(t) = e6 t^3 - |e4| t^2 - |e2| t - |e0|
    minorizes h; phi(R^2) >= 0 together with phi' > 0 on [R^2, inf) gives
    nonnegativity.  Core: adaptive bisection of [0, R] (h is even).
    """
    e0, e2, e4, e6 = h
    if e6.lo <= 0.0:
        raise VerificationError("tail coefficient not positive")
    r2 = Interval(radius).sqr()
    a4 = abs(e4)
    a2 = abs(e2)
    a0 = abs(e0)
    phi = ((e6 * r2 - a4) * r2 - a2) * r2 - a0
    dphi = (Interval(3) * e6 * r2 - Interval(2) * a4) * r2 - a2
    if phi.lo < 0.0 or dphi.lo <= 0.0:
        raise VerificationError("tail certificate failed; enlarge radius")
    stack = [Interval(0.0, radius)]
    budget = 200000
    while stack:
        seg = stack.pop()
        val = eval_even_poly(h, seg)
        if val.lo >= 0.0:
            continue
        budget -= 1
        if budget <= 0 or seg.width < 2.0**-40:
            raise VerificationError(
                "quadratic minorant certification failed near "
                f"x in [{seg.lo}, {seg.hi}]"
            )
        mid = seg.mid
        stack.append(Interval(seg.lo, mid))
        stack.append(Interval(mid, seg.hi))


# -- float helpers (non-rigorous, used only to propose trial spaces) ----


def float_hamiltonian(L: int, poly_mid, sigma: float, beta: float) -> np.ndarray:
    """Dense float matrix of H on the first L basis functions (plumbing)."""
    d0, d2, d4, d6 = poly_mid

    def ladder_x(n):
        X = np.zeros((n + 1, n))
        m = np.arange(n)
        X[m + 1, m] = np.sqrt((m + 1) / 2) / beta
        X[m[1:] - 1, m[1:]] = np.sqrt(m[1:] / 2) / beta
        return X

    def ladder_d(n):
        D = np.zeros((n + 1, n))
        m = np.arange(n)
        D[m + 1, m] = -np.sqrt((m + 1) / 2) * beta
        D[m[1:] - 1, m[1:]] = np.sqrt(m[1:] / 2) * beta
        return D

    kin = -(sigma**2 / 2) * (ladder_d(L + 1) @ ladder_d(L))
    X = [ladder_x(L + k) for k in range(6)]
    x2 = X[1] @ X[0]
    x4 = X[3] @ X[2] @ x2
    x6 = X[5] @ X[4] @ x4
    out = np.zeros((L + 6, L))
    out[: L + 2] += kin
    out[np.arange(L), np.arange(L)] += d0
    out[: L + 2] += d2 * x2
    out[: L + 4] += d4 * x4
    out += d6 * x6
    return out


def float_trial_block(L: int, poly_mid, sigma: float, beta: float, count: int):
    """Lowest-count eigenvector block of the truncated float operator."""
    full = float_hamiltonian(L, poly_mid, sigma, beta)[:L]
    full = (full + full.T) / 2
    _, vec = scipy.linalg.eigh(full)
    return vec[:, :count]
