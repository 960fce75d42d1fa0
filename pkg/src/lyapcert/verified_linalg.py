"""Certified finite-dimensional linear algebra.

Provides the two primitives the spectral code relies on:

* a lower bound on the smallest eigenvalue of a symmetric interval
  matrix, certified through an interval Cholesky factorization, and
* enclosures for all eigenvalues of a symmetric-definite generalized
  problem A1 v = lam A0 v, with residual-based per-eigenvalue radii and
  a pigeonhole index-matching step.

Approximate quantities come from numpy/scipy in ordinary floating point;
every bound that matters is recomputed in interval arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ClusterError, DomainError, VerificationError
from .intervals import IArray, Interval, imatvec, isqrt


def sym_part(a: IArray) -> IArray:
    """Intersection of A with its transpose.

    Both A and A^T enclose the exact symmetric matrix, so their
    elementwise intersection does too, and it is symmetric-shaped.
    """
    return a.intersect(a.T)


def interval_cholesky_succeeds(a: IArray) -> bool:
    """True if every symmetric matrix in A admits a Cholesky factorization.

    Runs the outer-product Cholesky elimination in interval arithmetic;
    if every pivot stays strictly positive, every point matrix in the
    enclosure is positive definite.
    """
    n = a.shape[0]
    work = a.copy()
    for k in range(n):
        piv = work.item(k, k)
        if piv.lo <= 0.0:
            return False
        rpiv = isqrt(piv)
        if k + 1 == n:
            return True
        col = work[k + 1 :, k] / rpiv
        outer = IArray(col.lo[:, None], col.hi[:, None]) * IArray(
            col.lo[None, :], col.hi[None, :]
        )
        # only the trailing block is read afterwards
        tail = work[k + 1 :, k + 1 :] - outer
        work.lo[k + 1 :, k + 1 :] = tail.lo
        work.hi[k + 1 :, k + 1 :] = tail.hi
    return True


def min_eig_lower_bound(a: IArray) -> float:
    """Certified lower bound c with lambda_min(A) >= c for symmetric A.

    Starts from the float estimate and backs off until the interval
    Cholesky of A - c*I succeeds.  Returns -inf-like failure as
    VerificationError if no positive-definite shift is found.
    """
    n = a.shape[0]
    est = float(scipy.linalg.eigvalsh(a.mid)[0])
    eye = np.eye(n)
    slack = max(1e-16, abs(est) * 2.0**-40)
    for _ in range(60):
        c = est - slack
        shifted = IArray(a.lo - c * eye, a.hi - c * eye)
        # subtraction above is exact on the diagonal only up to rounding;
        # pad one ulp outward to stay an enclosure
        shifted = IArray(
            np.nextafter(shifted.lo, -np.inf), np.nextafter(shifted.hi, np.inf)
        )
        if interval_cholesky_succeeds(sym_part(shifted)):
            return c
        slack *= 4.0
        if slack > max(1.0, abs(est)) * 0.5 and c < est - max(1.0, abs(est)):
            break
    raise VerificationError("could not certify a lower eigenvalue bound")


def is_positive_definite(a: IArray) -> bool:
    return interval_cholesky_succeeds(sym_part(a))


def inorm2_upper(x: IArray) -> float:
    """Upper bound on the Euclidean norm of any vector in the enclosure."""
    s = x.sqr().sum()
    return isqrt(Interval(max(0.0, s.lo), s.hi)).hi


@dataclass
class EigenEnclosure:
    """Disjoint enclosures for the lowest eigenvalues of a GEVP."""

    values: list
    vectors: np.ndarray
    a0_min_eig: float


def verified_sym_gevp(a1: IArray, a0: IArray) -> EigenEnclosure:
    """Enclose all eigenvalues of A1 v = lam A0 v, A0 positive definite.

    Residual bound: for symmetric A1 and A0 >= c I with c > 0, an
    approximate pair (lt, xt) satisfies

        min_j |lam_j - lt| <= ||A1 xt - lt A0 xt||_2 / (c * ||xt||_2).

    With n approximate pairs whose enclosures are pairwise disjoint, the
    pigeonhole principle pins each true eigenvalue to its own enclosure.
    Overlapping enclosures raise ClusterError rather than guessing.
    """
    a1 = sym_part(a1)
    a0 = sym_part(a0)
    n = a0.shape[0]
    c = min_eig_lower_bound(a0)
    if c <= 0.0:
        raise VerificationError("mass matrix not certified positive definite")

    try:
        w, v = scipy.linalg.eigh(a1.mid, a0.mid)
    except scipy.linalg.LinAlgError as exc:
        raise VerificationError("approximate eigensolve failed") from exc

    vi = IArray(v)
    wi = IArray(np.broadcast_to(w[None, :], v.shape).copy())
    resid = _imm(a1, vi) - wi * _imm(a0, vi)
    rnorm_sq = resid.sqr().sum(axis=0)
    vnorm_sq = vi.sqr().sum(axis=0)
    enclosures = []
    for j in range(n):
        lt = float(w[j])
        rnorm = isqrt(Interval(max(0.0, rnorm_sq.lo[j]), rnorm_sq.hi[j])).hi
        xnorm_lo = isqrt(
            Interval(max(0.0, vnorm_sq.lo[j]), vnorm_sq.hi[j])
        ).lo
        if xnorm_lo <= 0.0:
            raise VerificationError("degenerate approximate eigenvector")
        rad = (Interval(rnorm) / (Interval(c) * Interval(xnorm_lo))).hi
        enclosures.append(Interval(_pad_down(lt, rad), _pad_up(lt, rad)))

    for j in range(n - 1):
        if enclosures[j].hi >= enclosures[j + 1].lo:
            raise ClusterError(
                f"eigenvalue enclosures {j} and {j + 1} overlap; "
                "cannot certify index matching"
            )
    return EigenEnclosure(values=enclosures, vectors=v, a0_min_eig=c)


def _pad_down(x: float, r: float) -> float:
    return math.nextafter(x - r, -math.inf)


def _pad_up(x: float, r: float) -> float:
    return math.nextafter(x + r, math.inf)


def verified_linear_solve(a: IArray, b: IArray) -> IArray:
    """Enclosure of A^{-1} b via an approximate inverse.

    Uses the standard residual scheme: with R ~ inv(mid A) and
    G = I - R A, if ||G||_inf < 1 the true solution lies in
    xt + [-d, d] componentwise with d = ||R(b - A xt)||_inf / (1 - ||G||).
    """
    n = a.shape[0]
    try:
        r = np.linalg.inv(a.mid)
        xt = np.linalg.solve(a.mid, b.mid)
    except np.linalg.LinAlgError as exc:
        raise VerificationError("approximate solve failed") from exc
    ri = IArray(r)
    g = IArray(np.eye(n)) - _imm(ri, a)
    gnorm = float(np.max(np.sum(g.mag, axis=1)))
    if gnorm >= 1.0:
        raise VerificationError("residual iteration not contracting")
    resid = b - imatvec(a, IArray(xt))
    corr = imatvec(ri, resid)
    d = float(np.max(corr.mag)) / (1.0 - gnorm)
    d = math.nextafter(d, math.inf)
    return IArray(
        np.nextafter(xt - d, -np.inf), np.nextafter(xt + d, np.inf)
    )


def _imm(a: IArray, b: IArray) -> IArray:
    from .intervals import imatmul

    return imatmul(a, b)
