"""Parameter-uniform validation of the shear eigenvalue map p -> Lambda(p).

The pointwise Newton-Kantorovich argument extends to a whole parameter
interval [p-, p+] by expanding the eigenpair in Chebyshev series of the
(rescaled) parameter.  Sequences are measured in the weighted norm

    ||u||_eta = |u_0| + 2 sum_{k>=1} |u_k| eta^k,   eta > 1,

under which Chebyshev multiplication is submultiplicative and membership
implies analyticity on a Bernstein ellipse, yielding explicit bounds for
first and second derivatives in p.  A single certificate then encloses
Lambda, Lambda', and Lambda'' uniformly over the interval.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import (
    ApproxFailure,
    BracketFailure,
    DomainError,
    PositivityFailed,
    UsageError,
    VerificationError,
)
from .intervals import (
    CArray,
    ComplexInterval,
    IArray,
    Interval,
    icos,
    ilog,
    imatvec,
    isqrt,
)
from .shear import (
    EigPairApprox,
    ShearParams,
    _float_DF_inverse,
    fourier_lower_bound,
    newton_approx_eigenpair,
)

__all__ = [
    "ChebSeq",
    "FourierChebSeq",
    "ContinuationCertificate",
    "cheb_norm",
    "cheb_eval",
    "cheb_mul_batch",
    "cheb_derivative",
    "derivative_bound_constants",
    "extended_nk_validate",
    "lambda_derivatives_at",
    "rate_at_zero_from_certificate",
]

_EPS = np.finfo(float).eps


# -- Chebyshev sequences ------------------------------------------------


@dataclass(frozen=True)
class ChebSeq:
    """Real Chebyshev series u(p) = sum_k c_k T_k(t(p)) on a parameter
    domain [p-, p+], with t the affine map onto [-1, 1]."""

    eta: float
    p_lo: Interval
    p_hi: Interval
    coeffs: IArray

    def __post_init__(self):
        if self.eta <= 1.0:
            raise DomainError("Chebyshev weight eta must exceed 1")
        if self.coeffs.ndim != 1:
            raise DomainError("Chebyshev coefficients must be a vector")

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    def rescale(self, p: Interval) -> Interval:
        """Affine image of p in [-1, 1]; raises outside the domain."""
        if p.lo < self.p_lo.lo or p.hi > self.p_hi.hi:
            raise UsageError("evaluation point outside the certified domain")
        width = self.p_hi - self.p_lo
        if width.lo <= 0.0:
            return Interval(0.0)
        t = ((p - self.p_lo) + (p - self.p_hi)) / width
        return t.intersect(Interval(-1.0, 1.0))


def _weights(eta: float, count: int) -> IArray:
    """Norm weights [1, 2 eta, 2 eta^2, ...] with outward rounding."""
    e = Interval(eta)
    vals = [Interval(1.0)]
    pw = Interval(1.0)
    for _ in range(count - 1):
        pw = pw * e
        vals.append(pw * 2.0)
    return IArray.from_scalars(vals)


def _updot(mags: np.ndarray, w_hi: np.ndarray) -> np.ndarray:
    """Upper bound for sums of nonnegative products along the last axis."""
    k = mags.shape[-1]
    s = mags @ w_hi
    return np.nextafter(s * (1.0 + 2.0 * (k + 4) * _EPS), np.inf)


def _upsum(a: np.ndarray, axis=None) -> np.ndarray:
    n = a.size if axis is None else a.shape[axis]
    s = np.sum(a, axis=axis)
    return np.nextafter(s * (1.0 + 2.0 * (n + 4) * _EPS), np.inf)


def cheb_norm(u: ChebSeq) -> Interval:
    """The weighted l^1 norm; an interval whose upper endpoint is the
    rigorous bound used by all estimates."""
    w = _weights(u.eta, u.K + 1)
    hi = float(_updot(abs(u.coeffs).hi, w.hi))
    lo = float(np.sum(abs(u.coeffs).lo * w.lo))
    return Interval(min(lo, hi), hi)


def _t_polys(t: Interval, K: int) -> "list[Interval]":
    """T_0(t)..T_K(t) by the three-term recurrence, each intersected with
    [-1, 1] to stop the interval widths from compounding."""
    box = Interval(-1.0, 1.0)
    vals = [Interval(1.0), t.intersect(box)]
    for _ in range(K - 1):
        nxt = (t * vals[-1] * 2.0 - vals[-2]).intersect(box)
        vals.append(nxt)
    return vals[: K + 1]


def cheb_eval(u: ChebSeq, p: Interval) -> Interval:
    """Evaluation of u at p (interval argument).

    Clenshaw's recurrence is sharp for small |t| but its interval widths
    compound geometrically as |t| -> 1; the direct sum with clamped T_k
    values behaves oppositely, so the intersection of the two enclosures
    is used."""
    t = u.rescale(p)
    b1 = Interval(0.0)
    b2 = Interval(0.0)
    for k in range(u.K, 0, -1):
        b1, b2 = u.coeffs.item(k) + t * b1 * 2.0 - b2, b1
    clenshaw = u.coeffs.item(0) + t * b1 - b2
    tv = _t_polys(t, u.K)
    direct = Interval(0.0)
    for k in range(u.K, -1, -1):
        direct = direct + u.coeffs.item(k) * tv[k]
    return clenshaw.intersect(direct)


def cheb_derivative(u: ChebSeq) -> ChebSeq:
    """Derivative with respect to the physical parameter p (includes the
    chain-rule factor 2/(p+ - p-)), via the coefficient recurrence."""
    K = u.K
    scale = Interval(2.0) / (u.p_hi - u.p_lo)
    if K == 0:
        return ChebSeq(u.eta, u.p_lo, u.p_hi, IArray.from_scalars([Interval(0.0)]))
    d = [Interval(0.0)] * (K + 2)
    for k in range(K, 0, -1):
        d[k - 1] = d[k + 1] + u.coeffs.item(k) * (2.0 * k)
    d[0] = d[0] * 0.5
    out = IArray.from_scalars([d[k] * scale for k in range(K)])
    return ChebSeq(u.eta, u.p_lo, u.p_hi, out)


def cheb_mul_batch(u: CArray, v: CArray) -> CArray:
    """Chebyshev product along the last axis, batched over leading axes.

    Uses T_i T_j = (T_{i+j} + T_{|i-j|}) / 2 with slice-wise accumulation
    so every addition rounds outward."""
    Ku = u.shape[-1] - 1
    Kv = v.shape[-1] - 1
    if Ku <= Kv:
        a, b = u, v
    else:
        a, b = v, u
    Ka = a.shape[-1] - 1
    Kb = b.shape[-1] - 1
    lead = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
    out = CArray.zeros(lead + (Ka + Kb + 1,))
    for i in range(Ka + 1):
        w = a[..., i : i + 1] * b * 0.5
        out[..., i : i + Kb + 1] = out[..., i : i + Kb + 1] + w
        if i >= 1:
            out[..., 1 : i + 1] = out[..., 1 : i + 1] + w[..., i - 1 :: -1]
        out[..., 0 : Kb - i + 1] = out[..., 0 : Kb - i + 1] + w[..., i:]
    return out


def _cheb_eval_batch(u: CArray, t: Interval) -> CArray:
    """Clenshaw along the last axis with a common interval argument."""
    K = u.shape[-1] - 1
    lead = u.shape[:-1]
    b1 = CArray.zeros(lead)
    b2 = CArray.zeros(lead)
    for k in range(K, 0, -1):
        b1, b2 = u[..., k] + b1 * (t * 2.0) - b2, b1
    return u[..., 0] + b1 * t - b2


# -- containers ---------------------------------------------------------


@dataclass(frozen=True)
class FourierChebSeq:
    """Fourier-in-angle, Chebyshev-in-parameter coefficient grid f_{n,k},
    |n| <= N, 0 <= k <= K."""

    N: int
    K: int
    eta: float
    p_lo: Interval
    p_hi: Interval
    coeffs: CArray  # shape (2N+1, K+1)

    def __post_init__(self):
        if self.coeffs.shape != (2 * self.N + 1, self.K + 1):
            raise DomainError("coefficient grid shape mismatch")


@dataclass(frozen=True)
class ContinuationCertificate:
    """Uniform-in-p eigenpair certificate: the exact branch (f, Lambda)
    stays within r of (fbar, lambdabar) in the product norm, and the
    eigenfunction is uniformly positive, so lambdabar +- r encloses the
    moment Lyapunov exponent on all of [p-, p+]."""

    params: ShearParams
    N: int
    K: int
    eta: float
    p_lo: Interval
    p_hi: Interval
    lambdabar: ChebSeq
    fbar: FourierChebSeq
    r: float
    Y: float
    Z1: float
    Z2: float
    positivity: float  # certified uniform lower bound of the eigenfunction


# -- derivative constants ----------------------------------------------


def _delta(x: float, eta: float) -> Interval:
    """Radius of a complex ball around x in [-1,1] inside the Bernstein
    ellipse of parameter eta (lower bound by outward rounding)."""
    ie = Interval(eta)
    mean = (ie + Interval(1.0) / ie) * 0.5
    thresh = (Interval(2.0) / (ie + Interval(1.0) / ie)).hi
    if x > thresh:
        return mean - x
    half = (ie - Interval(1.0) / ie) * 0.5
    return half * isqrt(Interval(1.0) - Interval(x).sqr())


def derivative_bound_constants(eta: float, p1: float, p2: float):
    """Constants C1, C2 with |u'(x)| <= C1 ||u||_eta and |u''(x)| <= C2
    ||u||_eta for x in [p1, p2] (rescaled to [-1, 1]) and any u in the
    weighted space.  Each constant is the better of a coefficient-series
    bound and a Cauchy-estimate bound on the Bernstein ellipse."""
    if not (-1.0 <= p1 <= p2 <= 1.0):
        raise UsageError("derivative bounds require -1 <= p1 <= p2 <= 1")
    if eta <= 1.0:
        raise DomainError("eta must exceed 1")
    x = max(abs(p1), abs(p2))
    log_eta = ilog(Interval(eta))
    kmax1 = int(math.ceil((Interval(2.0) / log_eta).hi)) + 2
    kmax2 = int(math.ceil((Interval(4.0) / log_eta).hi)) + 2
    e = Interval(eta)
    c1_series = 0.0
    c2_series = 0.0
    pw = Interval(1.0)
    for k in range(1, kmax2 + 1):
        pw = pw * e
        if k <= kmax1:
            c1_series = max(c1_series, (Interval(float(k * k)) / pw).hi)
        if k >= 2:
            val = (
                Interval(float(k * k)) * Interval(float(k * k - 1)) / (pw * 3.0)
            ).hi
            c2_series = max(c2_series, val)
    d = _delta(x, eta)
    if d.lo <= 0.0:
        c1_cauchy = math.inf
        c2_cauchy = math.inf
    else:
        c1_cauchy = (Interval(1.0) / d).hi
        c2_cauchy = (Interval(2.0) / d.sqr()).hi
    return min(c1_series, c1_cauchy), min(c2_series, c2_cauchy)


# -- numerical approximation over the parameter range -------------------


def _gauss_nodes(K: int) -> np.ndarray:
    return np.cos(np.pi * (2.0 * np.arange(K + 1) + 1.0) / (2.0 * (K + 1)))


def _dct_matrix(K: int) -> np.ndarray:
    """Values-at-Gauss-nodes to Chebyshev coefficients (float)."""
    k = np.arange(K + 1)[:, None]
    l = np.arange(K + 1)[None, :]
    C = np.cos(np.pi * k * (2.0 * l + 1.0) / (2.0 * (K + 1)))
    C *= 2.0 / (K + 1)
    C[0, :] *= 0.5
    return C


def _node_data(params: ShearParams, p_lo: Interval, p_hi: Interval,
               N: int, K: int):
    """Float eigenpairs and derivative inverses at the Chebyshev nodes,
    transformed to coefficient space."""
    pm = 0.5 * (p_lo.mid + p_hi.mid)
    ph = 0.5 * (p_hi.mid - p_lo.mid)
    nodes = pm + ph * _gauss_nodes(K)
    dim = 2 * N + 2
    f_nodes = np.empty((K + 1, 2 * N + 1), dtype=complex)
    lam_nodes = np.empty(K + 1)
    J_nodes = np.empty((K + 1, dim, dim), dtype=complex)
    for l, p in enumerate(nodes):
        pt = ShearParams(params.alpha, params.b, params.sigma, Interval(p))
        approx = newton_approx_eigenpair(pt.mid(), N)
        if not approx.real_pair:
            raise ApproxFailure(
                f"non-real principal eigenpair at parameter {p}"
            )
        f_nodes[l] = approx.f
        lam_nodes[l] = approx.lam.real
        J_nodes[l] = _float_DF_inverse(approx, pt)
    D = _dct_matrix(K)
    lam_c = D @ lam_nodes
    f_c = (D @ f_nodes).T                       # (2N+1, K+1)
    J_c = np.tensordot(D, J_nodes, axes=(1, 0))  # (K+1, dim, dim)
    J_c = np.moveaxis(J_c, 0, -1)                # (dim, dim, K+1)
    return lam_c, f_c, J_c


# -- rigorous bounds ----------------------------------------------------


def _p_cheb(p_lo: Interval, p_hi: Interval) -> CArray:
    """The identity map p as a degree-1 Chebyshev series."""
    mid = (p_lo + p_hi) * 0.5
    half = (p_hi - p_lo) * 0.5
    out = CArray.zeros((2,))
    out[0] = ComplexInterval(mid)
    out[1] = ComplexInterval(half)
    return out


def _pad_last(x: CArray, length: int) -> CArray:
    if x.shape[-1] == length:
        return x
    out = CArray.zeros(x.shape[:-1] + (length,))
    out[..., : x.shape[-1]] = x
    return out


class _Machine:
    """Shared symbols for the extended Newton-Kantorovich estimates."""

    def __init__(self, params: ShearParams, p_lo: Interval, p_hi: Interval,
                 N: int, K: int, eta: float,
                 lam_c: np.ndarray, f_c: np.ndarray, J_c: np.ndarray):
        self.params = params
        self.N, self.K, self.eta = N, K, eta
        self.p_lo, self.p_hi = p_lo, p_hi
        self.sigma2 = params.sigma.sqr()
        self.lam = CArray(lam_c)                 # (K+1,)
        self.f = CArray(f_c)                     # (2N+1, K+1)
        self.J = CArray(J_c)                     # (dim, dim, K+1)
        self.pch = _p_cheb(p_lo, p_hi)           # (2,)
        self.w = _weights(eta, 2 * K + 3)

    def _norms(self, x: CArray) -> np.ndarray:
        """Weighted l^1_eta norms along the last axis (upper bounds)."""
        d = x.shape[-1]
        return _updot(x.mag_upper(), self.w.hi[:d])

    def _diag(self, n_arr: np.ndarray) -> CArray:
        """Rows of L_p - lambdabar on the diagonal: Chebyshev symbols of
        -2 sigma^2 n^2 - alpha p - lambdabar + i b n, per frequency."""
        K = self.K
        count = len(n_arr)
        out = CArray.zeros((count, K + 1))
        out[:, :] = -self.lam
        alpha, b = self.params.alpha, self.params.b
        const_re = IArray(np.asarray(n_arr * n_arr, dtype=np.float64)) * (
            self.sigma2 * (-2.0)
        ) - alpha * self.pch.item(0).re
        const_im = IArray(np.asarray(n_arr, dtype=np.float64)) * b
        out[:, 0] = CArray._raw(out[:, 0].re + const_re, out[:, 0].im + const_im)
        lin = IArray.zeros((count,)) - alpha * self.pch.item(1).re
        out[:, 1] = CArray._raw(out[:, 1].re + lin, out[:, 1].im)
        return out

    def _offdiag(self, m_arr: np.ndarray, up: bool) -> CArray:
        """Degree-1 symbols of the off-diagonal couplings (times i):
        row m picks i (b(m+1)/2 + p b/4) f_{m+1} or
        i (b(m-1)/2 - p b/4) f_{m-1}."""
        b = self.params.b
        shift = 1 if up else -1
        sign = 0.25 if up else -0.25
        c0 = (
            IArray(np.asarray(m_arr + shift, dtype=np.float64)) * (b * 0.5)
            + self.pch.item(0).re * (b * sign)
        )
        c1 = IArray.zeros((len(m_arr),)) + self.pch.item(1).re * (b * sign)
        out = CArray.zeros((len(m_arr), 2))
        out[:, 0] = CArray._raw(IArray.zeros((len(m_arr),)), c0)
        out[:, 1] = CArray._raw(IArray.zeros((len(m_arr),)), c1)
        return out

    # -- residual -------------------------------------------------------

    def residual_norms(self):
        """Norm data of F(Xbar): per-frequency norms of the first
        component on |n| <= N+1 plus the norm of the pairing defect."""
        N, K = self.N, self.K
        n_out = np.arange(-(N + 1), N + 2)
        fpad = CArray.zeros((2 * N + 3, K + 1))
        fpad[1:-1] = self.f
        up = CArray.zeros((2 * N + 3, K + 1))
        up[:-1] = fpad[1:]
        dn = CArray.zeros((2 * N + 3, K + 1))
        dn[1:] = fpad[:-1]
        g = cheb_mul_batch(fpad, self._diag(n_out))
        g = g + _pad_last(cheb_mul_batch(up, self._offdiag(n_out, True)), g.shape[-1])
        g = g + _pad_last(cheb_mul_batch(dn, self._offdiag(n_out, False)), g.shape[-1])
        mu = cheb_mul_batch(self.f, self.f.conj()).sum(axis=0)
        mu[0] = mu.item(0) - 1.0
        g_norms = self._norms(g)
        mu_norm = float(self._norms(CArray._raw(
            mu.re.reshape(1, -1), mu.im.reshape(1, -1)))[0])
        return g_norms, mu_norm

    # -- defect of the approximate inverse -------------------------------

    def z1_finite(self) -> float:
        N, K = self.N, self.K
        dim = 2 * N + 2
        ncols = 2 * N + 4
        deg = 2 * K + 1
        P = CArray.zeros((dim, ncols, deg))
        n_i = np.arange(-N, N + 1)
        # Diagonal couplings: direction e_n feeds row n.
        G = cheb_mul_batch(self.J[:, n_i + N, :], self._diag(n_i))
        P[:, 1 : 2 * N + 2, : G.shape[-1]] = (
            P[:, 1 : 2 * N + 2, : G.shape[-1]] + G
        )
        # Up coupling: direction e_n feeds row n-1 (|n-1| <= N).
        n_up = np.arange(-N + 1, N + 2)
        G = cheb_mul_batch(self.J[:, n_up - 1 + N, :], self._offdiag(n_up - 1, True))
        P[:, 2 : 2 * N + 3, : G.shape[-1]] = (
            P[:, 2 : 2 * N + 3, : G.shape[-1]] + G
        )
        # Down coupling: direction e_n feeds row n+1 (|n+1| <= N).
        n_dn = np.arange(-(N + 1), N)
        G = cheb_mul_batch(self.J[:, n_dn + 1 + N, :], self._offdiag(n_dn + 1, False))
        P[:, 0 : 2 * N + 1, : G.shape[-1]] = (
            P[:, 0 : 2 * N + 1, : G.shape[-1]] + G
        )
        # Pairing row: direction e_n contributes conj(fbar_n).
        Jp = self.J[:, 2 * N + 1 : 2 * N + 2, :]
        G = cheb_mul_batch(Jp, self.f.conj())
        P[:, 1 : 2 * N + 2, : G.shape[-1]] = (
            P[:, 1 : 2 * N + 2, : G.shape[-1]] + G
        )
        # Eigenvalue direction: first component -fbar.
        G = cheb_mul_batch(self.J[:, 0 : 2 * N + 1, :], -self.f).sum(axis=1)
        P[:, ncols - 1, : G.shape[-1]] = P[:, ncols - 1, : G.shape[-1]] + G
        B = -P
        for j in range(1, 2 * N + 2):
            B[j - 1, j, 0] = B.item(j - 1, j, 0) + 1.0
        B[2 * N + 1, ncols - 1, 0] = B.item(2 * N + 1, ncols - 1, 0) + 1.0
        ent = _updot(B.mag_upper(), self.w.hi[:deg])
        col = _upsum(ent, axis=0)
        # Tail rows reached by boundary columns, with the identity
        # cancellation on the |n| = N+1 directions.
        tails = np.zeros(ncols)
        s2 = self.sigma2
        for n, rows in (
            (-(N + 1), (-(N + 2), -(N + 1))),
            (-N, (-(N + 1),)),
            (N, (N + 1,)),
            (N + 1, (N + 1, N + 2)),
        ):
            j = n + N + 1
            tot = Interval(0.0)
            for m in rows:
                denom = s2 * (2.0 * float(m) * float(m))
                if m == n - 1:
                    sym = self._offdiag(np.asarray([m]), True)[0]
                elif m == n + 1:
                    sym = self._offdiag(np.asarray([m]), False)[0]
                else:
                    sym = self._diag(np.asarray([m]))[0]
                d = sym.shape[-1]
                ent = CArray._raw(sym.re / denom, sym.im / denom)
                if m == n:
                    ent[0] = ent.item(0) + 1.0
                tot = tot + Interval(float(
                    _updot(ent.mag_upper(), self.w.hi[:d])
                ))
            tails[j] = tot.hi
        z1_cols = np.asarray(
            [(Interval(a) + Interval(b)).hi for a, b in zip(col, tails)]
        )
        return float(np.max(z1_cols))

    def z1_tail(self) -> float:
        N = self.N
        s2 = self.sigma2
        ap = cheb_mul_batch(
            CArray._raw(
                self.pch.re.reshape(1, -1), self.pch.im.reshape(1, -1)
            ),
            CArray._raw(
                IArray.from_scalars([self.params.alpha]).reshape(1, -1),
                IArray.zeros((1, 1)),
            ),
        )[0]
        aplam = _pad_last(ap, self.K + 1) + self.lam
        n_ap = float(self._norms(CArray._raw(
            aplam.re.reshape(1, -1), aplam.im.reshape(1, -1)))[0])
        n_p = float(self._norms(CArray._raw(
            self.pch.re.reshape(1, -1), self.pch.im.reshape(1, -1)))[0])
        abs_b = self.params.b.mag
        Np2 = float(N + 2)
        term1 = (Interval(n_ap) + Interval(abs_b) * Np2) / (Np2 * Np2)
        term2 = (
            Interval(abs_b)
            * (2.0 * Np2 + n_p)
            / (2.0 * float(N + 1) * float(N + 1))
        )
        return ((term1 + term2) / (s2 * 2.0)).hi

    def j_norm(self) -> float:
        ent = _updot(self.J.mag_upper(), self.w.hi[: self.K + 1])
        return float(np.max(_upsum(ent, axis=0)))


def _cheb_derivative_batch(u: CArray) -> CArray:
    """Coefficient recurrence for d/dt along the last axis (rescaled
    variable, no chain-rule factor)."""
    K = u.shape[-1] - 1
    lead = u.shape[:-1]
    if K == 0:
        return CArray.zeros(lead + (1,))
    d = CArray.zeros(lead + (K + 2,))
    for k in range(K, 0, -1):
        d[..., k - 1] = d[..., k + 1] + u[..., k] * (2.0 * k)
    d[..., 0] = d[..., 0] * 0.5
    return d[..., :K]


def _positivity(machine: _Machine, r: float, pieces: int = 64,
                max_depth: int = 12) -> float:
    """Uniform positivity of the approximate eigenfunction minus r over
    parameter and angle: point evaluations on an adaptive parameter grid
    combined with a global Lipschitz bound in the parameter direction
    (interval Clenshaw over wide arguments wraps too much to be useful)."""
    dcoef = _cheb_derivative_batch(machine.f)
    # sup over (t, phi) of |d f / d t| <= sum_{n,k} |c'_{n,k}|.
    lip_t = float(_upsum(dcoef.mag_upper()))
    K = machine.K
    # Work in the angle variable theta with t = cos(theta): Chebyshev
    # values are then plain cosines, immune to recurrence wrapping, and
    # the grid automatically refines toward the endpoints.
    stack = [(0.0, math.pi, 0)]
    worst = math.inf
    while stack:
        lo, hi, depth = stack.pop()
        if depth == 0 and pieces > 1:
            grid = np.linspace(lo, hi, pieces + 1)
            for i in range(pieces):
                stack.append((float(grid[i]), float(grid[i + 1]), 1))
            continue
        t_piece = icos(Interval(lo, hi))
        th_mid = Interval(0.5 * (lo + hi))
        tvals = IArray.from_scalars(
            [icos(th_mid * float(k)) for k in range(K + 1)]
        ).reshape(-1, 1)
        t_mid = tvals.item(1, 0)
        vals_re = imatvec(machine.f.re, IArray(tvals.lo.ravel(), tvals.hi.ravel()))
        vals_im = imatvec(machine.f.im, IArray(tvals.lo.ravel(), tvals.hi.ravel()))
        vals = CArray._raw(vals_re, vals_im)
        half_t = max(
            (Interval(t_piece.hi) - t_mid).hi,
            (t_mid - t_piece.lo).hi,
            0.0,
        )
        r_eff = (Interval(r) + Interval(lip_t) * half_t).hi
        low = fourier_lower_bound(vals, r_eff, max_depth=6)
        if low > 0.0:
            worst = min(worst, low)
            continue
        if depth >= max_depth:
            raise PositivityFailed(
                "uniform positivity failed near p corresponding to "
                f"angle range [{lo}, {hi}]"
            )
        mid = 0.5 * (lo + hi)
        stack.append((lo, mid, depth + 1))
        stack.append((mid, hi, depth + 1))
    return worst


def extended_nk_validate(params: ShearParams, p_range, N: int = 60,
                         K: int = 80, eta: float = 1.01,
                         ) -> ContinuationCertificate:
    """Validates the eigenpair branch over a whole parameter interval.

    Returns a certificate with ||(f, Lambda) - (fbar, lambdabar)|| <= r in
    the Fourier-l^1 x Chebyshev-l^1_eta product space, plus uniform
    positivity of the eigenfunction."""
    p_lo, p_hi = (Interval._coerce(q) for q in p_range)
    if p_lo.hi > p_hi.lo:
        raise UsageError("parameter range must have p- <= p+")
    if p_lo.hi == p_hi.lo:
        # Degenerate range: fall back to the pointwise validation and
        # wrap it as a constant-in-p certificate.
        from .shear import check_positivity, moment_lyapunov_shear_point

        p0 = Interval(p_lo.lo, p_hi.hi)
        pt = ShearParams(params.alpha, params.b, params.sigma, p0)
        _, cert = moment_lyapunov_shear_point(pt, N=N)
        pos = check_positivity(cert.approx, cert.r_min)
        lam0 = IArray.from_scalars([Interval(cert.approx.lam.real)])
        return ContinuationCertificate(
            pt, cert.N, 0, eta, p_lo, p_hi,
            ChebSeq(eta, p_lo, p_hi, lam0),
            FourierChebSeq(cert.N, 0, eta, p_lo, p_hi,
                           CArray(cert.approx.f[:, None])),
            cert.r_min, cert.Y, cert.Z1, cert.Z2, pos,
        )
    lam_c, f_c, J_c = _node_data(params, p_lo, p_hi, N, K)
    m = _Machine(params, p_lo, p_hi, N, K, eta, lam_c, f_c, J_c)
    jn = m.j_norm()
    g_norms, mu_norm = m.residual_norms()
    fin = float(_upsum(np.concatenate([g_norms[1:-1], [mu_norm]])))
    tail_in = float(
        (
            (Interval(float(g_norms[0])) + Interval(float(g_norms[-1])))
            / (m.sigma2 * (2.0 * float(N + 1) * float(N + 1)))
        ).hi
    )
    Y = (Interval(jn) * fin + tail_in).hi
    Z1 = max(m.z1_finite(), m.z1_tail())
    Z2 = max(jn, (Interval(1.0) / (m.sigma2 * (2.0 * float(N + 1) ** 2))).hi)
    iY, iZ1, iZ2 = Interval(Y), Interval(Z1), Interval(Z2)
    one_m = Interval(1.0) - iZ1
    if one_m.lo <= 0.0:
        raise VerificationError(
            f"uniform contraction defect too large: Z1 = {Z1}"
        )
    disc = one_m.sqr() - iY * iZ2 * 2.0
    if disc.lo <= 0.0:
        raise VerificationError(
            f"uniform contraction failed: Y={Y} Z1={Z1} Z2={Z2}"
        )
    r = ((one_m - isqrt(disc)) / iZ2).hi
    pos = _positivity(m, r)
    lambdabar = ChebSeq(eta, p_lo, p_hi, CArray(lam_c).re)
    fbar = FourierChebSeq(N, K, eta, p_lo, p_hi, CArray(f_c))
    return ContinuationCertificate(
        params, N, K, eta, p_lo, p_hi, lambdabar, fbar, r, Y, Z1, Z2, pos
    )


def lambda_derivatives_at(cert: ContinuationCertificate, p0: Interval):
    """Enclosures of (Lambda, Lambda', Lambda'') at p0 from the uniform
    certificate: the approximation evaluated exactly, widened by r times
    the appropriate derivative constant."""
    p0 = Interval._coerce(p0)
    if cert.p_hi.lo <= cert.p_lo.hi:
        # Pointwise (zero-width domain) certificate: the series is the
        # constant lambdabar and no derivative information exists.
        if p0.lo < cert.p_lo.lo or p0.hi > cert.p_hi.hi:
            raise UsageError("parameter outside the certificate domain")
        c0 = cert.lambdabar.coeffs[0]
        lam = Interval(c0.lo, c0.hi) + Interval(-cert.r, cert.r)
        return lam, None, None
    lam = cheb_eval(cert.lambdabar, p0) + Interval(-cert.r, cert.r)
    t = cert.lambdabar.rescale(p0)
    C1, C2 = derivative_bound_constants(cert.eta, t.lo, t.hi)
    scale = Interval(2.0) / (cert.p_hi - cert.p_lo)
    d1 = cheb_derivative(cert.lambdabar)
    d2 = cheb_derivative(d1)
    e1 = (scale * (C1 * cert.r)).hi
    e2 = (scale.sqr() * (C2 * cert.r)).hi
    dlam = cheb_eval(d1, p0) + Interval(-e1, e1)
    d2lam = cheb_eval(d2, p0) + Interval(-e2, e2)
    return lam, dlam, d2lam


def rate_at_zero_from_certificate(cert: ContinuationCertificate,
                                  max_iter: int = 200):
    """Certified (I(0), minimizer bracket) from a parameter-uniform
    certificate, where I(0) = -min_p Lambda(p).

    Locates the unique sign change of Lambda' by bisection on certified
    derivative enclosures, then evaluates Lambda over the final bracket.
    By convexity, a certified sign change of the derivative pins down the
    global minimum over the certificate's parameter range."""
    pad = 1e-9 * (cert.p_hi - cert.p_lo).hi

    def dsign(p: float) -> int:
        d = lambda_derivatives_at(cert, Interval(p))[1]
        if d.hi < 0.0:
            return -1
        if d.lo > 0.0:
            return 1
        return 0

    lo, hi = cert.p_lo.hi + pad, cert.p_hi.lo - pad
    s_lo, s_hi = dsign(lo), dsign(hi)
    if s_lo >= 0 or s_hi <= 0:
        # No certified interior sign change: scan a coarse grid for one.
        grid = [lo + (hi - lo) * i / 32 for i in range(33)]
        signs = [dsign(q) for q in grid]
        for a, b, sa, sb in zip(grid, grid[1:], signs, signs[1:]):
            if sa < 0 and sb > 0:
                lo, hi, s_lo, s_hi = a, b, sa, sb
                break
        else:
            raise BracketFailure(
                "no certified sign change of Lambda' in the parameter range"
            )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        s = dsign(mid)
        if s == 0:
            break
        if s < 0:
            lo = mid
        else:
            hi = mid
    bracket = Interval(lo, hi)
    lam = lambda_derivatives_at(cert, bracket)[0]
    return Interval(-lam.hi, -lam.lo), bracket
