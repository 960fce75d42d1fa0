"""Certified moment Lyapunov exponents for a randomly rotated planar shear.

The radial moment generating exponent of the model is the principal
eigenvalue of a one-dimensional non-self-adjoint operator acting on
2*pi-periodic functions of the angle variable:

    L_p f = 2 sigma^2 f'' + b (1 + cos phi) f' + (p/2) (b sin phi - 2 alpha) f.

In Fourier coordinates (f = sum_n f_n e^{i n phi}) the operator is
tridiagonal.  An approximate eigenpair is computed in floating point and
then validated by a Newton-Kantorovich argument: a contraction bound on
the fixed-point map X -> X - A F(X) yields a radius r such that the exact
eigenpair lies within r (in the l^1 Fourier norm plus the eigenvalue
modulus) of the numerical one.  A final positivity check certifies that
the enclosed eigenfunction is strictly positive, so the enclosed
eigenvalue is the principal one.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import ApproxFailure, DomainError, PositivityFailed, VerificationError
from .intervals import (
    CArray,
    isqrt,
    ComplexInterval,
    IArray,
    Interval,
    TWO_PI,
    cmatmul,
    cmatvec,
    icos,
    isin,
    l1norm_upper,
)

__all__ = [
    "ShearParams",
    "FourierSeq",
    "EigPairApprox",
    "NKCertificate",
    "apply_Lp",
    "eval_Fp",
    "newton_approx_eigenpair",
    "nk_validate",
    "check_positivity",
    "moment_lyapunov_shear_point",
]


@dataclass(frozen=True)
class ShearParams:
    """Model parameters: radial rate alpha, shear strength b, noise sigma,
    and the moment order p.  All fields are intervals."""

    alpha: Interval
    b: Interval
    sigma: Interval
    p: Interval

    def __post_init__(self):
        for name in ("alpha", "b", "sigma", "p"):
            v = getattr(self, name)
            if not isinstance(v, Interval):
                object.__setattr__(self, name, Interval(v))
        if self.sigma.lo <= 0.0:
            raise DomainError("noise amplitude must be positive")

    def mid(self) -> "ShearParams":
        return ShearParams(
            Interval(self.alpha.mid),
            Interval(self.b.mid),
            Interval(self.sigma.mid),
            Interval(self.p.mid),
        )


@dataclass(frozen=True)
class FourierSeq:
    """Finitely supported Fourier coefficients c_n, |n| <= N, stored as a
    complex interval vector indexed by i = n + N."""

    N: int
    coeffs: CArray

    def __post_init__(self):
        if len(self.coeffs) != 2 * self.N + 1:
            raise DomainError("coefficient count must be 2N+1")


@dataclass(frozen=True)
class EigPairApprox:
    """Floating point approximate eigenpair with its truncated residual."""

    N: int
    f: np.ndarray          # complex, length 2N+1
    lam: complex
    residual: float        # l^1 norm of the truncated defect
    real_pair: bool        # true when exactified to a real eigenvalue /
                           # conjugate-symmetric eigenfunction


@dataclass(frozen=True)
class NKCertificate:
    """Outcome of a successful Newton-Kantorovich validation."""

    N: int
    Y: float
    Z1: float
    Z2: float
    r_min: float
    r_max: float
    lam: ComplexInterval
    approx: EigPairApprox


def _diag_entries(n: np.ndarray, params: ShearParams):
    """Diagonal symbol of L_p at the given integer frequencies, split into
    real part (-2 sigma^2 n^2 - alpha p) and the real coefficient (b n)
    of the imaginary part."""
    sig2 = params.sigma.sqr()
    nn = IArray(np.asarray(n * n, dtype=np.float64))
    re = nn * (sig2 * (-2.0)) - (params.alpha * params.p)
    im = IArray(np.asarray(n, dtype=np.float64)) * params.b
    return re, im


def _offdiag_up(n: np.ndarray, params: ShearParams) -> IArray:
    """Real coefficient e_n with (L_p f)_n += i e_n f_{n+1}."""
    return (
        IArray(np.asarray(n + 1, dtype=np.float64)) * (params.b * 0.5)
        + params.p * params.b * 0.25
    )


def _offdiag_dn(n: np.ndarray, params: ShearParams) -> IArray:
    """Real coefficient g_n with (L_p f)_n += i g_n f_{n-1}."""
    return (
        IArray(np.asarray(n - 1, dtype=np.float64)) * (params.b * 0.5)
        - params.p * params.b * 0.25
    )


def _mul_i_real(coeff: IArray, z: CArray) -> CArray:
    """(i * coeff) * z for a real interval coefficient array."""
    return CArray._raw(-(coeff * z.im), coeff * z.re)


def apply_Lp(f: FourierSeq, params: ShearParams) -> FourierSeq:
    """Applies the angular generator in Fourier coordinates.  The output
    support grows by one frequency on each side."""
    N = f.N
    M = N + 1
    n_out = np.arange(-M, M + 1)
    pad = CArray.zeros((2 * M + 1,))
    pad[1:-1] = f.coeffs
    # f_{n+1} and f_{n-1} aligned with the output index.
    up = CArray.zeros((2 * M + 1,))
    up[:-1] = pad[1:]
    dn = CArray.zeros((2 * M + 1,))
    dn[1:] = pad[:-1]
    d_re, d_im = _diag_entries(n_out, params)
    out = CArray._raw(d_re * pad.re - d_im * pad.im, d_re * pad.im + d_im * pad.re)
    out = out + _mul_i_real(_offdiag_up(n_out, params), up)
    out = out + _mul_i_real(_offdiag_dn(n_out, params), dn)
    return FourierSeq(M, out)


def eval_Fp(f: FourierSeq, lam: ComplexInterval, fbar: FourierSeq,
            params: ShearParams):
    """Eigenproblem map: (L_p f - lam f, <f, fbar> - 1) where the pairing
    is sum_n f_n conj(fbar_n)."""
    Lf = apply_Lp(f, params)
    first = Lf.coeffs.copy()
    first[1:-1] = first[1:-1] - lam * f.coeffs
    mu = (f.coeffs * fbar.coeffs.conj()).sum() - 1.0
    return FourierSeq(Lf.N, first), mu


def _float_Lp_matrix(N: int, params: ShearParams) -> np.ndarray:
    """Truncated dense floating-point matrix of L_p on span{e_n : |n|<=N}."""
    alpha = params.alpha.mid
    b = params.b.mid
    sigma = params.sigma.mid
    p = params.p.mid
    n = np.arange(-N, N + 1)
    L = np.zeros((2 * N + 1, 2 * N + 1), dtype=complex)
    L[np.arange(2 * N + 1), np.arange(2 * N + 1)] = (
        -2.0 * sigma * sigma * n * n - alpha * p + 1j * b * n
    )
    for i in range(2 * N):
        # column i+1 feeds row i through the f_{n+1} coefficient
        L[i, i + 1] = 1j * (b * (n[i] + 1) / 2.0 + p * b / 4.0)
        L[i + 1, i] = 1j * (b * (n[i + 1] - 1) / 2.0 - p * b / 4.0)
    return L


def newton_approx_eigenpair(params: ShearParams, N: int,
                            tol: float = 1e-13) -> EigPairApprox:
    """Approximate principal eigenpair of the truncated operator, refined
    by Newton iteration on (L f - lam f, <f, f0> - 1)."""
    L = _float_Lp_matrix(N, params)
    w, v = np.linalg.eig(L)
    k = int(np.argmax(w.real))
    lam = w[k]
    f = v[:, k]
    # Fix the phase so the zeroth coefficient is positive real, then
    # normalize in l^2 (the pairing below keeps this normalization).
    c0 = f[N]
    if abs(c0) > 0:
        f = f * (abs(c0) / c0)
    f = f / np.sqrt(np.sum(np.abs(f) ** 2))
    f0 = f.copy()
    dim = 2 * N + 2
    for _ in range(40):
        F = np.empty(dim, dtype=complex)
        F[:-1] = L @ f - lam * f
        F[-1] = np.sum(f * np.conj(f0)) - 1.0
        res = float(np.sum(np.abs(F[:-1])) + abs(F[-1]))
        if res < tol:
            break
        J = np.zeros((dim, dim), dtype=complex)
        J[:-1, :-1] = L - lam * np.eye(2 * N + 1)
        J[:-1, -1] = -f
        J[-1, :-1] = np.conj(f0)
        delta = np.linalg.solve(J, F)
        f = f - delta[:-1]
        lam = lam - delta[-1]
    else:
        raise ApproxFailure("eigenpair refinement did not reach tolerance")
    real_pair = False
    if abs(lam.imag) < 1e-11:
        sym = 0.5 * (f + np.conj(f[::-1]))
        if float(np.sum(np.abs(f - sym))) < 1e-11:
            lam = complex(lam.real, 0.0)
            f = sym
            real_pair = True
    return EigPairApprox(N, f, lam, res, real_pair)


def _float_DF_inverse(approx: EigPairApprox, params: ShearParams) -> np.ndarray:
    """Floating point inverse of the truncated derivative at the
    approximate pair."""
    N = approx.N
    dim = 2 * N + 2
    L = _float_Lp_matrix(N, params)
    DF = np.zeros((dim, dim), dtype=complex)
    DF[:-1, :-1] = L - approx.lam * np.eye(2 * N + 1)
    DF[:-1, -1] = -approx.f
    DF[-1, :-1] = np.conj(approx.f)
    J = np.linalg.inv(DF)
    if not np.all(np.isfinite(J)):
        raise ApproxFailure("approximate derivative is numerically singular")
    return J


def _build_J(approx: EigPairApprox, params: ShearParams) -> CArray:
    """Floating point inverse of the truncated derivative, promoted to a
    point interval matrix.  A need not be exact, only injective; rigor
    comes from the contraction bounds computed against it."""
    return CArray(_float_DF_inverse(approx, params))


def _tail_apply_A(g: CArray, n_abs: np.ndarray, sigma2: Interval) -> CArray:
    """(I - Pi_N) part of the approximate inverse: coefficient n maps to
    -g_n / (2 sigma^2 n^2)."""
    denom = IArray(np.asarray(n_abs * n_abs, dtype=np.float64)) * (sigma2 * 2.0)
    inv = IArray.from_scalars([Interval(1.0)] * len(n_abs)) / denom
    return CArray._raw(-(g.re * inv), -(g.im * inv))


def bound_Y(approx: EigPairApprox, J: CArray, params: ShearParams) -> float:
    """Norm of A F(X_bar): the Newton correction magnitude at the
    approximate solution."""
    N = approx.N
    fbar = FourierSeq(N, CArray(approx.f))
    lam = ComplexInterval(approx.lam)
    first, mu = eval_Fp(fbar, lam, fbar, params)
    g = first.coeffs  # support |n| <= N+1
    sigma2 = params.sigma.sqr()
    # Finite block through J.
    vec = CArray.zeros((2 * N + 2,))
    vec[:-1] = g[1:-1]
    vec[-1] = mu
    fin = cmatvec(J, vec)
    # Tail frequencies |n| = N+1.
    tail = _tail_apply_A(g[[0, -1]], np.asarray([N + 1, N + 1]), sigma2)
    total = l1norm_upper(
        np.concatenate([fin.mag_upper(), tail.mag_upper()])
    )
    return total


def _dF_columns(approx: EigPairApprox, params: ShearParams):
    """Interval columns of the derivative F'(X_bar) against the basis
    directions (e_n, 0) for |n| <= N+1 and (0, 1).

    Returns (cols_fin, cols_tail, col_norm_extra) where cols_fin is the
    (2N+2) x (2N+4) matrix of components seen by the finite block of A,
    cols_tail holds the two tail coefficients per column at |m| = N+1 and
    |m| = N+2, stored as upper bounds on their contribution to the column
    norm after applying the tail of A.
    """
    N = approx.N
    ncols = 2 * N + 4  # directions e_{-N-1..N+1} then the eigenvalue slot
    M2 = N + 2
    lamc = ComplexInterval(approx.lam)
    sigma2 = params.sigma.sqr()
    # Derivative of the first component in direction (df, dlam):
    #   L_p df - lam_bar df - dlam * f_bar
    # with support growing by one frequency from df.
    # Work on the extended index range |m| <= N+2.
    n_all = np.arange(-M2, M2 + 1)
    d_re, d_im = _diag_entries(n_all, params)
    e_up = _offdiag_up(n_all, params)
    e_dn = _offdiag_dn(n_all, params)
    rows = 2 * M2 + 1
    cols = CArray.zeros((rows, ncols))
    # Direction (e_n, 0): column j = n + N + 1 for n in [-N-1, N+1].
    for j in range(2 * N + 3):
        n = j - (N + 1)
        i = n + M2  # row of frequency n
        diag = ComplexInterval(d_re.item(i), d_im.item(i)) - lamc
        cols[i, j] = diag
        cols[i - 1, j] = ComplexInterval(Interval(0.0), e_up.item(i - 1))
        cols[i + 1, j] = ComplexInterval(Interval(0.0), e_dn.item(i + 1))
    # Direction (0, 1): derivative is (-f_bar, 0).
    fb = CArray(approx.f)
    cols[2 : 2 * N + 3, -1] = -fb
    # Pairing row: <df, f_bar> = sum df_n conj(f_bar_n); only |n| <= N
    # components of df pair nontrivially.
    mu_row = CArray.zeros((ncols,))
    mu_row[1 : 2 * N + 2] = fb.conj()
    # Finite-block input: frequencies |m| <= N plus the pairing slot.
    fin = CArray.zeros((2 * N + 2, ncols))
    fin[:-1, :] = cols[2:-2, :]
    fin[-1, :] = mu_row
    # Tail contribution to ||B column||: at frequencies |m| in {N+1, N+2}
    # the defect column is x_m + g_m / (2 sigma^2 m^2); for the basis
    # directions at |n| = N+1 the identity term cancels against the
    # leading -2 sigma^2 m^2 part of the diagonal of g.
    tail_rows = cols[[0, 1, -2, -1], :]
    tail_n = np.asarray([M2, M2 - 1, M2 - 1, M2], dtype=np.float64)
    denom = IArray(tail_n * tail_n).reshape(4, 1) * (sigma2 * 2.0)
    inv = Interval(1.0) / denom
    tail_B = CArray._raw(tail_rows.re * inv, tail_rows.im * inv)
    tail_B[1, 0] = tail_B.item(1, 0) + 1.0          # direction n = -(N+1)
    tail_B[2, 2 * N + 2] = tail_B.item(2, 2 * N + 2) + 1.0  # n = N+1
    tail_mag = tail_B.mag_upper()
    tail_norms = np.asarray(
        [l1norm_upper(tail_mag[:, j]) for j in range(tail_mag.shape[1])]
    )
    return fin, tail_norms


def bound_Z1(approx: EigPairApprox, J: CArray, params: ShearParams) -> float:
    """Operator norm bound for I - A F'(X_bar), split between the finitely
    many explicitly checked directions and a uniform tail estimate."""
    N = approx.N
    fin, tail_norms = _dF_columns(approx, params)
    prod = cmatmul(J, fin)
    # B column = basis direction - A F' direction.
    B = -prod
    for j in range(2 * N + 3):
        n = j - (N + 1)
        if abs(n) <= N:
            B[n + N, j] = B.item(n + N, j) + 1.0
        # The |n| = N+1 identity components live in the tail frequencies
        # and are folded into tail_norms with their cancellation.
    B[-1, -1] = B.item(2 * N + 1, 2 * N + 3) + 1.0
    col = B.mag_upper()
    fin_norms = np.asarray([l1norm_upper(col[:, j]) for j in range(col.shape[1])])
    z1_cols = np.asarray(
        [(Interval(a) + Interval(b)).hi for a, b in zip(fin_norms, tail_norms)]
    )
    z1_fin = float(np.max(z1_cols))
    # Uniform tail: directions supported on |n| >= N+2.
    sigma2 = params.sigma.sqr()
    ap_lam = ComplexInterval(approx.lam) + params.alpha * params.p
    abs_ap_lam = ap_lam.mag_upper()
    abs_b = params.b.mag
    Np2 = float(N + 2)
    t1 = Interval(abs_ap_lam) + Interval(abs_b) * (Np2 + 0.0)
    term1 = (t1 / (Np2 * Np2)).hi
    term2 = (
        Interval(abs_b)
        * (2.0 * Np2 + params.p.mag)
        / (2.0 * float(N + 1) * float(N + 1))
    ).hi
    z1_tail = ((Interval(term1) + Interval(term2)) / (sigma2 * 2.0)).hi
    return max(z1_fin, z1_tail)


def bound_Z2(J: CArray, N: int, sigma2: Interval) -> float:
    """Norm of the approximate inverse A, bounding the Lipschitz constant
    of the derivative defect on a ball (the map is quadratic, so the
    second derivative is globally the constant 2 paired with ||A||)."""
    col = J.mag_upper()
    jnorm = max(l1norm_upper(col[:, j]) for j in range(col.shape[1]))
    tail = (Interval(1.0) / (sigma2 * (2.0 * float(N + 1) * float(N + 1)))).hi
    return max(jnorm, tail)


def nk_validate(approx: EigPairApprox, params: ShearParams) -> NKCertificate:
    """Newton-Kantorovich contraction test around the approximate pair.

    With Y >= ||A F(X_bar)||, Z1 >= ||I - A F'(X_bar)||, and Z2 an upper
    bound for ||A|| (so that ||A (F'(X) - F'(X_bar))|| <= Z2 * 2 ||X -
    X_bar|| by bilinearity of the nonlinearity), any radius r with
    Z2 r^2 - (1 - Z1) r + Y < 0 encloses a unique zero of F."""
    J = _build_J(approx, params)
    sigma2 = params.sigma.sqr()
    Y = bound_Y(approx, J, params)
    Z1 = bound_Z1(approx, J, params)
    Z2 = bound_Z2(J, approx.N, sigma2)
    iY, iZ1, iZ2 = Interval(Y), Interval(Z1), Interval(Z2)
    one_m = Interval(1.0) - iZ1
    if one_m.lo <= 0.0:
        raise VerificationError(
            f"first-order contraction defect too large: Z1 = {Z1}"
        )
    disc = one_m.sqr() - iY * iZ2 * 2.0
    if disc.lo <= 0.0:
        raise VerificationError(
            f"contraction discriminant not positive: Y={Y} Z1={Z1} Z2={Z2}"
        )
    r_min = ((one_m - isqrt(disc)) / iZ2).hi
    r_max = (one_m / iZ2).lo
    if not (0.0 < r_min < r_max):
        raise VerificationError("empty certification window")
    # Defensive re-check that the quadratic is strictly negative at r_min.
    q = iZ2 * Interval(r_min).sqr() - one_m * r_min + iY
    if q.lo > 0.0:
        raise VerificationError("contraction polynomial check failed")
    lam = ComplexInterval(
        Interval(approx.lam.real) + Interval(-r_min, r_min),
        Interval(approx.lam.imag) + Interval(-r_min, r_min),
    )
    return NKCertificate(approx.N, Y, Z1, Z2, r_min, r_max, lam, approx)


def fourier_lower_bound(coeffs: CArray, r: float, segments: int = 0,
                        max_depth: int = 12) -> float:
    """Certified lower bound of inf over the circle of the real function
    with the given conjugate-symmetric Fourier coefficients, minus r.

    Grid evaluation at segment midpoints with a global Lipschitz bound;
    widths of the interval coefficients enter through a uniform padding.
    Returns the bound (possibly <= 0); callers decide whether to refine.
    """
    n_tot = len(coeffs)
    if n_tot % 2 != 1:
        raise DomainError("coefficients must cover symmetric frequencies")
    N = n_tot // 2
    eps = np.finfo(float).eps
    c = coeffs[N:]
    mid = c.mid
    a = mid.real.copy()
    b = mid.imag.copy()
    rr = np.maximum(c.re.hi - mid.real, mid.real - c.re.lo)
    ri = np.maximum(c.im.hi - mid.imag, mid.imag - c.im.lo)
    rad = np.nextafter(np.hypot(rr, ri) * (1.0 + 8.0 * eps), np.inf)
    ks = np.arange(N + 1, dtype=np.float64)
    scale = np.where(ks == 0, 1.0, 2.0)
    # Uniform padding: coefficient radii, plus float rounding of the
    # trigonometric evaluation (argument and libm errors, dot-product
    # accumulation), generously bounded.
    m1 = float(np.sum(scale * np.hypot(np.abs(a), np.abs(b))))
    pad = float(np.sum(scale * rad)) + 256.0 * eps * (N + 8.0) * (m1 + 1.0)
    lip = float(np.sum(scale * ks * (np.hypot(np.abs(a), np.abs(b)) + rad)))
    lip = np.nextafter(lip * (1.0 + 16.0 * eps), np.inf)
    if segments <= 0:
        segments = 4 * max(N, 8)
    two_pi_hi = TWO_PI.hi
    for _ in range(max_depth):
        h = two_pi_hi / segments
        x = (np.arange(segments) + 0.5) * h
        C = np.cos(np.outer(x, ks))
        S = np.sin(np.outer(x, ks))
        vals = C @ (scale * a) - S @ (scale * b)
        low = float(np.min(vals)) - pad - lip * (h / 2.0) * (1.0 + 8.0 * eps) - r
        if low > 0.0:
            return low
        # Only refine while the Lipschitz term dominates the failure.
        if float(np.min(vals)) - pad - r <= 0.0:
            return low
        segments *= 2
    return low


def check_positivity(approx: EigPairApprox, r: float,
                     max_depth: int = 14) -> float:
    """Certifies inf over the circle of the enclosed eigenfunction.

    The true eigenfunction differs from the numerical one by at most r in
    l^1, hence by at most r uniformly.  Returns a certified lower bound
    for the infimum of the true eigenfunction and raises if it is not
    strictly positive."""
    if not approx.real_pair:
        raise PositivityFailed("positivity requires a real symmetric pair")
    low = fourier_lower_bound(CArray(approx.f), r, max_depth=max_depth)
    if low <= 0.0:
        raise PositivityFailed(
            f"could not certify strict positivity (bound {low})"
        )
    return low


def moment_lyapunov_shear_point(params: ShearParams, N: int = 60,
                                max_N: int = 480) -> tuple[Interval, NKCertificate]:
    """Certified enclosure of the moment Lyapunov exponent Lambda(p) for
    the planar shear model at a point (or thin interval) parameter set."""
    last_err: Exception | None = None
    while N <= max_N:
        try:
            approx = newton_approx_eigenpair(params.mid(), N)
            cert = nk_validate(approx, params)
            check_positivity(approx, cert.r_min)
            if not approx.real_pair:
                raise VerificationError("principal eigenvalue must be real")
            lam = Interval(approx.lam.real) + Interval(-cert.r_min, cert.r_min)
            return lam, cert
        except (VerificationError, ApproxFailure) as err:
            last_err = err
            N *= 2
    raise VerificationError(
        f"shear validation failed up to N={max_N}: {last_err}"
    )
