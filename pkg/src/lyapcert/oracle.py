"""Non-rigorous Monte-Carlo and quadrature cross-checks.

Nothing in this module is certified; it provides independent sanity
checks for the verified computations:

  - finite-time Lyapunov exponent (FTLE) sampling for the additive-noise
    pitchfork and for the angular process of the linear shear model,
    using the Heun predictor-corrector scheme (weak order 2 for additive
    noise, where the Ito and Stratonovich integrals coincide and no
    Milstein correction is needed),
  - stationary-average Lyapunov exponents by quadrature (pitchfork,
    explicit stationary density) and by Fourier collocation of the
    stationary Fokker-Planck equation (shear),
  - empirical moment-Lyapunov estimates with bootstrap confidence
    intervals (heavy-tailed; advisory only).

Sampling is deterministic given the seed: a counter-based Philox
generator drives all paths, initial conditions are drawn from the
(numerically computed) stationary density so time averages are unbiased,
and reductions are plain vectorized sums over a fixed path order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .errors import OracleFailure, UsageError

__all__ = [
    "FtleSample",
    "simulate_ftle_pitchfork",
    "simulate_ftle_shear",
    "fk_lambda_pitchfork",
    "fk_lambda_shear",
    "stationary_density_pitchfork",
    "stationary_density_shear",
    "empirical_mle",
]


@dataclass
class FtleSample:
    """A reproducible batch of finite-time Lyapunov exponent samples."""

    t: float
    values: np.ndarray
    model: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    dt: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise OracleFailure("non-finite FTLE samples")

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def std(self) -> float:
        return float(np.std(self.values, ddof=1))

    @property
    def stderr(self) -> float:
        return self.std / np.sqrt(len(self.values))


def _check_sim_args(t: float, count: int, dt: float):
    if not (t > 0 and dt > 0 and count > 0):
        raise UsageError("t, dt and count must be positive")
    if dt > t / 100.0:
        raise UsageError("dt must be at most t/100")


def _inverse_cdf_sample(grid: np.ndarray, density: np.ndarray,
                        u: np.ndarray) -> np.ndarray:
    """Draw from a tabulated density via the inverse CDF (trapezoid CDF)."""
    w = np.diff(grid)
    cdf = np.concatenate(
        [[0.0], np.cumsum(0.5 * w * (density[1:] + density[:-1]))]
    )
    if cdf[-1] <= 0 or not np.isfinite(cdf[-1]):
        raise OracleFailure("degenerate stationary density")
    cdf /= cdf[-1]
    return np.interp(u, cdf, grid)


# -- Pitchfork model: dX = (alpha X - X^3) dt + sigma dW ----------------


def _pitchfork_log_density(x: np.ndarray, alpha: float,
                           sigma: float) -> np.ndarray:
    return (2.0 / sigma**2) * (alpha * x**2 / 2.0 - x**4 / 4.0)


def _pitchfork_support(alpha: float, sigma: float) -> float:
    """Symmetric truncation radius where the unnormalized stationary
    density drops below 1e-300."""
    lim = 300.0 * np.log(10.0)
    L = 1.0 + np.sqrt(max(alpha, 0.0))
    while _pitchfork_log_density(np.array(L), alpha, sigma) > -lim:
        L *= 1.5
        if L > 1e6:  # pragma: no cover - dissipativity makes this unreachable
            raise OracleFailure("stationary density truncation failed")
    return float(L)


def stationary_density_pitchfork(alpha: float, sigma: float,
                                 points: int = 4001):
    """Tabulated (grid, normalized density) for the pitchfork model."""
    if sigma <= 0:
        raise UsageError("sigma must be positive")
    L = _pitchfork_support(alpha, sigma)
    grid = np.linspace(-L, L, points)
    logd = _pitchfork_log_density(grid, alpha, sigma)
    dens = np.exp(logd - np.max(logd))
    Z = np.trapezoid(dens, grid)
    return grid, dens / Z


def fk_lambda_pitchfork(alpha: float, sigma: float):
    """Asymptotic Lyapunov exponent as the stationary average of the
    linearization slope: lambda = E[alpha - 3 X^2] under the explicit
    stationary density.  Returns (value, quadrature error estimate)."""
    if sigma <= 0:
        raise UsageError("sigma must be positive")
    L = _pitchfork_support(alpha, sigma)
    peak = np.sqrt(alpha) if alpha > 0 else 0.0
    shift = _pitchfork_log_density(np.array(peak), alpha, sigma)

    def dens(x):
        return np.exp(_pitchfork_log_density(x, alpha, sigma) - shift)

    pts = sorted({-peak, 0.0, peak})
    Z, eZ = integrate.quad(dens, -L, L, points=pts, limit=200)
    num, eN = integrate.quad(lambda x: (alpha - 3 * x**2) * dens(x),
                             -L, L, points=pts, limit=200)
    value = num / Z
    err = (eN + abs(value) * eZ) / Z
    return float(value), float(err)


def simulate_ftle_pitchfork(alpha: float, sigma: float, t: float = 50.0,
                            count: int = 10_000, dt: float = 0.01,
                            seed: int = 0) -> FtleSample:
    """Heun-scheme FTLE samples lambda_t = (1/t) sum (alpha - 3 X^2) dt
    along paths of dX = (alpha X - X^3) dt + sigma dW, with X_0 drawn from
    the stationary density.  Deterministic given the seed."""
    _check_sim_args(t, count, dt)
    rng = np.random.Generator(np.random.Philox(seed))
    grid, dens = stationary_density_pitchfork(alpha, sigma)
    x = _inverse_cdf_sample(grid, dens, rng.random(count))
    n_steps = int(round(t / dt))
    # Reject steps that would leave the region where the drift is safely
    # dissipative (only reachable with coarse dt).
    x_max = 2.0 * (1.0 + np.sqrt(abs(alpha)) + sigma)
    sq_dt = np.sqrt(dt)
    acc = np.zeros(count)
    x2 = np.empty(count)
    xp = np.empty(count)
    f = np.empty(count)
    for _ in range(n_steps):
        np.multiply(x, x, out=x2)
        acc += alpha
        acc -= 3.0 * x2
        noise = rng.standard_normal(count)
        noise *= sigma * sq_dt
        # f0 = x (alpha - x^2); predictor xp; corrector drift average.
        np.subtract(alpha, x2, out=f)
        f *= x
        np.multiply(f, dt, out=xp)
        xp += x
        xp += noise
        np.clip(xp, -x_max, x_max, out=xp)
        np.multiply(xp, xp, out=x2)
        np.subtract(alpha, x2, out=x2)
        x2 *= xp
        f += x2
        f *= 0.5 * dt
        x += f
        x += noise
        np.clip(x, -x_max, x_max, out=x)
    values = acc / n_steps
    return FtleSample(t=n_steps * dt, values=values, model="pitchfork",
                      params={"alpha": alpha, "sigma": sigma},
                      seed=seed, dt=dt)


# -- Shear model: angular process dphi = b cos^2(phi) dt - sigma dW -----


def _shear_fokker_planck_coeffs(alpha: float, b: float, sigma: float,
                                N: int) -> np.ndarray:
    """Fourier coefficients eta_n, |n| <= N, of the stationary density of
    the angular process, normalized so that the integral over the circle
    is 1 (eta_0 = 1/(2 pi))."""
    if sigma <= 0:
        raise UsageError("sigma must be positive")
    dim = 2 * N + 1
    A = np.zeros((dim, dim), dtype=complex)
    # Adjoint generator on e^{i n phi}: (sigma^2/2) eta'' - (b cos^2 eta)'
    # with cos^2 = 1/2 + (e^{2i phi} + e^{-2i phi})/4.
    for row in range(dim):
        m = row - N
        A[row, row] += -0.5 * sigma**2 * m * m - 1j * m * b / 2.0
        if row - 2 >= 0:
            A[row, row - 2] += -1j * m * b / 4.0
        if row + 2 < dim:
            A[row, row + 2] += -1j * m * b / 4.0
    # Replace the m = 0 (automatically satisfied) row by normalization.
    A[N, :] = 0.0
    A[N, N] = 1.0
    rhs = np.zeros(dim, dtype=complex)
    rhs[N] = 1.0 / (2.0 * np.pi)
    try:
        eta = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise OracleFailure(f"stationary Fokker-Planck solve failed: {exc}")
    if not np.all(np.isfinite(eta)):
        raise OracleFailure("stationary Fokker-Planck solve diverged")
    return eta


def _shear_lambda_from_eta(alpha: float, b: float,
                           eta: np.ndarray) -> float:
    # lambda = int q0 eta dphi with q0 = -alpha + (b/2) sin(2 phi);
    # int sin(2 phi) eta dphi = -2 pi Im eta_2 for real densities.
    N = (len(eta) - 1) // 2
    return float(-alpha - np.pi * b * np.imag(eta[N + 2]))


def fk_lambda_shear(alpha: float, b: float, sigma: float, N: int = 96):
    """Asymptotic Lyapunov exponent of the shear model as the stationary
    average int q0 eta, with eta from a Fourier collocation solve of the
    stationary Fokker-Planck equation.  Returns (value, error estimate
    from doubling the mode count)."""
    val = _shear_lambda_from_eta(
        alpha, b, _shear_fokker_planck_coeffs(alpha, b, sigma, N))
    ref = _shear_lambda_from_eta(
        alpha, b, _shear_fokker_planck_coeffs(alpha, b, sigma, 2 * N))
    return float(ref), abs(ref - val) + 1e-14 * (1.0 + abs(ref))


def stationary_density_shear(alpha: float, b: float, sigma: float,
                             N: int = 96, points: int = 4001):
    """Tabulated (grid, density) of the angular stationary density on
    [-pi, pi]."""
    eta = _shear_fokker_planck_coeffs(alpha, b, sigma, N)
    grid = np.linspace(-np.pi, np.pi, points)
    n = np.arange(-N, N + 1)
    dens = np.real(np.exp(1j * np.outer(grid, n)) @ eta)
    dens = np.maximum(dens, 0.0)
    return grid, dens


def simulate_ftle_shear(alpha: float, b: float, sigma: float,
                        t: float = 100.0, count: int = 10_000,
                        dt: float = 0.01, seed: int = 0) -> FtleSample:
    """Heun-scheme FTLE samples lambda_t = (1/t) int (-alpha
    + b cos(phi) sin(phi)) dtau along the angular process
    dphi = b cos^2(phi) dt - sigma dW, with phi_0 stationary.  Additive
    noise makes the Ito and Stratonovich forms identical."""
    _check_sim_args(t, count, dt)
    rng = np.random.Generator(np.random.Philox(seed))
    if b == 0.0:
        values = np.full(count, -alpha)
        return FtleSample(t=t, values=values, model="shear",
                          params={"alpha": alpha, "b": b, "sigma": sigma},
                          seed=seed, dt=dt)
    grid, dens = stationary_density_shear(alpha, b, sigma)
    phi = _inverse_cdf_sample(grid, dens, rng.random(count))
    n_steps = int(round(t / dt))
    sq_dt = np.sqrt(dt)
    acc = np.zeros(count)
    c = np.empty(count)
    s = np.empty(count)
    f0 = np.empty(count)
    pred = np.empty(count)
    for _ in range(n_steps):
        np.cos(phi, out=c)
        np.sin(phi, out=s)
        s *= c
        s *= b
        s -= alpha
        acc += s
        noise = rng.standard_normal(count)
        noise *= sigma * sq_dt
        np.multiply(c, c, out=f0)
        f0 *= b
        np.multiply(f0, dt, out=pred)
        pred += phi
        pred -= noise
        np.cos(pred, out=pred)
        pred *= pred
        pred *= b
        f0 += pred
        f0 *= 0.5 * dt
        phi += f0
        phi -= noise
        np.mod(phi + np.pi, 2.0 * np.pi, out=phi)
        phi -= np.pi
    values = acc / n_steps
    return FtleSample(t=n_steps * dt, values=values, model="shear",
                      params={"alpha": alpha, "b": b, "sigma": sigma},
                      seed=seed, dt=dt)


# -- Empirical moment Lyapunov estimates --------------------------------


def empirical_mle(sample: FtleSample, p: float, n_boot: int = 1000,
                  ci_level: float = 0.99, seed: int = 0):
    """Empirical moment Lyapunov estimate (1/t) log mean(exp(p t lambda_t))
    with a bootstrap confidence interval.

    Heavy-tailed for large |p|: the estimate is dominated by extreme
    samples and the CI is advisory only."""
    vals = sample.values
    t = sample.t
    if p == 0.0:
        return 0.0, (0.0, 0.0)
    w = p * t * vals
    if not np.all(np.isfinite(w)) or np.max(w) > 700.0:
        raise OracleFailure("moment weights overflow")
    n = len(vals)
    est = (logsumexp(w) - np.log(n)) / t
    rng = np.random.Generator(np.random.Philox(seed))
    idx = rng.integers(0, n, size=(n_boot, n))
    boot = (logsumexp(w[idx], axis=1) - np.log(n)) / t
    lo, hi = np.quantile(boot, [0.5 * (1 - ci_level),
                                1 - 0.5 * (1 - ci_level)])
    if not (np.isfinite(est) and np.isfinite(lo) and np.isfinite(hi)):
        raise OracleFailure("bootstrap produced non-finite estimates")
    return float(est), (float(lo), float(hi))
