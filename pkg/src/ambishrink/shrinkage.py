"""Two-point mixture fit and posterior-median shrinkage of ambiguity grids.

Normalized off-origin coefficient magnitudes are modeled as draws from

    f(q) = (1 - rho) * 2 q / vbar * exp(-q^2 / vbar)
         + rho * 2 q / (vbar + sigma2) * exp(-q^2 / (vbar + sigma2)),

a Rayleigh background of scale ``vbar`` spiked with a fraction ``rho`` of
signal-bearing coefficients whose extra energy is ``sigma2``.  The fitted
parameters drive a coefficient-wise posterior-median attenuation factor
that is exactly zero for coefficients indistinguishable from background.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit, ndtr, ndtri

from .ambiguity import AmbiguityGrid

__all__ = [
    "ShrinkageParams",
    "ThresholdField",
    "FitConvergenceError",
    "marginal_nll",
    "fit",
    "posterior_rho",
    "threshold_field",
    "apply_threshold",
    "equivalent_kernel",
]


@dataclass(frozen=True)
class ShrinkageParams:
    """Mixture parameters: background scale, signal fraction, signal energy.

    ``nll`` and ``iterations`` are optional fit metadata left ``None`` when
    the parameters were not produced by :func:`fit`.
    """

    vbar: float
    rho: float
    sigma2: float
    nll: float | None = None
    iterations: int | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.vbar) and self.vbar > 0):
            raise ValueError(f"vbar must be positive, got {self.vbar!r}")
        if not (np.isfinite(self.rho) and 0 <= self.rho <= 1):
            raise ValueError(f"rho must lie in [0, 1], got {self.rho!r}")
        if not (np.isfinite(self.sigma2) and self.sigma2 >= 0):
            raise ValueError(f"sigma2 must be nonnegative, got {self.sigma2!r}")


@dataclass(frozen=True)
class ThresholdField:
    """Attenuation factors and posterior signal probabilities on the grid.

    The origin coefficient carries the total energy of the series and is
    never shrunk, so ``theta`` must be exactly 1 there.
    """

    theta: np.ndarray
    rho_post: np.ndarray
    dt: float = 1.0

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float)
        rho_post = np.asarray(self.rho_post, dtype=float)
        if theta.shape != rho_post.shape or theta.ndim != 2:
            raise ValueError(
                f"theta and rho_post must share a 2-d shape, got {theta.shape} and {rho_post.shape}"
            )
        rows, cols = theta.shape
        if cols != rows + 1 or rows % 2 == 0:
            raise ValueError(f"expected a (2n-1, 2n) field, got {theta.shape}")
        if np.any(theta < 0) or np.any(theta > 1):
            raise ValueError("theta values must lie in [0, 1]")
        if np.any(rho_post < 0) or np.any(rho_post > 1):
            raise ValueError("rho_post values must lie in [0, 1]")
        if theta[(rows - 1) // 2, cols // 2] != 1.0:
            raise ValueError("the origin coefficient must keep theta = 1")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "rho_post", rho_post)
        object.__setattr__(self, "dt", float(self.dt))


class FitConvergenceError(RuntimeError):
    """Raised when the simplex search exhausts its budget.

    Carries the best parameters seen so far in ``best`` so callers can
    report or persist them.
    """

    def __init__(self, message: str, best: ShrinkageParams):
        super().__init__(message)
        self.best = best


def _log_density_terms(
    vbar: float, rho: float, sigma2: float, qsq: np.ndarray
) -> np.ndarray:
    """Log mixture density of the magnitudes, without the ``log(2 q)`` part."""
    wide = vbar + sigma2
    with np.errstate(divide="ignore"):
        log_bg = np.log1p(-rho) - np.log(vbar) - qsq / vbar
        log_sig = np.log(rho) - np.log(wide) - qsq / wide
    return np.logaddexp(log_bg, log_sig)


def marginal_nll(params: ShrinkageParams, magnitudes: np.ndarray) -> float:
    """Negative log-likelihood of magnitudes under the two-point mixture.

    Zero magnitudes have vanishing density, so any zero entry yields
    ``+inf``; non-finite or negative entries are rejected.
    """
    q = np.asarray(magnitudes, dtype=float).ravel()
    if q.size == 0:
        raise ValueError("magnitudes must be non-empty")
    if not np.all(np.isfinite(q)) or np.any(q < 0):
        raise ValueError("magnitudes must be finite and nonnegative")
    if np.any(q == 0):
        return float("inf")
    qsq = q * q
    log_f = np.log(2.0 * q) + _log_density_terms(params.vbar, params.rho, params.sigma2, qsq)
    return float(-np.sum(log_f))


def _fit_cells(a: AmbiguityGrid) -> tuple[np.ndarray, np.ndarray]:
    """Magnitudes and weights of the cells entering the mixture fit.

    Only the central block of the grid is fitted: rows with ``|tau| <= n/2``
    and columns whose dual frequency is at most half the Nyquist rate.  Rows
    with short lag spans average too few products to have Gaussian
    coefficients, and extreme dual frequencies pool energy from so narrow a
    spectral band that their scale is set by the realized spectrum of the
    one observed draw rather than by the process; both regions can capture
    the background component of the mixture on unlucky draws.  Each retained
    row is weighted by ``span / (2 n)``, its share of independent
    coefficients among the ``2 n`` redundant columns, so heavily oversampled
    rows do not dominate the composite likelihood.  The origin cell never
    participates.
    """
    n = a.n
    taus = np.arange(-(n - 1), n)
    ks = np.arange(-n, n)
    mask = np.outer(np.abs(taus) <= n // 2, np.abs(ks) <= n // 2)
    mask[n - 1, n] = False
    weights = np.broadcast_to(
        ((n - np.abs(taus)) / (2.0 * n))[:, None], a.entries.shape
    )
    return np.abs(a.entries)[mask], weights[mask]


def fit(a: AmbiguityGrid) -> ShrinkageParams:
    """Weighted maximum-likelihood mixture fit to the grid magnitudes.

    Minimizes the row-weighted negative log-likelihood of the central-block
    magnitudes (see :func:`_fit_cells`) with a Nelder-Mead search in
    ``(log vbar, logit rho, log sigma2)`` from moment-based starting values,
    until the simplex diameter drops below 1e-6, with a hard budget of
    10000 iterations.  Exhausting the budget raises
    :class:`FitConvergenceError` carrying the best parameters found.  The
    returned ``nll`` is the attained weighted objective.
    """
    if not a.normalized:
        raise ValueError("fit expects a normalized grid")
    q, w = _fit_cells(a)
    if np.any(q == 0):
        raise ValueError("zero magnitudes make the mixture likelihood singular")
    qsq = q * q
    const = -float(np.sum(w * np.log(2.0 * q)))

    def objective(x: np.ndarray) -> float:
        vbar = np.exp(np.clip(x[0], -700.0, 700.0))
        rho = expit(x[1])
        sigma2 = np.exp(np.clip(x[2], -700.0, 700.0))
        return const - float(np.sum(w * _log_density_terms(vbar, rho, sigma2, qsq)))

    vbar0 = float(np.median(qsq)) / np.log(2.0)
    if vbar0 <= 0:
        raise ValueError("degenerate magnitudes: zero median energy")
    top = max(1, int(round(0.01 * qsq.size)))
    tail_mean = float(np.mean(np.partition(qsq, qsq.size - top)[-top:]))
    sigma2_0 = max(tail_mean - vbar0, vbar0)
    x0 = np.array([np.log(vbar0), logit(0.01), np.log(sigma2_0)])
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={"xatol": 1e-6, "fatol": 1e-7, "maxiter": 10000, "maxfev": 20000},
    )
    params = ShrinkageParams(
        vbar=float(np.exp(res.x[0])),
        rho=float(expit(res.x[1])),
        sigma2=float(np.exp(res.x[2])),
        nll=float(res.fun),
        iterations=int(res.nit),
    )
    if not res.success:
        raise FitConvergenceError(
            f"simplex search did not converge within {res.nit} iterations", params
        )
    return params


def posterior_rho(params: ShrinkageParams, qhat: float | np.ndarray) -> float | np.ndarray:
    """Posterior probability that a coefficient of magnitude ``qhat`` carries signal."""
    q = np.asarray(qhat, dtype=float)
    if np.any(q < 0):
        raise ValueError("magnitudes must be nonnegative")
    vbar, rho, sigma2 = params.vbar, params.rho, params.sigma2
    wide = vbar + sigma2
    qsq = q * q
    with np.errstate(divide="ignore"):
        log_sig = np.log(rho) - np.log(wide) - qsq / wide
        log_bg = np.log1p(-rho) - np.log(vbar) - qsq / vbar
    out = expit(log_sig - log_bg)
    return float(out) if np.isscalar(qhat) else out


def threshold_field(params: ShrinkageParams, a: AmbiguityGrid) -> ThresholdField:
    """Posterior-median attenuation factors for every grid coefficient.

    With ``lam = sigma2 / (sigma2 + vbar)``, a coefficient of magnitude
    ``q`` is zeroed whenever ``rho_post * (1 - eta) <= 1/2`` where
    ``eta = Phi(-sqrt(2 lam) q / sqrt(vbar))``; otherwise the attenuation is

        theta = clip((lam q + sqrt(lam vbar / 2) * Phi^{-1}(1 - 1/(2 rho_post))) / q, 0, 1).

    The origin coefficient is never shrunk (``theta = 1``): it carries the
    total energy of the series.
    """
    if not a.normalized:
        raise ValueError("threshold_field expects a normalized grid")
    vbar, sigma2 = params.vbar, params.sigma2
    q = np.abs(a.entries)
    rho_post = np.asarray(posterior_rho(params, q))
    lam = sigma2 / (sigma2 + vbar)
    eta = ndtr(-np.sqrt(2.0 * lam) * q / np.sqrt(vbar))
    keep = (rho_post * (1.0 - eta) > 0.5) & (q > 0)
    theta = np.zeros_like(q)
    if np.any(keep):
        qk = q[keep]
        qmed = lam * qk + np.sqrt(lam * vbar / 2.0) * ndtri(
            1.0 - 1.0 / (2.0 * rho_post[keep])
        )
        theta[keep] = np.clip(qmed / qk, 0.0, 1.0)
    theta[a.n - 1, a.n] = 1.0
    return ThresholdField(theta, rho_post, dt=a.dt)


def apply_threshold(a: AmbiguityGrid, t: ThresholdField) -> AmbiguityGrid:
    """Attenuate grid entries by the threshold factors."""
    if t.theta.shape != a.entries.shape:
        raise ValueError(
            f"field shape {t.theta.shape} does not match grid shape {a.entries.shape}"
        )
    return AmbiguityGrid(
        a.entries * t.theta, dt=a.dt, normalized=a.normalized, delta=a.delta
    )


def equivalent_kernel(t: ThresholdField) -> np.ndarray:
    """Lag-domain convolution kernel realizing the attenuation.

    Row ``tau`` of the result is the inverse DFT of the threshold row over
    the doubled dual-frequency grid, scaled by ``1/dt``: attenuating in the
    ambiguity domain equals circular convolution of each zero-padded moment
    row with this kernel.  An all-ones row comes back as a discrete delta
    of height ``1/dt``.
    """
    spectra = np.fft.ifftshift(t.theta, axes=1)
    return np.fft.ifft(spectra, axis=1) / t.dt
