"""Distributional diagnostics and estimation-risk summaries.

Three consumers of the pipeline live here: QQ data extraction for checking
the complex-normal background model of normalized ambiguity coefficients,
covariance risk reports comparing shrunk and raw estimates against a known
truth, and a Monte Carlo probe measuring how much coefficient thresholding
reduces the variance of a single moment estimate under white noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .ambiguity import AmbiguityGrid, emaf, normalization, normalize, raw_moments
from .covariance import HermitianCovariance, invert_af
from .procgen import TheoreticalCovariance, gen_white_noise
from .series import analytic_signal, demean
from .shrinkage import FitConvergenceError, apply_threshold, fit, threshold_field

__all__ = [
    "QQData",
    "RiskReport",
    "qq_normalized_af",
    "risk_report",
    "variance_reduction_probe",
]


@dataclass(frozen=True)
class QQData:
    """Sorted sample quantiles paired with standard-normal positions."""

    sample_quantiles: np.ndarray
    theoretical_quantiles: np.ndarray
    component: str

    def __post_init__(self) -> None:
        sample = np.asarray(self.sample_quantiles, dtype=float)
        theory = np.asarray(self.theoretical_quantiles, dtype=float)
        if sample.ndim != 1 or sample.shape != theory.shape:
            raise ValueError(
                f"quantile sequences must be 1-d and equally long, "
                f"got {sample.shape} and {theory.shape}"
            )
        if np.any(np.diff(sample) < 0) or np.any(np.diff(theory) < 0):
            raise ValueError("quantile sequences must be sorted ascending")
        if self.component not in ("real", "imaginary"):
            raise ValueError(f"component must be real or imaginary, got {self.component!r}")
        object.__setattr__(self, "sample_quantiles", sample)
        object.__setattr__(self, "theoretical_quantiles", theory)


@dataclass(frozen=True)
class RiskReport:
    """Elementwise and Frobenius comparison of two estimates to a truth.

    ``frobenius_ratio`` is the shrunk estimate's Frobenius error divided by
    the raw estimate's; ``inf`` marks a degenerate zero-error denominator.
    ``eigen_spectra`` holds descending eigenvalue sequences keyed by
    ``estimate``, ``raw`` and ``truth``.
    """

    normalized_error: np.ndarray
    frobenius_ratio: float
    eigen_spectra: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        err = np.asarray(self.normalized_error, dtype=float)
        if err.ndim != 2 or np.any(err < 0):
            raise ValueError("normalized_error must be a nonnegative 2-d grid")
        if np.isnan(self.frobenius_ratio) or self.frobenius_ratio < 0:
            raise ValueError(f"frobenius_ratio must be >= 0, got {self.frobenius_ratio!r}")
        object.__setattr__(self, "normalized_error", err)
        object.__setattr__(self, "frobenius_ratio", float(self.frobenius_ratio))


def qq_normalized_af(a: AmbiguityGrid, vbar: float) -> tuple[QQData, QQData]:
    """QQ data of the real and imaginary parts of a normalized grid.

    All off-origin coefficients are standardized by ``sqrt(vbar / 2)``, the
    per-component standard deviation the background model implies, sorted,
    and paired with standard-normal quantiles at plotting positions
    ``(i - 0.5) / m``.  Under a pure-noise grid both components should hug
    the identity line; signal shows up as heavy extreme quantiles.
    """
    if not a.normalized:
        raise ValueError("qq_normalized_af expects a normalized grid")
    if not (np.isfinite(vbar) and vbar > 0):
        raise ValueError(f"vbar must be positive, got {vbar!r}")
    flat = a.entries.ravel()
    origin = (a.n - 1) * (2 * a.n) + (a.n)
    coeffs = np.delete(flat, origin)
    if coeffs.size < 10:
        raise ValueError(f"need at least 10 coefficients, got {coeffs.size}")
    scale = np.sqrt(vbar / 2.0)
    positions = ndtri((np.arange(1, coeffs.size + 1) - 0.5) / coeffs.size)

    def one(component: np.ndarray, tag: str) -> QQData:
        return QQData(np.sort(component / scale), positions, tag)

    return one(coeffs.real, "real"), one(coeffs.imag, "imaginary")


def risk_report(
    est: HermitianCovariance,
    raw: HermitianCovariance,
    truth: TheoreticalCovariance,
) -> RiskReport:
    """Compare a shrunk and a raw covariance estimate to the exact truth.

    The elementwise error grid is ``|est - truth|`` over a scale that is
    the truth magnitude floored at ``1e-12`` times its largest entry, so
    structural zeros in the truth do not blow up the picture.  The headline
    number is the ratio of Frobenius errors, shrunk over raw.
    """
    t = truth.entries
    if est.entries.shape != t.shape or raw.entries.shape != t.shape:
        raise ValueError(
            f"dimension mismatch: est {est.entries.shape}, raw {raw.entries.shape}, "
            f"truth {t.shape}"
        )
    peak = np.max(np.abs(t))
    scale = np.maximum(np.abs(t), 1e-12 * peak) if peak > 0 else np.ones_like(t, dtype=float)
    err_grid = np.abs(est.entries - t) / scale
    num = float(np.linalg.norm(est.entries - t))
    den = float(np.linalg.norm(raw.entries - t))
    if num == 0.0:
        ratio = 0.0
    elif den == 0.0:
        ratio = float("inf")
    else:
        ratio = num / den
    spectra = {
        "estimate": est.eigenvalues.copy(),
        "raw": raw.eigenvalues.copy(),
        "truth": np.linalg.eigvalsh(t)[::-1].copy(),
    }
    return RiskReport(err_grid, ratio, spectra)


def variance_reduction_probe(n: int, reps: int, seed: int) -> tuple[float, float]:
    """Monte Carlo variance of one shrunk moment entry versus its raw value.

    Each replicate draws unit white noise of length ``n``, runs the full
    estimate-normalize-fit-threshold pipeline, and records the moment at
    lag 5 and time ``n // 2`` from both the raw and the thresholded grids.
    A replicate whose fit exhausts its search budget still contributes its
    best parameters, so long runs do not abort on one stubborn draw.
    Returns ``(var_eb, var_raw)`` over the replicates.
    """
    if reps < 100:
        raise ValueError(f"need at least 100 replicates, got {reps}")
    if n < 8:
        raise ValueError(f"series length must be at least 8, got {n}")
    tau_probe, t_probe = 5, n // 2
    field = normalization(n, 1.0)
    raw_vals = np.empty(reps, dtype=complex)
    eb_vals = np.empty(reps, dtype=complex)
    for rep in range(reps):
        x = gen_white_noise(n, seed=seed + rep)
        z = analytic_signal(demean(x))
        m_raw = raw_moments(z)
        a_raw = emaf(m_raw)
        a_norm = normalize(a_raw, field)
        try:
            params = fit(a_norm)
        except FitConvergenceError as err:
            params = err.best
        theta = threshold_field(params, a_norm)
        m_eb = invert_af(apply_threshold(a_raw, theta))
        raw_vals[rep] = m_raw.entries[tau_probe + n - 1, t_probe]
        eb_vals[rep] = m_eb.entries[tau_probe + n - 1, t_probe]
    return float(np.var(eb_vals)), float(np.var(raw_vals))
