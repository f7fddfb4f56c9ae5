"""Lag-time moments, the empirical ambiguity function, and its normalization.

Grid conventions used throughout the package, for a series of length ``n``:

* lag rows: ``tau = -(n-1), ..., n-1`` stored as row ``r = tau + n - 1``;
* dual frequencies: ``nu_k = k / (2 n dt)`` for ``k = -n, ..., n-1`` stored
  as column ``c = k + n``;
* the lag-``tau`` moment sequence is supported on sample indices
  ``max(0, tau) <= t <= n - 1 + min(0, tau)``; entries off that support are
  identically zero.

The ambiguity transform is a plain DFT along time of each lag row, scaled
by ``dt``; one inverse DFT per row recovers the moments exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .series import AnalyticSeries

__all__ = [
    "LagTimeMoments",
    "AmbiguityGrid",
    "NormalizationField",
    "raw_moments",
    "emaf",
    "normalization",
    "normalize",
    "denormalize",
    "smooth_kernel",
    "lag_support_mask",
]


def lag_support_mask(n: int) -> np.ndarray:
    """Boolean mask of shape ``(2n-1, n)``: True where lag row ``tau`` is supported."""
    taus = np.arange(-(n - 1), n)[:, None]
    times = np.arange(n)[None, :]
    return (times >= np.maximum(0, taus)) & (times <= n - 1 + np.minimum(0, taus))


@dataclass(frozen=True)
class LagTimeMoments:
    """Second-moment estimates ``m[tau, t]`` on the lag/time grid.

    ``entries`` has shape ``(2n-1, n)``; row ``r`` holds lag ``tau = r - (n-1)``
    and entries outside the lag support must be zero.
    """

    entries: np.ndarray
    dt: float = 1.0
    n: int = field(init=False)

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2:
            raise ValueError(f"entries must be a 2-d grid, got shape {entries.shape}")
        rows, cols = entries.shape
        if rows != 2 * cols - 1 or cols < 2:
            raise ValueError(
                f"expected shape (2n-1, n) with n >= 2, got {entries.shape}"
            )
        if not np.all(np.isfinite(entries.view(float))):
            raise ValueError("entries contain NaN or infinity")
        if not (isinstance(self.dt, (int, float)) and np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be a positive finite float, got {self.dt!r}")
        off = ~lag_support_mask(cols)
        if np.any(entries[off] != 0):
            raise ValueError("entries must vanish outside the lag support")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "n", cols)

    def tau_values(self) -> np.ndarray:
        return np.arange(-(self.n - 1), self.n)

    def support_mask(self) -> np.ndarray:
        return lag_support_mask(self.n)

    def at(self, tau: int, t: int) -> complex:
        """Entry for lag ``tau`` at sample index ``t``."""
        if not -self.n < tau < self.n:
            raise ValueError(f"lag {tau} out of range for n={self.n}")
        if not 0 <= t < self.n:
            raise ValueError(f"time index {t} out of range for n={self.n}")
        return complex(self.entries[tau + self.n - 1, t])


@dataclass(frozen=True)
class AmbiguityGrid:
    """Ambiguity coefficients ``a[tau, nu_k]`` on the doubled dual-frequency grid.

    ``entries`` has shape ``(2n-1, 2n)``; row ``r`` holds lag ``tau = r - (n-1)``
    and column ``c`` holds dual frequency ``nu = (c - n) / (2 n dt)``.
    ``normalized`` records whether entries were divided by the square root of
    the variance field built with exponent ``delta``.
    """

    entries: np.ndarray
    dt: float = 1.0
    normalized: bool = False
    delta: float = 0.5
    n: int = field(init=False)

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2:
            raise ValueError(f"entries must be a 2-d grid, got shape {entries.shape}")
        rows, cols = entries.shape
        if cols % 2 != 0 or rows != cols - 1 or cols < 4:
            raise ValueError(
                f"expected shape (2n-1, 2n) with n >= 2, got {entries.shape}"
            )
        if not np.all(np.isfinite(entries.view(float))):
            raise ValueError("entries contain NaN or infinity")
        if not (isinstance(self.dt, (int, float)) and np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be a positive finite float, got {self.dt!r}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie strictly inside (0, 1), got {self.delta!r}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "n", cols // 2)

    def tau_values(self) -> np.ndarray:
        return np.arange(-(self.n - 1), self.n)

    def nu_values(self) -> np.ndarray:
        return np.arange(-self.n, self.n) / (2 * self.n * self.dt)

    def at(self, tau: int, k: int) -> complex:
        """Entry for lag ``tau`` and dual-frequency index ``k``."""
        if not -self.n < tau < self.n:
            raise ValueError(f"lag {tau} out of range for n={self.n}")
        if not -self.n <= k < self.n:
            raise ValueError(f"frequency index {k} out of range for n={self.n}")
        return complex(self.entries[tau + self.n - 1, k + self.n])


@dataclass(frozen=True)
class NormalizationField:
    """Variance field ``kappa`` and bandwidth field ``ell`` on the ambiguity grid."""

    kappa: np.ndarray
    ell: np.ndarray

    def __post_init__(self) -> None:
        kappa = np.asarray(self.kappa, dtype=float)
        ell = np.asarray(self.ell, dtype=float)
        if kappa.shape != ell.shape or kappa.ndim != 2:
            raise ValueError(
                f"kappa and ell must share a 2-d shape, got {kappa.shape} and {ell.shape}"
            )
        if np.any(kappa <= 0) or np.any(ell <= 0):
            raise ValueError("normalization fields must be strictly positive")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "ell", ell)


def raw_moments(z: AnalyticSeries) -> LagTimeMoments:
    """Raw lag products ``z[t] * conj(z[t - tau])`` on the lag support."""
    n = z.n
    s = z.samples
    entries = np.zeros((2 * n - 1, n), dtype=complex)
    for tau in range(-(n - 1), n):
        lo, hi = max(0, tau), n - 1 + min(0, tau)
        t = np.arange(lo, hi + 1)
        entries[tau + n - 1, lo : hi + 1] = s[t] * np.conj(s[t - tau])
    return LagTimeMoments(entries, dt=z.dt)


def emaf(m: LagTimeMoments) -> AmbiguityGrid:
    """Empirical ambiguity function: ``dt``-scaled DFT of each lag row.

    ``a[tau, nu_k] = dt * sum_t m[tau, t] exp(-2i pi nu_k t dt)`` evaluated on
    the doubled grid ``nu_k = k / (2 n dt)`` by zero-padding rows to ``2n``.
    """
    n = m.n
    padded = np.zeros((2 * n - 1, 2 * n), dtype=complex)
    padded[:, :n] = m.entries
    spectra = np.fft.fft(padded, axis=1)
    return AmbiguityGrid(m.dt * np.fft.fftshift(spectra, axes=1), dt=m.dt)


def normalization(n: int, dt: float = 1.0, delta: float = 0.5) -> NormalizationField:
    """Variance and bandwidth fields of the white-noise ambiguity coefficients.

    For lag ``tau`` and dual frequency ``nu``,

    ``kappa = (n - |tau|)^(4 delta - 1) * (1/dt) * max(1/(2 dt) - |nu|, 1/(2 n dt))``
    ``ell   = (1/4) * (n - |tau|) / max(1/2 - |nu| dt, 1/(2 n))``

    The inner ``max`` clamps the shrinking bandwidth at the grid resolution so
    both fields stay strictly positive out to the edge column ``k = -n``.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie strictly inside (0, 1), got {delta!r}")
    taus = np.arange(-(n - 1), n)[:, None]
    nus = np.abs(np.arange(-n, n))[None, :] / (2 * n * dt)
    span = (n - np.abs(taus)).astype(float)
    band = np.maximum(1.0 / (2 * dt) - nus, 1.0 / (2 * n * dt))
    kappa = span ** (4 * delta - 1) * band / dt
    ell = 0.25 * span / np.maximum(0.5 - nus * dt, 1.0 / (2 * n))
    return NormalizationField(kappa, ell)


def normalize(a: AmbiguityGrid, f: NormalizationField) -> AmbiguityGrid:
    """Divide entries by ``sqrt(kappa)`` so white-noise coefficients sit on a flat scale."""
    if a.normalized:
        raise ValueError("grid is already normalized")
    if f.kappa.shape != a.entries.shape:
        raise ValueError(
            f"field shape {f.kappa.shape} does not match grid shape {a.entries.shape}"
        )
    return AmbiguityGrid(
        a.entries / np.sqrt(f.kappa), dt=a.dt, normalized=True, delta=a.delta
    )


def denormalize(a: AmbiguityGrid, f: NormalizationField) -> AmbiguityGrid:
    """Undo :func:`normalize` by multiplying entries back with ``sqrt(kappa)``."""
    if not a.normalized:
        raise ValueError("grid is not normalized")
    if f.kappa.shape != a.entries.shape:
        raise ValueError(
            f"field shape {f.kappa.shape} does not match grid shape {a.entries.shape}"
        )
    return AmbiguityGrid(
        a.entries * np.sqrt(f.kappa), dt=a.dt, normalized=False, delta=a.delta
    )


def smooth_kernel(a: AmbiguityGrid, omega: np.ndarray) -> AmbiguityGrid:
    """Multiply the grid entrywise by a taper ``omega`` with ``|omega| <= 1``."""
    omega = np.asarray(omega)
    if omega.shape != a.entries.shape:
        raise ValueError(
            f"kernel shape {omega.shape} does not match grid shape {a.entries.shape}"
        )
    if np.max(np.abs(omega)) > 1 + 1e-12:
        raise ValueError("kernel magnitude exceeds 1")
    return AmbiguityGrid(
        a.entries * omega, dt=a.dt, normalized=a.normalized, delta=a.delta
    )
