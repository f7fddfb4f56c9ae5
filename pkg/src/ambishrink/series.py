"""Uniformly sampled time series and their discrete analytic representation.

The analytic representation is built in the DFT domain: negative-frequency
bins are zeroed, strictly positive bins are doubled, and the DC and (for
even length) Nyquist bins are kept with unit weight.  With that weighting
the real part of the analytic samples reproduces the input exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["TimeSeries", "AnalyticSeries", "demean", "analytic_signal"]


@dataclass(frozen=True)
class TimeSeries:
    """Real-valued samples on the uniform grid ``t_k = k * dt``."""

    samples: np.ndarray
    dt: float = 1.0
    n: int = field(init=False)

    def __post_init__(self) -> None:
        raw = np.asarray(self.samples)
        if np.iscomplexobj(raw):
            raise ValueError("samples must be real-valued")
        samples = raw.astype(float)
        if samples.ndim != 1:
            raise ValueError(f"samples must be one-dimensional, got shape {samples.shape}")
        if samples.size < 2:
            raise ValueError(f"need at least 2 samples, got {samples.size}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain NaN or infinity")
        if not (isinstance(self.dt, (int, float)) and np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be a positive finite float, got {self.dt!r}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "n", samples.size)

    def times(self) -> np.ndarray:
        """Sample times ``k * dt`` for ``k = 0, ..., n-1``."""
        return self.dt * np.arange(self.n)


@dataclass(frozen=True)
class AnalyticSeries:
    """Complex-valued analytic samples on the same grid as the source series."""

    samples: np.ndarray
    dt: float = 1.0
    n: int = field(init=False)

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1:
            raise ValueError(f"samples must be one-dimensional, got shape {samples.shape}")
        if samples.size < 2:
            raise ValueError(f"need at least 2 samples, got {samples.size}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain NaN or infinity")
        if not (isinstance(self.dt, (int, float)) and np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be a positive finite float, got {self.dt!r}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "n", samples.size)

    def times(self) -> np.ndarray:
        """Sample times ``k * dt`` for ``k = 0, ..., n-1``."""
        return self.dt * np.arange(self.n)


def demean(x: TimeSeries) -> TimeSeries:
    """Subtract the sample mean.  Idempotent up to rounding."""
    return TimeSeries(x.samples - x.samples.mean(), dt=x.dt)


def analytic_spectrum_weights(n: int) -> np.ndarray:
    """DFT bin weights of the analytic representation for length ``n``.

    Weight 1 at DC, 2 on strictly positive frequencies, 0 on negative ones.
    For even ``n`` the Nyquist bin sits on the boundary and keeps weight 1.
    """
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    w = np.zeros(n)
    w[0] = 1.0
    if n % 2 == 0:
        w[1 : n // 2] = 2.0
        w[n // 2] = 1.0
    else:
        w[1 : (n + 1) // 2] = 2.0
    return w


def analytic_signal(x: TimeSeries) -> AnalyticSeries:
    """Discrete analytic representation of ``x``.

    Computed as ``ifft(weights * fft(samples))`` with the one-sided weights
    of :func:`analytic_spectrum_weights`.  The real part of the result
    equals the input samples to rounding accuracy.
    """
    spectrum = np.fft.fft(x.samples)
    z = np.fft.ifft(analytic_spectrum_weights(x.n) * spectrum)
    return AnalyticSeries(z, dt=x.dt)
