"""Covariance assembly from lag-time moments, with eigenvalue repair.

The ambiguity transform is inverted row by row, the resulting moments are
laid out as a matrix ``B[t, t - tau] = m[tau, t]``, and the Hermitian part
is kept.  Estimated matrices routinely carry small negative eigenvalues;
``correct`` repairs them either by shifting the whole spectrum or by
clipping the negative part.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ambiguity import AmbiguityGrid, LagTimeMoments, lag_support_mask

__all__ = ["HermitianCovariance", "invert_af", "assemble", "correct"]

_CORRECTIONS = ("none", "shift", "clip")


@dataclass(frozen=True)
class HermitianCovariance:
    """Hermitian covariance estimate with its eigenvalues and repair state.

    ``eigenvalues`` are real and sorted in non-increasing order;
    ``correction`` records which repair (if any) produced ``entries``.
    """

    entries: np.ndarray
    correction: str = "none"
    eigenvalues: np.ndarray | None = None
    n: int = field(init=False)

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"entries must be square, got shape {entries.shape}")
        if not np.all(np.isfinite(entries.view(float))):
            raise ValueError("entries contain NaN or infinity")
        scale = max(float(np.max(np.abs(entries))), 1.0)
        if np.max(np.abs(entries - entries.conj().T)) > 1e-10 * scale:
            raise ValueError("entries are not Hermitian")
        if self.correction not in _CORRECTIONS:
            raise ValueError(
                f"correction must be one of {_CORRECTIONS}, got {self.correction!r}"
            )
        if self.eigenvalues is None:
            eig = np.linalg.eigvalsh(entries)[::-1].copy()
        else:
            eig = np.asarray(self.eigenvalues, dtype=float)
            if eig.shape != (entries.shape[0],):
                raise ValueError(
                    f"expected {entries.shape[0]} eigenvalues, got shape {eig.shape}"
                )
            if np.any(np.diff(eig) > 0):
                raise ValueError("eigenvalues must be sorted in non-increasing order")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "n", entries.shape[0])

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])


def invert_af(a: AmbiguityGrid) -> LagTimeMoments:
    """Inverse ambiguity transform: one inverse DFT per lag row.

    ``m[tau, t] = 1/(2 n dt) * sum_k a[tau, nu_k] exp(2i pi nu_k t dt)`` for
    ``t`` on the lag support; entries off the support are zeroed so the
    result is a valid lag-time moment grid.  Normalized grids must be
    denormalized first.
    """
    if a.normalized:
        raise ValueError("grid is normalized; denormalize before inverting")
    n = a.n
    spectra = np.fft.ifftshift(a.entries, axes=1)
    rows = np.fft.ifft(spectra, axis=1) / a.dt
    entries = rows[:, :n] * lag_support_mask(n)
    return LagTimeMoments(entries, dt=a.dt)


def assemble(m: LagTimeMoments) -> HermitianCovariance:
    """Arrange moments as ``B[t, t - tau] = m[tau, t]`` and keep the Hermitian part."""
    n = m.n
    b = np.zeros((n, n), dtype=complex)
    for tau in range(-(n - 1), n):
        lo, hi = max(0, tau), n - 1 + min(0, tau)
        t = np.arange(lo, hi + 1)
        b[t, t - tau] = m.entries[tau + n - 1, lo : hi + 1]
    b = 0.5 * (b + b.conj().T)
    eig = np.linalg.eigvalsh(b)[::-1].copy()
    return HermitianCovariance(b, correction="none", eigenvalues=eig)


def correct(c: HermitianCovariance, method: str = "clip") -> HermitianCovariance:
    """Repair negative eigenvalues by spectrum shift or eigenvalue clipping.

    ``shift`` adds ``-min_eig * I`` when the smallest eigenvalue is negative
    and leaves an already nonnegative matrix untouched.  ``clip`` replaces
    negative eigenvalues with zero in the eigenbasis.  Either way the result
    has eigenvalues bounded below by a rounding-level multiple of the trace.
    """
    if method not in ("shift", "clip"):
        raise ValueError(f"method must be 'shift' or 'clip', got {method!r}")
    eigvals, eigvecs = np.linalg.eigh(c.entries)
    if method == "shift":
        low = float(eigvals[0])
        if low < 0:
            entries = c.entries - low * np.eye(c.n)
            eig = np.sort(eigvals - low)[::-1].copy()
        else:
            entries = c.entries
            eig = np.sort(eigvals)[::-1].copy()
        return HermitianCovariance(entries, correction="shift", eigenvalues=eig)
    clipped = np.maximum(eigvals, 0.0)
    entries = (eigvecs * clipped) @ eigvecs.conj().T
    entries = 0.5 * (entries + entries.conj().T)
    eig = np.sort(clipped)[::-1].copy()
    return HermitianCovariance(entries, correction="clip", eigenvalues=eig)
