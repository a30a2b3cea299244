"""Spectral linear algebra: symmetric eigendecomposition, Schatten norms,
spectrum truncation, and truncated pseudo-inversion.

All operations are pure functions over immutable inputs and are safe to call
from concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Eigenvalues of a PSD matrix above -TOL_PSD_FACTOR * max(1, lambda_max) are
# treated as round-off and clamped to zero; anything more negative is an error.
TOL_PSD_FACTOR = 1e-10

# Relative cutoff (vs the top eigenvalue) below which eigenvalues are treated
# as numerically zero when inverting.
PINV_RTOL = 1e-12


class NotPositiveSemidefiniteError(ValueError):
    """Input matrix has an eigenvalue below the PSD round-off tolerance."""


class EigensolverError(RuntimeError):
    """Symmetric eigensolver failed to converge."""

    def __init__(self, dim: int, max_offdiag: float):
        self.dim = dim
        self.max_offdiag = max_offdiag
        super().__init__(
            f"eigendecomposition failed to converge (dim={dim}, "
            f"max off-diagonal={max_offdiag:.3e})"
        )


def sym_matrix(entries) -> np.ndarray:
    """Validate and symmetrize a dense real matrix.

    Returns 0.5 * (A + A^T) as float64; raises on non-square or non-finite
    input.
    """
    a = np.asarray(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return 0.5 * (a + a.T)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted non-increasing, with optionally aligned orthonormal
    eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", vals)
        if vals.ndim != 1:
            raise ValueError("eigenvalues must be a 1-d sequence")
        if not np.all(np.isfinite(vals)):
            raise ValueError("eigenvalues must be finite")
        if vals.size > 1 and np.any(np.diff(vals) > 0):
            raise ValueError("eigenvalues must be sorted non-increasing")
        if self.eigenvectors is not None and (
            self.eigenvectors.shape[1] != vals.size
        ):
            raise ValueError("eigenvector columns must align with eigenvalues")

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def rank(self, rtol: float = PINV_RTOL) -> int:
        """Number of leading eigenvalues above rtol * lambda_max."""
        vals = self.eigenvalues
        if vals.size == 0 or vals[0] <= 0:
            return 0
        return int(np.sum(vals > rtol * vals[0]))


def sym_eig(m) -> Spectrum:
    """Eigendecompose a symmetric matrix; eigenvalues sorted non-increasing.

    Ties keep the eigensolver's order (callers compare projectors, not
    individual eigenvectors).
    """
    a = sym_matrix(m)
    try:
        vals, vecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        off = a - np.diag(np.diag(a))
        raise EigensolverError(a.shape[0], float(np.abs(off).max())) from exc
    order = np.argsort(-vals, kind="stable")
    return Spectrum(vals[order], vecs[:, order])


def psd_eig(m, tol_factor: float = TOL_PSD_FACTOR) -> Spectrum:
    """Eigendecompose a PSD matrix, clamping round-off negatives to zero.

    Eigenvalues below -tol_factor * max(1, lambda_max) raise
    NotPositiveSemidefiniteError.
    """
    s = sym_eig(m)
    vals = s.eigenvalues
    lam_max = vals[0] if vals.size else 0.0
    tol = tol_factor * max(1.0, lam_max)
    if vals.size and vals[-1] < -tol:
        raise NotPositiveSemidefiniteError(
            f"matrix is not PSD: min eigenvalue {vals[-1]:.3e} < -{tol:.3e}"
        )
    return Spectrum(np.maximum(vals, 0.0), s.eigenvectors)


def _order(p) -> float:
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"Schatten order must satisfy p >= 1, got {p}")
    return p


def schatten_norm(values, p) -> float:
    """Schatten p-norm of a spectrum: (sum |lambda_i|^p)^(1/p); max |lambda_i|
    for p = inf. Accepts a Spectrum or a sequence of eigenvalues."""
    p = _order(p)
    vals = getattr(values, "eigenvalues", values)
    a = np.abs(np.asarray(vals, dtype=float))
    if a.size == 0:
        return 0.0
    top = float(a.max())
    if top == 0.0:
        return 0.0
    if np.isinf(p):
        return top
    # factor out the max to avoid overflow for large p
    return top * float(np.sum((a / top) ** p) ** (1.0 / p))


def truncate_spectrum(s: Spectrum, k: int) -> Spectrum:
    """Zero out all eigenvalues beyond the top k; eigenvectors unchanged."""
    if k < 0:
        raise ValueError(f"truncation level must be >= 0, got {k}")
    vals = s.eigenvalues.copy()
    vals[k:] = 0.0
    return Spectrum(vals, s.eigenvectors)


@dataclass(frozen=True, eq=False)
class TruncatedPinv:
    """Truncated pseudo-inverse with the number of inverted eigenvalues.

    rank == 0 flags an all-below-threshold input (zero matrix result).
    """

    matrix: np.ndarray
    rank: int


def pinv_truncated(m, k: int, rtol: float = PINV_RTOL) -> TruncatedPinv:
    """Pseudo-inverse of a PSD matrix keeping at most its k top eigenvalues.

    Eigenvalues at or below rtol * lambda_max are treated as zero and never
    inverted; if none survive the result is the zero matrix with rank 0.
    """
    if k < 1:
        raise ValueError(f"truncation level must be >= 1, got {k}")
    s = psd_eig(m)
    vals, vecs = s.eigenvalues, s.eigenvectors
    thresh = rtol * vals[0] if vals.size and vals[0] > 0 else 0.0
    kept = int(np.sum(vals[: min(k, vals.size)] > thresh))
    if kept == 0:
        return TruncatedPinv(np.zeros_like(np.asarray(m, dtype=float)), 0)
    v = vecs[:, :kept]
    inv = (v / vals[:kept]) @ v.T
    return TruncatedPinv(0.5 * (inv + inv.T), kept)


def psd_power(m, r: float) -> np.ndarray:
    """Matrix power A^r of a PSD matrix via eigendecomposition (negatives
    clamped to zero first)."""
    s = psd_eig(m)
    vals = s.eigenvalues
    powered = np.where(vals > 0, vals, 0.0) ** r
    return (s.eigenvectors * powered) @ s.eigenvectors.T


def min_eigenvalue(m) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(np.linalg.eigvalsh(sym_matrix(m))[0])
