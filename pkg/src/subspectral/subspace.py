"""Truncated kernel-PCA subspace estimates and feature-space queries.

A fitted model stores the eigendecomposition of the sample Gram matrix; the
estimate at truncation level k is the span of the top-k empirical feature
directions. Models at smaller k are obtained by discarding eigenpairs, never
by refitting, so the family of estimates is nested.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .kernels import Kernel, as_points, eval_kernel, gram
from .linalg import PINV_RTOL, Spectrum, pinv_truncated, psd_eig


@dataclass(frozen=True, eq=False)
class SubspaceModel:
    """k-truncated kernel-PCA estimate held via the Gram eigendecomposition."""

    points: np.ndarray        # (n, d) training samples
    kernel: Kernel
    spectrum: Spectrum        # Gram spectrum, clamped PSD, with eigenvectors
    k: int                    # truncation level, 1..n
    pinv_rtol: float = PINV_RTOL

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def kept(self, k: int | None = None) -> int:
        """Number of usable eigenpairs at level k: leading eigenvalues above
        the pseudo-inversion cutoff, capped at k."""
        k = self.k if k is None else k
        vals = self.spectrum.eigenvalues
        thresh = self.pinv_rtol * vals[0] if vals[0] > 0 else 0.0
        return int(np.sum(vals[: min(k, vals.size)] > thresh))

    def deficient_directions(self, k: int | None = None) -> int:
        """How many of the requested k directions fell below the cutoff and
        will produce zero coordinates."""
        k = self.k if k is None else k
        return min(k, self.spectrum.dim) - self.kept(k)

    def with_truncation(self, k: int) -> "SubspaceModel":
        if not 1 <= k <= self.n:
            raise ValueError(f"truncation level {k} outside 1..{self.n}")
        return dataclasses.replace(self, k=k)


def fit_kpca(points, kernel: Kernel, trunc: int) -> SubspaceModel:
    """Fit a k-truncated kernel-PCA model by eigendecomposing the Gram matrix."""
    x = as_points(points)
    n = x.shape[0]
    if not 1 <= trunc <= n:
        raise ValueError(f"truncation level {trunc} outside 1..{n}")
    spec = psd_eig(gram(kernel, x))
    return SubspaceModel(points=x, kernel=kernel, spectrum=spec, k=trunc)


def _cross(model: SubspaceModel, z) -> np.ndarray:
    q = as_points(z)
    return model.kernel.pairwise(q, model.points)  # (N, n)


def project_coords(model: SubspaceModel, z) -> np.ndarray:
    """Coordinates of the feature embedding of z on the top-k empirical
    directions.

    Entry j is sigma_j^(-1/2) * sum_l K(z, z_l) v_{jl}; directions whose Gram
    eigenvalue falls below the cutoff give coordinate 0 (see
    model.deficient_directions).  Accepts a single point (returns shape (k,))
    or a stack of points (returns (N, k)).
    """
    single = np.asarray(z, dtype=float).ndim <= 1
    t = _cross(model, z)
    kk = model.kept()
    vals = model.spectrum.eigenvalues[:kk]
    vecs = model.spectrum.eigenvectors[:, :kk]
    coords = np.zeros((t.shape[0], model.k))
    if kk:
        coords[:, :kk] = (t @ vecs) / np.sqrt(vals)
    return coords[0] if single else coords


def _self_kernel(model: SubspaceModel, z) -> np.ndarray:
    q = as_points(z)
    if model.kernel.family in ("abel_l1", "gaussian"):
        return np.ones(q.shape[0])
    return np.array([eval_kernel(model.kernel, p, p) for p in q])


def point_subspace_dist(model: SubspaceModel, z) -> float | np.ndarray:
    """Distance from the feature embedding of z to the truncated subspace:
    sqrt(K(z,z) - <t_z, pinv(K_n^k) t_z>) with (t_z)_i = K(z, z_i).

    Negative round-off under the square root is clamped to zero.
    """
    single = np.asarray(z, dtype=float).ndim <= 1
    t = _cross(model, z)
    pinv = pinv_truncated(gram(model.kernel, model.points), model.k,
                          rtol=model.pinv_rtol)
    sq = _self_kernel(model, z) - np.sum((t @ pinv.matrix) * t, axis=1)
    d = np.sqrt(np.maximum(sq, 0.0))
    return float(d[0]) if single else d


def residual_profile(model: SubspaceModel, z, k_levels) -> np.ndarray:
    """Point-to-subspace distances at several truncation levels at once.

    Returns shape (N, len(k_levels)); column j holds the distances at
    truncation k_levels[j]. Same formula as point_subspace_dist, evaluated
    through the shared eigen-factorization so the per-level values are exact
    partial sums (non-increasing in k by construction).
    """
    q = as_points(z)
    t = model.kernel.pairwise(q, model.points)
    kk = model.kept(model.n)
    vals = model.spectrum.eigenvalues[:kk]
    vecs = model.spectrum.eigenvectors[:, :kk]
    coords_sq = ((t @ vecs) / np.sqrt(vals)) ** 2
    captured = np.cumsum(coords_sq, axis=1)  # (N, kk)
    self_k = _self_kernel(model, q)
    out = np.empty((q.shape[0], len(k_levels)))
    for j, k in enumerate(k_levels):
        got = captured[:, min(k, kk) - 1] if min(k, kk) >= 1 else 0.0
        out[:, j] = np.sqrt(np.maximum(self_k - got, 0.0))
    return out


def empirical_reconstruction_error(model: SubspaceModel,
                                   k: int | None = None) -> float:
    """Mean squared training residual: (1/n) * sum of Gram eigenvalues past k.

    Non-increasing in k (exact partial tail sums) and zero at k = n.
    """
    k = model.k if k is None else k
    return gram_tail_sums(model)[min(max(k, 0), model.n)]


def gram_tail_sums(model: SubspaceModel) -> np.ndarray:
    """Tail sums T[k] = (1/n) * sum_{j>k} sigma_j for k = 0..n, computed with
    one reversed cumulative sum so that T is exactly non-increasing."""
    vals = model.spectrum.eigenvalues
    tails = np.zeros(vals.size + 1)
    tails[:-1] = np.cumsum(vals[::-1])[::-1]
    return tails / model.n


@dataclass(frozen=True, eq=False)
class SupportEstimate:
    """Support estimate: points whose feature embedding lies within tau of the
    fitted subspace."""

    model: SubspaceModel
    tau: float

    def __post_init__(self):
        if not self.tau >= 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")


def support_contains(estimate: SupportEstimate, z) -> bool | np.ndarray:
    """Membership test: distance <= tau, boundary inclusive."""
    d = point_subspace_dist(estimate.model, z)
    if np.isscalar(d) or getattr(d, "ndim", 0) == 0:
        return bool(d <= estimate.tau)
    return d <= estimate.tau


def hausdorff_on_grid(a, b) -> float:
    """Hausdorff distance between two finite point sets under the Euclidean
    metric: max over both sets of the distance to the other set."""
    pa, pb = as_points(a), as_points(b)
    if pa.shape[1] != pb.shape[1]:
        raise ValueError(
            f"dimension mismatch: {pa.shape[1]} vs {pb.shape[1]}"
        )
    d = cdist(pa, pb)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
