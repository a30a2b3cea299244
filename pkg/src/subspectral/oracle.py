"""Quadrature (Nystrom) ground-truth reference for the data-distribution
covariance, its subspace, and distances from it to empirical estimates.

The reference discretizes the covariance of the embedded distribution with a
composite midpoint rule: with nodes w_a and probability weights omega_a, the
weighted Gram matrix D^{1/2} K_m D^{1/2} shares its eigenvalues with the
discretized integral operator, and its eigenpairs (lambda_i, psi_i) give an
orthonormal feature-space basis of the reference subspace,

    e_i = lambda_i^{-1/2} * sum_a omega_a^{1/2} K(., w_a) psi_i[a].

Inner products between that basis and empirical kernel-PCA directions are
exact kernel evaluations, which makes the spectrally weighted subspace
distances below computable without ever materializing feature vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import Kernel, as_points
from .linalg import PINV_RTOL, Spectrum, psd_eig, schatten_norm
from .subspace import SubspaceModel, fit_kpca, point_subspace_dist


class KernelMismatchError(ValueError):
    """Reference and empirical model were built with different kernels."""


@dataclass(frozen=True)
class UniformBox:
    """Uniform probability measure on an axis-aligned box."""

    low: tuple[float, ...]
    high: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.low))
        hi = tuple(float(v) for v in np.atleast_1d(self.high))
        object.__setattr__(self, "low", lo)
        object.__setattr__(self, "high", hi)
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError(f"invalid box bounds low={lo}, high={hi}")

    @property
    def dim(self) -> int:
        return len(self.low)


def uniform_box(low, high) -> UniformBox:
    return UniformBox(low, high)


@dataclass(frozen=True)
class DistanceSpec:
    """Parameters of the spectrally weighted subspace metric: the covariance
    power alpha in [0, 1/2] and the Schatten order p >= 1."""

    alpha: float = 0.5
    p: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 0.5:
            raise ValueError(f"alpha must be in [0, 1/2], got {self.alpha}")
        if not float(self.p) >= 1.0:
            raise ValueError(f"p must be >= 1, got {self.p}")


def midpoint_rule(measure: UniformBox, m: int):
    """Composite midpoint nodes and probability weights on a uniform box.

    In one dimension this gives exactly m nodes of weight 1/m; in d > 1 a
    tensor grid with round(m ** (1/d)) nodes per axis is used.
    """
    if m < 2:
        raise ValueError(f"need at least 2 quadrature nodes, got m={m}")
    d = measure.dim
    per_axis = m if d == 1 else max(2, int(round(m ** (1.0 / d))))
    axes = []
    for lo, hi in zip(measure.low, measure.high):
        step = (hi - lo) / per_axis
        axes.append(lo + step * (np.arange(per_axis) + 0.5))
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.full(nodes.shape[0], 1.0 / nodes.shape[0])
    return nodes, weights


@dataclass(frozen=True, eq=False)
class ReferenceOperator:
    """Quadrature discretization of the true covariance operator."""

    kernel: Kernel
    measure: UniformBox
    nodes: np.ndarray      # (m, d)
    weights: np.ndarray    # (m,), positive, summing to 1
    spectrum: Spectrum     # of D^{1/2} K_m D^{1/2}, with eigenvectors
    rank_rtol: float = PINV_RTOL

    @property
    def m(self) -> int:
        return self.nodes.shape[0]

    @property
    def rank(self) -> int:
        """Kept rank: eigenvalues above rank_rtol * lambda_max."""
        return self.spectrum.rank(self.rank_rtol)

    @property
    def trace(self) -> float:
        return float(self.spectrum.eigenvalues.sum())


def build_reference(kernel: Kernel, measure: UniformBox, m: int,
                    rank_rtol: float = PINV_RTOL) -> ReferenceOperator:
    """Build the quadrature reference: midpoint nodes, weighted Gram, and its
    eigendecomposition."""
    nodes, weights = midpoint_rule(measure, m)
    km = kernel.pairwise(nodes, nodes)
    root = np.sqrt(weights)
    a = root[:, None] * km * root[None, :]
    spec = psd_eig(0.5 * (a + a.T))
    return ReferenceOperator(kernel=kernel, measure=measure, nodes=nodes,
                             weights=weights, spectrum=spec,
                             rank_rtol=rank_rtol)


def abel_uniform_spectrum(gamma: float, count: int) -> np.ndarray:
    """Closed-form eigenvalue sequence 2*gamma / ((k*pi)^2 + gamma^2) for the
    l1-exponential kernel against the uniform measure on the unit interval;
    strictly decreasing with quadratic decay."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    k = np.arange(1, count + 1, dtype=float)
    return 2.0 * gamma / ((k * np.pi) ** 2 + gamma**2)


def _check_kernel(ref: ReferenceOperator, model: SubspaceModel) -> None:
    if ref.kernel != model.kernel:
        raise KernelMismatchError(
            f"reference kernel {ref.kernel} != model kernel {model.kernel}"
        )


def feature_inner_products(ref: ReferenceOperator,
                           model: SubspaceModel) -> np.ndarray:
    """Matrix G of inner products between the reference basis and the model's
    top-k empirical directions: G[i, j] = <e_i, u_j>.

    Shape (ref.rank, model.kept()). Columns have norm <= 1; the gap from 1
    measures how much of an empirical direction escapes the reference span
    (see containment_residuals).
    """
    _check_kernel(ref, model)
    r = ref.rank
    lam = ref.spectrum.eigenvalues[:r]
    psi = ref.spectrum.eigenvectors[:, :r]
    cross = ref.kernel.pairwise(ref.nodes, model.points)  # (m, n)
    kk = model.kept()
    svals = model.spectrum.eigenvalues[:kk]
    svecs = model.spectrum.eigenvectors[:, :kk]
    b = np.sqrt(ref.weights)[:, None] * cross
    g = (psi.T @ b) @ svecs
    g /= np.sqrt(lam)[:, None]
    if kk:
        g /= np.sqrt(svals)[None, :]
    return g


def containment_residuals(ref: ReferenceOperator,
                          model: SubspaceModel) -> np.ndarray:
    """Per-direction mass escaping the reference span: 1 - ||G column||^2."""
    g = feature_inner_products(ref, model)
    return np.maximum(1.0 - np.sum(g * g, axis=0), 0.0)


def _pair_inner_products(u: SubspaceModel, v: SubspaceModel) -> np.ndarray:
    """Inner products <u_j, v_j'> between the kept directions of two models
    sharing a kernel."""
    cross = u.kernel.pairwise(u.points, v.points)
    ku, kv = u.kept(), v.kept()
    a = u.spectrum.eigenvectors[:, :ku] / np.sqrt(u.spectrum.eigenvalues[:ku])
    b = v.spectrum.eigenvectors[:, :kv] / np.sqrt(v.spectrum.eigenvalues[:kv])
    return a.T @ cross @ b


def subspace_distance(ref: ReferenceOperator, model: SubspaceModel,
                      spec: DistanceSpec = DistanceSpec(),
                      other: SubspaceModel | None = None) -> float:
    """Spectrally weighted Schatten distance between subspaces.

    With other=None: distance between the reference subspace and the model's
    truncated estimate, i.e. the Schatten-p norm of (P_ref - P_model) C^alpha
    where C is the reference covariance. Otherwise: the same metric between
    two empirical models over the shared reference weighting.

    Computed in the reference eigenbasis: the squared singular values of the
    weighted projector difference are the eigenvalues of the rank-reduced
    matrix built from G (exact kernel inner products), and reference
    directions beyond the kept rank enter through their eigenvalues alone.
    """
    alpha, p = spec.alpha, float(spec.p)
    r = ref.rank
    if r == 0:
        return 0.0
    lam = ref.spectrum.eigenvalues[:r]
    lam_a = lam**alpha
    if other is None:
        g = feature_inner_products(ref, model)
        tail = ref.spectrum.eigenvalues[r:]
        tail = tail[tail > 0]
        if p == 2.0:
            # ||(P_ref - P_model) C^a||_2^2 = sum lam^2a - tr(G^T Lam^2a G)
            captured = float(np.sum((lam_a[:, None] * g) ** 2))
            total = float(np.sum(lam ** (2 * alpha))) - captured
            if alpha > 0:
                total += float(np.sum(tail ** (2 * alpha)))
            return float(np.sqrt(max(total, 0.0)))
        b = lam_a[:, None] * g
        w = np.diag(lam_a**2) - b @ b.T
        sing = np.sqrt(np.maximum(np.linalg.eigvalsh(w), 0.0))
        if np.isinf(p):
            top = float(sing.max()) if sing.size else 0.0
            if alpha > 0 and tail.size:
                top = max(top, float(tail.max() ** alpha))
            elif alpha == 0 and tail.size:
                top = max(top, 1.0)
            return top
        total = float(np.sum(sing**p))
        if alpha > 0:
            total += float(np.sum(tail ** (alpha * p)))
        return float(total ** (1.0 / p))
    # pairwise: both estimates expanded in the reference basis; cross terms
    # use exact inner products between the two sets of directions
    if other is model or (
        other.spectrum is model.spectrum
        and other.kernel == model.kernel
        and other.kept() == model.kept()
    ):
        return 0.0  # identical projector, exactly
    gu = feature_inner_products(ref, model)
    gv = feature_inner_products(ref, other)
    muv = _pair_inner_products(model, other)
    inner = gu @ gu.T + gv @ gv.T - gu @ muv @ gv.T - gv @ muv.T @ gu.T
    w = lam_a[:, None] * inner * lam_a[None, :]
    sing = np.sqrt(np.maximum(np.linalg.eigvalsh(0.5 * (w + w.T)), 0.0))
    return schatten_norm(sing, p)


def reconstruction_error(ref: ReferenceOperator,
                         model: SubspaceModel) -> float:
    """Expected squared feature-space distance from a reference-distributed
    point to the model subspace, computed by quadrature:
    sum_a omega_a * point_subspace_dist(model, w_a)^2.

    Independent of the eigenbasis route used by subspace_distance; agrees
    with subspace_distance(alpha=1/2, p=2)^2.
    """
    _check_kernel(ref, model)
    d = point_subspace_dist(model, ref.nodes)
    return float(np.sum(ref.weights * d**2))


def whitened_deviation_norm(ref: ReferenceOperator, points,
                            t: float) -> float:
    """Operator norm of the t-whitened deviation between the reference
    covariance and the empirical covariance of the given samples:
    || (C + tI)^{-1/2} (C - C_n) (C + tI)^{-1/2} ||_inf on the reference
    finite section.

    The empirical covariance is represented in the reference eigenbasis via
    the untruncated model's direction inner products scaled by its
    eigenvalues (Gram eigenvalues divided by n).
    """
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")
    pts = as_points(points)
    n = pts.shape[0]
    model = fit_kpca(pts, ref.kernel, trunc=n)
    g = feature_inner_products(ref, model)
    mu = model.spectrum.eigenvalues[: model.kept()] / n
    r = ref.rank
    lam = ref.spectrum.eigenvalues[:r]
    section = np.diag(lam) - (g * mu) @ g.T
    whit = 1.0 / np.sqrt(lam + t)
    b = whit[:, None] * section * whit[None, :]
    vals = np.linalg.eigvalsh(0.5 * (b + b.T))
    return float(np.abs(vals).max())


def save_spectrum_csv(path, spectrum: Spectrum | np.ndarray) -> None:
    """Write eigenvalues as CSV rows (k, lambda_k), k starting at 1."""
    vals = np.asarray(getattr(spectrum, "eigenvalues", spectrum), dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,lambda_k\n")
        for i, v in enumerate(vals, start=1):
            fh.write(f"{i},{v:.17g}\n")
