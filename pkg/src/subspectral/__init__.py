"""subspectral: truncated kernel-PCA subspace estimation, spectrally weighted
subspace metrics, spectral support estimation, finite-sample error bounds, and
a quadrature ground-truth oracle with a Monte Carlo experiment harness."""

from .bounds import (
    BoundParams,
    DecayModel,
    decay_bound_constant,
    decay_distance_bound,
    envelope_schatten_bound,
    fit_decay_model,
    plateau_rate_bound,
    plateau_threshold,
    rate_exponents,
    regularization_scale,
    spectrum_distance_bound,
)
from .kernels import Kernel, eval_kernel, gram, load_points_csv
from .linalg import (
    Spectrum,
    pinv_truncated,
    psd_eig,
    schatten_norm,
    sym_eig,
    sym_matrix,
    truncate_spectrum,
)
from .oracle import (
    DistanceSpec,
    ReferenceOperator,
    abel_uniform_spectrum,
    build_reference,
    feature_inner_products,
    reconstruction_error,
    subspace_distance,
    uniform_box,
    whitened_deviation_norm,
)
from .subspace import (
    SubspaceModel,
    SupportEstimate,
    empirical_reconstruction_error,
    fit_kpca,
    hausdorff_on_grid,
    point_subspace_dist,
    project_coords,
    support_contains,
)

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "DecayModel",
    "Kernel",
    "Spectrum",
    "DistanceSpec",
    "ReferenceOperator",
    "SubspaceModel",
    "SupportEstimate",
    "abel_uniform_spectrum",
    "decay_bound_constant",
    "decay_distance_bound",
    "envelope_schatten_bound",
    "fit_decay_model",
    "plateau_rate_bound",
    "plateau_threshold",
    "rate_exponents",
    "regularization_scale",
    "spectrum_distance_bound",
    "build_reference",
    "empirical_reconstruction_error",
    "eval_kernel",
    "feature_inner_products",
    "fit_kpca",
    "gram",
    "hausdorff_on_grid",
    "load_points_csv",
    "pinv_truncated",
    "point_subspace_dist",
    "project_coords",
    "psd_eig",
    "reconstruction_error",
    "schatten_norm",
    "subspace_distance",
    "support_contains",
    "sym_eig",
    "sym_matrix",
    "truncate_spectrum",
    "uniform_box",
    "whitened_deviation_norm",
]
