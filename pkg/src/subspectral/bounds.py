"""Closed-form finite-sample error bounds for truncated kernel-PCA subspace
estimates under polynomial eigenvalue decay, plus rate-exponent comparisons
against previously published bounds.

All logarithms are natural logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad


class IllPosedError(ValueError):
    """The (alpha, p, r) combination makes the weighted norm divergent."""


@dataclass(frozen=True)
class DecayModel:
    """Polynomial eigenvalue-decay envelope: q * j^(-r) <= sigma_j <= Q * j^(-r)."""

    q: float
    Q: float
    r: float

    def __post_init__(self):
        if not 0 < self.q <= self.Q:
            raise ValueError(f"need 0 < q <= Q, got q={self.q}, Q={self.Q}")
        if not self.r > 1:
            raise ValueError(f"decay order must satisfy r > 1, got {self.r}")
        if not self.q < 1:
            raise ValueError(
                f"q must be < 1 for unit-ball-supported data, got q={self.q}"
            )

    def upper(self, k) -> np.ndarray:
        return self.Q * np.asarray(k, dtype=float) ** (-self.r)


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the finite-sample bounds: metric parameters (alpha, p),
    sample count n > 3, confidence delta, and truncation level k."""

    alpha: float
    p: float
    n: int
    delta: float
    k: int

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 0.5:
            raise ValueError(f"alpha must be in [0, 1/2], got {self.alpha}")
        if not float(self.p) >= 1.0:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not self.n > 3:
            raise ValueError(f"sample count must be > 3, got {self.n}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if not self.k >= 1:
            raise ValueError(f"truncation level must be >= 1, got {self.k}")


def _check_well_posed(alpha: float, p: float, r: float) -> None:
    # always well-posed at p = inf; otherwise the weighted norm needs
    # alpha * p > 1/r to converge
    if np.isinf(p):
        return
    if not alpha * p > 1.0 / r:
        raise IllPosedError(
            f"ill-posed (alpha, p, r)=({alpha}, {p}, {r}): need alpha*p > 1/r"
        )


def regularization_scale(sigma_k: float, n: int, delta: float) -> float:
    """Effective regularization level at truncation k:
    max(sigma_k, (9/n) * ln(n/delta))."""
    if not n > 3:
        raise ValueError(f"sample count must be > 3, got {n}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if not sigma_k >= 0:
        raise ValueError(f"sigma_k must be >= 0, got {sigma_k}")
    return max(float(sigma_k), 9.0 / n * math.log(n / delta))


def log_floor(n: int, delta: float) -> float:
    """The sample-driven part of the regularization scale: (9/n) * ln(n/delta)."""
    return regularization_scale(0.0, n, delta)


def regularized_power_norm(eigenvalues, alpha: float, p: float, t: float,
                           decay: DecayModel | None = None) -> float:
    """Schatten-p norm of C^alpha (C + tI)^(-alpha), computed termwise over
    the given eigenvalues.

    When a decay model is attached, indices beyond the list contribute an
    integral tail bound with sigma_x <= Q x^(-r); this requires
    alpha * p > 1/r.
    """
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")
    p = float(p)
    vals = np.maximum(np.asarray(eigenvalues, dtype=float), 0.0)
    terms = vals / (vals + t)
    if np.isinf(p):
        return float(terms.max() ** alpha) if terms.size else 0.0
    if decay is not None:
        _check_well_posed(alpha, p, decay.r)
    ap = alpha * p
    total = float(np.sum(terms**ap))
    if decay is not None:
        start = vals.size
        # integrand (f(x) / (f(x) + t))^(alpha p) with f(x) = Q x^(-r)
        tail, _ = quad(
            lambda x: (1.0 + (t / decay.Q) * x**decay.r) ** (-ap),
            start, np.inf,
        )
        total += tail
    return float(total ** (1.0 / p))


def spectrum_distance_bound(eigenvalues, params: BoundParams,
                            decay: DecayModel | None = None) -> float:
    """High-probability bound on the weighted subspace distance between the
    true subspace and the k-truncated estimate, given the covariance
    spectrum: 3 * t^alpha * ||C^alpha (C + tI)^(-alpha)||_p at the
    truncation's regularization scale.

    The norm is evaluated termwise over the given eigenvalues (tightest
    available form); with a decay model attached the tail beyond the list is
    bounded by the closed-form integral. Holds uniformly over k with
    probability 1 - delta.
    """
    vals = np.asarray(eigenvalues, dtype=float)
    if decay is not None:
        _check_well_posed(params.alpha, float(params.p), decay.r)
    if params.k <= vals.size:
        sigma_k = max(float(vals[params.k - 1]), 0.0)
    elif decay is not None:
        sigma_k = float(decay.upper(params.k))
    else:
        sigma_k = 0.0
    t = regularization_scale(sigma_k, params.n, params.delta)
    norm = regularized_power_norm(vals, params.alpha, float(params.p), t,
                                  decay)
    return 3.0 * t**params.alpha * norm


def envelope_schatten_bound(g: float, gamma_exp: float, alpha: float,
                            p: float, t: float) -> float:
    """Closed-form bound on ||C^alpha (C + tI)^(-alpha)||_p when the spectrum
    is dominated by f(k) = g * k^(-1/gamma_exp) with 0 < gamma_exp < 1:

        (g^gamma * Gamma(alpha p - gamma) * Gamma(1 + gamma) / Gamma(gamma))^(1/p)
            * t^(-gamma / p).

    At p = inf the bound degenerates to 1.
    """
    if not 0.0 < gamma_exp < 1.0:
        raise ValueError(f"gamma_exp must be in (0, 1), got {gamma_exp}")
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")
    p = float(p)
    if np.isinf(p):
        return 1.0
    ap = alpha * p
    if not ap > gamma_exp:
        raise IllPosedError(
            f"need alpha*p > gamma_exp, got alpha*p={ap}, gamma_exp={gamma_exp}"
        )
    const = (
        g**gamma_exp
        * math.gamma(ap - gamma_exp)
        * math.gamma(1.0 + gamma_exp)
        / math.gamma(gamma_exp)
    ) ** (1.0 / p)
    return const * t ** (-gamma_exp / p)


def plateau_threshold(decay: DecayModel, n: int, delta: float) -> float:
    """Truncation level past which the decay bound stops improving:
    (q n / (9 ln(n/delta)))^(1/r). Returned as a real; callers ceil it when
    indexing."""
    if not n > 3:
        raise ValueError(f"sample count must be > 3, got {n}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    return float((decay.q * n / (9.0 * math.log(n / delta))) ** (1.0 / decay.r))


def decay_bound_constant(decay: DecayModel, alpha: float, p: float) -> float:
    """Leading constant of the polynomial-decay bound:
    3 * (Q^(1/r) * Gamma(alpha p - 1/r) * Gamma(1 + 1/r) / Gamma(1/r))^(1/p)."""
    p = float(p)
    if np.isinf(p):
        return 3.0
    return 3.0 * envelope_schatten_bound(decay.Q, 1.0 / decay.r, alpha, p,
                                         t=1.0)


def decay_distance_bound(decay: DecayModel, params: BoundParams) -> float:
    """Piecewise bound under polynomial decay: Q' * k^(-r alpha + 1/p) below
    the plateau threshold, constant at the threshold value beyond it.
    Continuous at the threshold by construction."""
    _check_well_posed(params.alpha, float(params.p), decay.r)
    qp = decay_bound_constant(decay, params.alpha, float(params.p))
    kstar = plateau_threshold(decay, params.n, params.delta)
    k_eff = min(float(params.k), kstar)
    inv_p = 0.0 if np.isinf(float(params.p)) else 1.0 / float(params.p)
    return qp * k_eff ** (-decay.r * params.alpha + inv_p)


def plateau_rate_bound(decay: DecayModel, params: BoundParams) -> float:
    """Bound for estimates truncated at or past the plateau threshold, as a
    function of n: Q' * (9 (ln n - ln delta) / (q n))^(alpha - 1/(r p))."""
    _check_well_posed(params.alpha, float(params.p), decay.r)
    qp = decay_bound_constant(decay, params.alpha, float(params.p))
    inv_rp = (0.0 if np.isinf(float(params.p))
              else 1.0 / (decay.r * float(params.p)))
    base = 9.0 * (math.log(params.n) - math.log(params.delta)) / (
        decay.q * params.n)
    return qp * base ** (params.alpha - inv_rp)


@dataclass(frozen=True)
class RateExponents:
    """Polynomial rate exponents c (error = O(n^-c)) for the reconstruction
    error at the best truncation, under eigenvalue decay of order r."""

    ours: float
    shawe_taylor: float
    blanchard: float

    def astuple(self):
        return (self.ours, self.shawe_taylor, self.blanchard)


def rate_exponents(r: float, s: float) -> RateExponents:
    """Rate exponents as a function of the decay order r (and the fourth-moment
    parameter s for the Blanchard-style baseline):

        ours = 1 - 1/r,  shawe_taylor = (r-1)/(2r-1),
        blanchard = s(r-1)/(r - s + s r).
    """
    if not r > 1:
        raise ValueError(f"decay order must satisfy r > 1, got {r}")
    denom = r - s + s * r
    if denom == 0:
        raise ValueError(f"blanchard exponent undefined: r - s + s*r = 0 "
                         f"(r={r}, s={s})")
    return RateExponents(
        ours=1.0 - 1.0 / r,
        shawe_taylor=(r - 1.0) / (2.0 * r - 1.0),
        blanchard=s * (r - 1.0) / denom,
    )


def save_bound_curve_csv(path, ks, values, column: str = "bound") -> None:
    """Write a bound curve as CSV rows (k, bound) for plotting."""
    ks = list(ks)
    vals = list(values)
    if len(ks) != len(vals):
        raise ValueError("ks and values must have equal length")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"k,{column}\n")
        for k, v in zip(ks, vals):
            fh.write(f"{k},{float(v):.17g}\n")


def fit_decay_model(eigenvalues, window: tuple[int, int] = (5, 50)) -> DecayModel:
    """Least-squares fit of a polynomial decay model on log lambda_k vs log k
    over the index window (1-based, inclusive); the envelope constants q, Q
    bracket the windowed values of lambda_k * k^r."""
    vals = np.asarray(eigenvalues, dtype=float)
    lo, hi = window
    hi = min(hi, vals.size)
    if not 1 <= lo < hi:
        raise ValueError(f"invalid fit window {window} for {vals.size} values")
    k = np.arange(lo, hi + 1, dtype=float)
    lam = vals[lo - 1:hi]
    if np.any(lam <= 0):
        raise ValueError("eigenvalues in the fit window must be positive")
    slope, _ = np.polyfit(np.log(k), np.log(lam), 1)
    r = -float(slope)
    scaled = lam * k**r
    return DecayModel(q=float(scaled.min()), Q=float(scaled.max()), r=r)
