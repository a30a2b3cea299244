"""Monte Carlo experiment harness: configuration, deterministic seeding, the
six experiment runners, and CSV/JSON reporting.

Determinism contract: every experiment is a pure function of its
configuration. Per-trial generators are derived from (seed, trial_index), so
parallel and serial execution write byte-identical CSV/JSON reports. Reals
are written with 17 significant digits (comma separator, '.' decimal).
"""

from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import (
    BoundParams,
    DecayModel,
    decay_distance_bound,
    fit_decay_model,
    log_floor,
    plateau_threshold,
    spectrum_distance_bound,
)
from .kernels import Kernel, eval_kernel, gram, load_points_csv
from .oracle import (
    ReferenceOperator,
    build_reference,
    feature_inner_products,
    save_spectrum_csv,
    uniform_box,
    whitened_deviation_norm,
)
from .subspace import fit_kpca, gram_tail_sums, hausdorff_on_grid

SCHEMA_VERSION = 1

EXPERIMENTS = ("spectrum", "plateau", "instability", "rates", "support",
               "concentration")

TRIALS_HEADER = ("trial", "k", "empirical_recon", "true_recon",
                 "weighted_distance", "spectrum_bound", "decay_bound")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _default_k_grid(n: int) -> tuple[int, ...]:
    ks = sorted({m * 10**e for m in (1, 2, 5) for e in range(7)
                 if m * 10**e <= n} | {n})
    return tuple(ks)


@dataclass
class ExperimentConfig:
    """Settings shared by all experiments; unused fields are ignored by the
    runners that do not need them."""

    experiment: str
    n: int = 1000
    trials: int = 100
    gamma: float = 1.0
    delta: float = 0.1
    alpha: float = 0.5
    p: float = 2.0
    k_grid: tuple[int, ...] | None = None
    m_quadrature: int = 2000
    seed: int = 0
    output_dir: str = "reports"
    workers: int = 1
    kernel_family: str = "abel_l1"
    domain_low: float = 0.0
    domain_high: float = 1.0
    support_low: float = 0.2
    support_high: float = 0.8
    n_grid: tuple[int, ...] = (50, 200, 800)
    tau_grid: tuple[float, ...] | None = None
    grid_step: float = 0.001
    points_csv: str | None = None   # instability: dataset instead of sampling
    grid_csv: str | None = None     # support/instability: evaluation grid
    plots: bool = True

    def resolved_k_grid(self) -> tuple[int, ...]:
        return self.k_grid if self.k_grid else _default_k_grid(self.n)

    def resolved_tau_grid(self) -> tuple[float, ...]:
        if self.tau_grid:
            return self.tau_grid
        return tuple(float(t) for t in np.geomspace(1e-3, 1.0, 31))

    def kernel(self) -> Kernel:
        return Kernel(self.kernel_family, self.gamma)

    def measure(self):
        return uniform_box([self.domain_low], [self.domain_high])

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"choose from {EXPERIMENTS}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.m_quadrature < 2:
            raise ConfigError(
                f"m_quadrature must be >= 2, got {self.m_quadrature}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must be in (0, 1), got {self.delta}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        if not 0 <= self.alpha <= 0.5:
            raise ConfigError(f"alpha must be in [0, 1/2], got {self.alpha}")
        if not float(self.p) >= 1:
            raise ConfigError(f"p must be >= 1, got {self.p}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not self.domain_low < self.domain_high:
            raise ConfigError("domain_low must be < domain_high")
        if not self.grid_step > 0:
            raise ConfigError(f"grid_step must be > 0, got {self.grid_step}")
        for k in self.resolved_k_grid():
            if not 1 <= k <= self.n:
                raise ConfigError(f"k_grid entry {k} outside [1, {self.n}]")
        if self.experiment == "support":
            if not (self.domain_low <= self.support_low
                    < self.support_high <= self.domain_high):
                raise ConfigError("support interval must lie inside the domain")
            if not self.n_grid or any(v < 2 for v in self.n_grid):
                raise ConfigError(f"invalid n_grid {self.n_grid}")
            for t in self.resolved_tau_grid():
                if not t >= 0:
                    raise ConfigError(f"tau values must be >= 0, got {t}")


_INT_TUPLE = ("k_grid", "n_grid")
_FLOAT_TUPLE = ("tau_grid",)
_INT = ("n", "trials", "m_quadrature", "seed", "workers")
_FLOAT = ("gamma", "delta", "alpha", "p", "domain_low", "domain_high",
          "support_low", "support_high", "grid_step")
_STR = ("experiment", "output_dir", "kernel_family", "points_csv",
        "grid_csv")
_BOOL = ("plots",)


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _INT:
            return int(raw)
        if key in _FLOAT:
            return float(raw)
        if key in _INT_TUPLE:
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if key in _FLOAT_TUPLE:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if key in _BOOL:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if key in _STR:
            return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    raise ConfigError(f"unknown config key {key!r}")


def load_config_file(path) -> dict:
    """Parse a key=value config file ('#' starts a comment)."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, raw = line.split("=", 1)
        values[key.strip()] = _parse_value(key.strip(), raw)
    return values


def make_config(experiment: str, overrides: dict | None = None,
                **kwargs) -> ExperimentConfig:
    values = dict(overrides or {})
    values.update(kwargs)
    values["experiment"] = experiment
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent per-trial generator derived from (seed, trial_index);
    identical whether trials run serially or in parallel."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(trial_index,)))


@dataclass(frozen=True)
class TrialRecord:
    """One row of trials.csv."""

    trial: int
    k: int
    empirical_recon: float
    true_recon: float
    weighted_distance: float
    spectrum_bound: float
    decay_bound: float

    def __post_init__(self):
        for name in ("empirical_recon", "true_recon", "weighted_distance",
                     "spectrum_bound", "decay_bound"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                str(v) if isinstance(v, (int, str)) else _fmt(v)
                for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _summary_base(config: ExperimentConfig) -> dict:
    # echo the result-determining configuration only: execution knobs
    # (workers, plots, output_dir) cannot change the reported numbers
    echo = dataclasses.asdict(config)
    for key in ("workers", "plots", "output_dir"):
        echo.pop(key)
    return {
        "schema_version": SCHEMA_VERSION,
        "experiment": config.experiment,
        "config": echo,
    }


def _map_trials(fn, trials: int, workers: int) -> list:
    if workers <= 1:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


def _quantile_block(per_k_values: dict[int, list[float]]) -> dict:
    ks = sorted(per_k_values)
    qs = (5, 25, 50, 75, 95)
    block: dict = {"k": ks}
    for q in qs:
        block[f"q{q:02d}"] = [
            float(np.percentile(per_k_values[k], q)) for k in ks]
    return block


def _maybe_render(config: ExperimentConfig, out: Path) -> list[Path]:
    if not config.plots:
        return []
    from . import plots

    return plots.render_experiment(config.experiment, out)


# ---------------------------------------------------------------------------
# spectrum


def run_spectrum(config: ExperimentConfig) -> dict[str, Path]:
    """Export the reference spectrum (k, lambda_k) and its fitted decay model."""
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ref = build_reference(config.kernel(), config.measure(),
                          config.m_quadrature)
    kept = ref.spectrum.eigenvalues[: ref.rank]
    save_spectrum_csv(out / "spectrum.csv", kept)
    summary = _summary_base(config)
    summary.update({
        "reference": {"m": ref.m, "rank": ref.rank, "trace": ref.trace},
    })
    try:
        decay = fit_decay_model(kept)
        summary["decay_model"] = dataclasses.asdict(decay)
        summary["plateau_threshold"] = plateau_threshold(
            decay, config.n, config.delta)
    except ValueError:
        summary["decay_model"] = None
    _write_json(out / "summary.json", summary)
    paths = {"spectrum": out / "spectrum.csv", "summary": out / "summary.json"}
    _maybe_render(config, out)
    return paths


# ---------------------------------------------------------------------------
# plateau


def _weighted_capture(ref: ReferenceOperator, model, alpha: float):
    """Cumulative spectrally weighted energy captured by the leading empirical
    directions, plus the total weighted mass; powers the p=2 distance at every
    truncation level in one pass."""
    g = feature_inner_products(ref, model)
    lam = ref.spectrum.eigenvalues[: ref.rank]
    col = np.sum((lam ** (2 * alpha))[:, None] * g * g, axis=0)
    total = float(np.sum(lam ** (2 * alpha)))
    if alpha > 0:
        tail = ref.spectrum.eigenvalues[ref.rank:]
        total += float(np.sum(tail[tail > 0] ** (2 * alpha)))
    residual = float(np.max(1.0 - np.minimum(np.sum(g * g, axis=0), 1.0),
                            initial=0.0))
    return np.cumsum(col), total, residual


def _node_recon(ref: ReferenceOperator, model, ks) -> np.ndarray:
    """Quadrature reconstruction error at each truncation level, via the
    cumulative point-residual profile at the reference nodes."""
    from .subspace import residual_profile

    d = residual_profile(model, ref.nodes, ks)  # (m, len(ks))
    return (ref.weights[None, :] @ (d * d)).ravel()


def run_plateau(config: ExperimentConfig) -> dict[str, Path]:
    """Reconstruction-error drop/plateau experiment: per trial and truncation
    level, the empirical and reference reconstruction errors, the weighted
    subspace distance, and the two bound curves."""
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    kern = config.kernel()
    ref = build_reference(kern, config.measure(), config.m_quadrature)
    ks = list(config.resolved_k_grid())
    ref_vals = ref.spectrum.eigenvalues[: ref.rank]
    decay = fit_decay_model(ref_vals)
    kstar = plateau_threshold(decay, config.n, config.delta)
    spectrum_bounds = {}
    decay_bounds = {}
    for k in ks:
        params = BoundParams(alpha=config.alpha, p=config.p, n=config.n,
                             delta=config.delta, k=k)
        spectrum_bounds[k] = spectrum_distance_bound(ref_vals, params, decay)
        decay_bounds[k] = decay_distance_bound(decay, params)

    lo, hi = config.domain_low, config.domain_high

    def one_trial(i: int):
        rng = trial_rng(config.seed, i)
        pts = rng.uniform(lo, hi, size=(config.n, 1))
        model = fit_kpca(pts, kern, config.n)
        tails = gram_tail_sums(model)
        true_recon = _node_recon(ref, model, ks)
        captured, total, residual = _weighted_capture(ref, model,
                                                      config.alpha)
        kk_full = model.kept(config.n)
        rows = []
        for j, k in enumerate(ks):
            kk = min(k, kk_full)
            got = captured[kk - 1] if kk >= 1 else 0.0
            wdist = math.sqrt(max(total - got, 0.0))
            rows.append(TrialRecord(
                trial=i, k=k,
                empirical_recon=float(tails[min(k, config.n)]),
                true_recon=float(true_recon[j]),
                weighted_distance=wdist,
                spectrum_bound=spectrum_bounds[k],
                decay_bound=decay_bounds[k],
            ))
        return rows, residual

    results = _map_trials(one_trial, config.trials, config.workers)
    records = [r for rows, _ in results for r in rows]
    records.sort(key=lambda r: (r.trial, r.k))
    _write_csv(out / "trials.csv", TRIALS_HEADER,
               [dataclasses.astuple(r) for r in records])
    _write_csv(out / "bounds.csv", ("k", "spectrum_bound", "decay_bound"),
               [(k, spectrum_bounds[k], decay_bounds[k]) for k in ks])

    per_k: dict[int, list[float]] = {k: [] for k in ks}
    covered = 0
    for rows, _ in results:
        if all(r.spectrum_bound >= r.weighted_distance for r in rows):
            covered += 1
        for r in rows:
            per_k[r.k].append(r.true_recon)
    summary = _summary_base(config)
    summary.update({
        "k_grid": ks,
        "true_recon_quantiles": _quantile_block(per_k),
        "decay_model": dataclasses.asdict(decay),
        "plateau_threshold": kstar,
        "uniform_bound_coverage": covered / config.trials,
        "max_containment_residual": max(res for _, res in results),
        "reference": {"m": ref.m, "rank": ref.rank, "trace": ref.trace},
    })
    _write_json(out / "summary.json", summary)
    _maybe_render(config, out)
    return {"trials": out / "trials.csv", "bounds": out / "bounds.csv",
            "summary": out / "summary.json"}


# ---------------------------------------------------------------------------
# instability


def _instability_profiles(km, cross, self_k, ks, guarded: bool):
    """Unclamped squared point-to-subspace distances per truncation level from
    a (possibly reduced-precision) Gram matrix.

    Guarded drops eigenvalues below an eps(dtype)*sqrt(n)-scaled cutoff (the
    working precision's resolvable range); raw inverts every nonzero computed
    eigenvalue, garbage included. Negative squared distances are the
    signature of inverted round-off eigenvalues and are preserved.
    """
    dtype = km.dtype
    vals, vecs = np.linalg.eigh(km)
    vals, vecs = vals[::-1].copy(), vecs[:, ::-1].copy()
    if guarded:
        cutoff = (np.finfo(dtype).eps * math.sqrt(km.shape[0])
                  * max(float(vals[0]), 0.0))
        usable = vals > cutoff
    else:
        usable = vals != 0
    proj = cross @ vecs  # (N, n), dtype preserved
    inv = np.zeros_like(vals)
    inv[usable] = 1.0 / vals[usable]
    energy = proj * proj * inv[None, :]
    out = []
    for k in ks:
        sq = self_k - np.sum(energy[:, :k], axis=1, dtype=dtype)
        out.append(sq.astype(float))
    return out


def run_instability(config: ExperimentConfig) -> dict[str, Path]:
    """Numerical-stability experiment: compare guarded and raw pseudo-inverse
    point distances in 32- and 64-bit precision across truncation levels."""
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    kern = config.kernel()
    if config.points_csv:
        pts = load_points_csv(config.points_csv)
        for k in config.resolved_k_grid():
            if k > pts.shape[0]:
                raise ConfigError(
                    f"k_grid entry {k} exceeds {pts.shape[0]} loaded points")
    else:
        rng = trial_rng(config.seed, 0)
        pts = rng.uniform(config.domain_low, config.domain_high,
                          size=(config.n, 1))
    if config.grid_csv:
        grid = load_points_csv(config.grid_csv)
    else:
        grid = np.linspace(config.domain_low, config.domain_high,
                           513)[:, None]
    km64 = gram(kern, pts)
    cross64 = kern.pairwise(grid, pts)
    if kern.family in ("abel_l1", "gaussian"):
        self64 = np.ones(grid.shape[0])
    else:
        self64 = np.array([eval_kernel(kern, p, p) for p in grid])
    ks = list(config.resolved_k_grid())
    paths = {
        ("float64", True): _instability_profiles(km64, cross64, self64, ks,
                                                 True),
        ("float64", False): _instability_profiles(km64, cross64, self64, ks,
                                                  False),
        ("float32", True): _instability_profiles(
            km64.astype(np.float32), cross64.astype(np.float32),
            self64.astype(np.float32), ks, True),
        ("float32", False): _instability_profiles(
            km64.astype(np.float32), cross64.astype(np.float32),
            self64.astype(np.float32), ks, False),
    }
    base = paths[("float64", True)]
    rows = []
    stats: dict = {}
    for (dtype, guarded), profiles in paths.items():
        for j, k in enumerate(ks):
            sq_err = np.abs(profiles[j] - base[j])
            dist = np.sqrt(np.maximum(profiles[j], 0.0))
            dist_err = np.abs(dist - np.sqrt(np.maximum(base[j], 0.0)))
            rows.append((k, dtype, int(guarded), float(sq_err.max()),
                         float(dist_err.max()),
                         float(np.sqrt(np.mean(dist_err**2))),
                         float(profiles[j].min())))
            stats[f"{dtype}:{'guarded' if guarded else 'raw'}:k={k}"] = float(
                sq_err.max())
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    _write_csv(out / "instability.csv",
               ("k", "dtype", "guarded", "max_sq_error", "max_abs_error",
                "rms_error", "min_sq"), rows)
    summary = _summary_base(config)
    summary.update({"k_grid": ks, "max_sq_error": stats})
    _write_json(out / "summary.json", summary)
    _maybe_render(config, out)
    return {"instability": out / "instability.csv",
            "summary": out / "summary.json"}


# ---------------------------------------------------------------------------
# rates


def run_rates(config: ExperimentConfig) -> dict[str, Path]:
    """Tabulate rate exponents over decay orders r in [1.05, 10] (step 0.05),
    with the fourth-moment parameter at its most favorable value s = 2r."""
    from .bounds import rate_exponents

    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(21, 201):
        r = i * 0.05
        s = 2.0 * r
        e = rate_exponents(r, s)
        rows.append((r, s, e.ours, e.shawe_taylor, e.blanchard))
    _write_csv(out / "rates.csv",
               ("r", "s", "ours", "shawe_taylor", "blanchard"), rows)
    summary = _summary_base(config)
    summary.update({"rows": len(rows)})
    _write_json(out / "summary.json", summary)
    _maybe_render(config, out)
    return {"rates": out / "rates.csv", "summary": out / "summary.json"}


# ---------------------------------------------------------------------------
# support


def run_support(config: ExperimentConfig) -> dict[str, Path]:
    """Support-estimation experiment: Hausdorff distance between the true
    support interval and the estimated support set over a tau sweep, for
    growing sample counts."""
    from .subspace import residual_profile

    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    kern = config.kernel()
    if config.grid_csv:
        grid = load_points_csv(config.grid_csv).ravel()
    else:
        steps = int(round((config.domain_high - config.domain_low)
                          / config.grid_step))
        grid = np.linspace(config.domain_low, config.domain_high, steps + 1)
    inside = (grid >= config.support_low) & (grid <= config.support_high)
    m_true = grid[inside][:, None]
    taus = config.resolved_tau_grid()
    rows = []
    best: dict[int, list[float]] = {n: [] for n in config.n_grid}
    for n in config.n_grid:
        ks = [k for k in (config.k_grid or ()) if k <= n] or [n]

        def one_trial(i: int, n=n, ks=ks):
            rng = trial_rng(config.seed, i)
            pts = rng.uniform(config.support_low, config.support_high,
                              size=(n, 1))
            model = fit_kpca(pts, kern, n)
            dists = residual_profile(model, grid[:, None], ks)
            trial_rows = []
            for j, k in enumerate(ks):
                for tau in taus:
                    members = grid[dists[:, j] <= tau]
                    if members.size:
                        h = hausdorff_on_grid(m_true, members[:, None])
                    else:
                        h = math.inf
                    trial_rows.append((i, n, k, tau, h))
            return trial_rows

        for trial_rows in _map_trials(one_trial, config.trials,
                                      config.workers):
            rows.extend(trial_rows)
            finite = [h for (_, _, _, _, h) in trial_rows
                      if math.isfinite(h)]
            best[n].append(min(finite) if finite else math.inf)
    _write_csv(out / "support.csv", ("trial", "n", "k", "tau", "hausdorff"),
               rows)
    summary = _summary_base(config)
    summary.update({
        "tau_grid": list(taus),
        "best_tau_hausdorff_median": {
            str(n): float(np.median(v)) for n, v in best.items()},
    })
    _write_json(out / "summary.json", summary)
    _maybe_render(config, out)
    return {"support": out / "support.csv", "summary": out / "summary.json"}


# ---------------------------------------------------------------------------
# concentration


def run_concentration(config: ExperimentConfig) -> dict[str, Path]:
    """Concentration check: distribution of the whitened covariance deviation
    norm at the sample-driven regularization level, against the 1/2
    threshold."""
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    kern = config.kernel()
    ref = build_reference(kern, config.measure(), config.m_quadrature)
    t = log_floor(config.n, config.delta)

    def one_trial(i: int) -> float:
        rng = trial_rng(config.seed, i)
        pts = rng.uniform(config.domain_low, config.domain_high,
                          size=(config.n, 1))
        return whitened_deviation_norm(ref, pts, t)

    norms = _map_trials(one_trial, config.trials, config.workers)
    _write_csv(out / "concentration.csv", ("trial", "deviation_norm"),
               list(enumerate(norms)))
    summary = _summary_base(config)
    summary.update({
        "t": t,
        "threshold": 0.5,
        "exceedance_fraction": float(np.mean([v > 0.5 for v in norms])),
        "deviation_norm_quantiles": {
            f"q{q:02d}": float(np.percentile(norms, q))
            for q in (5, 25, 50, 75, 95)},
        "reference": {"m": ref.m, "rank": ref.rank, "trace": ref.trace},
    })
    _write_json(out / "summary.json", summary)
    _maybe_render(config, out)
    return {"concentration": out / "concentration.csv",
            "summary": out / "summary.json"}


RUNNERS = {
    "spectrum": run_spectrum,
    "plateau": run_plateau,
    "instability": run_instability,
    "rates": run_rates,
    "support": run_support,
    "concentration": run_concentration,
}


def run_experiment(config: ExperimentConfig) -> dict[str, Path]:
    config.validate()
    return RUNNERS[config.experiment](config)
