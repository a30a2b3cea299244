"""Render figures next to the delimited reports each experiment writes.

Every renderer reads the experiment's CSV/JSON output from a directory and
saves a PNG alongside it; rendering never changes the delimited outputs.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def _read_csv(path: Path) -> dict[str, list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols: dict[str, list[str]] = defaultdict(list)
        for row in reader:
            for key, val in row.items():
                cols[key].append(val)
    return cols


def _floats(cols, key) -> np.ndarray:
    return np.array([float(v) for v in cols[key]])


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def plot_spectrum(out_dir: Path) -> Path:
    cols = _read_csv(out_dir / "spectrum.csv")
    k = _floats(cols, "k")
    lam = _floats(cols, "lambda_k")
    summary = json.loads((out_dir / "summary.json").read_text())
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.loglog(k, lam, ".", ms=3, label="reference eigenvalues")
    decay = summary.get("decay_model")
    if decay:
        ax.loglog(k, decay["Q"] * k ** (-decay["r"]), "--", lw=1,
                  label=f"Q k^(-r), r={decay['r']:.2f}")
    ax.set_xlabel("k")
    ax.set_ylabel("eigenvalue")
    ax.legend(frameon=False)
    return _save(fig, out_dir / "spectrum.png")


def plot_plateau(out_dir: Path) -> Path:
    summary = json.loads((out_dir / "summary.json").read_text())
    q = summary["true_recon_quantiles"]
    k = np.array(q["k"], dtype=float)
    cols = _read_csv(out_dir / "trials.csv")
    ks = _floats(cols, "k")
    wdist = _floats(cols, "weighted_distance")
    sbound = _floats(cols, "spectrum_bound")
    dbound = _floats(cols, "decay_bound")
    med_w = [np.median(wdist[ks == kk]) for kk in k]
    sb = [sbound[ks == kk][0] for kk in k]
    db = [dbound[ks == kk][0] for kk in k]

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    ax = axes[0]
    ax.fill_between(k, q["q05"], q["q95"], alpha=0.25, label="5-95%")
    ax.fill_between(k, q["q25"], q["q75"], alpha=0.4, label="25-75%")
    ax.loglog(k, q["q50"], "-o", ms=3, label="median")
    ax.axvline(summary["plateau_threshold"], color="k", ls=":", lw=1,
               label="plateau threshold")
    ax.set_xlabel("truncation level k")
    ax.set_ylabel("reconstruction error")
    ax.legend(frameon=False, fontsize=8)

    ax = axes[1]
    ax.loglog(k, med_w, "-o", ms=3, label="weighted distance (median)")
    ax.loglog(k, sb, "--", lw=1, label="spectrum bound")
    ax.loglog(k, db, ":", lw=1, label="decay bound")
    ax.set_xlabel("truncation level k")
    ax.set_ylabel("distance")
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, out_dir / "plateau.png")


def plot_instability(out_dir: Path) -> Path:
    cols = _read_csv(out_dir / "instability.csv")
    k = _floats(cols, "k")
    err = _floats(cols, "max_sq_error")
    dtype = np.array(cols["dtype"])
    guarded = _floats(cols, "guarded")
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for dt in ("float32", "float64"):
        for g, style in ((1, "-"), (0, "--")):
            sel = (dtype == dt) & (guarded == g)
            if not sel.any():
                continue
            label = f"{dt} {'guarded' if g else 'raw'}"
            ax.plot(k[sel], np.maximum(err[sel], 1e-18), style, marker=".",
                    label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("truncation level k")
    ax.set_ylabel("max |squared-distance error| vs guarded float64")
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, out_dir / "instability.png")


def plot_rates(out_dir: Path) -> Path:
    cols = _read_csv(out_dir / "rates.csv")
    r = _floats(cols, "r")
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(r, _floats(cols, "ours"), label="ours")
    ax.plot(r, _floats(cols, "shawe_taylor"), "--", label="shawe-taylor")
    ax.plot(r, _floats(cols, "blanchard"), ":", label="blanchard (s=2r)")
    ax.set_xlabel("eigenvalue decay order r")
    ax.set_ylabel("rate exponent c")
    ax.legend(frameon=False)
    return _save(fig, out_dir / "rates.png")


def plot_support(out_dir: Path) -> Path:
    cols = _read_csv(out_dir / "support.csv")
    n = _floats(cols, "n").astype(int)
    tau = _floats(cols, "tau")
    h = _floats(cols, "hausdorff")
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for nv in sorted(set(n)):
        taus = sorted(set(tau[n == nv]))
        med = [np.median(h[(n == nv) & (tau == t) & np.isfinite(h)])
               if np.isfinite(h[(n == nv) & (tau == t)]).any() else np.nan
               for t in taus]
        ax.loglog(taus, med, "-o", ms=3, label=f"n={nv}")
    ax.set_xlabel("membership threshold tau")
    ax.set_ylabel("Hausdorff distance (median)")
    ax.legend(frameon=False)
    return _save(fig, out_dir / "support.png")


def plot_concentration(out_dir: Path) -> Path:
    cols = _read_csv(out_dir / "concentration.csv")
    norms = _floats(cols, "deviation_norm")
    summary = json.loads((out_dir / "summary.json").read_text())
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.hist(norms, bins=30)
    ax.axvline(0.5, color="k", ls=":", lw=1, label="threshold 1/2")
    frac = summary["exceedance_fraction"]
    ax.set_xlabel("whitened deviation norm")
    ax.set_ylabel("trials")
    ax.set_title(f"exceedance fraction = {frac:.3f}")
    ax.legend(frameon=False)
    return _save(fig, out_dir / "concentration.png")


_RENDERERS = {
    "spectrum": plot_spectrum,
    "plateau": plot_plateau,
    "instability": plot_instability,
    "rates": plot_rates,
    "support": plot_support,
    "concentration": plot_concentration,
}


def render_experiment(experiment: str, out_dir) -> list[Path]:
    """Render the figure(s) for an experiment from its written reports."""
    return [_RENDERERS[experiment](Path(out_dir))]
