"""Plot builders.  Each plot re-asserts the invariant it visualizes, so
the emitted images double as acceptance evidence."""

from __future__ import annotations

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    CERTIFICATION_FILE,
    FIELD_FILES,
    PATH_FILE,
    RESIDUALS_FILE,
    InputError,
    read_certification,
    read_long_field,
    read_manifest,
    read_path,
    read_residuals,
)
from .jobs import PlotJob

UNIFORMITY_TOL = 1e-6


class InvariantViolation(RuntimeError):
    """The data contradicts the invariant its plot is meant to show."""


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def plot_heatmaps(job: PlotJob, manifest: dict) -> list[Path]:
    """One space-time heatmap per available field, t horizontal, z vertical.

    When the manifest marks the run as spatially uniform, every plotted
    field must be constant across locations at each time slice.
    """
    made = []
    expect_uniform = bool(manifest.get("expect_spatially_uniform", False))
    for name, fname in FIELD_FILES.items():
        src = job.input_dir / fname
        if not src.exists():
            _warn(f"skipping heatmap '{name}': {src} not present")
            continue
        t, z, matrix = read_long_field(src)
        if expect_uniform:
            variation = float(np.max(matrix.max(axis=1) - matrix.min(axis=1)))
            if variation > UNIFORMITY_TOL:
                raise InvariantViolation(
                    f"{fname}: manifest promises a spatially uniform run but "
                    f"per-time variation is {variation:.3e} > {UNIFORMITY_TOL}"
                )
        fig, ax = plt.subplots(figsize=(8, 4))
        im = ax.imshow(
            matrix.T,
            origin="lower",
            aspect="auto",
            extent=(t[0], t[-1], z[0], z[-1]),
            cmap=job.colormap,
        )
        ax.set_xlabel("t")
        ax.set_ylabel("z")
        ax.set_title(f"{name}(t, z)")
        fig.colorbar(im, ax=ax, label=name)
        out = job.output_dir / f"heatmap_{name}.png"
        fig.savefig(out, dpi=job.dpi)
        plt.close(fig)
        made.append(out)
    return made


def plot_paths(job: PlotJob) -> list[Path]:
    """Per-location trajectories k, c, theta; positivity is re-checked."""
    src = job.input_dir / PATH_FILE
    if not src.exists():
        _warn(f"skipping paths: {src} not present")
        return []
    cols = read_path(src)
    if np.min(cols["k"]) <= 0 or np.min(cols["c"]) <= 0:
        raise InvariantViolation(f"{PATH_FILE}: capital or consumption not positive")
    fig, axes = plt.subplots(3, 1, figsize=(8, 8), sharex=True)
    for ax, name in zip(axes, ("k", "c", "theta")):
        ax.plot(cols["t"], cols[name])
        ax.set_ylabel(name)
        ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel("t")
    fig.suptitle("location trajectories")
    out = job.output_dir / "paths.png"
    fig.savefig(out, dpi=job.dpi)
    plt.close(fig)
    return [out]


def plot_residuals(job: PlotJob, manifest: dict) -> list[Path]:
    """Sweep residual curve on a log scale; a converged manifest must end
    at or below its stated tolerance."""
    src = job.input_dir / RESIDUALS_FILE
    if not src.exists():
        _warn(f"skipping residuals: {src} not present")
        return []
    sweeps, resid = read_residuals(src)
    if np.any(resid < 0):
        raise InvariantViolation(f"{RESIDUALS_FILE}: negative residuals")
    if manifest.get("converged") and "y_tol" in manifest:
        if resid[-1] > float(manifest["y_tol"]):
            raise InvariantViolation(
                f"{RESIDUALS_FILE}: converged run but final residual "
                f"{resid[-1]:.3e} exceeds tolerance {manifest['y_tol']:.1e}"
            )
    fig, ax = plt.subplots(figsize=(7, 4))
    positive = resid > 0
    ax.semilogy(sweeps[positive], resid[positive], marker="o")
    if not positive.all():
        ax.set_title("fixed-point residual (zero entries omitted from log axis)")
    else:
        ax.set_title("fixed-point residual per sweep")
    ax.set_xlabel("sweep")
    ax.set_ylabel("Y-norm residual")
    ax.grid(True, which="both", alpha=0.3)
    out = job.output_dir / "residuals.png"
    fig.savefig(out, dpi=job.dpi)
    plt.close(fig)
    return [out]


def plot_certification(job: PlotJob, manifest: dict) -> list[Path]:
    """The three equilibrium certification residuals; must agree with the
    manifest record."""
    src = job.input_dir / CERTIFICATION_FILE
    if not src.exists():
        _warn(f"skipping certification: {src} not present")
        return []
    cert = read_certification(src)
    recorded = manifest.get("certification", {})
    for name, value in cert.items():
        if value < 0:
            raise InvariantViolation(f"{CERTIFICATION_FILE}: negative residual {name}")
        if name in recorded and abs(value - float(recorded[name])) > 1e-12:
            raise InvariantViolation(
                f"{CERTIFICATION_FILE}: '{name}' disagrees with the manifest"
            )
    names = list(cert)
    values = [max(cert[n], 1e-18) for n in names]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(names, values)
    ax.set_yscale("log")
    ax.set_ylabel("residual")
    ax.set_title("equilibrium certification residuals")
    for i, v in enumerate(values):
        ax.text(i, v, f"{v:.2e}", ha="center", va="bottom", fontsize=8)
    out = job.output_dir / "certification.png"
    fig.savefig(out, dpi=job.dpi)
    plt.close(fig)
    return [out]


def run_job(job: PlotJob) -> list[Path]:
    """Execute the job's plot selection; inputs are never modified."""
    manifest = read_manifest(job.input_dir)
    job.output_dir.mkdir(parents=True, exist_ok=True)
    made: list[Path] = []
    if "heatmap" in job.plots:
        made += plot_heatmaps(job, manifest)
    if "paths" in job.plots:
        made += plot_paths(job)
    if "residuals" in job.plots:
        made += plot_residuals(job, manifest)
    if "certification" in job.plots:
        made += plot_certification(job, manifest)
    if not made:
        expected = sorted(
            {*FIELD_FILES.values(), PATH_FILE, RESIDUALS_FILE, CERTIFICATION_FILE}
        )
        raise InputError(
            f"no plottable inputs in {job.input_dir}; expected any of: "
            + ", ".join(expected)
        )
    return made
