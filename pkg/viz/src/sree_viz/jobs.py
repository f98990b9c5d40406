"""Plot job description and TOML ingestion."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

PLOT_KINDS = ("heatmap", "paths", "residuals", "certification")


@dataclass(frozen=True)
class PlotJob:
    input_dir: Path
    output_dir: Path
    plots: tuple = PLOT_KINDS
    colormap: str = "viridis"
    dpi: int = 120

    def __post_init__(self):
        bad = [p for p in self.plots if p not in PLOT_KINDS]
        if bad:
            raise ValueError(f"unknown plot selection {bad}; choose from {PLOT_KINDS}")
        object.__setattr__(self, "input_dir", Path(self.input_dir))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        object.__setattr__(self, "plots", tuple(self.plots))


def load_job(path: str) -> PlotJob:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    known = {"input_dir", "output_dir", "plots", "colormap", "dpi"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"job file has unknown keys {sorted(unknown)}")
    if "input_dir" not in raw:
        raise ValueError("job file must set input_dir")
    return PlotJob(
        input_dir=raw["input_dir"],
        output_dir=raw.get("output_dir", "plots"),
        plots=tuple(raw.get("plots", PLOT_KINDS)),
        colormap=raw.get("colormap", "viridis"),
        dpi=int(raw.get("dpi", 120)),
    )
