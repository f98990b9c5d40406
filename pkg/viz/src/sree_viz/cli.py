"""Entry point: ``sree-plot job.toml`` or flag-driven invocation.

Exit codes: 0 success, 1 missing/corrupt inputs, 2 invariant violation.
"""

from __future__ import annotations

import argparse
import sys

from .io import InputError
from .jobs import PLOT_KINDS, PlotJob, load_job
from .plots import InvariantViolation, run_job


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sree-plot",
        description="render and re-assert plots from solver CSV outputs",
    )
    parser.add_argument("job", nargs="?", default=None,
                        help="TOML job file (alternative to flags)")
    parser.add_argument("--input-dir", default=None)
    parser.add_argument("--output-dir", default="plots")
    parser.add_argument("--plots", nargs="+", choices=PLOT_KINDS, default=None)
    parser.add_argument("--colormap", default="viridis")
    parser.add_argument("--dpi", type=int, default=120)
    args = parser.parse_args(argv)

    try:
        if args.job is not None:
            job = load_job(args.job)
        elif args.input_dir is not None:
            job = PlotJob(
                input_dir=args.input_dir,
                output_dir=args.output_dir,
                plots=tuple(args.plots) if args.plots else PLOT_KINDS,
                colormap=args.colormap,
                dpi=args.dpi,
            )
        else:
            parser.error("provide a job file or --input-dir")
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        made = run_job(job)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    for path in made:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
