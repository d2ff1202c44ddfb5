"""Command-line interface: fit, compare, simulate, surface, shape.

Reports are JSON on stdout (or to a file with --json); diagnostics go to
stderr and map to a nonzero exit code.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as cio
from .baselines import fit_poisson_mixture
from .em import em_fit, fit_single_cmp
from .shape import compare, detect_shape, loglik_surface, format_surface
from .sim import PRESETS
from .types import CmpParams, EmConfig, GridSpec, MixtureParams, Support


def _add_dataset_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("dataset", help="CSV frequency table or raw observation list")
    parser.add_argument("--lower", type=int, default=None, help="declared support lower bound")
    parser.add_argument("--upper", type=int, default=None, help="declared support upper bound")
    parser.add_argument("--flip", action="store_true", help="reverse the value ordering")


def _add_output_args(parser: argparse.ArgumentParser, charts: bool = True) -> None:
    parser.add_argument("--json", metavar="FILE", default=None, help="write the JSON report here")
    if charts:
        parser.add_argument(
            "--chart", metavar="FILE", default=None,
            help="render the observed/fitted overlay to this file (svg, png, pdf)",
        )
        parser.add_argument(
            "--chart-text", action="store_true", help="print a unicode bar chart to stdout"
        )


def _load_dataset(args) -> "cio.FrequencyTable":
    data = cio.read_dataset(args.dataset, lower=args.lower, upper=args.upper)
    if args.flip:
        data = cio.flip_order(data)
    return data


def _load_settings(args) -> tuple[GridSpec, EmConfig]:
    if getattr(args, "grid", None):
        return cio.read_config(args.grid)
    return GridSpec(), EmConfig()


def _emit(args, payload: dict) -> None:
    text = cio.to_json(payload)
    if args.json:
        Path(args.json).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_grid_arg(text: str) -> np.ndarray:
    """'a:b:k' linspace form or a comma-separated value list."""
    if ":" in text:
        lo, hi, num = text.split(":")
        return np.linspace(float(lo), float(hi), int(num))
    return np.array([float(v) for v in text.split(",")])


def _cmd_fit(args) -> int:
    data = _load_dataset(args)
    grid, config = _load_settings(args)
    if args.model == "cmp":
        fit = em_fit(data, grid, config)
    elif args.model == "poisson":
        fit = fit_poisson_mixture(data, grid, config)
    else:
        fit = fit_single_cmp(data, grid)
    _emit(args, cio.fit_report(fit))
    if args.chart:
        from .plots import render_chart

        render_chart(data, [fit], args.chart)
    if args.chart_text:
        from .plots import text_chart

        sys.stdout.write(text_chart(data, [fit]))
    return 0


def _cmd_compare(args) -> int:
    data = _load_dataset(args)
    grid, config = _load_settings(args)
    cmp_fit = em_fit(data, grid, config)
    pois_fit = cmp_fit.benchmark
    if pois_fit is None:
        pois_fit = fit_poisson_mixture(data, grid, config)
    report = compare(data, [pois_fit, cmp_fit])
    _emit(args, cio.comparison_report(report))
    if args.table:
        Path(args.table).write_text(_comparison_table(report))
    if args.chart:
        from .plots import render_chart

        render_chart(data, [pois_fit, cmp_fit], args.chart)
    if args.chart_text:
        from .plots import text_chart

        sys.stdout.write(text_chart(data, [pois_fit, cmp_fit]))
    return 0


def _comparison_table(report) -> str:
    """Delimited observed-vs-expected table, one column per model."""
    data = report.data
    names = [mc.fit.model_kind for mc in report.models]
    lines = [",".join(["value", "observed"] + names)]
    for i, value in enumerate(data.support.values()):
        key = data.labels[i] if data.labels is not None else str(int(value))
        cells = [key, str(int(data.counts[i]))]
        cells += [f"{mc.fit.expected_counts[i]:.4f}" for mc in report.models]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _cmd_simulate(args) -> int:
    if args.preset:
        if args.preset not in PRESETS:
            raise ValueError(f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}")
        preset = PRESETS[args.preset]
        mix, support = preset.generator, preset.support
        n = args.n or preset.n
    else:
        if not (args.params and args.support):
            raise ValueError("simulate needs --preset or both --params and --support")
        p, l1, n1, l2, n2 = (float(v) for v in args.params.split(","))
        mix = MixtureParams(p, CmpParams(l1, n1), CmpParams(l2, n2))
        lo, _, hi = args.support.partition(":")
        support = Support(int(lo), int(hi))
        n = args.n or 100
    from .mixture import sample_mixture

    data = sample_mixture(mix, support, n, args.seed)
    text = cio.write_dataset(data)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_surface(args) -> int:
    data = _load_dataset(args)
    nu1 = _parse_grid_arg(args.nu1_grid)
    nu2 = _parse_grid_arg(args.nu2_grid)
    matrix = loglik_surface(data, args.p, args.lambda1, args.lambda2, nu1, nu2)
    if args.json:
        payload = cio.surface_report(args.p, args.lambda1, args.lambda2, nu1, nu2, matrix)
        Path(args.json).write_text(cio.to_json(payload))
    else:
        sys.stdout.write(format_surface(nu1, nu2, matrix))
    return 0


def _cmd_shape(args) -> int:
    data = _load_dataset(args)
    summary = detect_shape(data.counts, lower=data.support.lower)
    _emit(args, cio._shape_dict(summary))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmpmix",
        description="Fit two-component truncated CMP mixtures to bimodal discrete data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one model and report it")
    _add_dataset_args(p_fit)
    p_fit.add_argument("--model", choices=["cmp", "poisson", "single"], default="cmp")
    p_fit.add_argument("--grid", metavar="FILE", default=None, help="config file with grid/EM settings")
    _add_output_args(p_fit)
    p_fit.set_defaults(func=_cmd_fit)

    p_cmp = sub.add_parser("compare", help="fit both mixtures and compare them")
    _add_dataset_args(p_cmp)
    p_cmp.add_argument("--grid", metavar="FILE", default=None)
    p_cmp.add_argument("--table", metavar="FILE", default=None, help="write a delimited observed-vs-expected table")
    _add_output_args(p_cmp)
    p_cmp.set_defaults(func=_cmd_compare)

    p_sim = sub.add_parser("simulate", help="sample a dataset from a mixture")
    p_sim.add_argument("--preset", default=None, help=f"one of {sorted(PRESETS)}")
    p_sim.add_argument("--params", default=None, help="p,lambda1,nu1,lambda2,nu2")
    p_sim.add_argument("--support", default=None, help="lower:upper")
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", metavar="FILE", default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_surf = sub.add_parser("surface", help="export a log-likelihood surface over (nu1, nu2)")
    _add_dataset_args(p_surf)
    p_surf.add_argument("--p", type=float, required=True)
    p_surf.add_argument("--lambda1", type=float, required=True)
    p_surf.add_argument("--lambda2", type=float, required=True)
    p_surf.add_argument("--nu1-grid", required=True, help="'lo:hi:count' or comma list")
    p_surf.add_argument("--nu2-grid", required=True, help="'lo:hi:count' or comma list")
    p_surf.add_argument("--json", metavar="FILE", default=None)
    p_surf.set_defaults(func=_cmd_surface)

    p_shape = sub.add_parser("shape", help="report the modes and lodes of a dataset")
    _add_dataset_args(p_shape)
    p_shape.add_argument("--json", metavar="FILE", default=None)
    p_shape.set_defaults(func=_cmd_shape)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
