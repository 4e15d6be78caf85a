"""Command-line benchmark harness.

    irsopt convergence --methods aogd,ag,bb --realizations 20 --out conv.csv
    irsopt sweep-secrecy --m-list 20,40,60,80 --realizations 100 --out fig2.csv
    irsopt sweep-wsr --m-list 10,20,40 --out fig3.csv
    irsopt timing --m-list 20,60,100 --out times.csv
    irsopt oracle --grid 720 --out oracle.csv

Exit codes: 0 on success (including partial numeric failures, which appear
as NaN rows), 1 on input errors, 2 when every realization failed numerically.
"""

from __future__ import annotations

import argparse
import dataclasses
import pathlib
import sys

from . import __version__, bench, sim


def _add_common(sub, realizations):
    sub.add_argument("--config", help="scenario file (key = value lines); "
                     "overrides the subcommand's built-in scenario")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--realizations", type=int, default=realizations)
    sub.add_argument("--methods", default=None,
                     help="comma list out of " + ",".join(bench.METHODS))
    sub.add_argument("--m-list", default=None,
                     help="comma list of reflecting-element counts")
    sub.add_argument("--out", default=None, help="output CSV path")
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--svg", action="store_true",
                     help="render the matching figure next to the CSV")
    sub.add_argument("--cold-start", action="store_true",
                     help="restart the rate-maximization inner loop from "
                     "scratch every outer iteration")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="irsopt",
        description="benchmark harness for phase-shift optimization",
    )
    parser.add_argument("--version", action="version",
                        version=f"irsopt {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("convergence", help="objective trace per iteration")
    _add_common(sub, realizations=20)
    sub.add_argument("--app", choices=("secrecy", "wsr"), default="secrecy")

    sub = subs.add_parser("sweep-secrecy", help="secrecy rate against M")
    _add_common(sub, realizations=100)

    sub = subs.add_parser("sweep-wsr", help="weighted sum rate against M")
    _add_common(sub, realizations=100)

    sub = subs.add_parser("timing", help="median wall time against M")
    _add_common(sub, realizations=9)
    sub.add_argument("--app", choices=("secrecy", "wsr"), default="secrecy")

    sub = subs.add_parser("oracle", help="exhaustive grid comparison, M <= 3")
    _add_common(sub, realizations=5)
    sub.add_argument("--app", choices=("secrecy", "wsr"), default="secrecy")
    sub.add_argument("--grid", type=int, default=360,
                     help="grid points per phase axis")

    return parser


_DEFAULTS = {
    ("convergence", "secrecy"): sim.fig_secrecy_wide,
    ("convergence", "wsr"): sim.wsr_default,
    ("sweep-secrecy", None): sim.fig_secrecy_near_eve,
    ("sweep-wsr", None): sim.wsr_default,
    ("timing", "secrecy"): sim.fig_secrecy_wide,
    ("timing", "wsr"): sim.wsr_default,
    ("oracle", "secrecy"): sim.fig_secrecy_wide,
    ("oracle", "wsr"): sim.wsr_default,
}

_DEFAULT_METHODS = {
    "convergence": ("aogd", "ag", "bb"),
    "sweep-secrecy": ("aogd", "bcd"),
    "sweep-wsr": ("aogd", "bcd"),
    "timing": ("aogd", "manifold"),
    "oracle": ("aogd",),
}

_DEFAULT_M = {
    "sweep-secrecy": (20, 40, 60, 80),
    "sweep-wsr": (10, 20, 40),
    "timing": (20, 60, 100),
}


def _resolve_config(args):
    if args.config:
        text = pathlib.Path(args.config).read_text(encoding="utf-8")
        cfg = sim.ScenarioConfig.from_text(text)
    else:
        cfg = _DEFAULTS[(args.command, getattr(args, "app", None))]()
        if args.command == "oracle":
            cfg = dataclasses.replace(cfg, m=2)
    expect = {"sweep-secrecy": "secrecy", "sweep-wsr": "wsr"}.get(args.command)
    if expect is None:
        expect = getattr(args, "app", cfg.kind)
    if cfg.kind != expect:
        raise ValueError(f"{args.command} needs a {expect!r} scenario, "
                         f"config has kind {cfg.kind!r}")
    return cfg


def _parse_list(text, cast):
    return tuple(cast(tok.strip()) for tok in text.split(",") if tok.strip())


def _build_spec(args):
    cfg = _resolve_config(args)
    experiment = {"sweep-secrecy": "sweep", "sweep-wsr": "sweep"}.get(
        args.command, args.command)
    methods = _parse_list(args.methods, str) if args.methods \
        else _DEFAULT_METHODS[args.command]
    m_list = _parse_list(args.m_list, int) if args.m_list \
        else _DEFAULT_M.get(args.command, (cfg.m,))
    out = args.out or f"irsopt-{args.command}.csv"
    return bench.ExperimentSpec(
        experiment=experiment, config=cfg, methods=methods, m_list=m_list,
        realizations=args.realizations, out=out, seed=args.seed,
        threads=args.threads, svg=args.svg,
        grid_points=getattr(args, "grid", 360),
        cold_start=args.cold_start,
    )


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for numeric failure
        return 0 if exc.code in (0, None) else 1

    try:
        spec = _build_spec(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        rows, failures, tasks = bench.run_experiment(spec)
        bench.write_csv(spec.out, rows, spec.config, spec.seed)
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if spec.svg:
        from . import plots

        fig_path = plots.render(spec.experiment, rows, spec.out)
        print(f"figure: {fig_path}")

    print(f"wrote {spec.out} ({len(rows)} rows)")
    if failures:
        print(f"{failures} of {tasks} realizations failed numerically",
              file=sys.stderr)
        if failures == tasks:
            return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
