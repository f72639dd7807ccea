"""
Command-line front end.

::

    silm run    --config scenario.txt [options]
    silm sweep  --config scenario.txt --axis rho_db --values -30,-20,-10 [options]
    silm figure fig2 --trials 200 --seed 7 --out fig2.csv [--plot fig2.png]

Exit status: 0 on success, 1 on invalid input, 2 on I/O failure.
"""

import argparse
import json
import sys
from dataclasses import replace

from .config import load_config
from .errors import ValidationError
from .experiments import (AXES, FIGURES, Series, SweepSpec, figure_preset,
                          run_sweep, write_csv)
from .network import NetworkConfig, db_to_linear
from .solver import SolverParams

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

NETWORK_KEYS = ("L_d", "L_u", "K", "N_b", "N_m", "s", "P", "rho_db", "w")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list: {text!r}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value scenario file")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per point (default 200)")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--out", help="CSV output path (default: standard output)")
    common.add_argument("--plot", help="also render the curves to this image file")
    common.add_argument("--mode", choices=("silm", "ilm"),
                        help="ilm forces w = 0 everywhere")
    common.add_argument("--precoder", choices=("mmse", "zf"))
    common.add_argument("--w", type=float, help="leakage weight (disables any weight schedule)")
    common.add_argument("--max-iters", type=int)
    common.add_argument("--tol", type=float, help="relative objective change for convergence")
    common.add_argument("--threads", type=int, help="worker processes (default 1)")

    parser = _Parser(prog="silm", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("run", parents=[common], help="evaluate a single scenario")
    sweep = sub.add_parser("sweep", parents=[common], help="sweep one axis of a scenario")
    sweep.add_argument("--axis", choices=AXES)
    sweep.add_argument("--values", type=_float_list)
    fig = sub.add_parser("figure", parents=[common], help="run a figure preset")
    fig.add_argument("name", choices=sorted(FIGURES))
    return parser


def _network_from(settings, base=None):
    fields = {k: settings[k] for k in NETWORK_KEYS if k in settings}
    if "snr_db" in settings:
        fields["P"] = db_to_linear(settings["snr_db"])
    return replace(base, **fields) if base is not None else NetworkConfig(**fields)


def _params_from(settings, base=None):
    base = base or SolverParams()
    return SolverParams(
        max_iters=settings.get("max_iters", base.max_iters),
        rel_tol=settings.get("tol", base.rel_tol),
        precoder=settings.get("precoder", base.precoder))


def _schedule(values, weights):
    if weights is None:
        return None
    if len(weights) != len(values):
        raise ValidationError("w_schedule must have one weight per axis value")
    return {float(v): float(w) for v, w in zip(values, weights)}


def build_spec(args):
    """Merge preset, config file and flags into a sweep spec (later wins)."""
    settings = load_config(args.config) if args.config else {}
    flag_map = {"trials": args.trials, "seed": args.seed, "mode": args.mode,
                "precoder": args.precoder, "w": args.w,
                "max_iters": args.max_iters, "tol": args.tol,
                "threads": args.threads}
    if args.command == "sweep":
        flag_map.update(axis=args.axis, values=args.values)
    settings.update({k: v for k, v in flag_map.items() if v is not None})

    if args.command == "figure":
        preset = figure_preset(args.name)
        spec = replace(
            preset,
            base=_network_from(settings, preset.base),
            params=_params_from(settings, preset.params),
            trials=settings.get("trials", preset.trials),
            master_seed=settings.get("seed", preset.master_seed))
    else:
        cfg = _network_from(settings)
        if args.command == "run":
            axis, values = "snr_db", (round(cfg.snr_db, 12),)
        else:
            axis, values = settings.get("axis"), settings.get("values")
            if axis is None or not values:
                raise ValidationError("sweep needs an axis and values "
                                      "(--axis/--values or config keys)")
            if axis == "K":
                values = [int(v) for v in values]
        spec = SweepSpec(
            name=settings.get("name", args.command), base=cfg,
            params=_params_from(settings), axis=axis, values=tuple(values),
            trials=settings.get("trials", 200), master_seed=settings.get("seed", 0),
            w_schedule=_schedule(values, settings.get("w_schedule")))

    if "w" in settings and args.w is not None:
        spec = replace(spec, w_schedule=None)
    if settings.get("mode", "silm") == "ilm":
        spec = replace(
            spec, base=spec.base.replace(w=0.0), w_schedule=None,
            series=tuple(Series(s.label, {**s.overrides, "w": 0.0}) for s in spec.series))
    elif settings.get("mode", "silm") != "silm":
        raise ValidationError(f"mode must be silm or ilm, got {settings['mode']!r}")
    return spec, settings


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec, settings = build_spec(args)
        meta = {"mode": settings.get("mode", "silm"), "w_effective": spec.base.w,
                "config_file": args.config}
        result = run_sweep(spec, workers=settings.get("threads", 1),
                           extra_metadata=meta)
        text = write_csv(result, args.out)
        if args.out:
            with open(f"{args.out}.meta.json", "w", encoding="utf-8") as fh:
                json.dump(result.metadata, fh, indent=2, default=str)
        else:
            sys.stdout.write(text)
        if args.plot:
            from .plotting import plot_sweep
            plot_sweep(result, args.plot)
    except ValidationError as exc:
        print(f"silm: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"silm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
