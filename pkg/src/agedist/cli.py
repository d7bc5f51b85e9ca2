"""Command-line interface.

Subcommands cover the whole workflow: ``classify`` (route eligibility per
country), ``solve`` (closed-form or search parameterisation for one
country), ``fit-curve`` (plateau-decay surrogate plus closed-form solve),
``simulate`` (stochastic validation of a parameter file) and ``pipeline``
(the full cascade over a dataset, emitting parameter files and plot-data
CSVs).

Every failure exits nonzero after printing a line prefixed ``error:`` to
stderr. All subcommands are deterministic given identical inputs and
``--seed``. The AGEDIST_LOG environment variable (debug/info/warning/error)
controls verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from pathlib import Path

from . import __version__, curvefit, dataio, model1, model2, pipeline, simulator
from .distributions import (
    Classification,
    ModelKind,
    ModelParams,
    classify,
    mean_absolute_error,
)
from .errors import AgedistError

logger = logging.getLogger("agedist")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose failures match the ``error:`` line contract."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"error: {message}\n")


def _configure_logging() -> None:
    level = os.environ.get("AGEDIST_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _ingest(args, *, skipped=None):
    return dataio.ingest_csv(
        args.input,
        country_col=args.country_col,
        age_col=args.age_col,
        pop_col=args.pop_col,
        skipped=skipped,
    )


def _find(entries, name):
    for entry_name, dist in entries:
        if entry_name == name:
            return dist
    raise AgedistError(
        f"country {name!r} not found ({len(entries)} countries ingested)"
    )


def _add_input_options(sub) -> None:
    sub.add_argument("--input", required=True, help="long-format CSV dataset")
    sub.add_argument("--country-col", default="country")
    sub.add_argument("--age-col", default="age_group")
    sub.add_argument("--pop-col", default="population")


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name).strip("_") or "unnamed"


def _parse_pn(text: str):
    if text in ("mid", "rand"):
        return text
    try:
        return float(text)
    except ValueError:
        raise AgedistError(
            f"--pn must be 'mid', 'rand' or a number, got {text!r}"
        ) from None


def _default_burn_in(num_steps: int) -> int:
    # Keep the canonical 300-of-350 split, scaled down for shorter runs:
    # average over the final seventh of the steps.
    return num_steps - max(1, num_steps // 7)


def cmd_classify(args) -> int:
    skipped: list = []
    entries = _ingest(args, skipped=skipped)
    if args.country is not None:
        entries = [(args.country, _find(entries, args.country))]
    print("country,classification,eligible_route")
    for name, dist in entries:
        shape = classify(dist)
        route = (
            "model1"
            if shape is Classification.MONOTONE_NON_INCREASING
            else "model2_or_curve_fit"
        )
        print(f"{name},{shape.value},{route}")
    for name, reason in skipped:
        print(f"{name},skipped,none")
    return 0


def cmd_solve(args) -> int:
    entries = _ingest(args)
    dist = _find(entries, args.country)
    shape = classify(dist)

    model = args.model
    if model == "auto":
        model = "1" if shape is Classification.MONOTONE_NON_INCREASING else "2"

    if model == "1":
        pn = _parse_pn(args.pn)
        survival = model1.solve(dist, pn, seed=args.seed)
        analytic = model1.steady_state(survival, labels=dist.labels)
        diagnostics = {
            "mae": mean_absolute_error(analytic, dist),
            "free_param_mode": args.pn if isinstance(pn, str) else "explicit",
        }
        if args.pn == "rand":
            diagnostics["seed"] = args.seed
        params = ModelParams(
            kind=ModelKind.MODEL1,
            survival=survival,
            diagnostics=diagnostics,
        )
        route = "model1"
    else:
        config = model2.DEConfig(seed=args.seed)
        solution = model2.optimize(dist, config)
        if not solution.converged:
            raise AgedistError(
                f"model 2 search did not converge: mae {solution.mae:.3g} after "
                f"{solution.iterations_used} iterations (threshold "
                f"{config.success_threshold:g})"
            )
        params = ModelParams(
            kind=ModelKind.MODEL2,
            survival=solution.survival,
            activation=solution.activation,
            diagnostics={
                "mae": solution.mae,
                "iterations_used": solution.iterations_used,
                "seed": args.seed,
            },
        )
        route = "model2"

    dataio.emit_params(
        params,
        args.out,
        labels=dist.labels,
        target=dist.proportions,
        config={"seed": args.seed, "pn": args.pn, "model": args.model},
    )
    print(f"{args.country}: route {route}, mae {params.diagnostics['mae']:.3g}, "
          f"wrote {args.out}")
    return 0


def cmd_fit_curve(args) -> int:
    entries = _ingest(args)
    dist = _find(entries, args.country)
    result = curvefit.fit(dist)

    with open(args.fit_report, "w", encoding="utf-8", newline="") as fh:
        fh.write("k,sse,wasserstein\n")
        for k, sse, distance in result.per_k_table:
            fh.write(f"{k},{sse:.10g},{distance:.10g}\n")

    survival = model1.solve(result.fitted, "mid")
    analytic = model1.steady_state(survival, labels=dist.labels)
    params = ModelParams(
        kind=ModelKind.MODEL1_ON_FITTED,
        survival=survival,
        diagnostics={
            "mae": mean_absolute_error(analytic, result.fitted),
            "wasserstein_to_original": result.wasserstein_to_original,
            "residual_sse": result.residual_sse,
            "plateau": result.params.plateau,
            "decay_scale": result.params.decay_scale,
            "decay_shape": result.params.decay_shape,
            "breakpoint": result.params.breakpoint,
            "free_param_mode": "midpoint",
        },
    )
    # The file's target is the fitted surrogate: that is the distribution
    # these parameters reproduce.
    dataio.emit_params(
        params,
        args.out,
        labels=result.fitted.labels,
        target=result.fitted.proportions,
        config={"source_country": args.country},
    )
    print(
        f"{args.country}: breakpoint {result.params.breakpoint}, "
        f"wasserstein {result.wasserstein_to_original:.10g}, wrote {args.out}"
    )
    return 0


def cmd_simulate(args) -> int:
    document = dataio.load_params_document(args.params)
    params = document.params
    target = document.target_distribution()
    if target is None:
        if params.kind is ModelKind.MODEL2:
            target = model2.steady_state2(params.survival, params.activation)
        else:
            target = model1.steady_state(params.survival)

    burn_in = args.burn_in if args.burn_in is not None else _default_burn_in(args.steps)
    config = simulator.SimConfig(
        num_agents=args.agents,
        num_steps=args.steps,
        seed=args.seed,
        burn_in=burn_in,
        record_trajectory=args.trajectory is not None,
    )
    result = simulator.run(target, params, config)
    if params.kind is ModelKind.MODEL2:
        analytic = model2.steady_state2(
            params.survival, params.activation, labels=target.labels
        )
    else:
        analytic = model1.steady_state(params.survival, labels=target.labels)
    mae = mean_absolute_error(result.steady_estimate, analytic.proportions)

    if args.trajectory is not None:
        simulator.write_trajectory_csv(result, args.trajectory)

    output = {
        "labels": list(result.labels),
        "steady_estimate": [float(v) for v in result.steady_estimate],
        "final_snapshot": [float(v) for v in result.final_snapshot],
        "mae_vs_analytic": mae,
        "total_deaths": result.total_deaths,
        "seed": result.seed,
        "num_agents": config.num_agents,
        "num_steps": config.num_steps,
        "burn_in": config.burn_in,
        "params_file": str(args.params),
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(output, fh, indent=2)
        fh.write("\n")
    print(f"simulated {config.num_steps} steps: mae vs analytic {mae:.3g}, "
          f"wrote {args.out}")
    return 0


def cmd_pipeline(args) -> int:
    skipped: list = []
    entries = _ingest(args, skipped=skipped)
    de_config = model2.DEConfig(
        max_iterations=args.de_iters,
        success_threshold=args.de_threshold,
        seed=args.seed,
    )
    sim_config = simulator.SimConfig(
        num_agents=args.agents,
        num_steps=args.steps,
        seed=args.seed,
        burn_in=_default_burn_in(args.steps),
    )
    report = pipeline.run_dataset(entries, de_config, sim_config)

    out_dir = Path(args.out_dir)
    params_dir = out_dir / "params"
    plots_dir = out_dir / "plots"
    params_dir.mkdir(parents=True, exist_ok=True)
    plots_dir.mkdir(parents=True, exist_ok=True)

    targets = dict(entries)
    for name, res in report.per_country.items():
        if res.params is None:
            continue
        dist = targets[name]
        stem = _safe_name(name)
        dataio.emit_params(
            res.params,
            params_dir / f"{stem}.json",
            labels=dist.labels,
            target=dist.proportions,
            config={
                "seed": args.seed,
                "de_iters": args.de_iters,
                "de_threshold": args.de_threshold,
                "num_agents": args.agents,
                "num_steps": args.steps,
            },
        )
        with open(plots_dir / f"{stem}_distribution.csv", "w",
                  encoding="utf-8", newline="") as fh:
            fh.write("age_group,target,analytic,simulated\n")
            for label, t, a, s in zip(
                dist.labels, dist.proportions, res.analytic, res.sim_estimate
            ):
                fh.write(f"{label},{t:.10g},{a:.10g},{s:.10g}\n")

    with open(plots_dir / "curvefit_wasserstein.csv", "w",
              encoding="utf-8", newline="") as fh:
        fh.write("country,wasserstein\n")
        for name, value in report.curvefit_wasserstein.items():
            fh.write(f"{name},{value:.10g}\n")

    summary = {
        "library_version": __version__,
        "countries": len(entries),
        "skipped": [{"country": n, "reason": r} for n, r in skipped],
        "route_counts": {
            route.value: count for route, count in report.route_counts.items()
        },
        "mean_curvefit_wasserstein": report.mean_wasserstein,
        "flagged_curve_fits": list(report.flagged),
        "per_country": {
            name: {
                "route": res.route.value,
                "sim_mae": res.sim_mae,
                "failure_reason": res.failure_reason,
                "diagnostics": res.params.diagnostics if res.params else None,
            }
            for name, res in report.per_country.items()
        },
    }
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")

    counts = ", ".join(
        f"{route.value}={count}" for route, count in report.route_counts.items()
    )
    print(f"processed {len(entries)} countries ({counts}), wrote {out_dir}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="agedist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="route eligibility per country")
    _add_input_options(p)
    p.add_argument("--country", help="restrict to one country")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("solve", help="parameterise one country")
    _add_input_options(p)
    p.add_argument("--country", required=True)
    p.add_argument("--model", choices=("auto", "1", "2"), default="auto")
    p.add_argument("--pn", default="mid",
                   help="last-group survival: mid, rand or a number")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="parameter file to write")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("fit-curve",
                       help="plateau-decay surrogate plus closed-form solve")
    _add_input_options(p)
    p.add_argument("--country", required=True)
    p.add_argument("--out", required=True, help="parameter file to write")
    p.add_argument("--fit-report", required=True,
                   help="per-breakpoint table CSV to write")
    p.set_defaults(func=cmd_fit_curve)

    p = sub.add_parser("simulate", help="stochastic run from a parameter file")
    p.add_argument("--params", required=True)
    p.add_argument("--agents", type=int, default=10_000)
    p.add_argument("--steps", type=int, default=350)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=None,
                   help="steps discarded before averaging "
                        "(default: all but the final seventh)")
    p.add_argument("--trajectory", help="optional per-step CSV dump")
    p.add_argument("--out", required=True, help="result JSON to write")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pipeline", help="full cascade over a dataset")
    _add_input_options(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--de-iters", type=int, default=250)
    p.add_argument("--de-threshold", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--agents", type=int, default=10_000)
    p.add_argument("--steps", type=int, default=350)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AgedistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # CLI contract: no bare tracebacks
        logger.debug("unexpected failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
