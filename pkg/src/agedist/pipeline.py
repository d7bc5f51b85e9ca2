"""Model-selection cascade and dataset-level batch driver.

A single target goes through three stations: the closed-form solver when it
is monotone non-increasing, otherwise the activation-rate search, and when
that fails to converge within its budget, the plateau-decay curve fit
followed by the closed-form solver on the fitted surrogate. Every solved
parameter set is validated with one stochastic run against its own analytic
steady state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import curvefit, model1, model2, simulator
from .distributions import (
    AgeDistribution,
    Classification,
    ModelKind,
    ModelParams,
    classify,
    mean_absolute_error,
)
from .errors import AgedistError, EmptyDataset

logger = logging.getLogger("agedist")

#: Curve fits with a Wasserstein distance above this are flagged (reported,
#: never rejected); the default sits at a typical dataset mean.
DEFAULT_WASSERSTEIN_WARN = 0.0055


class Route(Enum):
    MODEL1 = "model1"
    MODEL2 = "model2"
    CURVE_FIT = "curve_fit"
    FAILED = "failed"


@dataclass
class CountryResult:
    name: str
    route: Route
    params: Optional[ModelParams] = None
    sim_mae: Optional[float] = None
    failure_reason: Optional[str] = None
    #: Analytic steady state of the solved parameters (proportions).
    analytic: Optional[np.ndarray] = None
    #: Steady-state estimate from the validation run (proportions).
    sim_estimate: Optional[np.ndarray] = None


@dataclass
class PipelineReport:
    per_country: dict
    route_counts: dict
    #: name -> Wasserstein distance for every curve-fit entry (histogram data).
    curvefit_wasserstein: dict
    mean_wasserstein: Optional[float]
    #: Curve-fit entries whose distance exceeded the warning threshold.
    flagged: tuple = field(default_factory=tuple)


def select_and_solve(
    dist: AgeDistribution,
    de_config: Optional[model2.DEConfig] = None,
    sim_config: Optional[simulator.SimConfig] = None,
) -> tuple:
    """Route one target through the cascade; returns (params, route).

    Diagnostics carried on the result include the analytic mean absolute
    error against the route's target, the validation run's error against the
    analytic steady state (``sim_mae``), and route-specific entries (search
    iterations, curve-fit distance, free-parameter provenance).

    Raises:
        CurveFitFailed: the final fallback found no usable fit.
    """
    params, route, _, _ = _solve_one(dist, de_config, sim_config)
    return params, route


def _solve_one(
    dist: AgeDistribution,
    de_config: Optional[model2.DEConfig],
    sim_config: Optional[simulator.SimConfig],
) -> tuple:
    """Cascade body; also returns the analytic steady state and the
    validation run's estimate for reporting."""
    de_cfg = de_config if de_config is not None else model2.DEConfig()
    sim_cfg = sim_config if sim_config is not None else simulator.SimConfig()

    if classify(dist) is Classification.MONOTONE_NON_INCREASING:
        survival = model1.solve(dist, "mid")
        analytic = model1.steady_state(survival, labels=dist.labels)
        diagnostics = {
            "mae": mean_absolute_error(analytic, dist),
            "free_param_mode": "midpoint",
        }
        kind, activation, route = ModelKind.MODEL1, None, Route.MODEL1
    else:
        solution = model2.optimize(dist, de_cfg)
        if solution.converged:
            survival, activation = solution.survival, solution.activation
            analytic = model2.steady_state2(survival, activation, labels=dist.labels)
            diagnostics = {
                "mae": solution.mae,
                "iterations_used": solution.iterations_used,
                "seed": de_cfg.seed,
            }
            kind, route = ModelKind.MODEL2, Route.MODEL2
        else:
            fit_result = curvefit.fit(dist)
            survival = model1.solve(fit_result.fitted, "mid")
            analytic = model1.steady_state(survival, labels=dist.labels)
            diagnostics = {
                "mae": mean_absolute_error(analytic, fit_result.fitted),
                "wasserstein_to_original": fit_result.wasserstein_to_original,
                "free_param_mode": "midpoint",
                "model2_mae": solution.mae,
                "model2_iterations": solution.iterations_used,
            }
            kind, activation, route = ModelKind.MODEL1_ON_FITTED, None, Route.CURVE_FIT

    validation = simulator.run(analytic, _bare_params(kind, survival, activation), sim_cfg)
    diagnostics["sim_mae"] = mean_absolute_error(
        validation.steady_estimate, analytic.proportions
    )
    params = ModelParams(
        kind=kind,
        survival=survival,
        activation=activation,
        free_param=float(survival.probs[-1]),
        diagnostics=diagnostics,
    )
    return params, route, analytic.proportions, validation.steady_estimate


def _bare_params(kind, survival, activation) -> ModelParams:
    return ModelParams(
        kind=kind,
        survival=survival,
        activation=activation,
        free_param=float(survival.probs[-1]),
    )


def run_dataset(
    dataset,
    de_config: Optional[model2.DEConfig] = None,
    sim_config: Optional[simulator.SimConfig] = None,
    warn_wasserstein: float = DEFAULT_WASSERSTEIN_WARN,
) -> PipelineReport:
    """Apply the cascade to every (name, distribution) entry.

    Entries are independent (any could run concurrently; the aggregation is
    order-free and the report is sorted by name). Per-entry failures are
    recorded with route FAILED and never abort the batch.

    Raises:
        EmptyDataset: no entries were supplied.
    """
    entries = list(dataset)
    if not entries:
        raise EmptyDataset("no distributions to process")

    results = {}
    for name, dist in entries:
        try:
            params, route, analytic, sim_estimate = _solve_one(
                dist, de_config, sim_config
            )
            results[name] = CountryResult(
                name=name,
                route=route,
                params=params,
                sim_mae=params.diagnostics.get("sim_mae"),
                analytic=analytic,
                sim_estimate=sim_estimate,
            )
        except AgedistError as exc:
            logger.warning("%s: %s", name, exc)
            results[name] = CountryResult(
                name=name, route=Route.FAILED, failure_reason=str(exc)
            )

    per_country = {name: results[name] for name in sorted(results)}
    route_counts = {route: 0 for route in Route}
    for res in per_country.values():
        route_counts[res.route] += 1

    distances = {
        name: res.params.diagnostics["wasserstein_to_original"]
        for name, res in per_country.items()
        if res.route is Route.CURVE_FIT
    }
    flagged = tuple(
        name for name, value in distances.items() if value > warn_wasserstein
    )
    for name in flagged:
        logger.warning(
            "%s: curve fit moved the distribution by %.4g (threshold %.4g)",
            name, distances[name], warn_wasserstein,
        )
    mean_distance = float(np.mean(list(distances.values()))) if distances else None

    return PipelineReport(
        per_country=per_country,
        route_counts=route_counts,
        curvefit_wasserstein=distances,
        mean_wasserstein=mean_distance,
        flagged=flagged,
    )
