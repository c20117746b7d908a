"""Constrained SSVI calibration to discrete smile quotes.

Least squares on total-variance residuals with the slice no-arbitrage
conditions enforced by a quadratic penalty during the search and a hard
projection at return. The optimizer is Nelder-Mead on the unconstrained
reparameterization (log theta, atanh rho, log phi).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import CalibrationDiverged, InsufficientQuotes
from .smiles import SsviParams, ssvi_total_variance, validate_ssvi

MAX_ITERATIONS = 10000
# Below this phi the smile is numerically flat and rho has no effect on the
# objective; it is reported at its initialization value.
PHI_FLAT_TOL = 1e-6
_PENALTY_WEIGHT = 1e3
_CONDITION1_MARGIN = 1e-3


@dataclass(frozen=True)
class MarketQuote:
    """One observed point: forward log-strike k, total implied vol v."""

    k: float
    v: float

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError(f"quote vol must be positive, got {self.v}")


@dataclass(frozen=True)
class CalibrationResult:
    params: SsviParams
    rmse: float
    iterations: int
    constraint_active: bool


def read_quotes_csv(path) -> list:
    """Read quotes from a CSV file with header ``k,v``."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["k", "v"]:
            raise ValueError("quote CSV must start with header 'k,v'")
        return [MarketQuote(float(row[0]), float(row[1])) for row in reader if row]


def _model_variance(x: np.ndarray, ks: np.ndarray) -> np.ndarray:
    theta, rho, phi = np.exp(x[0]), np.tanh(x[1]), np.exp(x[2])
    t = phi * ks + rho
    return 0.5 * theta * (1.0 + rho * phi * ks + np.sqrt(t * t + 1.0 - rho * rho))


def _penalty(x: np.ndarray) -> float:
    theta, rho, phi = np.exp(x[0]), np.tanh(x[1]), np.exp(x[2])
    c1 = theta * phi * (1.0 + abs(rho))
    c2 = theta * phi * phi * (1.0 + abs(rho))
    pen = 0.0
    bound1 = 4.0 - _CONDITION1_MARGIN
    if c1 > bound1:
        pen += _PENALTY_WEIGHT * (c1 - bound1) ** 2
    if c2 > 4.0:
        pen += _PENALTY_WEIGHT * (c2 - 4.0) ** 2
    return pen


def _project(params: SsviParams) -> tuple:
    """Scale phi down until the slice passes validation. Returns (params, active)."""
    if validate_ssvi(params).ok:
        return params, False
    c1 = params.theta * params.phi * (1.0 + abs(params.rho))
    c2 = params.theta * params.phi ** 2 * (1.0 + abs(params.rho))
    scale = 1.0
    if c1 >= 4.0 - _CONDITION1_MARGIN:
        scale = min(scale, (4.0 - _CONDITION1_MARGIN) / c1)
    if c2 > 4.0:
        scale = min(scale, np.sqrt(4.0 / c2))
    return SsviParams(params.theta, params.rho, params.phi * scale), True


def fit_ssvi(quotes: Sequence[MarketQuote],
             init: SsviParams | None = None) -> CalibrationResult:
    """Fit an SSVI slice to quotes by constrained least squares.

    Minimizes sum_i (w(k_i) - v_i^2)^2 over (theta, rho, phi); the reported
    rmse is in total-variance units and refers to the returned (projected)
    parameters. Deterministic for fixed inputs.

    Raises:
        InsufficientQuotes: fewer than 3 quotes.
        CalibrationDiverged: iteration cap hit with rmse above
            1e-3 times the mean quote variance.
    """
    quotes = list(quotes)
    if len(quotes) < 3:
        raise InsufficientQuotes(f"need at least 3 quotes, got {len(quotes)}")
    ks = np.array([q.k for q in quotes])
    if len(np.unique(ks)) != len(ks):
        raise ValueError("quotes must have distinct log-strikes")
    targets = np.array([q.v for q in quotes]) ** 2

    if init is None:
        order = np.argsort(ks)
        theta0 = float(np.interp(0.0, ks[order], targets[order]))
        init = SsviParams(theta0, 0.0, 1.0)
    x0 = np.array([np.log(init.theta), np.arctanh(init.rho),
                   np.log(max(init.phi, 1e-8))])

    def objective(x):
        resid = _model_variance(x, ks) - targets
        return float(np.dot(resid, resid)) + _penalty(x)

    result = minimize(objective, x0, method="Nelder-Mead",
                      options={"maxiter": MAX_ITERATIONS, "maxfev": 2 * MAX_ITERATIONS,
                               "xatol": 1e-12, "fatol": 1e-24})
    theta = float(np.exp(result.x[0]))
    rho = float(np.tanh(result.x[1]))
    phi = float(np.exp(result.x[2]))

    constraint_active = False
    if phi <= PHI_FLAT_TOL:
        rho = init.rho
        constraint_active = True
    params, projected = _project(SsviParams(theta, rho, phi))
    constraint_active = constraint_active or projected

    resid = np.asarray(ssvi_total_variance(params, ks)) - targets
    rmse = float(np.sqrt(np.mean(resid ** 2)))
    iterations = int(result.nit)
    if iterations >= MAX_ITERATIONS and rmse > 1e-3 * float(np.mean(targets)):
        raise CalibrationDiverged(
            f"iteration cap {MAX_ITERATIONS} hit with rmse {rmse:.3e}")
    return CalibrationResult(params, rmse, iterations, constraint_active)
