"""Smile models: SSVI slice and constant Black-Scholes volatility.

A smile is the dimensionless total implied volatility v(k) at forward
log-strike k (Black-Scholes vol times sqrt of maturity). Both models expose
(v, v', v'') through :func:`smile_vol`; SSVI derivatives are closed-form via
the chain rule from the total-variance derivatives, never finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import NonPositiveVariance, NonPositiveVol

# Heuristic cutoff for the d2 -> +infinity proxy in verify_assumptions:
# validated smiles score O(sqrt(k_probe)) ~ 300+ at the default probe, the
# ruled-out limiting case stays O(1).
D2_PROXY_THRESHOLD = 10.0


@dataclass(frozen=True)
class SsviParams:
    """SSVI slice parameters (theta, rho, phi) for one maturity.

    theta is total ATM variance, rho the correlation-like skew parameter,
    phi the curvature scale. Field domains are enforced here; the
    no-arbitrage conditions are checked separately by :func:`validate_ssvi`.
    """

    theta: float
    rho: float
    phi: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not -1 < self.rho < 1:
            raise ValueError(f"rho must be in (-1, 1), got {self.rho}")
        if not self.phi >= 0:
            raise ValueError(f"phi must be nonnegative, got {self.phi}")


@dataclass(frozen=True)
class SsviSlice:
    """Smile given by the SSVI total-variance parameterisation."""

    params: SsviParams


@dataclass(frozen=True)
class ConstantVolSlice:
    """Flat Black-Scholes smile with total volatility ``total_vol``."""

    total_vol: float

    def __post_init__(self):
        if not self.total_vol > 0:
            raise ValueError(f"total_vol must be positive, got {self.total_vol}")


SmileSlice = Union[SsviSlice, ConstantVolSlice]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    lhs: float
    bound: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"code": v.code, "message": v.message, "lhs": v.lhs, "bound": v.bound}
                for v in self.violations
            ],
        }


@dataclass(frozen=True)
class WingSlopes:
    """Asymptotic wing slopes beta+- = limsup v(k)^2 / |k| as k -> +-inf."""

    beta_plus: float
    beta_minus: float


def _maybe_scalar(*arrays):
    if arrays[0].ndim == 0:
        out = tuple(float(a) for a in arrays)
        return out[0] if len(out) == 1 else out
    return arrays[0] if len(arrays) == 1 else arrays


def ssvi_total_variance(params: SsviParams, k):
    """SSVI total implied variance w(k) = theta/2 (1 + rho phi k + sqrt((phi k + rho)^2 + 1 - rho^2))."""
    k = np.asarray(k, dtype=float)
    t = params.phi * k + params.rho
    w = 0.5 * params.theta * (
        1.0 + params.rho * params.phi * k + np.sqrt(t * t + 1.0 - params.rho ** 2)
    )
    return _maybe_scalar(w)


def ssvi_derivatives(params: SsviParams, k):
    """First and second k-derivatives of the SSVI total variance.

    w'(k)  = theta phi / 2 * (rho + (phi k + rho)/sqrt((phi k + rho)^2 + 1 - rho^2))
    w''(k) = theta phi^2 / 2 * (1 - rho^2) / ((phi k + rho)^2 + 1 - rho^2)^{3/2}

    w'' >= 0 everywhere, so the slice is convex in k.
    """
    k = np.asarray(k, dtype=float)
    t = params.phi * k + params.rho
    root = np.sqrt(t * t + 1.0 - params.rho ** 2)
    wp = 0.5 * params.theta * params.phi * (params.rho + t / root)
    wpp = 0.5 * params.theta * params.phi ** 2 * (1.0 - params.rho ** 2) / root ** 3
    return _maybe_scalar(wp, wpp)


def vol_from_variance(w, wp, wpp):
    """Chain rule from total variance to total volatility and derivatives.

    v = sqrt(w), v' = w'/(2v), v'' = w''/(2v) - w'^2/(4 v^3).

    Raises:
        NonPositiveVariance: if any w <= 0 (guards future smile models; the
            shipped models cannot produce it).
    """
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0.0):
        raise NonPositiveVariance("total variance must be strictly positive")
    v = np.sqrt(w)
    vp = wp / (2.0 * v)
    vpp = wpp / (2.0 * v) - wp * wp / (4.0 * v ** 3)
    return v, vp, vpp


def smile_vol(slice_: SmileSlice, k):
    """Evaluate (v, v', v'') for a smile slice at log-strike k.

    Accepts scalar or ndarray k and returns matching shapes.
    """
    k = np.asarray(k, dtype=float)
    if isinstance(slice_, ConstantVolSlice):
        v = np.full_like(k, slice_.total_vol, dtype=float)
        z = np.zeros_like(k)
        return _maybe_scalar(v, z.copy(), z.copy())
    if isinstance(slice_, SsviSlice):
        p = slice_.params
        w = np.asarray(ssvi_total_variance(p, k))
        wp, wpp = ssvi_derivatives(p, k)
        v, vp, vpp = vol_from_variance(w, np.asarray(wp), np.asarray(wpp))
        return _maybe_scalar(v, vp, vpp)
    raise TypeError(f"unknown smile slice type {type(slice_).__name__}")


def validate_ssvi(params: SsviParams) -> ValidationReport:
    """Check the slice no-arbitrage conditions.

    (1) theta phi (1 + |rho|) < 4, strictly; the limiting equality case is
        rejected outright (for rho >= 0 it admits arbitrage, for rho < 0 it
        puts mass at zero, which the analytics assume away).
    (2) theta phi^2 (1 + |rho|) <= 4. This one is sufficient but not
        necessary, so some arbitrage-free slices are rejected.
    """
    lhs1 = params.theta * params.phi * (1.0 + abs(params.rho))
    lhs2 = params.theta * params.phi ** 2 * (1.0 + abs(params.rho))
    violations = []
    if lhs1 > 4.0:
        violations.append(Violation(
            "CONDITION1", "theta*phi*(1+|rho|) must be < 4", lhs1, 4.0))
    elif lhs1 == 4.0:
        violations.append(Violation(
            "LIMITING_CASE",
            "theta*phi*(1+|rho|) = 4 is rejected: arbitrage for rho >= 0, "
            "positive mass at zero for rho < 0",
            lhs1, 4.0))
    if lhs2 > 4.0:
        violations.append(Violation(
            "CONDITION2", "theta*phi^2*(1+|rho|) must be <= 4", lhs2, 4.0))
    return ValidationReport(tuple(violations))


def wing_slopes(slice_: SmileSlice) -> WingSlopes:
    """Wing slopes beta+-.

    SSVI has the closed form beta+- = theta phi (1 +- rho) / 2; a bounded
    (constant) smile has zero slopes.
    """
    if isinstance(slice_, ConstantVolSlice):
        return WingSlopes(0.0, 0.0)
    p = slice_.params
    return WingSlopes(0.5 * p.theta * p.phi * (1.0 + p.rho),
                      0.5 * p.theta * p.phi * (1.0 - p.rho))


def verify_assumptions(slice_: SmileSlice, k_probe: float = 1e4) -> ValidationReport:
    """Numerically probe the standing assumptions on the smile.

    Checks v(+-k_probe) > 0 and that the left-wing d2 proxy
    -k/v(k) - v(k)/2 at k = -k_probe is large positive (finite-probe stand-in
    for d2 -> +infinity, i.e. no mass at zero). The probe size is a
    documented heuristic; callers may widen it.
    """
    violations = []
    v_right = smile_vol(slice_, k_probe)[0]
    v_left = smile_vol(slice_, -k_probe)[0]
    if not (v_right > 0.0 and v_left > 0.0):
        violations.append(Violation(
            "V_POSITIVE", "v must stay positive at the probes",
            float(min(v_right, v_left)), 0.0))
    d2_proxy = k_probe / v_left - 0.5 * v_left
    if not d2_proxy >= D2_PROXY_THRESHOLD:
        violations.append(Violation(
            "D2_LIMIT",
            "-k/v - v/2 at the left probe must be large positive "
            "(zero mass at K=0)",
            float(d2_proxy), D2_PROXY_THRESHOLD))
    return ValidationReport(tuple(violations))


def parse_smile_config(doc: dict) -> SmileSlice:
    """Build a slice from a config mapping; unknown keys are rejected.

    Expected documents:
        {"model": "ssvi", "theta": ..., "rho": ..., "phi": ...}
        {"model": "bs", "total_vol": ...}
    """
    if not isinstance(doc, dict):
        raise ValueError("smile config must be a JSON object")
    model = doc.get("model")
    if model == "ssvi":
        required = {"model", "theta", "rho", "phi"}
    elif model == "bs":
        required = {"model", "total_vol"}
    else:
        raise ValueError(f"unknown smile model {model!r}")
    unknown = set(doc) - required
    if unknown:
        raise ValueError(f"unknown keys in smile config: {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise ValueError(f"missing keys in smile config: {sorted(missing)}")
    for key in required - {"model"}:
        if not isinstance(doc[key], (int, float)) or isinstance(doc[key], bool):
            raise ValueError(f"smile config key {key!r} must be a number")
    if model == "ssvi":
        return SsviSlice(SsviParams(float(doc["theta"]), float(doc["rho"]),
                                    float(doc["phi"])))
    return ConstantVolSlice(float(doc["total_vol"]))


def load_smile_config(path) -> SmileSlice:
    """Read a smile config JSON document from ``path``."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_smile_config(json.load(fh))


def smile_config_dict(slice_: SmileSlice) -> dict:
    """Config document for a slice (inverse of :func:`parse_smile_config`)."""
    if isinstance(slice_, ConstantVolSlice):
        return {"model": "bs", "total_vol": slice_.total_vol}
    p = slice_.params
    return {"model": "ssvi", "theta": p.theta, "rho": p.rho, "phi": p.phi}
