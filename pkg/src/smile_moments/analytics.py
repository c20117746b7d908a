"""Smile-space pricing formulas.

Everything here prices directly off the smile through the normalizing
transformations: generalized moments E[(S_T/F)^p] for real and complex p,
the characteristic function in three equivalent representations, variance
and gamma swap strikes, moment-explosion bounds, and the smile-implied CDF
and density. All operations take an explicit quadrature rule; there is no
hidden global order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .errors import (
    CdfOutOfRange,
    DerivativeSingular,
    NegativeDensity,
    NonFiniteIntegrand,
    OutsideConvergenceStrip,
)
from .quadrature import GaussianRule
from .smiles import SmileSlice, smile_vol, wing_slopes
from .transforms import (
    DEFAULT_INVERSION,
    InversionConfig,
    f_p_slope,
    g_p,
)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class Representation(Enum):
    BASE = "BASE"
    MATYTSIN = "MATYTSIN"
    DUAL = "DUAL"
    BERGOMI = "BERGOMI"


@dataclass(frozen=True)
class MomentBounds:
    """Provable lower bounds on the critical exponents.

    p_plus = p+(beta+) and p_minus = p-(beta-) with
    p+-(beta) = (1/beta + beta/4 +- 1)/2; the true critical exponents
    satisfy p* >= p_plus and q* >= p_minus. Moments are certified finite on
    the open interval (-p_minus, p_plus).
    """

    p_plus: float
    p_minus: float

    @property
    def convergence_interval(self) -> tuple:
        return (-self.p_minus, self.p_plus)


@dataclass(frozen=True)
class PayoffFunction:
    """Absolutely continuous log-space payoff with derivative.

    ``growth_order`` asserts that e^{-p k} psi(k) is bounded; it must lie in
    the moment convergence interval for the pricing formula to apply.
    """

    psi: Callable
    psi_prime: Callable
    growth_order: float


@dataclass(frozen=True)
class MomentReport:
    p: complex
    value: complex
    representation: Representation
    order: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "p_re": self.p.real,
            "p_im": self.p.imag,
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "representation": self.representation.value,
            "order": self.order,
            "converged": self.converged,
        }


def p_plus_exponent(beta: float) -> float:
    """Right moment exponent p+(beta) = (1/beta + beta/4 + 1)/2, inf at 0."""
    if beta == 0.0:
        return math.inf
    return 0.5 * (1.0 / beta + 0.25 * beta + 1.0)


def p_minus_exponent(beta: float) -> float:
    """Left moment exponent p-(beta) = (1/beta + beta/4 - 1)/2, inf at 0."""
    if beta == 0.0:
        return math.inf
    return 0.5 * (1.0 / beta + 0.25 * beta - 1.0)


def moment_bounds(slice_: SmileSlice) -> MomentBounds:
    """Moment-explosion bounds from the wing slopes."""
    slopes = wing_slopes(slice_)
    return MomentBounds(p_plus_exponent(slopes.beta_plus),
                        p_minus_exponent(slopes.beta_minus))


def _require_in_strip(slice_: SmileSlice, re_p: float) -> MomentBounds:
    bounds = moment_bounds(slice_)
    lo, hi = bounds.convergence_interval
    if not lo < re_p < hi:
        raise OutsideConvergenceStrip(
            f"Re(p)={re_p} outside the certified interval ({lo:.6g}, {hi:.6g})")
    return bounds


@lru_cache(maxsize=256)
def _g_nodes(slice_: SmileSlice, p: float, rule: GaussianRule,
             cfg: InversionConfig, allow_extension: bool) -> np.ndarray:
    """g(p, z) at the rule nodes. Cached; treat the array as read-only."""
    out = np.array([g_p(slice_, p, float(z), cfg, allow_extension=allow_extension)
                    for z in rule.nodes])
    out.setflags(write=False)
    return out


def _node_transforms(slice_: SmileSlice, p: float, rule: GaussianRule,
                     cfg: InversionConfig | None, *,
                     allow_extension: bool = False):
    """(g, v, dv/dz) arrays at the rule nodes for the p-transform."""
    cfg = cfg or DEFAULT_INVERSION
    g = _g_nodes(slice_, float(p), rule, cfg, allow_extension)
    v, vp, _ = smile_vol(slice_, g)
    slope = np.asarray(f_p_slope(slice_, p, g))
    if np.any(slope == 0.0):
        raise DerivativeSingular(f"d/dk f({p}, k) vanished at an inversion point")
    return g, np.asarray(v), np.asarray(vp) / slope


def _finite_or_raise(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NonFiniteIntegrand(f"{what} produced non-finite node values")
    return values


def _apply(fn: Callable, arr: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(fn(arr), dtype=float)
        if out.shape != arr.shape:
            raise ValueError
    except Exception:
        out = np.asarray([fn(x) for x in arr], dtype=float)
    return out


def price_psi(slice_: SmileSlice, payoff: PayoffFunction, rule: GaussianRule,
              cfg: InversionConfig | None = None) -> float:
    """Price E[psi(log(S_T/F))] from the smile.

    Evaluates integral [psi(g2) - psi'(g2) + psi'(g1) e^{-g1}] phi(z) dz.
    """
    _require_in_strip(slice_, payoff.growth_order)
    g1 = _g_nodes(slice_, 1.0, rule, cfg or DEFAULT_INVERSION, False)
    g2 = _g_nodes(slice_, 0.0, rule, cfg or DEFAULT_INVERSION, False)
    values = (_apply(payoff.psi, g2) - _apply(payoff.psi_prime, g2)
              + _apply(payoff.psi_prime, g1) * np.exp(-g1))
    _finite_or_raise(values, "payoff integrand")
    return float(np.sum(rule.weights * values))


def _base_integrand(p: complex, g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    return p * np.exp((p - 1.0) * g1) + (1.0 - p) * np.exp(p * g2)


def moment(slice_: SmileSlice, p: float, rule: GaussianRule,
           cfg: InversionConfig | None = None) -> MomentReport:
    """Moment E[(S_T/F)^p] for real p inside the convergence interval.

    The integral formula genuinely diverges at the interval endpoints, so
    out-of-strip requests raise rather than returning infinity.
    """
    p = float(p)
    _require_in_strip(slice_, p)
    g1 = _g_nodes(slice_, 1.0, rule, cfg or DEFAULT_INVERSION, False)
    g2 = _g_nodes(slice_, 0.0, rule, cfg or DEFAULT_INVERSION, False)
    values = _finite_or_raise(_base_integrand(p, g1, g2), "moment integrand")
    total = float(np.sum(rule.weights * values))
    return MomentReport(complex(p), complex(total), Representation.BASE,
                        rule.order, True)


def mgf_complex(slice_: SmileSlice, p: complex, rule: GaussianRule,
                cfg: InversionConfig | None = None) -> MomentReport:
    """Generalized characteristic function E[e^{p X_T}] for complex p."""
    p = complex(p)
    _require_in_strip(slice_, p.real)
    g1 = _g_nodes(slice_, 1.0, rule, cfg or DEFAULT_INVERSION, False)
    g2 = _g_nodes(slice_, 0.0, rule, cfg or DEFAULT_INVERSION, False)
    values = _finite_or_raise(_base_integrand(p, g1, g2), "mgf integrand")
    total = complex(np.sum(rule.weights * values))
    return MomentReport(p, total, Representation.BASE, rule.order, True)


def moment_matytsin(slice_: SmileSlice, p: complex, rule: GaussianRule,
                    cfg: InversionConfig | None = None) -> MomentReport:
    """E[e^{p X_T}] in the v2-only form.

    integral e^{p (z v2 - v2^2/2)} (1 - p v2'(z)) phi(z) dz; unlike the base
    form, only v2 and its z-derivative appear.
    """
    p = complex(p)
    _require_in_strip(slice_, p.real)
    _, v2, dv2 = _node_transforms(slice_, 0.0, rule, cfg)
    z = rule.nodes
    values = np.exp(p * (z * v2 - 0.5 * v2 ** 2)) * (1.0 - p * dv2)
    _finite_or_raise(values, "Matytsin integrand")
    return MomentReport(p, complex(np.sum(rule.weights * values)),
                        Representation.MATYTSIN, rule.order, True)


def moment_dual(slice_: SmileSlice, p: complex, rule: GaussianRule,
                cfg: InversionConfig | None = None) -> MomentReport:
    """E[e^{p X_T}] in the v1-only form, the dual of the v2 representation.

    integral e^{(p-1)(z v1 + v1^2/2)} (1 + (1-p) v1'(z)) phi(z) dz.
    """
    p = complex(p)
    _require_in_strip(slice_, p.real)
    _, v1, dv1 = _node_transforms(slice_, 1.0, rule, cfg)
    z = rule.nodes
    values = (np.exp((p - 1.0) * (z * v1 + 0.5 * v1 ** 2))
              * (1.0 + (1.0 - p) * dv1))
    _finite_or_raise(values, "dual integrand")
    return MomentReport(p, complex(np.sum(rule.weights * values)),
                        Representation.DUAL, rule.order, True)


def charfn_matytsin(slice_: SmileSlice, eta: float, rule: GaussianRule,
                    cfg: InversionConfig | None = None) -> complex:
    """Characteristic function E[e^{i eta X_T}] in the v2-only form."""
    return moment_matytsin(slice_, 1j * eta, rule, cfg).value


def charfn_dual(slice_: SmileSlice, eta: float, rule: GaussianRule,
                cfg: InversionConfig | None = None) -> complex:
    """Characteristic function E[e^{i eta X_T}] in the v1-only form."""
    return moment_dual(slice_, 1j * eta, rule, cfg).value


def _monotone_direction(slice_: SmileSlice) -> str:
    """Smile monotonicity on a wide probe grid: 'decreasing'/'increasing'/'flat'/'none'."""
    probe = np.linspace(-50.0, 50.0, 2001)
    _, vp, _ = smile_vol(slice_, probe)
    vp = np.asarray(vp)
    if np.all(vp == 0.0):
        return "flat"
    if np.all(vp <= 0.0):
        return "decreasing"
    if np.all(vp >= 0.0):
        return "increasing"
    return "none"


def bergomi_moment(slice_: SmileSlice, p: complex, rule: GaussianRule,
                   cfg: InversionConfig | None = None) -> complex:
    """E[e^{p X_T}] via the p-normalized volatility (real-line form).

    integral e^{i Im(p) g(a, z)} e^{a(a-1) v^a(z)^2 / 2}
             (1 - i Im(p) d/dz v^a(z)) phi(z) dz,   a = Re(p),
    with g(a, z) = z v^a(z) - (1/2 - a) v^a(z)^2. For real p in [0, 1] this
    is the compact formula integral e^{p(p-1) v^p(z)^2 / 2} phi(z) dz.

    Requires Re(p) in [0, 1]; monotone smiles extend the range (decreasing:
    Re(p) >= 0, increasing: Re(p) <= 1, flat: any real part).
    """
    p = complex(p)
    a, b = p.real, p.imag
    extension = False
    if not 0.0 <= a <= 1.0:
        direction = _monotone_direction(slice_)
        ok = (direction == "flat"
              or (a > 1.0 and direction == "decreasing")
              or (a < 0.0 and direction == "increasing"))
        if not ok:
            raise OutsideConvergenceStrip(
                f"Re(p)={a} outside [0, 1] and the smile is not monotone in "
                "the direction required for the extension")
        extension = True
    g, va, dva = _node_transforms(slice_, a, rule, cfg, allow_extension=extension)
    z = rule.nodes
    g_of_z = z * va - (0.5 - a) * va ** 2
    values = (np.exp(1j * b * g_of_z) * np.exp(0.5 * a * (a - 1.0) * va ** 2)
              * (1.0 - 1j * b * dva))
    _finite_or_raise(values, "Bergomi integrand")
    return complex(np.sum(rule.weights * values))


def varswap_strike(slice_: SmileSlice, rule: GaussianRule,
                   cfg: InversionConfig | None = None) -> float:
    """Variance swap strike E[-2 log(S_T/F)] = integral v2(z)^2 phi(z) dz."""
    _, v2, _ = _node_transforms(slice_, 0.0, rule, cfg)
    return float(np.sum(rule.weights * v2 ** 2))


def gammaswap_strike(slice_: SmileSlice, rule: GaussianRule,
                     cfg: InversionConfig | None = None) -> float:
    """Gamma swap strike 2 E[(S_T/F) log(S_T/F)] = integral v1(z)^2 phi(z) dz."""
    _, v1, _ = _node_transforms(slice_, 1.0, rule, cfg)
    return float(np.sum(rule.weights * v1 ** 2))


def implied_cdf(slice_: SmileSlice, k):
    """Smile-implied CDF P(X_T <= k) = N(f2(k)) + phi(f2(k)) v'(k).

    Raises:
        CdfOutOfRange: if the value leaves [0, 1] (the smile admits
            arbitrage); values are never clamped.
    """
    karr = np.asarray(k, dtype=float)
    v, vp, _ = smile_vol(slice_, karr)
    f2v = karr / v + 0.5 * v
    out = ndtr(f2v) + np.exp(-0.5 * f2v ** 2) / _SQRT_2PI * vp
    if np.any(out < 0.0) or np.any(out > 1.0):
        raise CdfOutOfRange("implied CDF left [0, 1]; input smile is arbitrageable")
    return float(out) if karr.ndim == 0 else out


def implied_density(slice_: SmileSlice, k):
    """Smile-implied log-space density of X_T = log(S_T/F).

    q(k) = phi(f2(k)) [f2'(k)(1 - f2(k) v'(k)) + v''(k)]; the strike-space
    density at K = F e^k is q(k)/(F e^k). Downstream integrations use dk.

    Raises:
        NegativeDensity: if the value is negative (butterfly arbitrage).
    """
    karr = np.asarray(k, dtype=float)
    v, vp, vpp = smile_vol(slice_, karr)
    f2v = karr / v + 0.5 * v
    f2slope = (1.0 - vp * f2v) / v + vp
    out = (np.exp(-0.5 * f2v ** 2) / _SQRT_2PI
           * (f2slope * (1.0 - f2v * vp) + vpp))
    if np.any(out < 0.0):
        raise NegativeDensity("implied density negative; butterfly arbitrage")
    return float(out) if karr.ndim == 0 else out
