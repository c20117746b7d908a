"""Normalizing transformations of the smile and their numerical inverses.

The second/first normalizing transformations are
    f2(k) = k/v(k) + v(k)/2,      f1(k) = k/v(k) - v(k)/2,
and the interpolated map f(p, k) = p f1(k) + (1-p) f2(k) is strictly
increasing for p in [0, 1] on any arbitrage-free smile, with inverse
g(p, .). The p-normalized volatility is v^p(z) = v(g(p, z)).

Inversion is a bracketed bisection/secant hybrid on the residual
f(p, k) - z, with geometric bracket expansion; robustness over speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    BracketingFailed,
    DerivativeSingular,
    MaxIterExceeded,
    NonPositiveVol,
)
from .smiles import (
    ConstantVolSlice,
    SmileSlice,
    SsviParams,
    SsviSlice,
    smile_vol,
    wing_slopes,
)

MAX_BRACKET_EXPANSIONS = 64


@dataclass(frozen=True)
class InversionConfig:
    """Knobs for the transform inversion."""

    bracket_expand_factor: float = 2.0
    tol_abs: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not self.bracket_expand_factor > 1:
            raise ValueError("bracket_expand_factor must be > 1")
        if not self.tol_abs > 0:
            raise ValueError("tol_abs must be positive")
        if not self.max_iter > 0:
            raise ValueError("max_iter must be positive")


DEFAULT_INVERSION = InversionConfig()


class SurjectiveVerdict(Enum):
    SURJECTIVE_LIKELY = "SURJECTIVE_LIKELY"
    NOT_SURJECTIVE = "NOT_SURJECTIVE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class SurjectivityThresholds:
    """Interval (-p_tilde_minus, p_tilde_plus) on which f(p,.) is surjective."""

    p_tilde_plus: float
    p_tilde_minus: float


@dataclass(frozen=True)
class MonotonicityReport:
    """Grid scan of the sign of d/dk f(p, k)."""

    p: float
    k_lo: float
    k_hi: float
    n: int
    monotone_increasing: bool
    sign_changes: tuple
    limit_left: int
    limit_right: int
    surjective_verdict: SurjectiveVerdict

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "k_lo": self.k_lo,
            "k_hi": self.k_hi,
            "n": self.n,
            "monotone_increasing": self.monotone_increasing,
            "sign_changes": list(self.sign_changes),
            "limit_left": self.limit_left,
            "limit_right": self.limit_right,
            "surjective_verdict": self.surjective_verdict.value,
        }


def _vol_checked(slice_: SmileSlice, k):
    v, vp, vpp = smile_vol(slice_, k)
    if np.any(np.asarray(v) <= 0.0):
        raise NonPositiveVol("total implied volatility must be positive")
    return v, vp, vpp


def f1(slice_: SmileSlice, k):
    """First normalizing transformation f1(k) = k/v(k) - v(k)/2."""
    v, _, _ = _vol_checked(slice_, k)
    return k / v - 0.5 * v


def f2(slice_: SmileSlice, k):
    """Second normalizing transformation f2(k) = k/v(k) + v(k)/2."""
    v, _, _ = _vol_checked(slice_, k)
    return k / v + 0.5 * v


def f_p(slice_: SmileSlice, p: float, k):
    """Interpolated transformation p*f1 + (1-p)*f2; f(0,.) = f2, f(1,.) = f1."""
    v, _, _ = _vol_checked(slice_, k)
    return p * (k / v - 0.5 * v) + (1.0 - p) * (k / v + 0.5 * v)


def f_p_slope(slice_: SmileSlice, p: float, k):
    """Analytic d/dk f(p, k) = (1/v)(1 - v' f2) + (1-p) v'."""
    v, vp, _ = _vol_checked(slice_, k)
    return (1.0 - vp * (k / v + 0.5 * v)) / v + (1.0 - p) * vp


def _bracket(residual, z: float, factor: float):
    """Expand [z-1, z+1] in k-space until the residual changes sign."""
    lo, hi = z - 1.0, z + 1.0
    r_lo, r_hi = residual(lo), residual(hi)
    width = hi - lo
    for _ in range(MAX_BRACKET_EXPANSIONS):
        if r_lo <= 0.0 <= r_hi:
            return lo, hi, r_lo, r_hi
        if r_lo > 0.0:
            lo -= width
            r_lo = residual(lo)
        if r_hi < 0.0:
            hi += width
            r_hi = residual(hi)
        width *= factor
    if r_lo <= 0.0 <= r_hi:
        return lo, hi, r_lo, r_hi
    raise BracketingFailed(
        f"no sign change after {MAX_BRACKET_EXPANSIONS} expansions; "
        "f(p,.) is likely not surjective at this point")


def _bisect_secant(residual, lo, hi, r_lo, r_hi, cfg: InversionConfig):
    """Solve residual(k) = 0 on a sign-change bracket; residual-based stop."""
    a, b, ra, rb = lo, hi, r_lo, r_hi
    if abs(ra) <= abs(rb):
        x, rx, x_prev, r_prev = a, ra, b, rb
    else:
        x, rx, x_prev, r_prev = b, rb, a, ra
    for _ in range(cfg.max_iter):
        if abs(rx) <= cfg.tol_abs:
            return x
        denom = rx - r_prev
        cand = x - rx * (x - x_prev) / denom if denom != 0.0 else math.nan
        if not a < cand < b:
            cand = 0.5 * (a + b)
        rc = residual(cand)
        x_prev, r_prev = x, rx
        x, rx = cand, rc
        if rc < 0.0:
            a, ra = cand, rc
        elif rc > 0.0:
            b, rb = cand, rc
        else:
            return cand
    raise MaxIterExceeded(
        f"inversion residual above {cfg.tol_abs} after {cfg.max_iter} iterations")


def g_p(slice_: SmileSlice, p: float, z: float,
        cfg: InversionConfig | None = None, *, allow_extension: bool = False) -> float:
    """Invert the interpolated transformation: k with f(p, k) = z.

    For p in [0, 1] the map is strictly increasing on any arbitrage-free
    smile. Outside [0, 1] inversion only makes sense on smiles where the
    map stays monotone (decreasing smiles for p >= 0, increasing for
    p <= 1); the caller asserts that via ``allow_extension``, and a slope
    precheck over the located bracket rejects non-monotone cases.

    Raises:
        BracketingFailed: target never enclosed (non-surjectivity signal).
        MaxIterExceeded: residual tolerance not met within max_iter.
        ValueError: p outside [0, 1] without ``allow_extension``, or the
            monotonicity precheck fails.
    """
    cfg = cfg or DEFAULT_INVERSION
    if not 0.0 <= p <= 1.0 and not allow_extension:
        raise ValueError(
            f"p={p} outside [0, 1]; pass allow_extension=True after checking "
            "monotonicity (see monotonicity_scan)")

    def residual(k):
        return float(f_p(slice_, p, k)) - z

    lo, hi, r_lo, r_hi = _bracket(residual, float(z), cfg.bracket_expand_factor)
    if allow_extension and not 0.0 <= p <= 1.0:
        probe = np.linspace(lo, hi, 65)
        if np.any(np.asarray(f_p_slope(slice_, p, probe)) <= 0.0):
            raise ValueError(
                f"f({p},.) is not monotone increasing on [{lo:.3g}, {hi:.3g}]; "
                "extension inversion refused")
    return _bisect_secant(residual, lo, hi, r_lo, r_hi, cfg)


def normalized_vol(slice_: SmileSlice, p: float, z: float,
                   cfg: InversionConfig | None = None, *,
                   allow_extension: bool = False) -> float:
    """p-normalized volatility v^p(z) = v(g(p, z)); v^1 = v1, v^0 = v2."""
    k = g_p(slice_, p, z, cfg, allow_extension=allow_extension)
    return float(smile_vol(slice_, k)[0])


def normalized_vol_deriv(slice_: SmileSlice, p: float, z: float,
                         cfg: InversionConfig | None = None, *,
                         allow_extension: bool = False) -> float:
    """d/dz v^p(z), computed as v'(g) / (d/dk f(p, .) at g).

    Raises:
        DerivativeSingular: if the transform slope vanishes at the
            inversion point.
    """
    k = g_p(slice_, p, z, cfg, allow_extension=allow_extension)
    _, vp, _ = smile_vol(slice_, k)
    slope = float(f_p_slope(slice_, p, k))
    if slope == 0.0:
        raise DerivativeSingular(f"d/dk f({p}, k) = 0 at k = {k}")
    return float(vp) / slope


def dual_slice(slice_: SmileSlice) -> SmileSlice:
    """Put-call dual smile, v_hat(k) = v(-k).

    For SSVI this is the same slice with rho negated; a constant smile is
    self-dual.
    """
    if isinstance(slice_, ConstantVolSlice):
        return slice_
    p = slice_.params
    return SsviSlice(SsviParams(p.theta, -p.rho, p.phi))


def surjectivity_thresholds(slice_: SmileSlice) -> SurjectivityThresholds:
    """Thresholds p_tilde+- = 1/beta+- +- 1/2 (infinite for zero slopes).

    f(p,.) is surjective on R for every p in (-p_tilde_minus, p_tilde_plus);
    this interval contains the moment convergence interval, strictly unless
    a wing slope equals 2.
    """
    slopes = wing_slopes(slice_)
    p_plus = math.inf if slopes.beta_plus == 0 else 1.0 / slopes.beta_plus + 0.5
    p_minus = math.inf if slopes.beta_minus == 0 else 1.0 / slopes.beta_minus - 0.5
    return SurjectivityThresholds(p_plus, p_minus)


def monotonicity_scan(slice_: SmileSlice, p: float, k_lo: float, k_hi: float,
                      n: int) -> MonotonicityReport:
    """Scan the sign of d/dk f(p, k) on a uniform grid.

    Sign changes are strict flips between adjacent nodes (grid resolution is
    the caller's responsibility). The surjectivity verdict combines the
    threshold interval with the signs of f at the grid ends: matching end
    signs mean f cannot be surjective; p strictly inside the threshold
    interval is surjective by construction; exactly at a threshold the
    verdict is INCONCLUSIVE (the paper's conjecture is not assumed).
    """
    if not k_lo < k_hi:
        raise ValueError("k_lo must be below k_hi")
    if n < 3:
        raise ValueError("n must be at least 3")
    grid = np.linspace(k_lo, k_hi, int(n))
    slope = np.asarray(f_p_slope(slice_, p, grid))
    signs = np.sign(slope)
    flips = np.nonzero(signs[1:] * signs[:-1] < 0)[0]
    sign_changes = tuple(0.5 * (grid[i] + grid[i + 1]) for i in flips)
    monotone = bool(np.all(slope > 0.0))

    thresholds = surjectivity_thresholds(slice_)
    left = int(np.sign(float(f_p(slice_, p, k_lo))))
    right = int(np.sign(float(f_p(slice_, p, k_hi))))
    if p == thresholds.p_tilde_plus or p == -thresholds.p_tilde_minus:
        verdict = SurjectiveVerdict.INCONCLUSIVE
    elif -thresholds.p_tilde_minus < p < thresholds.p_tilde_plus:
        verdict = SurjectiveVerdict.SURJECTIVE_LIKELY
    elif left == right and left != 0:
        verdict = SurjectiveVerdict.NOT_SURJECTIVE
    else:
        verdict = SurjectiveVerdict.INCONCLUSIVE
    return MonotonicityReport(
        p=float(p), k_lo=float(k_lo), k_hi=float(k_hi), n=int(n),
        monotone_increasing=monotone, sign_changes=sign_changes,
        limit_left=left, limit_right=right, surjective_verdict=verdict)
