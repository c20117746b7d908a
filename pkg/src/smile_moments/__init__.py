"""Smile analytics: model-free risk-neutral quantities from an implied-vol smile.

The library turns a total implied volatility smile v(k) into normalizing
transformations, generalized moments and characteristic functions, swap
strikes, the implied distribution, and Fourier put prices, with SSVI as the
built-in parametric smile and constant-vol Black-Scholes closed forms as
verification oracles.
"""

from .analytics import (
    MomentBounds,
    MomentReport,
    PayoffFunction,
    Representation,
    bergomi_moment,
    charfn_dual,
    charfn_matytsin,
    gammaswap_strike,
    implied_cdf,
    implied_density,
    mgf_complex,
    moment,
    moment_bounds,
    moment_dual,
    moment_matytsin,
    p_minus_exponent,
    p_plus_exponent,
    price_psi,
    varswap_strike,
)
from .calibrate import (
    CalibrationResult,
    MarketQuote,
    fit_ssvi,
    read_quotes_csv,
)
from .errors import (
    AlphaOnPole,
    AlphaOutOfStrip,
    BracketingFailed,
    CalibrationDiverged,
    CdfOutOfRange,
    DerivativeSingular,
    InsufficientQuotes,
    MaxIterExceeded,
    NegativeDensity,
    NonFiniteIntegrand,
    NonPositiveVariance,
    NonPositiveVol,
    OrderOutOfRange,
    OutsideConvergenceStrip,
    SmileMomentsError,
    TruncationInsufficient,
)
from .fourier import (
    InversionSpec,
    bs_put_reference,
    eval_contour_integral,
    put_price_fourier,
    residue_term,
)
from .quadrature import (
    ConvergenceTable,
    GaussianRule,
    gauss_hermite_rule,
    integrate_gaussian,
    richardson_convergence,
)
from .smiles import (
    ConstantVolSlice,
    SmileSlice,
    SsviParams,
    SsviSlice,
    ValidationReport,
    WingSlopes,
    load_smile_config,
    parse_smile_config,
    smile_config_dict,
    smile_vol,
    ssvi_derivatives,
    ssvi_total_variance,
    validate_ssvi,
    verify_assumptions,
    vol_from_variance,
    wing_slopes,
)
from .transforms import (
    InversionConfig,
    MonotonicityReport,
    SurjectiveVerdict,
    SurjectivityThresholds,
    dual_slice,
    f1,
    f2,
    f_p,
    f_p_slope,
    g_p,
    monotonicity_scan,
    normalized_vol,
    normalized_vol_deriv,
    surjectivity_thresholds,
)

__version__ = "0.1.0"
