"""Command-line front end.

Thin orchestration over the library: every number a subcommand emits is
obtainable through the API with the same inputs. Outputs are CSV or JSON
written to --out (stdout when absent, reserved for data; diagnostics go to
stderr). Floats are formatted with 17 significant digits so outputs are
byte-identical across runs.

Exit codes: 0 success; 2 invalid input or arbitrageable smile; 3 requested
order outside the convergence strip (or bad damping abscissa); 4 numerical
failure (bracketing, non-convergence, truncation).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import analytics, calibrate, fourier, smiles, transforms
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
    TruncationInsufficient,
)
from .quadrature import MAX_ORDER, gauss_hermite_rule

ENV_ORDER = "SMILE_MOMENTS_ORDER"
DEFAULT_ORDER = 128

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_OUTSIDE_STRIP = 3
EXIT_NUMERICAL = 4

_INPUT_ERRORS = (ValueError, OSError, NonPositiveVariance, NonPositiveVol,
                 CdfOutOfRange, NegativeDensity, InsufficientQuotes,
                 OrderOutOfRange)
_STRIP_ERRORS = (OutsideConvergenceStrip, AlphaOutOfStrip, AlphaOnPole)
_NUMERICAL_ERRORS = (BracketingFailed, MaxIterExceeded, DerivativeSingular,
                     NonFiniteIntegrand, TruncationInsufficient,
                     CalibrationDiverged)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be lo:hi:count, got {spec!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("grid count must be >= 1")
    return np.linspace(lo, hi, count)


def _resolve_order(args) -> int:
    order = args.order
    if order is None:
        raw = os.environ.get(ENV_ORDER)
        order = int(raw) if raw is not None else DEFAULT_ORDER
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in [1, {MAX_ORDER}], got {order}")
    return order


def _csv(header: list, rows: list) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, bool):
                cells.append("true" if cell else "false")
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            else:
                cells.append(_fmt(float(cell)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


_REPORT_HEADER = ["p_re", "p_im", "value_re", "value_im", "order", "converged"]


def _report_rows(reports) -> list:
    return [[r.p.real, r.p.imag, r.value.real, r.value.imag, r.order, r.converged]
            for r in reports]


def _cmd_validate(args) -> int:
    slice_ = smiles.load_smile_config(args.smile)
    if isinstance(slice_, smiles.SsviSlice):
        validation = smiles.validate_ssvi(slice_.params)
    else:
        validation = smiles.ValidationReport(())
    assumptions = smiles.verify_assumptions(slice_, args.k_probe)
    doc = {"validation": validation.to_dict(),
           "assumptions": assumptions.to_dict()}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK if validation.ok and assumptions.ok else EXIT_INVALID_INPUT


def _cmd_moments(args) -> int:
    slice_ = smiles.load_smile_config(args.smile)
    rule = gauss_hermite_rule(_resolve_order(args))
    reports = [analytics.moment(slice_, p, rule)
               for p in _grid(f"{args.p_min}:{args.p_max}:{args.steps}")]
    _emit(_csv(_REPORT_HEADER, _report_rows(reports)), args.out)
    return EXIT_OK


def _cmd_charfn(args) -> int:
    slice_ = smiles.load_smile_config(args.smile)
    rule = gauss_hermite_rule(_resolve_order(args))
    fn = {"matytsin": analytics.charfn_matytsin,
          "dual": analytics.charfn_dual,
          "base": lambda s, eta, r: analytics.mgf_complex(s, 1j * eta, r).value,
          }[args.representation]
    rows = []
    for eta in _grid(f"{args.eta_min}:{args.eta_max}:{args.steps}"):
        value = fn(slice_, float(eta), rule)
        rows.append([eta, value.real, value.imag])
    _emit(_csv(["eta", "value_re", "value_im"], rows), args.out)
    return EXIT_OK


def _cmd_bergomi(args) -> int:
    slice_ = smiles.load_smile_config(args.smile)
    rule = gauss_hermite_rule(_resolve_order(args))
    rows = []
    for im in _grid(f"{args.im_min}:{args.im_max}:{args.steps}"):
        p = complex(args.p_re, float(im))
        value = analytics.bergomi_moment(slice_, p, rule)
        rows.append([p.real, p.imag, value.real, value.imag, rule.order, True])
    _emit(_csv(_REPORT_HEADER, rows), args.out)
    return EXIT_OK


def _cmd_swap(args) -> int:
    slice_ = smiles.load_smile_config(args.smile)
    rule = gauss_hermite_rule(_resolve_order(args))
    doc = {"varswap_strike": analytics.varswap_strike(slice_, rule),
           "gammaswap_strike": analytics.gammaswap_strike(slice_, rule),
           "order": rule.order}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_scan(args) -> int:
    slice_ = smiles.load_smile_config(args.smile)
    report = transforms.monotonicity_scan(slice_, args.p, args.k_min,
                                          args.k_max, args.n)
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    return EXIT_OK


def _put_rows(slice_, strikes, args):
    spec = fourier.InversionSpec(args.alpha, args.u_max, args.n_u)
    rule = gauss_hermite_rule(_resolve_order(args))
    rows = []
    for K in strikes:
        price = fourier.put_price_fourier(slice_, float(K), spec, rule)
        reference = fourier.bs_put_reference(slice_, float(K))
        rows.append([K, price, reference, abs(price - reference)])
    return rows


def _cmd_put(args) -> int:
    slice_ = smiles.load_smile_config(args.smile)
    rows = _put_rows(slice_, _grid(args.strike_grid), args)
    _emit(_csv(["K", "fourier_price", "bs_reference", "abs_diff"], rows), args.out)
    return EXIT_OK


def _cmd_bscheck(args) -> int:
    slice_ = smiles.load_smile_config(args.smile)
    ks = _grid(args.k_grid)
    rows = _put_rows(slice_, np.exp(ks), args)
    rows = [[k] + row for k, row in zip(ks, rows)]
    _emit(_csv(["k", "K", "fourier_price", "bs_reference", "abs_diff"], rows),
          args.out)
    max_diff = max(row[-1] for row in rows)
    print(f"max_abs_diff={_fmt(max_diff)}", file=sys.stderr)
    return EXIT_OK


def _cmd_cdf(args) -> int:
    slice_ = smiles.load_smile_config(args.smile)
    ks = _grid(args.k_grid)
    values = analytics.implied_cdf(slice_, ks)
    _emit(_csv(["k", "cdf"], list(zip(ks, np.atleast_1d(values)))), args.out)
    return EXIT_OK


def _cmd_density(args) -> int:
    slice_ = smiles.load_smile_config(args.smile)
    ks = _grid(args.k_grid)
    values = analytics.implied_density(slice_, ks)
    _emit(_csv(["k", "density"], list(zip(ks, np.atleast_1d(values)))), args.out)
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    quotes = calibrate.read_quotes_csv(args.quotes)
    result = calibrate.fit_ssvi(quotes)
    doc = smiles.smile_config_dict(smiles.SsviSlice(result.params))
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    print(f"rmse={_fmt(result.rmse)} iterations={result.iterations} "
          f"constraint_active={str(result.constraint_active).lower()}",
          file=sys.stderr)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smile-moments",
        description="Risk-neutral moments, characteristic functions, and "
                    "swap strikes from an implied-volatility smile.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        return p

    def add_smile(p, with_order=True):
        p.add_argument("--smile", required=True, help="smile config JSON path")
        if with_order:
            p.add_argument("--order", type=int, default=None,
                           help=f"quadrature order (default {DEFAULT_ORDER}; "
                                f"env {ENV_ORDER} overrides)")

    p = add("validate", _cmd_validate, "no-arbitrage and assumption checks")
    add_smile(p, with_order=False)
    p.add_argument("--k-probe", type=float, default=1e4,
                   help="probe log-strike for the assumption checks")

    p = add("moments", _cmd_moments, "moment curve E[(S/F)^p] over a p-range")
    add_smile(p)
    p.add_argument("--p-min", type=float, required=True)
    p.add_argument("--p-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)

    p = add("charfn", _cmd_charfn, "characteristic function over an eta-range")
    add_smile(p)
    p.add_argument("--eta-min", type=float, required=True)
    p.add_argument("--eta-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--representation", default="matytsin",
                   choices=["matytsin", "dual", "base"])

    p = add("bergomi", _cmd_bergomi, "Bergomi-form moments over an Im(p)-range")
    add_smile(p)
    p.add_argument("--p-re", type=float, required=True)
    p.add_argument("--im-min", type=float, default=0.0)
    p.add_argument("--im-max", type=float, default=0.0)
    p.add_argument("--steps", type=int, default=1)

    p = add("swap", _cmd_swap, "variance and gamma swap strikes")
    add_smile(p)

    p = add("scan", _cmd_scan, "monotonicity/surjectivity scan of f(p,.)")
    add_smile(p, with_order=False)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--k-min", type=float, required=True)
    p.add_argument("--k-max", type=float, required=True)
    p.add_argument("--n", type=int, required=True)

    p = add("put", _cmd_put, "Fourier put prices vs the closed form")
    add_smile(p)
    p.add_argument("--strike-grid", required=True, help="K grid lo:hi:count")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--u-max", type=float, default=200.0)
    p.add_argument("--n-u", type=int, default=4001)

    p = add("bscheck", _cmd_bscheck, "Black-Scholes recovery check on a k-grid")
    add_smile(p)
    p.add_argument("--k-grid", required=True, help="log-strike grid lo:hi:count")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--u-max", type=float, default=200.0)
    p.add_argument("--n-u", type=int, default=4001)

    p = add("cdf", _cmd_cdf, "smile-implied CDF on a k-grid")
    add_smile(p, with_order=False)
    p.add_argument("--k-grid", required=True)

    p = add("density", _cmd_density, "smile-implied density on a k-grid")
    add_smile(p, with_order=False)
    p.add_argument("--k-grid", required=True)

    p = add("calibrate", _cmd_calibrate, "fit an SSVI slice to quote CSV")
    p.add_argument("--quotes", required=True, help="CSV with header k,v")

    return parser


def _mend_grid_args(argv: list) -> list:
    """Join grid flags with their values so '-1:1:21' is not read as a flag."""
    grid_flags = {"--k-grid", "--strike-grid"}
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in grid_flags and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    argv = _mend_grid_args(list(sys.argv[1:] if argv is None else argv))
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _STRIP_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTSIDE_STRIP
    except _NUMERICAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
