import cmath
import math

import numpy as np
import pytest
from scipy.special import ndtr

from smile_moments import (
    AlphaOnPole,
    AlphaOutOfStrip,
    ConstantVolSlice,
    InversionSpec,
    TruncationInsufficient,
    bs_put_reference,
    eval_contour_integral,
    put_price_fourier,
    residue_term,
)

STRIKES = [0.8, 0.9, 1.0, 1.1, 1.25]
TWO_PI_I = 2j * math.pi


class TestResidueTerm:
    def test_middle_window(self):
        assert residue_term(0.5, 1.2, 10.0, 10.0) == pytest.approx(1.2)

    def test_upper_window(self):
        assert residue_term(1.5, 1.2, 10.0, 10.0) == pytest.approx(0.2)

    def test_lower_window(self):
        assert residue_term(-0.5, 1.2, 10.0, 10.0) == 0.0

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_poles_rejected(self, alpha):
        with pytest.raises(AlphaOnPole):
            residue_term(alpha, 1.0, 10.0, 10.0)

    @pytest.mark.parametrize("alpha", [11.0, -11.0])
    def test_outside_strip_rejected(self, alpha):
        with pytest.raises(AlphaOutOfStrip):
            residue_term(alpha, 1.0, 10.0, 10.0)


class TestBsPutReference:
    def test_atm_constant_vol(self, bs):
        # ATM put with F=1: K N(v/2) - N(-v/2) = 2 N(0.1) - 1
        assert bs_put_reference(bs, 1.0) == pytest.approx(2 * ndtr(0.1) - 1, abs=1e-15)

    def test_worthless_at_tiny_strike(self, bs):
        assert bs_put_reference(bs, 1e-8) <= 1e-12

    def test_deep_itm_is_intrinsic(self, bs):
        assert bs_put_reference(bs, 5.0) == pytest.approx(4.0, abs=1e-10)

    def test_smile_price_is_bs_at_smile_vol(self, ssvi):
        # by definition of implied vol
        from smile_moments import smile_vol
        K = 1.1
        k = math.log(K)
        v = smile_vol(ssvi, k)[0]
        want = K * ndtr(k / v + v / 2) - ndtr(k / v - v / 2)
        assert bs_put_reference(ssvi, K) == pytest.approx(want, abs=1e-16)

    def test_strike_must_be_positive(self, bs):
        with pytest.raises(ValueError):
            bs_put_reference(bs, 0.0)


class TestPutPriceFourier:
    @pytest.mark.parametrize("K", STRIKES)
    def test_round_trip_constant_vol(self, bs, rule128, K):
        got = put_price_fourier(bs, K, InversionSpec(), rule128)
        assert abs(got - bs_put_reference(bs, K)) <= 1e-6

    @pytest.mark.parametrize("K", STRIKES)
    def test_round_trip_ssvi(self, ssvi, rule128, K):
        got = put_price_fourier(ssvi, K, InversionSpec(), rule128)
        assert abs(got - bs_put_reference(ssvi, K)) <= 1e-6

    @pytest.mark.parametrize("K", [0.8, 1.0, 1.2])
    def test_alpha_invariance(self, bs, ssvi, rule128, K):
        for slice_ in (bs, ssvi):
            a = put_price_fourier(slice_, K, InversionSpec(alpha=0.5), rule128)
            b = put_price_fourier(slice_, K, InversionSpec(alpha=0.25), rule128)
            assert abs(a - b) <= 2e-6

    def test_upper_alpha_window_constant_vol(self, bs, rule128):
        # constant vol has p* = infinity, so alpha > 1 is admissible (R = K-1)
        got = put_price_fourier(bs, 1.2, InversionSpec(alpha=1.5), rule128)
        assert abs(got - bs_put_reference(bs, 1.2)) <= 1e-6

    def test_negative_alpha_window(self, bs, ssvi, rule128):
        for slice_ in (bs, ssvi):
            got = put_price_fourier(slice_, 0.9, InversionSpec(alpha=-0.5), rule128)
            assert abs(got - bs_put_reference(slice_, 0.9)) <= 2e-6

    def test_alpha_outside_ssvi_strip(self, ssvi, rule128):
        with pytest.raises(AlphaOutOfStrip):
            put_price_fourier(ssvi, 1.0, InversionSpec(alpha=60.0), rule128)

    def test_put_call_parity_bounds(self, ssvi, rule128):
        spec = InversionSpec()
        for K in np.linspace(0.5, 2.0, 7):
            put = put_price_fourier(ssvi, float(K), spec, rule128)
            call = put + 1.0 - K
            assert -1e-8 <= call <= 1.0 + 1e-8
            assert put >= -1e-8

    def test_monotone_in_strike(self, bs, rule128):
        spec = InversionSpec()
        prices = [put_price_fourier(bs, K, spec, rule128)
                  for K in np.linspace(0.6, 1.6, 11)]
        assert all(b >= a - 1e-10 for a, b in zip(prices, prices[1:]))

    def test_truncation_insufficient_for_tiny_vol(self, rule128):
        # charfn of a nearly-deterministic terminal price barely decays by u_max
        with pytest.raises(TruncationInsufficient):
            put_price_fourier(ConstantVolSlice(0.005), 1.0, InversionSpec(), rule128)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            InversionSpec(u_max=-1.0)
        with pytest.raises(ValueError):
            InversionSpec(n_u=4000)  # must be odd so the grid contains u=0


class TestContourIntegral:
    CASES = [
        (-1.0, -0.5, 0.0),
        (-1.0, 0.5, TWO_PI_I),
        (1.0, -0.5, -TWO_PI_I),
        (1.0, 0.5, 0.0),
    ]

    @pytest.mark.parametrize("c,d,want", CASES)
    def test_four_cases(self, c, d, want):
        got = eval_contour_integral(c, d, 400.0, 200001)
        assert abs(got - want) <= 1e-3

    def test_converges_with_radius(self):
        errs = [abs(eval_contour_integral(1.0, -0.5, R, 100001) + TWO_PI_I)
                for R in (50.0, 200.0, 800.0)]
        assert errs[2] < errs[0]

    def test_pole_on_contour_rejected(self):
        with pytest.raises(ValueError):
            eval_contour_integral(1.0, 0.0, 100.0, 1001)
        with pytest.raises(ValueError):
            eval_contour_integral(0.0, 1.0, 100.0, 1001)


class TestMellinKernelIdentity:
    def test_inversion_matches_analytic_charfn(self, bs):
        # with the exact lognormal charfn the u-trapezoid alone reproduces the
        # closed form; pins the kernel K^{1-alpha-iu}/((alpha+iu)(alpha-1+iu))
        alpha, umax, n = 0.5, 200.0, 4001
        v = bs.total_vol
        us = np.linspace(-umax, umax, n)
        p = alpha + 1j * us
        mgf = np.exp(0.5 * p * (p - 1.0) * v * v)
        K = 0.9
        integrand = K ** (1.0 - alpha - 1j * us) / ((alpha + 1j * us)
                                                    * (alpha - 1.0 + 1j * us)) * mgf
        got = K + float(np.trapezoid(integrand, us).real) / (2.0 * math.pi)
        assert abs(got - bs_put_reference(bs, K)) <= 1e-10
