import cmath
import math

import numpy as np
import pytest
from scipy.integrate import simpson
from scipy.special import ndtr

from smile_moments import (
    ConstantVolSlice,
    OutsideConvergenceStrip,
    PayoffFunction,
    Representation,
    SsviParams,
    SsviSlice,
    bergomi_moment,
    charfn_dual,
    charfn_matytsin,
    dual_slice,
    gammaswap_strike,
    gauss_hermite_rule,
    g_p,
    implied_cdf,
    implied_density,
    mgf_complex,
    moment,
    moment_bounds,
    p_minus_exponent,
    p_plus_exponent,
    price_psi,
    varswap_strike,
)

from conftest import central_diff


def bs_moment(p, v):
    """Lognormal martingale oracle: E[(S/F)^p] = e^{p(p-1)v^2/2}."""
    return cmath.exp(0.5 * p * (p - 1.0) * v * v)


IDENTITY = PayoffFunction(lambda x: x, lambda x: np.ones_like(x), 1.0)


class TestMomentBounds:
    def test_exponent_functions(self):
        assert p_plus_exponent(2.0) == pytest.approx(1.0)
        assert p_minus_exponent(2.0) == pytest.approx(0.0)
        assert p_plus_exponent(0.0) == math.inf
        assert p_minus_exponent(0.0) == math.inf
        # p+ >= 1 and p- >= 0 across the admissible slope range
        for beta in np.linspace(1e-4, 2.0, 50):
            assert p_plus_exponent(beta) >= 1.0
            assert p_minus_exponent(beta) >= 0.0

    def test_paper_slice_bounds(self, ssvi):
        bounds = moment_bounds(ssvi)
        assert bounds.p_plus == pytest.approx(0.5 * (1 / 0.00875 + 0.00875 / 4 + 1), abs=1e-12)
        assert bounds.p_minus == pytest.approx(0.5 * (1 / 0.07875 + 0.07875 / 4 - 1), abs=1e-12)
        lo, hi = bounds.convergence_interval
        assert lo == -bounds.p_minus and hi == bounds.p_plus

    def test_constant_vol_unbounded(self, bs):
        bounds = moment_bounds(bs)
        assert bounds.p_plus == math.inf and bounds.p_minus == math.inf


class TestPricePsi:
    def test_total_probability(self, ssvi, bs, rule128):
        one = PayoffFunction(lambda x: np.ones_like(x), lambda x: np.zeros_like(x), 0.0)
        for slice_ in (ssvi, bs):
            assert price_psi(slice_, one, rule128) == pytest.approx(1.0, abs=1e-12)

    def test_log_contract_constant_vol(self, bs, rule128):
        # E[log(S/F)] = -v^2/2 for the lognormal martingale
        assert price_psi(bs, IDENTITY, rule128) == pytest.approx(-0.02, abs=1e-12)

    def test_squared_log_constant_vol(self, bs, rule128):
        # E[X^2] = v^2 + v^4/4
        square = PayoffFunction(lambda x: x ** 2, lambda x: 2 * x, 1.0)
        assert price_psi(bs, square, rule128) == pytest.approx(0.04 + 0.0004, abs=1e-12)

    def test_growth_order_outside_strip(self, ssvi, rule128):
        grower = PayoffFunction(lambda x: np.exp(60 * x), lambda x: 60 * np.exp(60 * x), 60.0)
        with pytest.raises(OutsideConvergenceStrip):
            price_psi(ssvi, grower, rule128)


class TestMoment:
    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_martingale_pins(self, ssvi, bs, rule128, p):
        for slice_ in (ssvi, bs):
            assert moment(slice_, p, rule128).value == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("p", [-3.0, -1.0, 0.5, 2.0, 5.0])
    def test_black_scholes_oracle(self, bs, rule128, p):
        got = moment(bs, p, rule128).value
        assert abs(got - bs_moment(p, 0.2)) <= 1e-9

    def test_report_fields(self, ssvi, rule128):
        report = moment(ssvi, 2.0, rule128)
        assert report.representation is Representation.BASE
        assert report.order == 128
        assert report.converged
        assert report.p == 2.0 + 0.0j

    def test_outside_strip_raises(self, ssvi, rule128):
        with pytest.raises(OutsideConvergenceStrip):
            moment(ssvi, 60.0, rule128)
        with pytest.raises(OutsideConvergenceStrip):
            moment(ssvi, -6.0, rule128)

    def test_duality_of_moments(self, ssvi, rule128):
        dual = dual_slice(ssvi)
        for p in (-1.0, 0.3, 2.0):
            lhs = moment(ssvi, p, rule128).value
            rhs = moment(dual, 1.0 - p, rule128).value
            assert abs(lhs - rhs) <= 1e-9

    def test_report_to_dict(self, bs, rule128):
        doc = moment(bs, 2.0, rule128).to_dict()
        assert set(doc) == {"p_re", "p_im", "value_re", "value_im",
                            "representation", "order", "converged"}
        assert doc["p_re"] == 2.0 and doc["p_im"] == 0.0


class TestMgfComplex:
    def test_unit_at_zero(self, ssvi, rule128):
        assert mgf_complex(ssvi, 0j, rule128).value == pytest.approx(1.0, abs=1e-12)

    def test_lognormal_characteristic_function(self, bs, rule128):
        got = mgf_complex(bs, 1j, rule128).value
        assert abs(got - cmath.exp(-0.02 - 0.02j)) <= 1e-12

    def test_agrees_with_real_moment(self, ssvi, rule128):
        assert mgf_complex(ssvi, 2.0 + 0j, rule128).value == pytest.approx(
            moment(ssvi, 2.0, rule128).value, abs=1e-14)

    def test_conjugate_symmetry(self, ssvi, rule128):
        for p in (0.5 + 1j, 0.2 + 0.7j, -1.0 + 2j):
            a = mgf_complex(ssvi, p, rule128).value
            b = mgf_complex(ssvi, p.conjugate(), rule128).value
            assert a == pytest.approx(b.conjugate(), abs=1e-14)

    def test_strip_enforced_on_real_part(self, ssvi, rule128):
        with pytest.raises(OutsideConvergenceStrip):
            mgf_complex(ssvi, 58.0 + 1j, rule128)


class TestCharfnRepresentations:
    def test_matytsin_at_zero(self, ssvi, rule128):
        assert charfn_matytsin(ssvi, 0.0, rule128) == pytest.approx(1.0, abs=1e-12)

    def test_dual_at_zero(self, ssvi, rule128):
        assert charfn_dual(ssvi, 0.0, rule128) == pytest.approx(1.0, abs=1e-10)

    def test_constant_vol_oracle(self, bs, rule128):
        want = cmath.exp(-0.02 - 0.02j)  # lognormal charfn at eta=1
        assert abs(charfn_matytsin(bs, 1.0, rule128) - want) <= 1e-12
        assert abs(charfn_dual(bs, 1.0, rule128) - want) <= 1e-12

    def test_matytsin_matches_base(self, ssvi, rule128):
        got = charfn_matytsin(ssvi, 2.0, rule128)
        want = mgf_complex(ssvi, 2j, rule128).value
        assert abs(got - want) <= 1e-8

    @pytest.mark.parametrize("eta", [0.5, 1.0, 2.0])
    def test_dual_matches_matytsin(self, ssvi, eta, rule128):
        assert abs(charfn_dual(ssvi, eta, rule128)
                   - charfn_matytsin(ssvi, eta, rule128)) <= 1e-8


class TestBergomi:
    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_degenerate_endpoints(self, ssvi, rule128, p):
        assert bergomi_moment(ssvi, complex(p), rule128) == pytest.approx(1.0, abs=1e-13)

    def test_constant_vol_half(self, bs, rule128):
        assert bergomi_moment(bs, 0.5 + 0j, rule128) == pytest.approx(
            math.exp(-0.005), abs=1e-12)

    def test_complex_matches_base(self, ssvi, rule128):
        p = 0.5 + 1j
        got = bergomi_moment(ssvi, p, rule128)
        want = mgf_complex(ssvi, p, rule128).value
        assert abs(got - want) <= 1e-8

    def test_flat_smile_extension(self, bs, rule128):
        # constant vol is monotone both ways: any real part is allowed
        got = bergomi_moment(bs, 1.5 + 0j, rule128)
        assert abs(got - bs_moment(1.5, 0.2)) <= 1e-10

    def test_non_monotone_smile_rejected_outside_unit_interval(self, ssvi, rule128):
        with pytest.raises(OutsideConvergenceStrip):
            bergomi_moment(ssvi, 1.5 + 0j, rule128)

    def test_representation_agreement_grid(self, ssvi, bs, rule128):
        # acceptance-grade pairwise agreement of all four representations
        for slice_ in (ssvi, bs):
            for re in (0.2, 0.5, 0.8):
                for im in (0.0, 0.5, 1.0):
                    p = complex(re, im)
                    values = [
                        mgf_complex(slice_, p, rule128).value,
                        bergomi_moment(slice_, p, rule128),
                    ]
                    if im == 0.0:
                        values.append(moment(slice_, re, rule128).value)
                    worst = max(abs(a - b) for i, a in enumerate(values)
                                for b in values[i + 1:])
                    assert worst <= 1e-8


class TestSwapStrikes:
    def test_constant_vol_strikes(self, bs, rule128):
        assert varswap_strike(bs, rule128) == pytest.approx(0.04, abs=1e-13)
        assert gammaswap_strike(bs, rule128) == pytest.approx(0.04, abs=1e-13)

    def test_varswap_equals_log_contract(self, ssvi, rule128):
        assert varswap_strike(ssvi, rule128) == pytest.approx(
            -2.0 * price_psi(ssvi, IDENTITY, rule128), abs=1e-9)

    def test_gammaswap_cross_route(self, ssvi, rule128):
        # second pricing route: 2 E[(S/F) log(S/F)]
        #   = 2 * integral [g1 + 1 - e^{g2}] phi(z) dz
        g1 = np.array([g_p(ssvi, 1.0, float(z)) for z in rule128.nodes])
        g2 = np.array([g_p(ssvi, 0.0, float(z)) for z in rule128.nodes])
        cross = 2.0 * float(np.sum(rule128.weights * (g1 + 1.0 - np.exp(g2))))
        assert gammaswap_strike(ssvi, rule128) == pytest.approx(cross, abs=1e-9)

    def test_swap_duality(self, ssvi, rule128):
        dual = dual_slice(ssvi)
        assert gammaswap_strike(ssvi, rule128) == pytest.approx(
            varswap_strike(dual, rule128), abs=1e-9)
        assert varswap_strike(ssvi, rule128) == pytest.approx(
            gammaswap_strike(dual, rule128), abs=1e-9)


class TestImpliedDistribution:
    def test_cdf_constant_vol_atm(self, bs):
        assert implied_cdf(bs, 0.0) == pytest.approx(ndtr(0.1), abs=1e-15)

    def test_cdf_tails(self, ssvi):
        assert implied_cdf(ssvi, -30.0) <= 1e-6
        assert implied_cdf(ssvi, 30.0) >= 1.0 - 1e-6

    def test_cdf_monotone(self, ssvi, bs):
        ks = np.linspace(-4, 4, 401)
        for slice_ in (ssvi, bs):
            values = implied_cdf(slice_, ks)
            assert np.all(np.diff(values) >= 0)

    def test_density_lognormal_peak(self, bs):
        # log-space lognormal density has mode at k = -v^2/2 with value phi(0)/v
        got = implied_density(bs, -0.02)
        assert got == pytest.approx(math.exp(0.0) / math.sqrt(2 * math.pi) / 0.2,
                                    abs=1e-12)

    def test_density_nonnegative(self, ssvi, bs):
        ks = np.linspace(-3, 3, 601)
        for slice_ in (ssvi, bs):
            assert np.all(implied_density(slice_, ks) >= 0)

    @pytest.mark.parametrize("fixture", ["ssvi", "bs"])
    def test_density_normalizes(self, fixture, request):
        slice_ = request.getfixturevalue(fixture)
        ks = np.linspace(-60, 60, 120001)
        total = simpson(implied_density(slice_, ks), x=ks)
        assert abs(total - 1.0) <= 1e-8

    @pytest.mark.parametrize("fixture", ["ssvi", "bs"])
    def test_density_martingale(self, fixture, request):
        slice_ = request.getfixturevalue(fixture)
        ks = np.linspace(-60, 60, 120001)
        mean = simpson(np.exp(ks) * implied_density(slice_, ks), x=ks)
        assert abs(mean - 1.0) <= 1e-7

    def test_cdf_density_consistency(self, ssvi):
        # in the far right tail the cdf saturates at 1 and differencing it
        # bottoms out at ulp(1)/2h ~ 1e-11, so tiny densities are checked
        # absolutely there
        for k in np.linspace(-3, 3, 25):
            fd = central_diff(lambda x: implied_cdf(ssvi, x), k)
            density = implied_density(ssvi, k)
            if density >= 1e-8:
                assert fd == pytest.approx(density, rel=1e-5)
            else:
                assert abs(fd - density) <= 5e-11

    def test_scalar_and_vector_agree(self, ssvi):
        ks = np.array([-1.0, 0.3])
        np.testing.assert_array_equal(
            implied_cdf(ssvi, ks), [implied_cdf(ssvi, -1.0), implied_cdf(ssvi, 0.3)])
