"""Tests for the closed-form constants and the concentration bounds."""

import math

import numpy as np
import pytest

from bellsurvey.bounds import (
    BoundQuery,
    BoundReport,
    bell_operator_norm_bound,
    c_dn,
    chi,
    chi_alternate,
    expected_value_bounds,
    jensen_expectation_bound,
    levy_tail,
    levy_tail_log,
    lipschitz_constants,
    net_params,
    product_expectation_bound,
    theorem1_bound,
    theorem2_bound,
    theorem_bound,
)
from bellsurvey.errors import PreconditionError, ValidationError
from bellsurvey.qcore import sample_settings

LEVY = 9 * math.pi ** 3


# =============================================================================
# Test: Constants
# =============================================================================


class TestCdn:
    @pytest.mark.parametrize("n_sites", [1, 2, 5, 20])
    def test_qubits(self, n_sites):
        assert c_dn(2, n_sites) == 1.0

    def test_qutrits_four_sites(self):
        assert c_dn(3, 4) == pytest.approx(7 / 9, rel=1e-12)

    def test_decreases_toward_limit(self):
        values = [c_dn(3, n) for n in range(1, 40)]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] == pytest.approx(1 / 3, abs=1e-3)

    def test_rejects_bad_input(self):
        with pytest.raises(ValidationError):
            c_dn(1, 3)


class TestChi:
    def test_endpoints(self):
        assert chi(0.0) == pytest.approx(2.0, rel=1e-15)
        assert chi(1.0) == 1.0

    def test_half(self):
        assert chi(0.5) == pytest.approx(((1 + math.sqrt(2)) / 2) ** 2, rel=1e-12)

    def test_strictly_decreasing(self):
        values = [chi(lam) for lam in np.linspace(0, 1, 101)]
        assert all(b < a for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("lam", [0.0, 0.2, 0.5, 0.9, 1.0])
    def test_alternate_form(self, lam):
        assert chi_alternate(lam) == pytest.approx(chi(lam), rel=1e-12)

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            chi(1.2)


class TestLipschitz:
    def test_two_sites(self):
        state, settings_factor, noisy = lipschitz_constants(2)
        assert state == pytest.approx(2 ** 1.5)
        assert settings_factor == 8
        assert noisy == pytest.approx(state)

    @pytest.mark.parametrize("n_sites", [2, 5, 9])
    def test_noiseless_limit(self, n_sites):
        state, _, noisy = lipschitz_constants(n_sites, 0.0)
        assert noisy == pytest.approx(state, rel=1e-12)

    @pytest.mark.parametrize("n_sites", [2, 5, 9])
    def test_fully_mixed(self, n_sites):
        assert lipschitz_constants(n_sites, 1.0)[2] == pytest.approx(math.sqrt(2))

    def test_operator_norm_bound(self):
        assert bell_operator_norm_bound(3) == 2.0


class TestExpectedValueBounds:
    def test_qubits(self):
        assert expected_value_bounds(2, 6) == (1.0, 1.0)

    def test_qutrits(self):
        noiseless, noisy = expected_value_bounds(3, 3)
        assert noiseless == pytest.approx((2 / 3) ** 1.5 + 1 / 3, rel=1e-12)
        assert noiseless == pytest.approx(0.877697, abs=1e-6)
        assert noisy == 1.0

    @pytest.mark.parametrize("d,n_sites", [(2, 3), (3, 3), (4, 2)])
    def test_per_settings_bounds_are_ordered(self, d, n_sites):
        for seed in range(5):
            settings = sample_settings(d, n_sites, seed=seed, require_nondull=True)
            jensen = jensen_expectation_bound(settings)
            product = product_expectation_bound(settings)
            assert jensen <= product + 1e-12
            assert product <= c_dn(d, n_sites) + 1e-12


# =============================================================================
# Test: Levy tail and nets
# =============================================================================


class TestLevyTail:
    def test_vacuous_limit(self):
        assert levy_tail(3, 1e-12, 1.0) == pytest.approx(2.0)

    def test_hand_value(self):
        assert levy_tail(3, 1.0, 1.0) == pytest.approx(2 * math.exp(-4 / LEVY), rel=1e-12)
        assert levy_tail(3, 1.0, 1.0) == pytest.approx(1.97146, abs=1e-5)

    def test_lipschitz_scaling(self):
        base = levy_tail_log(10, 0.5, 1.0) - math.log(2)
        doubled = levy_tail_log(10, 0.5, 2.0) - math.log(2)
        assert doubled == pytest.approx(base / 4, rel=1e-12)

    @pytest.mark.parametrize("epsilon,lipschitz", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
    def test_rejects_non_positive(self, epsilon, lipschitz):
        with pytest.raises(ValidationError):
            levy_tail(3, epsilon, lipschitz)


class TestNetParams:
    def test_two_qubits(self):
        net = net_params(2, 2, 0.5)
        assert net.epsilon == 1 / 128
        assert net.m == 127
        assert net.net_size_log10 == pytest.approx(16 * math.log10(129), rel=1e-12)
        assert net.net_bound_log10 == pytest.approx(16 * math.log10(130), rel=1e-12)
        assert net.net_size_log10 == pytest.approx(33.770, abs=1e-3)
        assert net.net_bound_log10 == pytest.approx(33.823, abs=1e-3)

    def test_coarse_net(self):
        net = net_params(2, 2, 100.0)
        assert net.epsilon >= 1
        assert net.m == 0
        assert net.net_size_log10 == pytest.approx(16 * math.log10(2), rel=1e-12)

    @pytest.mark.parametrize("d,n_sites,delta", [(2, 3, 0.1), (3, 4, 0.37), (5, 2, 2.0)])
    def test_exact_size_below_bound(self, d, n_sites, delta):
        net = net_params(d, n_sites, delta)
        assert net.net_size_log10 <= net.net_bound_log10


# =============================================================================
# Test: Theorem bounds
# =============================================================================


class TestTheorem1:
    def test_two_qubit_value(self):
        report = theorem1_bound(BoundQuery(d=2, n_sites=2, v=2.0, delta=0.5))
        expected = math.log10(2) + 16 * math.log10(130) - 0.25 / (LEVY * math.log(10))
        assert report.tail_bound_log10 == pytest.approx(expected, rel=1e-9)
        assert report.tail_bound_log10 == pytest.approx(34.12, abs=0.01)
        assert report.tail_bound_in_log10
        assert report.tail_bound == report.tail_bound_log10
        assert report.bound_clamped == 1.0
        assert report.delta_used == 0.5

    def test_report_constants(self):
        report = theorem1_bound(BoundQuery(d=3, n_sites=4, v=2.0, delta=0.5))
        assert report.c_dn == pytest.approx(7 / 9)
        assert report.sphere_dim == 2 * 3 ** 4 - 1
        assert report.epsilon == pytest.approx(0.5 / (9 * 4 * 32))
        assert report.lipschitz_state == pytest.approx(2 ** 2.5)
        assert report.lipschitz_settings_factor == 64

    def test_infeasible(self):
        with pytest.raises(PreconditionError, match="c_dn"):
            theorem1_bound(BoundQuery(d=2, n_sites=3, v=1.2, delta=0.5))

    def test_infeasible_auto(self):
        with pytest.raises(PreconditionError):
            theorem1_bound(BoundQuery(d=2, n_sites=3, v=1.0))

    def test_direct_evaluation_agrees(self):
        d, n_sites, v, delta = 2, 2, 1.9, 0.3
        report = theorem1_bound(BoundQuery(d=d, n_sites=n_sites, v=v, delta=delta))
        direct = 2 * (n_sites * 2 ** (n_sites + 1) * d ** 2 / delta + 2) ** (2 * d * d * n_sites) \
            * math.exp(-(v - delta - 1) ** 2 * (d / 2) ** n_sites / LEVY)
        assert report.tail_bound_log10 == pytest.approx(math.log10(direct), rel=1e-9)

    def test_decreasing_in_v(self):
        values = [
            theorem1_bound(BoundQuery(d=3, n_sites=6, v=v, delta=0.1)).tail_bound_log10
            for v in np.linspace(1.0, 30.0, 100)
        ]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_large_v_gives_small_bound(self):
        report = theorem1_bound(BoundQuery(d=4, n_sites=10, v=36.0, delta=1.0))
        assert not report.tail_bound_in_log10
        assert 0 < report.tail_bound < 1e-100
        assert report.bound_clamped == report.tail_bound

    def test_levy_composition(self):
        d, n_sites, v, delta = 3, 3, 2.5, 0.4
        report = theorem1_bound(BoundQuery(d=d, n_sites=n_sites, v=v, delta=delta))
        net = net_params(d, n_sites, delta)
        tail = levy_tail_log(2 * d ** n_sites - 1, v - delta - c_dn(d, n_sites), 2 ** ((n_sites + 1) / 2))
        composed = (math.log(2) + net.net_bound_log10 * math.log(10) + tail - math.log(2)) / math.log(10)
        assert report.tail_bound_log10 == pytest.approx(composed, rel=1e-12)


class TestAutoDelta:
    @pytest.mark.parametrize("d,n_sites,v", [(2, 4, 2.0), (3, 3, 3.0), (2, 8, 6.0)])
    def test_minimizer_property(self, d, n_sites, v):
        auto = theorem1_bound(BoundQuery(d=d, n_sites=n_sites, v=v))
        gap = v - c_dn(d, n_sites)
        assert 0 < auto.delta_used < gap
        for fraction in np.linspace(0.02, 0.98, 25):
            explicit = theorem1_bound(BoundQuery(d=d, n_sites=n_sites, v=v, delta=fraction * gap))
            assert auto.tail_bound_log10 <= explicit.tail_bound_log10 + 1e-9 * abs(explicit.tail_bound_log10)

    def test_noisy_minimizer_property(self):
        auto = theorem2_bound(BoundQuery(d=2, n_sites=6, v=3.0, lam=0.3))
        for delta in np.linspace(0.05, 1.95, 20):
            explicit = theorem2_bound(BoundQuery(d=2, n_sites=6, v=3.0, delta=delta, lam=0.3))
            assert auto.tail_bound_log10 <= explicit.tail_bound_log10 + 1e-9 * abs(explicit.tail_bound_log10)


class TestTheorem2:
    def test_reduces_to_theorem1(self):
        for n_sites in (2, 4, 7):
            for v in np.linspace(1.5, 6.0, 34):
                for delta in (0.1, 0.25, 0.4):
                    query = BoundQuery(d=2, n_sites=n_sites, v=float(v), delta=delta, lam=0.0)
                    assert theorem2_bound(query).tail_bound_log10 == pytest.approx(
                        theorem1_bound(query).tail_bound_log10, rel=1e-12
                    )

    def test_six_site_example(self):
        report = theorem2_bound(BoundQuery(d=2, n_sites=6, v=1.5, delta=0.25, lam=0.2))
        chi_value = (0.2 + 0.8 * math.sqrt(2)) ** 2
        assert chi_value == pytest.approx(1.77647, abs=1e-5)
        assert (2 / chi_value) ** 6 == pytest.approx(2.035, abs=1e-3)
        expected = (math.log(2) + 48 * math.log(6 * 2 ** 9 / 0.25 + 2)
                    - 0.0625 * (2 / chi_value) ** 6 / LEVY) / math.log(10)
        assert report.tail_bound_log10 == pytest.approx(expected, rel=1e-9)
        assert report.chi == pytest.approx(chi_value)
        assert report.sphere_dim == 2 ** 7 - 1

    def test_levy_composition(self):
        n_sites, v, delta, lam = 5, 2.2, 0.3, 0.6
        report = theorem2_bound(BoundQuery(d=2, n_sites=n_sites, v=v, delta=delta, lam=lam))
        net = net_params(2, n_sites, delta)
        noisy = lipschitz_constants(n_sites, lam)[2]
        tail = levy_tail_log(2 ** (n_sites + 1) - 1, v - delta - 1, noisy)
        composed = net.net_bound_log10 + tail / math.log(10)
        assert report.tail_bound_log10 == pytest.approx(composed, rel=1e-12)

    def test_qubits_only(self):
        with pytest.raises(ValidationError):
            theorem2_bound(BoundQuery(d=3, n_sites=3, v=3.0, delta=0.5))

    def test_infeasible(self):
        with pytest.raises(PreconditionError, match="v > 1"):
            theorem2_bound(BoundQuery(d=2, n_sites=3, v=1.3, delta=0.5))

    def test_dispatch_on_noise(self):
        query = BoundQuery(d=2, n_sites=3, v=2.0, delta=0.5, lam=0.2)
        assert theorem_bound(query).theorem == 2
        assert theorem_bound(query, 1).theorem == 1


class TestBoundTypes:
    def test_query_validation(self):
        with pytest.raises(ValidationError):
            BoundQuery(d=2, n_sites=3, v=2.0, delta=-0.1)
        with pytest.raises(ValidationError):
            BoundQuery(d=2, n_sites=3, v=2.0, delta="best")
        with pytest.raises(ValidationError):
            BoundQuery(d=2, n_sites=1, v=2.0)

    def test_query_document(self):
        query = BoundQuery(d=3, n_sites=4, v=2.5, delta=0.2, lam=0.1)
        assert BoundQuery.from_dict(query.to_dict()) == query

    def test_report_document(self):
        report = theorem1_bound(BoundQuery(d=2, n_sites=3, v=2.0))
        data = report.to_dict()
        assert data['lambda'] == 0.0
        assert BoundReport.from_dict(data) == report
        assert all(math.isfinite(value) for value in data.values() if isinstance(value, float))
