import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qseal.attack import attack_for, evaluate_attack
from qseal.discrimination import Povm
from qseal.seal import canonical_scheme
from qseal.theory import (
    asymptotic_fidelity,
    avg_fidelity_at_pmax,
    bounds,
    disturbance_weight,
    h_function,
    insecurity_point,
    is_cond_bound_tight,
    lemma_f,
    minmax_avg_fidelity,
    minmax_cond_fidelity_bound,
)


def second_differences(fn, lo, hi, points=401):
    xs = np.linspace(lo, hi, points)
    ys = np.array([fn(x) for x in xs])
    return ys[:-2] - 2 * ys[1:-1] + ys[2:]


class TestLemmaF:
    @pytest.mark.parametrize("nu_,n", [(0.0, 2), (0.3, 4), (1.0, 7)])
    def test_endpoints_vanish(self, nu_, n):
        assert abs(lemma_f(0.0, nu_, n)) < 1e-15 and abs(lemma_f(1.0, nu_, n)) < 1e-15

    def test_value(self):
        assert abs(lemma_f(0.5, 1.0, 2) - (math.sqrt(0.5) - 0.5)) < 1e-15
        assert abs(lemma_f(0.5, 1.0, 2) - 0.207107) < 1e-6

    def test_zero_strength_is_identically_zero(self):
        assert all(abs(lemma_f(x, 0.0, 5)) < 1e-15 for x in np.linspace(0, 1, 11))

    @given(st.floats(0.0, 1.0), st.floats(0.01, 1.0), st.integers(2, 64))
    def test_non_negative(self, x, nu_, n):
        assert lemma_f(x, nu_, n) >= -1e-12

    def test_domain(self):
        with pytest.raises(ValueError):
            lemma_f(1.5, 0.5, 3)
        with pytest.raises(ValueError):
            lemma_f(0.5, 0.5, 1)


class TestAverageFidelity:
    @pytest.mark.parametrize("n", [2, 3, 8])
    def test_perfect_seal_undisturbed(self, n):
        assert abs(minmax_avg_fidelity(1.0, 1.0, n) - 1.0) < 1e-15

    @pytest.mark.parametrize("p,p_max,n,expected", [(0.7, 0.9, 2, 0.975885), (0.5, 0.7, 4, 0.887945)])
    def test_values_against_simulation(self, p, p_max, n, expected):
        val = minmax_avg_fidelity(p, p_max, n)
        assert abs(val - expected) < 1e-6
        sim = evaluate_attack(canonical_scheme(n, p_max), attack_for(Povm.computational(n), p, p_max))
        assert abs(sim.avg_fidelity - val) < 1e-9

    @pytest.mark.parametrize("p_max,n", [(0.9, 2), (0.6, 3), (0.45, 6)])
    def test_endpoints(self, p_max, n):
        assert abs(minmax_avg_fidelity(1 / n, p_max, n) - 1.0) < 1e-12
        assert abs(minmax_avg_fidelity(p_max, p_max, n) - avg_fidelity_at_pmax(p_max, n)) < 1e-12

    def test_disturbance_weight(self):
        assert disturbance_weight(1.0, 5) == 0.0
        assert abs(disturbance_weight(0.9, 2) - 0.18) < 1e-15

    @pytest.mark.parametrize("p_max,n", [(0.9, 2), (0.5, 4), (0.8, 8), (0.2, 16)])
    def test_concave_non_increasing(self, p_max, n):
        xs = np.linspace(1 / n, p_max, 201)
        ys = np.array([minmax_avg_fidelity(x, p_max, n) for x in xs])
        assert np.all(np.diff(ys) <= 1e-12)
        assert np.all(second_differences(lambda x: minmax_avg_fidelity(x, p_max, n), 1 / n, p_max) <= 1e-12)

    def test_flat_for_perfect_seal(self):
        assert all(abs(minmax_avg_fidelity(x, 1.0, 4) - 1.0) < 1e-12 for x in np.linspace(0.25, 1.0, 13))


class TestConditionalBound:
    def test_symmetric_counterexample(self):
        assert abs(minmax_cond_fidelity_bound(0.3, 0.9, 8) - 0.980204) < 1e-6

    @pytest.mark.parametrize("p_max,n", [(0.9, 2), (0.7, 4), (0.9, 8)])
    def test_endpoints(self, p_max, n):
        assert abs(minmax_cond_fidelity_bound(1 / n, p_max, n) - 1.0) < 1e-12
        assert abs(minmax_cond_fidelity_bound(p_max, p_max, n) - p_max) < 1e-12
        assert abs(h_function(p_max, p_max, n) - p_max) < 1e-12

    @pytest.mark.parametrize("p,p_max,n", [(0.7, 0.9, 2), (0.5, 0.7, 4), (0.3, 0.9, 8)])
    def test_matches_simulated_conditional_fidelity(self, p, p_max, n):
        sim = evaluate_attack(canonical_scheme(n, p_max), attack_for(Povm.computational(n), p, p_max))
        assert abs(sim.cond_fidelity - minmax_cond_fidelity_bound(p, p_max, n)) < 1e-9

    def test_h_concave_small_n(self):
        for p_max in (0.3, 0.6, 0.9, 1.0):
            assert np.max(second_differences(lambda x: h_function(x, p_max, 4), 0.25, p_max)) <= 1e-12

    def test_h_not_concave_for_eight_outcomes(self):
        worst = max(np.max(second_differences(lambda x: h_function(x, pm, 8), 1 / 8, pm))
                    for pm in np.linspace(0.2, 1.0, 17))
        assert worst > 1e-9

    def test_tightness_flag(self):
        assert is_cond_bound_tight(0.4, 0.8, 5)
        assert not is_cond_bound_tight(0.4, 0.8, 6)
        assert is_cond_bound_tight(1 / 6, 0.8, 6) and is_cond_bound_tight(0.8, 0.8, 6)

    def test_bounds_bundle(self):
        b = bounds(0.7, 0.9, 2)
        assert b.minmax_avg_fidelity == minmax_avg_fidelity(0.7, 0.9, 2)
        assert b.minmax_cond_fidelity_bound == minmax_cond_fidelity_bound(0.7, 0.9, 2)
        assert b.is_cond_bound_tight

    def test_p_range(self):
        with pytest.raises(ValueError):
            minmax_cond_fidelity_bound(0.95, 0.9, 2)


class TestInsecurityPoint:
    def test_bit(self):
        p, b = insecurity_point(0.9, 2)
        assert abs(p - 0.7) < 1e-15
        assert abs(b.minmax_avg_fidelity - 0.975885) < 1e-6
        assert abs(b.minmax_cond_fidelity_bound - 0.982775) < 1e-6

    def test_perfect_bit(self):
        p, b = insecurity_point(1.0, 2)
        assert p == 0.75 and abs(b.minmax_avg_fidelity - 1.0) < 1e-15

    def test_rejects_trivial(self):
        with pytest.raises(ValueError):
            insecurity_point(0.25, 4)

    @given(st.integers(2, 64), st.floats(0.0, 1.0))
    @settings(max_examples=200)
    def test_average_fidelity_above_half(self, n, t):
        p_max = 1 / n + (1 - 1 / n) * max(t, 1e-6)
        _, b = insecurity_point(p_max, n)
        assert b.minmax_avg_fidelity > 0.5


class TestAsymptotic:
    def test_endpoint(self):
        for pm in (0.3, 0.7, 1.0):
            assert abs(asymptotic_fidelity(pm, pm) - pm ** 2) < 1e-15

    def test_value(self):
        assert abs(asymptotic_fidelity(0.7, 0.9) - 0.852222) < 1e-6

    def test_convergence_rate(self):
        # the gap shrinks like N^(-1/2): quadrupling N about halves it
        gaps = [abs(minmax_avg_fidelity(0.7, 0.9, n) - asymptotic_fidelity(0.7, 0.9)) for n in (10 ** 4, 4 * 10 ** 4, 16 * 10 ** 4)]
        assert 1.8 < gaps[0] / gaps[1] < 2.2 and 1.8 < gaps[1] / gaps[2] < 2.2
        nu_ = (0.7 * 10 ** 4 - 1) / (0.9 * 10 ** 4 - 1)
        predicted = 2 * math.sqrt(nu_ * (1 - nu_) / 10 ** 4) * (1 - 0.81)
        assert abs(gaps[0] - predicted) / predicted < 0.1

    def test_domain(self):
        with pytest.raises(ValueError):
            asymptotic_fidelity(0.9, 0.7)
