import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from knowstate.ensemble import (BasisOnly, Full, NoKnowledge, PreparationSpec, ViewKind,
                                measure_all, prepare)
from knowstate.quantum import X, Z, Z_AXIS, Axis, Direction
from knowstate.stats import uniform_directions
from knowstate.strategies import (DisguisePolicy, Predictor, choose_perpendicular,
                                  direction_at_angle, disguise_keep_probability,
                                  disguised_predict, expected_accuracy,
                                  expected_accuracy_random_direction, impostor_axis_guess,
                                  predict)


def accuracy(pred, out):
    return float(np.mean(pred == out))


def sigma3(p, n):
    return 3 * math.sqrt(p * (1 - p) / n)


def z_ensemble(n, seed):
    return prepare(PreparationSpec(Z_AXIS, n, 0.5, seed))


class TestPredict:
    def test_full_along_axis_is_perfect(self):
        e, nb = z_ensemble(1000, 1)
        pred = predict(Predictor(Full(nb)), Z, 1000, np.random.default_rng(0))
        assert np.array_equal(pred, nb.signs)
        assert accuracy(pred, measure_all(e, Z, np.random.default_rng(2))) == 1.0

    def test_basis_only_along_axis_is_coin(self):
        n = 10_000
        e, nb = z_ensemble(n, 3)
        pred = predict(Predictor(BasisOnly(Z_AXIS)), Z, n, np.random.default_rng(4))
        assert abs(accuracy(pred, measure_all(e, Z, np.random.default_rng(5))) - 0.5) <= sigma3(0.5, n)

    def test_full_perpendicular_is_coin(self):
        n = 10_000
        e, nb = z_ensemble(n, 6)
        pred = predict(Predictor(Full(nb)), X, n, np.random.default_rng(7))
        assert abs(accuracy(pred, measure_all(e, X, np.random.default_rng(8))) - 0.5) <= sigma3(0.5, n)

    def test_full_rejects_short_notebook(self):
        _, nb = z_ensemble(5, 0)
        with pytest.raises(ValueError):
            predict(Predictor(Full(nb)), Z, 6, np.random.default_rng(0))

    def test_tie_rule_validation(self):
        with pytest.raises(ValueError):
            Predictor(NoKnowledge(), tie_rule=0)

    @pytest.mark.parametrize("deg", [0, 30, 60, 90, 120, 180])
    def test_flip_covariance_full(self, deg):
        _, nb = z_ensemble(300, 9)
        for tie in (1, -1):
            p = Predictor(Full(nb), tie_rule=tie)
            m = Direction.from_angles(math.radians(deg), 0.7)
            a = predict(p, m, 300, np.random.default_rng(1))
            b = predict(p, -m, 300, np.random.default_rng(1))
            assert np.array_equal(a, -b)

    @settings(max_examples=50)
    @given(st.floats(-1, 1), st.floats(0, 2 * math.pi))
    def test_flip_covariance_random_direction(self, z, phi):
        _, nb = z_ensemble(40, 10)
        m = Direction.from_vector((math.sqrt(1 - z * z) * math.cos(phi),
                                   math.sqrt(1 - z * z) * math.sin(phi), z))
        p = Predictor(Full(nb))
        assert np.array_equal(predict(p, m, 40, None), -predict(p, -m, 40, None))

    @pytest.mark.parametrize("deg", [0, 30, 60, 90])
    @pytest.mark.parametrize("view", ["full", "basis_only", "none"])
    def test_empirical_matches_expected(self, deg, view):
        n = 10 ** 5
        e, nb = z_ensemble(n, 11 + deg)
        views = {"full": Full(nb), "basis_only": BasisOnly(Z_AXIS), "none": NoKnowledge()}
        m = Direction.from_angles(math.radians(deg), 0.3)
        pred = predict(Predictor(views[view]), m, n, np.random.default_rng(12 + deg))
        acc = accuracy(pred, measure_all(e, m, np.random.default_rng(13 + deg)))
        want = expected_accuracy(view, math.radians(deg))
        assert abs(acc - want) <= sigma3(want, n) + 1e-12

    def test_basis_only_independent_of_signs(self):
        n = 10 ** 5
        _, nb = z_ensemble(n, 14)
        pred = predict(Predictor(BasisOnly(Z_AXIS)), Z, n, np.random.default_rng(15))
        assert abs(float(np.corrcoef(pred, nb.signs)[0, 1])) <= 3 / math.sqrt(n)


class TestExpectedAccuracy:
    def test_values(self):
        assert expected_accuracy("full", 0.0) == 1.0
        assert expected_accuracy("full", math.pi / 2) == pytest.approx(0.5, abs=1e-15)
        assert expected_accuracy("full", math.radians(60)) == pytest.approx(0.75, abs=1e-15)
        assert expected_accuracy("full", math.pi) == 1.0
        assert expected_accuracy(ViewKind.BASIS_ONLY, 0.3) == 0.5
        assert expected_accuracy(NoKnowledge(), 0.3) == 0.5

    def test_sixty_degrees_monte_carlo(self):
        n = 10 ** 6
        e, nb = z_ensemble(n, 16)
        m = Direction.from_angles(math.radians(60))
        pred = predict(Predictor(Full(nb)), m, n, None)
        acc = accuracy(pred, measure_all(e, m, np.random.default_rng(17)))
        assert abs(acc - 0.75) <= sigma3(0.75, n)

    def test_rejects_bad_theta(self):
        with pytest.raises(ValueError):
            expected_accuracy("full", -0.1)

    def test_random_direction_average(self):
        assert expected_accuracy_random_direction("full") == 0.75
        assert expected_accuracy_random_direction("basis_only") == 0.5
        assert expected_accuracy_random_direction("none") == 0.5
        # oracle: average the curve over uniform directions
        v = uniform_directions(np.random.default_rng(18), 10 ** 6)
        mc = float(np.mean(0.5 * (1 + np.abs(v[:, 2]))))
        assert abs(mc - 0.75) <= 3 * math.sqrt(1 / 48 / 10 ** 6)


class TestDisguise:
    def test_target_one_is_optimal(self):
        _, nb = z_ensemble(500, 19)
        a = disguised_predict(nb, Z, DisguisePolicy(1.0), np.random.default_rng(0))
        assert np.array_equal(a, predict(Predictor(Full(nb)), Z, 500, None))

    def test_keep_probability(self):
        assert disguise_keep_probability(1.0, 0.55) == pytest.approx(0.55)
        assert disguise_keep_probability(0.5, 0.55) == 1.0
        q = disguise_keep_probability(0.9, 0.7)
        assert q * 0.9 + (1 - q) * 0.1 == pytest.approx(0.7)

    def test_policy_bounds(self):
        with pytest.raises(ValueError):
            DisguisePolicy(0.4)

    @pytest.mark.parametrize("target,deg", [(0.55, 0), (0.55, 90)])
    def test_examples(self, target, deg):
        n = 10 ** 5
        e, nb = z_ensemble(n, 20 + deg)
        m = Direction.from_angles(math.radians(deg))
        pred = disguised_predict(nb, m, DisguisePolicy(target), np.random.default_rng(21))
        acc = accuracy(pred, measure_all(e, m, np.random.default_rng(22)))
        want = min(target, expected_accuracy("full", math.radians(deg)))
        assert abs(acc - want) <= sigma3(want, n)

    @pytest.mark.parametrize("target", [0.5, 0.55, 0.7, 0.9, 1.0])
    @pytest.mark.parametrize("deg", [0, 45, 90])
    def test_grid(self, target, deg):
        n = 10 ** 5
        e, nb = z_ensemble(n, 30 + deg + int(100 * target))
        m = Direction.from_angles(math.radians(deg), 1.1)
        pred = disguised_predict(nb, m, DisguisePolicy(target), np.random.default_rng(deg))
        acc = accuracy(pred, measure_all(e, m, np.random.default_rng(deg + 1000)))
        want = min(target, expected_accuracy("full", math.radians(deg)))
        assert abs(acc - want) <= sigma3(want, n) + 1e-12


class TestPerpendicular:
    def test_z_axis(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            assert abs(choose_perpendicular(Z_AXIS, rng).z) <= 1e-12

    def test_azimuth_uniform(self):
        rng = np.random.default_rng(1)
        phis = [math.atan2(d.y, d.x) % (2 * math.pi)
                for d in (choose_perpendicular(Z_AXIS, rng) for _ in range(10_000))]
        assert sps.kstest(phis, sps.uniform(loc=0, scale=2 * math.pi).cdf).pvalue > 0.01

    def test_random_axes(self):
        rng = np.random.default_rng(2)
        for _ in range(2000):
            axis = impostor_axis_guess(rng)
            d = choose_perpendicular(axis, rng)
            assert abs(axis.representative.dot(d)) <= 1e-12
            assert abs(math.sqrt(d.x ** 2 + d.y ** 2 + d.z ** 2) - 1) <= 1e-12

    def test_direction_at_angle(self):
        axis = Axis(Direction.from_vector((1, 2, 3)))
        for deg in (0, 30, 90, 150):
            d = direction_at_angle(axis, math.radians(deg))
            assert math.degrees(math.acos(max(-1, min(1, d.dot(axis.representative))))) == \
                pytest.approx(deg, abs=1e-6)


class TestImpostor:
    @pytest.mark.parametrize("deg", [0, 5, 90])
    def test_cap_probability(self, deg):
        rng = np.random.default_rng(deg)
        n = 10 ** 6
        v = uniform_directions(rng, n)
        hits = float(np.mean(np.abs(v[:, 2]) >= math.cos(math.radians(deg))))
        expected = 1 - math.cos(math.radians(deg))
        assert abs(hits - expected) <= sigma3(expected, n) + 1e-12

    def test_guess_is_an_axis_with_small_cap_rate(self):
        rng = np.random.default_rng(40)
        n = 200_000
        alpha = math.radians(5)
        hits = sum(impostor_axis_guess(rng).angle_to(Z_AXIS) <= alpha for _ in range(n))
        p = 1 - math.cos(alpha)
        assert p == pytest.approx(3.8e-3, abs=5e-5)
        assert abs(hits / n - p) <= sigma3(p, n)
