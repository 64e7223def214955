"""Tests for the simplex transforms and Fenchel-Young machinery."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import minimize

import fyhopfield as fh
from fyhopfield import NegentropySpec

scores = arrays(
    np.float64,
    st.integers(min_value=1, max_value=8),
    elements=st.floats(min_value=-5, max_value=5, allow_nan=False, allow_infinity=False),
)

SPECS = [
    NegentropySpec.shannon(),
    NegentropySpec.tsallis(1.5),
    NegentropySpec.gini(),
    NegentropySpec.norm(2.0),
    NegentropySpec.norm(5.0),
]


def simplex_grid(steps: int) -> np.ndarray:
    """Every point of the 3-simplex whose coordinates are multiples of 1/steps."""
    i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
    keep = i + j <= steps
    a, b = i[keep] / steps, j[keep] / steps
    return np.stack([a, b, np.maximum(1.0 - a - b, 0.0)], axis=1)


GRID = simplex_grid(250)


class TestSoftmax:
    def test_equal_scores(self):
        np.testing.assert_allclose(fh.softmax([0.0, 0.0]), [0.5, 0.5])

    def test_two_scores(self):
        np.testing.assert_allclose(fh.softmax([1.0, 0.0]), [0.73106, 0.26894], atol=1e-5)

    def test_constant_is_uniform_for_any_beta(self):
        np.testing.assert_allclose(fh.softmax([4.0, 4.0, 4.0], beta=7.0), [1 / 3] * 3)

    def test_large_scores_are_stable(self):
        y = fh.softmax([1000.0, 999.0])
        assert np.all(np.isfinite(y))
        assert y.sum() == pytest.approx(1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(fh.DomainError, match="finite"):
            fh.softmax([0.0, np.nan])

    def test_rejects_non_positive_beta(self):
        with pytest.raises(fh.DomainError, match="beta"):
            fh.softmax([0.0, 1.0], beta=0.0)


class TestSparsemax:
    def test_margin_gives_vertex(self):
        np.testing.assert_array_equal(fh.sparsemax([2.0, 0.0]), [1.0, 0.0])

    def test_interior_point(self):
        np.testing.assert_allclose(fh.sparsemax([0.5, 0.0]), [0.75, 0.25])

    def test_constant_is_uniform(self):
        np.testing.assert_allclose(fh.sparsemax([3.0] * 5), [0.2] * 5)

    def test_single_score(self):
        np.testing.assert_array_equal(fh.sparsemax([-7.0]), [1.0])

    def test_exact_zeros(self):
        y = fh.sparsemax([3.0, 0.0, -1.0, 2.5])
        assert y[1] == 0.0 and y[2] == 0.0

    @settings(max_examples=60, deadline=None)
    @given(scores)
    def test_on_simplex(self, theta):
        fh.on_simplex(fh.sparsemax(theta))

    @settings(max_examples=60, deadline=None)
    @given(scores, st.randoms(use_true_random=False))
    def test_permutation_equivariant(self, theta, rnd):
        perm = list(range(theta.size))
        rnd.shuffle(perm)
        np.testing.assert_allclose(fh.sparsemax(theta[perm]), fh.sparsemax(theta)[perm], atol=1e-12)


class TestEntmax:
    def test_alpha_two_matches_sparsemax(self):
        np.testing.assert_allclose(fh.entmax([0.5, 0.0], 2.0), [0.75, 0.25], atol=1e-9)

    def test_constant_is_uniform(self):
        np.testing.assert_allclose(fh.entmax([1.0] * 4, 1.5), [0.25] * 4, atol=1e-12)

    @pytest.mark.parametrize("t", [2.0, 3.0, 10.0])
    def test_margin(self, t):
        np.testing.assert_array_equal(fh.entmax([t, 0.0], 1.5), [1.0, 0.0])

    def test_alpha_one_is_softmax(self):
        theta = [0.3, -1.0, 2.0]
        np.testing.assert_allclose(fh.entmax(theta, 1.0), fh.softmax(theta))

    def test_rejects_alpha_below_one(self):
        with pytest.raises(fh.DomainError, match="alpha"):
            fh.entmax([0.0, 1.0], 0.5)

    def test_agrees_with_sparsemax_at_alpha_two(self):
        rng = np.random.default_rng(5)
        for _ in range(10_000):
            theta = rng.normal(size=int(rng.integers(2, 51)))
            np.testing.assert_allclose(fh.entmax(theta, 2.0), fh.sparsemax(theta), atol=1e-7)

    @settings(max_examples=60, deadline=None)
    @given(scores, st.sampled_from([1.25, 1.5, 2.0, 3.0]))
    def test_on_simplex(self, theta, alpha):
        fh.on_simplex(fh.entmax(theta, alpha))

    @settings(max_examples=40, deadline=None)
    @given(scores, st.randoms(use_true_random=False))
    def test_permutation_equivariant(self, theta, rnd):
        perm = list(range(theta.size))
        rnd.shuffle(perm)
        np.testing.assert_allclose(
            fh.entmax(theta[perm], 1.5), fh.entmax(theta, 1.5)[perm], atol=1e-9
        )


class TestNormmax:
    def test_constant_is_uniform(self):
        np.testing.assert_allclose(fh.normmax([2.0, 2.0, 2.0], 5.0), [1 / 3] * 3)

    @pytest.mark.parametrize("t", [1.0, 1.5, 4.0])
    def test_margin(self, t):
        np.testing.assert_array_equal(fh.normmax([t, 0.0], 2.0), [1.0, 0.0])

    def test_favors_uniform_on_support(self):
        np.testing.assert_allclose(fh.normmax([3.0, 3.0, 0.0], 5.0), [0.5, 0.5, 0.0])

    def test_rejects_gamma_at_most_one(self):
        with pytest.raises(fh.DomainError, match="gamma"):
            fh.normmax([0.0, 1.0], 1.0)

    @settings(max_examples=60, deadline=None)
    @given(scores, st.sampled_from([1.5, 2.0, 5.0]))
    def test_on_simplex(self, theta, gamma):
        fh.on_simplex(fh.normmax(theta, gamma))

    @settings(max_examples=40, deadline=None)
    @given(scores, st.sampled_from([1.5, 2.0, 5.0]), st.randoms(use_true_random=False))
    def test_permutation_equivariant(self, theta, gamma, rnd):
        perm = list(range(theta.size))
        rnd.shuffle(perm)
        np.testing.assert_allclose(
            fh.normmax(theta[perm], gamma), fh.normmax(theta, gamma)[perm], atol=1e-9
        )


class TestConstrainedSparsemax:
    def test_inactive_bounds_match_sparsemax(self):
        theta = np.array([0.4, -0.2, 1.3, 0.9])
        np.testing.assert_allclose(
            fh.constrained_sparsemax(theta, np.ones(4)), fh.sparsemax(theta), atol=1e-12
        )

    def test_cap_binds(self):
        np.testing.assert_allclose(fh.constrained_sparsemax([2.0, 0.0], [0.6, 1.0]), [0.6, 0.4])

    def test_zero_cap_forces_mass_elsewhere(self):
        np.testing.assert_allclose(fh.constrained_sparsemax([1.0, 1.0], [0.0, 1.0]), [0.0, 1.0])

    def test_infeasible_bounds(self):
        with pytest.raises(fh.DomainError, match="feasible set is empty"):
            fh.constrained_sparsemax([1.0, 0.0], [0.3, 0.3])

    def test_shape_mismatch(self):
        with pytest.raises(fh.DomainError, match="shape"):
            fh.constrained_sparsemax([1.0, 0.0], [1.0])

    @settings(max_examples=60, deadline=None)
    @given(scores, st.data())
    def test_respects_caps(self, theta, data):
        caps = np.asarray(
            data.draw(
                st.lists(
                    st.floats(min_value=0.2, max_value=1.0),
                    min_size=theta.size,
                    max_size=theta.size,
                )
            )
        )
        if caps.sum() < 1.0:
            caps = caps / caps.sum()
        y = fh.constrained_sparsemax(theta, caps)
        fh.on_simplex(y)
        assert np.all(y <= caps + 1e-12)

    def test_matches_box_qp_solver(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n = int(rng.integers(2, 9))
            theta = rng.normal(scale=2.0, size=n)
            caps = rng.uniform(0.05, 1.0, size=n)
            if caps.sum() < 1.0:
                caps = caps / caps.sum()
            result = minimize(
                lambda y: 0.5 * np.sum((y - theta) ** 2),
                x0=caps / caps.sum(),
                jac=lambda y: y - theta,
                bounds=list(zip(np.zeros(n), caps)),
                constraints=[{"type": "eq", "fun": lambda y: y.sum() - 1.0}],
                method="SLSQP",
                options={"ftol": 1e-12, "maxiter": 500},
            )
            np.testing.assert_allclose(
                fh.constrained_sparsemax(theta, caps), result.x, atol=1e-6
            )


class TestNegentropy:
    @pytest.mark.parametrize("spec", SPECS)
    def test_zero_at_vertices(self, spec):
        assert fh.negentropy_value([0.0, 1.0, 0.0], spec) == pytest.approx(0.0, abs=1e-15)

    def test_shannon_uniform(self):
        value = fh.negentropy_value([0.5, 0.5], NegentropySpec.shannon())
        assert value == pytest.approx(-math.log(2))

    def test_norm_uniform(self):
        assert fh.negentropy_value([0.25] * 4, NegentropySpec.norm(2.0)) == pytest.approx(-0.5)

    def test_tsallis_alpha_one_is_shannon(self):
        assert NegentropySpec.tsallis(1.0) == NegentropySpec.shannon()

    def test_regularized_argmax_dispatch(self):
        theta = np.array([0.5, 0.0])
        np.testing.assert_allclose(
            fh.regularized_argmax(theta, NegentropySpec.gini()), [0.75, 0.25], atol=1e-9
        )
        np.testing.assert_allclose(
            fh.regularized_argmax(theta, NegentropySpec.shannon(2.0)), fh.softmax(theta, 2.0)
        )

    @pytest.mark.parametrize(
        "spec",
        [NegentropySpec.tsallis(1.5), NegentropySpec.norm(2.0), NegentropySpec.norm(5.0)],
    )
    @pytest.mark.parametrize("theta", [[0.6, 0.2, -0.3], [1.2, 0.9, 0.1], [0.0, 0.0, 0.5]])
    def test_regularized_argmax_maximizes_over_grid(self, spec, theta):
        objective = GRID @ np.asarray(theta) - np.array(
            [fh.negentropy_value(y, spec) for y in GRID]
        )
        best = GRID[int(np.argmax(objective))]
        np.testing.assert_allclose(fh.regularized_argmax(theta, spec), best, atol=1e-2)


class TestFYLoss:
    def test_zero_at_margin(self):
        loss = fh.fy_loss([2.0, 0.0], [1.0, 0.0], NegentropySpec.tsallis(2.0))
        assert loss == pytest.approx(0.0, abs=1e-12)

    def test_cross_entropy_at_uniform(self):
        loss = fh.fy_loss([0.0, 0.0], [1.0, 0.0], NegentropySpec.shannon())
        assert loss == pytest.approx(math.log(2))

    @pytest.mark.parametrize("spec", SPECS)
    def test_zero_at_prediction(self, spec):
        theta = np.array([0.7, -0.3, 0.1, 1.2])
        y = fh.regularized_argmax(theta, spec)
        assert fh.fy_loss(theta, y, spec) == pytest.approx(0.0, abs=1e-9)

    def test_conjugate_of_constant_scores(self):
        spec = NegentropySpec.shannon()
        # Ω*(c·1) = c − Ω(uniform)
        assert fh.conjugate_value([3.0, 3.0], spec) == pytest.approx(3.0 + math.log(2))

    @settings(max_examples=60, deadline=None)
    @given(scores, st.sampled_from(SPECS), st.data())
    def test_non_negative(self, theta, spec, data):
        raw = np.asarray(
            data.draw(
                st.lists(
                    st.floats(min_value=0.0, max_value=1.0),
                    min_size=theta.size,
                    max_size=theta.size,
                )
            )
        )
        if raw.sum() == 0:
            raw = np.ones(theta.size)
        assert fh.fy_loss(theta, raw / raw.sum(), spec) >= -1e-7

    def test_target_shape_mismatch(self):
        with pytest.raises(fh.DomainError, match="shape"):
            fh.fy_loss([0.0, 1.0], [1.0], NegentropySpec.shannon())


class TestMargin:
    def test_values(self):
        assert fh.margin_of(NegentropySpec.tsallis(2.0)) == 1.0
        assert fh.margin_of(NegentropySpec.tsallis(1.5)) == pytest.approx(2.0)
        assert fh.margin_of(NegentropySpec.norm(5.0)) == 1.0
        assert fh.margin_of(NegentropySpec.shannon()) is None

    @pytest.mark.parametrize(
        "spec",
        [
            NegentropySpec.tsallis(1.5),
            NegentropySpec.gini(),
            NegentropySpec.norm(2.0),
            NegentropySpec.norm(5.0),
        ],
    )
    def test_loss_vanishes_exactly_past_the_margin(self, spec):
        m = fh.margin_of(spec)
        target = np.array([1.0, 0.0, 0.0])

        above = np.array([m + 1e-6, 0.0, -5.0])
        fh.is_one_hot(fh.regularized_argmax(above, spec), index=0)
        assert fh.fy_loss(above, target, spec) == pytest.approx(0.0, abs=1e-12)

        below = np.array([m - 1e-6, 0.0, -5.0])
        y = fh.regularized_argmax(below, spec)
        assert y[1] > 0.0
        np.testing.assert_array_equal(fh.support_of(y), [0, 1])


class TestSupportOf:
    def test_exact_and_thresholded(self):
        y = np.array([0.5, 0.0, 0.495, 0.005])
        np.testing.assert_array_equal(fh.support_of(y), [0, 2, 3])
        np.testing.assert_array_equal(fh.support_of(y, threshold=0.01), [0, 2])
