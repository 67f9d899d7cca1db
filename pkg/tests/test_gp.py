import math

import numpy as np
import pytest

from safebo import Kernel, SurrogateModel


def dense_posterior_reference(kernel, inputs, targets, queries, reg):
    """Direct dense-solve posterior, independent of the Cholesky path."""
    from safebo.kernels import pairwise

    t = inputs.shape[0]
    shifted = pairwise(kernel, inputs) + reg * np.eye(t)
    cross = pairwise(kernel, inputs, queries)
    solved = np.linalg.solve(shifted, cross)  # (t, m)
    means = targets @ solved
    var = kernel.output_scale - np.einsum("tm,tm->m", cross, solved)
    return means, np.sqrt(np.maximum(var, 0.0))


def build_model(kernel, reg, inputs, targets):
    model = SurrogateModel(kernel, reg, targets.shape[0])
    for point, column in zip(inputs, targets.T):
        model = model.with_observation(point, column)
    return model


class TestPosterior:
    def test_empty_model_is_prior(self, kernel):
        model = SurrogateModel(kernel, 0.01, 2)
        means, std = model.posterior(np.array([[0.3], [0.9]]))
        assert means == pytest.approx(np.zeros((2, 2)))
        assert std == pytest.approx(np.ones(2))

    def test_single_observation_closed_form(self, kernel):
        # One unit observation at the queried point: k/(k + reg) and
        # sqrt(reg/(1 + reg)) from the scalar solve.
        model = SurrogateModel(kernel, 0.01, 1).with_observation([0.5], [1.0])
        means, std = model.posterior(np.array([0.5]))
        assert means[0] == pytest.approx(0.9900990099009901, abs=1e-12)
        assert std == pytest.approx(0.09950371902099892, abs=1e-12)

    def test_matches_dense_solve_on_random_instances(self, rng):
        for _ in range(40):
            dim = int(rng.integers(1, 3))
            t = int(rng.integers(1, 21))
            n = int(rng.integers(2, 51))
            k = Kernel(lengthscale=float(rng.uniform(0.05, 1.0)))
            reg = float(rng.uniform(1e-3, 1.0))
            outputs = int(rng.integers(1, 4))
            inputs = rng.uniform(0, 1, size=(t, dim))
            targets = rng.standard_normal((outputs, t))
            queries = rng.uniform(0, 1, size=(n, dim))
            model = build_model(k, reg, inputs, targets)
            means, std = model.posterior(queries)
            ref_means, ref_std = dense_posterior_reference(k, inputs, targets, queries, reg)
            assert means == pytest.approx(ref_means, abs=1e-8)
            assert std == pytest.approx(ref_std, abs=1e-8)

    def test_std_nonincreasing_with_observations(self, kernel, rng):
        grid = np.linspace(0, 1, 60)[:, None]
        model = SurrogateModel(kernel, 0.01, 1)
        _, std = model.posterior(grid)
        for _ in range(15):
            point = rng.uniform(0, 1, size=1)
            model = model.with_observation(point, rng.standard_normal(1))
            _, new_std = model.posterior(grid)
            assert np.all(new_std <= std + 1e-10)
            std = new_std

    def test_cached_factor_reproduces_shifted_gram(self, kernel, rng):
        model = SurrogateModel(kernel, 0.01, 1)
        for _ in range(10):
            model = model.with_observation(rng.uniform(0, 1, 1), rng.standard_normal(1))
        rebuilt = model._chol @ model._chol.T
        target = model._gram + 0.01 * np.eye(model.t)
        assert np.linalg.norm(rebuilt - target) < 1e-8

    def test_rejects_non_finite_targets(self, kernel):
        model = SurrogateModel(kernel, 0.01, 1)
        with pytest.raises(ValueError, match="finite"):
            model.with_observation([0.1], [np.nan])

    def test_rejects_bad_regularization(self, kernel):
        for reg in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError, match="regularization"):
                SurrogateModel(kernel, reg, 1)

    def test_persistent_update(self, kernel):
        base = SurrogateModel(kernel, 0.01, 1)
        grown = base.with_observation([0.5], [1.0])
        assert base.t == 0 and grown.t == 1
        means, _ = base.posterior(np.array([0.5]))
        assert means[0] == 0.0


class TestXiLambdaMax:
    def test_empty_history(self, kernel):
        assert SurrogateModel(kernel, 0.01, 1).xi_lambda_max() == 0.0

    def test_scalar_history(self, kernel):
        model = SurrogateModel(kernel, 0.01, 1).with_observation([0.5], [0.0])
        assert model.xi_lambda_max() == pytest.approx(0.9900990099009901, abs=1e-12)

    def test_identity_gram(self, kernel):
        # Two points far enough apart that the Gram is the identity to
        # double precision: the ratio matches the scalar case.
        model = SurrogateModel(kernel, 0.01, 1)
        model = model.with_observation([0.0], [0.0])
        model = model.with_observation([50.0], [0.0])
        assert model.xi_lambda_max() == pytest.approx(1.0 / 1.01, abs=1e-12)

    def test_closed_form_matches_assembled_matrix(self, rng):
        for _ in range(30):
            t = int(rng.integers(1, 21))
            k = Kernel(lengthscale=float(rng.uniform(0.05, 1.0)))
            reg = float(rng.uniform(1e-3, 1.0))
            inputs = rng.uniform(0, 1, size=(t, 1))
            model = build_model(k, reg, inputs, np.zeros((1, t)))
            assembled = model._gram @ np.linalg.inv(model._gram + reg * np.eye(t))
            reference = float(np.max(np.real(np.linalg.eigvals(assembled))))
            assert model.xi_lambda_max() == pytest.approx(reference, abs=1e-10)

    def test_nondecreasing_along_history(self, kernel, rng):
        model = SurrogateModel(kernel, 0.01, 1)
        last = model.xi_lambda_max()
        for _ in range(15):
            model = model.with_observation(rng.uniform(0, 1, 1), [0.0])
            current = model.xi_lambda_max()
            assert current >= last - 1e-12
            last = current

    def test_power_iteration_agrees_with_dense(self, rng):
        from safebo.gp import _power_iteration

        for _ in range(10):
            n = int(rng.integers(2, 30))
            half = rng.standard_normal((n, n))
            psd = half @ half.T
            assert _power_iteration(psd) == pytest.approx(
                float(np.linalg.eigvalsh(psd)[-1]), rel=1e-9
            )


class TestLogDetInformationGain:
    def test_empty_history(self, kernel):
        assert SurrogateModel(kernel, 0.01, 1).log_det_information_gain() == 0.0

    def test_scalar(self, kernel):
        model = SurrogateModel(kernel, 0.01, 1).with_observation([0.5], [0.0])
        assert model.log_det_information_gain() == pytest.approx(
            0.5 * math.log(101.0), abs=1e-10
        )

    def test_two_distant_points(self, kernel):
        model = SurrogateModel(kernel, 0.01, 1)
        model = model.with_observation([0.0], [0.0])
        model = model.with_observation([50.0], [0.0])
        assert model.log_det_information_gain() == pytest.approx(
            math.log(101.0), abs=1e-8
        )

    def test_matches_direct_log_det(self, rng):
        for _ in range(20):
            t = int(rng.integers(1, 15))
            reg = float(rng.uniform(1e-3, 1.0))
            k = Kernel(lengthscale=float(rng.uniform(0.1, 1.0)))
            inputs = rng.uniform(0, 1, size=(t, 2))
            model = build_model(k, reg, inputs, np.zeros((1, t)))
            sign, logdet = np.linalg.slogdet(np.eye(t) + model._gram / reg)
            assert sign == 1.0
            assert model.log_det_information_gain() == pytest.approx(
                0.5 * logdet, abs=1e-8
            )


def test_long_history_refactorization_stays_accurate(kernel, rng):
    # Push past the periodic-refactorization boundary.
    model = SurrogateModel(kernel, 0.01, 1)
    inputs = rng.uniform(0, 1, size=(70, 1))
    targets = rng.standard_normal((1, 70))
    for point, value in zip(inputs, targets[0]):
        model = model.with_observation(point, [value])
    queries = rng.uniform(0, 1, size=(20, 1))
    means, std = model.posterior(queries)
    ref_means, ref_std = dense_posterior_reference(kernel, inputs, targets, queries, 0.01)
    assert means == pytest.approx(ref_means, abs=1e-7)
    assert std == pytest.approx(ref_std, abs=1e-7)
