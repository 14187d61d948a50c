import math

import numpy as np
import pandas as pd
import pytest

from zeroday.autoencoder import (
    Activation,
    Architecture,
    AutoencoderModel,
    LossKind,
    SearchSpace,
    TrainConfig,
    build_autoencoder,
    detect,
    forward,
    forward_batch,
    gradients,
    random_search,
    reconstruction_error,
    score,
    threshold_for_specificity,
    train,
)
from zeroday.autoencoder.model import objective
from zeroday.autoencoder.search import TRIAL_EPOCH_CAP
from zeroday.errors import DataError, MissingArtifact, NumericError
from zeroday.preprocess import fit_scaler

from .conftest import gaussian_rows


def projection_model(l2=0.0):
    """3-2-3 linear net that reproduces any x whose last coordinate is 0."""
    arch = Architecture([3, 2, 3], Activation.LINEAR)
    select = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    return AutoencoderModel(arch, [select, select.T], [np.zeros(2), np.zeros(3)], l2_lambda=l2)


def low_rank_rows(n, d, rank, seed, noise=0.1):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, rank)) @ rng.normal(size=(rank, d)) + noise * rng.normal(size=(n, d))
    return fit_scaler(X).transform(X)


class TestArchitecture:
    def test_intrusion_layouts(self):
        assert Architecture([18, 15, 9, 15, 18]).bottleneck == 9
        assert Architecture([122, 100, 60, 100, 122]).n_layers == 4

    def test_invalid_layouts(self):
        with pytest.raises(ValueError):
            Architecture([4, 4])
        with pytest.raises(ValueError):
            Architecture([4, 2, 5])
        with pytest.raises(ValueError):
            Architecture([4, 4, 4])
        with pytest.raises(ValueError):
            Architecture([4, 0, 4])
        with pytest.raises(ValueError):
            Architecture([4, 2, 4], output_activation=Activation.TANH)

    def test_str(self):
        assert str(Architecture([6, 3, 6])) == "6-3-6 (tanh)"


class TestBuildAutoencoder:
    def test_shape_chain(self):
        model = build_autoencoder(Architecture([18, 15, 9, 15, 18]), seed=1)
        assert [w.shape for w in model.weights] == [(18, 15), (15, 9), (9, 15), (15, 18)]
        assert [b.shape for b in model.biases] == [(15,), (9,), (15,), (18,)]
        assert all(not b.any() for b in model.biases)

    def test_nsl_kdd_shape_chain(self):
        model = build_autoencoder(Architecture([122, 100, 60, 100, 122]))
        assert [w.shape for w in model.weights] == [
            (122, 100),
            (100, 60),
            (60, 100),
            (100, 122),
        ]

    def test_uniform_fan_in_fan_out_bounds(self):
        model = build_autoencoder(Architecture([18, 15, 9, 15, 18]), seed=2)
        for w in model.weights:
            limit = math.sqrt(6.0 / sum(w.shape))
            assert np.abs(w).max() <= limit

    def test_same_seed_same_parameters(self):
        arch = Architecture([10, 6, 10])
        assert build_autoencoder(arch, seed=3).parameters_equal(build_autoencoder(arch, seed=3))
        assert not build_autoencoder(arch, seed=3).parameters_equal(
            build_autoencoder(arch, seed=4)
        )


class TestForward:
    def test_identity_on_retained_coordinates(self):
        x = np.array([0.5, -2.0, 0.0])
        assert np.array_equal(forward(projection_model(), x), x)
        assert reconstruction_error(x, forward(projection_model(), x), LossKind.MSE) == 0.0

    def test_zero_parameters_give_zero_output(self):
        arch = Architecture([4, 2, 4], Activation.LINEAR)
        model = AutoencoderModel(
            arch, [np.zeros((4, 2)), np.zeros((2, 4))], [np.zeros(2), np.zeros(4)]
        )
        assert np.array_equal(forward(model, np.arange(4.0)), np.zeros(4))

    def test_random_model_is_finite(self):
        for activation in (Activation.TANH, Activation.RELU):
            model = build_autoencoder(Architecture([8, 5, 3, 5, 8], activation), seed=5)
            out = forward_batch(model, gaussian_rows(50, 8, seed=5, scale=100.0))
            assert np.isfinite(out).all()

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            forward(projection_model(), np.zeros(4))
        with pytest.raises(ValueError):
            forward(projection_model(), np.zeros((2, 3)))

    def test_non_finite_parameters_rejected(self):
        arch = Architecture([3, 2, 3])
        with pytest.raises(ValueError):
            AutoencoderModel(
                arch, [np.full((3, 2), np.nan), np.zeros((2, 3))], [np.zeros(2), np.zeros(3)]
            )


class TestReconstructionError:
    def test_zero_residual(self):
        x = np.array([1.0, 2.0])
        assert reconstruction_error(x, x, LossKind.MSE) == 0.0
        assert reconstruction_error(x, x, LossKind.MAE) == 0.0

    def test_unit_residuals(self):
        assert reconstruction_error([0, 0], [1, 1], LossKind.MSE) == 1.0
        assert reconstruction_error([0, 0], [1, 1], LossKind.MAE) == 1.0

    def test_mean_over_features(self):
        assert reconstruction_error([1, 0, 2], [0, 0, 0], LossKind.MSE) == pytest.approx(5 / 3)
        assert reconstruction_error([1, 0, 2], [0, 0, 0], LossKind.MAE) == pytest.approx(1.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            reconstruction_error([1, 2], [1, 2, 3], LossKind.MSE)


def random_architecture(rng):
    d = int(rng.integers(3, 13))
    hidden = [int(w) for w in rng.integers(1, 13, size=int(rng.integers(1, 4)))]
    hidden[int(rng.integers(len(hidden)))] = int(rng.integers(1, d))
    activation = [Activation.TANH, Activation.RELU][int(rng.integers(2))]
    return Architecture([d, *hidden, d], activation)


def finite_difference(model, batch, step=1e-5):
    arch = model.architecture
    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]

    def f():
        return objective(arch, weights, biases, model.loss_kind, model.l2_lambda, batch)

    grads = []
    for param in (*weights, *biases):
        grad = np.zeros_like(param)
        for idx in np.ndindex(param.shape):
            original = param[idx]
            param[idx] = original + step
            up = f()
            param[idx] = original - step
            down = f()
            param[idx] = original
            grad[idx] = (up - down) / (2 * step)
        grads.append(grad)
    return grads


def relative_error(analytic, numeric):
    a = np.concatenate([np.ravel(g) for g in (*analytic.weights, *analytic.biases)])
    n = np.concatenate([np.ravel(g) for g in numeric])
    return np.linalg.norm(a - n) / max(np.linalg.norm(a), np.linalg.norm(n), 1e-12)


class TestGradients:
    def test_matches_finite_differences_on_random_architectures(self):
        rng = np.random.default_rng(20)
        for trial in range(20):
            arch = random_architecture(rng)
            model = build_autoencoder(
                arch,
                l2=[0.0, 1e-3][trial % 2],
                seed=trial,
                loss_kind=[LossKind.MSE, LossKind.MAE][(trial // 2) % 2],
            )
            batch = rng.normal(size=(5, arch.input_width))
            numeric = finite_difference(model, batch)
            assert relative_error(gradients(model, batch), numeric) < 1e-5, arch

    def test_small_net_matches_finite_differences(self):
        model = build_autoencoder(Architecture([6, 4, 6]), l2=1e-3, seed=1)
        batch = gaussian_rows(7, 6, seed=1)
        assert relative_error(gradients(model, batch), finite_difference(model, batch)) < 1e-5

    def test_stationary_at_perfect_reconstruction(self):
        batch = np.array([[1.0, 2.0, 0.0], [-3.0, 0.5, 0.0]])
        grads = gradients(projection_model(), batch)
        assert grads.max_abs() == 0.0

    def test_regulariser_only_gradient(self):
        model = projection_model(l2=0.01)
        batch = np.array([[1.0, 2.0, 0.0]])
        grads = gradients(model, batch)
        for g, w in zip(grads.weights, model.weights):
            assert np.array_equal(g, 2 * 0.01 * w)
        assert all(not g.any() for g in grads.biases)

    def test_empty_batch(self):
        with pytest.raises(ValueError):
            gradients(projection_model(), np.zeros((0, 3)))


class TestTrain:
    def test_loss_decreases(self):
        X = low_rank_rows(3000, 10, 3, seed=1)
        train_X, val_X = X[:2250], X[2250:]
        model = build_autoencoder(Architecture([10, 8, 4, 8, 10]), l2=1e-4, seed=1)
        initial = objective(
            model.architecture, model.weights, model.biases, LossKind.MSE, 0.0, val_X
        )
        cfg = TrainConfig(epochs=30, batch_size=128, learning_rate=1e-2, l2_lambda=1e-4)
        trained, history = train(model, cfg, train_X, val_X)
        assert history.epochs == 30
        assert len(history.validation_loss) == 30
        assert history.validation_loss[-1] < 0.3 * initial
        assert history.train_loss[-1] < history.train_loss[0]
        assert trained.l2_lambda == 1e-4
        assert not trained.parameters_equal(model)

    def test_input_model_is_untouched(self):
        X = low_rank_rows(100, 6, 2, seed=2)
        model = build_autoencoder(Architecture([6, 3, 6]), seed=2)
        copy = build_autoencoder(Architecture([6, 3, 6]), seed=2)
        train(model, TrainConfig(epochs=2, batch_size=16), X[:80], X[80:])
        assert model.parameters_equal(copy)

    def test_deterministic_in_seed(self):
        X = low_rank_rows(200, 6, 2, seed=3)
        model = build_autoencoder(Architecture([6, 3, 6]), seed=3)
        cfg = TrainConfig(epochs=3, batch_size=32, seed=8)
        a, history_a = train(model, cfg, X[:150], X[150:])
        b, history_b = train(model, cfg, X[:150], X[150:])
        assert a.parameters_equal(b)
        assert history_a == history_b
        c, _ = train(model, TrainConfig(epochs=3, batch_size=32, seed=9), X[:150], X[150:])
        assert not a.parameters_equal(c)

    def test_batch_larger_than_data_is_clipped(self):
        X = low_rank_rows(40, 6, 2, seed=4)
        model = build_autoencoder(Architecture([6, 3, 6]), seed=4)
        _, history = train(model, TrainConfig(epochs=2), X[:30], X[30:])
        assert history.epochs == 2

    def test_zero_epochs(self):
        X = low_rank_rows(40, 6, 2, seed=5)
        model = build_autoencoder(Architecture([6, 3, 6]), seed=5)
        trained, history = train(model, TrainConfig(epochs=0), X[:30], X[30:])
        assert trained is model
        assert history.epochs == 0

    def test_empty_training_set(self):
        model = build_autoencoder(Architecture([6, 3, 6]))
        with pytest.raises(DataError):
            train(model, TrainConfig(epochs=1), np.zeros((0, 6)), np.zeros((5, 6)))

    def test_divergence_is_a_numeric_error(self):
        X = low_rank_rows(64, 6, 2, seed=6) * 1e200
        model = build_autoencoder(Architecture([6, 3, 6], Activation.RELU), seed=6)
        with pytest.raises(NumericError):
            train(model, TrainConfig(epochs=3, batch_size=8, learning_rate=1.0), X, X)

    def test_history_csv(self, tmp_path):
        X = low_rank_rows(60, 6, 2, seed=7)
        model = build_autoencoder(Architecture([6, 3, 6]), seed=7)
        _, history = train(model, TrainConfig(epochs=4, batch_size=16), X[:45], X[45:])
        frame = pd.read_csv(history.to_csv(tmp_path / "history.csv"))
        assert list(frame.columns) == ["epoch", "train_loss", "validation_loss"]
        assert list(frame["epoch"]) == [1, 2, 3, 4]
        assert tuple(frame["validation_loss"]) == history.validation_loss


class TestPrincipalSubspace:
    def test_linear_autoencoder_reaches_pca_optimum(self):
        rng = np.random.default_rng(30)
        eigenvalues = np.array([5.0, 4.0, 3.0, 1.0, 0.8, 0.6, 0.4, 0.2])
        rotation, _ = np.linalg.qr(rng.normal(size=(8, 8)))
        X = rng.normal(size=(500, 8)) * np.sqrt(eigenvalues) @ rotation.T

        centred = X - X.mean(axis=0)
        population_cov = centred.T @ centred / len(X)
        smallest = np.sort(np.linalg.eigvalsh(population_cov))[:5]
        pca_mse = smallest.sum() / 8

        model = build_autoencoder(Architecture([8, 3, 8], Activation.LINEAR), seed=30)
        model, _ = train(
            model, TrainConfig(epochs=400, batch_size=50, learning_rate=5e-3, l2_lambda=0.0), X, X
        )
        model, _ = train(
            model, TrainConfig(epochs=200, batch_size=50, learning_rate=5e-4, l2_lambda=0.0), X, X
        )
        ae_mse = float(score(model, X, LossKind.MSE).mean())
        assert ae_mse >= pca_mse - 1e-9
        assert ae_mse <= 1.05 * pca_mse


class TestDetect:
    def test_scores_follow_the_loss(self):
        model = projection_model()
        X = np.array([[1.0, 1.0, 2.0], [0.0, 0.0, -1.0]])
        assert np.allclose(score(model, X, LossKind.MSE), [4 / 3, 1 / 3])
        assert np.allclose(score(model, X, LossKind.MAE), [2 / 3, 1 / 3])

    def test_model_loss_is_the_default(self):
        model = build_autoencoder(Architecture([6, 3, 6]), seed=1, loss_kind=LossKind.MAE)
        X = gaussian_rows(20, 6, seed=1)
        assert np.array_equal(score(model, X), score(model, X, LossKind.MAE))
        assert not np.array_equal(score(model, X), score(model, X, LossKind.MSE))

    def test_strictly_above_threshold_is_flagged(self):
        scores = np.array([0.1, 0.2, 0.3, 0.4])
        assert detect(scores, 0.2) == 0.5
        assert detect(scores, 0.4) == 0.0
        assert detect(scores, 0.0) == 1.0

    def test_empty_scores(self):
        with pytest.raises(ValueError):
            detect(np.array([]), 0.1)

    def test_rate_is_non_increasing_in_threshold(self):
        model = build_autoencoder(Architecture([6, 3, 6]), seed=2)
        scores = score(model, gaussian_rows(300, 6, seed=2))
        rates = [detect(scores, t) for t in np.linspace(0, scores.max(), 25)]
        assert all(b <= a for a, b in zip(rates, rates[1:]))

    def test_thread_count_does_not_change_scores(self):
        model = build_autoencoder(Architecture([6, 3, 6]), seed=3)
        X = gaussian_rows(9000, 6, seed=3)
        assert np.array_equal(score(model, X, threads=1), score(model, X, threads=3))

    def test_threshold_for_specificity(self):
        scores = np.arange(1.0, 11.0)
        threshold = threshold_for_specificity(scores, 0.9)
        assert threshold == 9.0
        assert 1 - detect(scores, threshold) >= 0.9
        assert threshold_for_specificity(scores, 1.0) == 10.0
        with pytest.raises(ValueError):
            threshold_for_specificity(scores, 0.0)


class TestPersistence:
    def test_round_trip(self, tmp_path):
        model = build_autoencoder(Architecture([6, 3, 6]), l2=1e-3, seed=4, loss_kind="mae")
        path = model.save(tmp_path / "model.json", pipeline="abc", seed=4)
        loaded, provenance = AutoencoderModel.load_with_provenance(path)
        assert loaded.parameters_equal(model)
        assert loaded.architecture == model.architecture
        assert loaded.loss_kind is LossKind.MAE
        assert loaded.fingerprint() == model.fingerprint()
        assert provenance == {"pipeline": "abc", "seed": 4}

    def test_missing_model_names_the_producer(self, tmp_path):
        with pytest.raises(MissingArtifact, match="zeroday train-ae"):
            AutoencoderModel.load(tmp_path / "model.json")


class TestRandomSearch:
    def space(self, **changes):
        params = dict(
            architectures=[Architecture([6, 4, 6]), Architecture([6, 2, 6])],
            learning_rates=[1e-2],
            epoch_counts=[3],
            l2_lambdas=[0.0],
            budget=12,
            seed=5,
            batch_size=32,
        )
        return SearchSpace(**(params | changes))

    def data(self):
        X = low_rank_rows(200, 6, 3, seed=6)
        return X[:150], X[150:]

    def test_budget_one_is_a_single_trial(self):
        result = random_search(self.space(budget=1), *self.data())
        assert len(result.trials) == 1
        assert result.model is None

    def test_deterministic_by_seed(self):
        a = random_search(self.space(), *self.data())
        b = random_search(self.space(), *self.data())
        assert a.trials == b.trials
        assert a.architecture == b.architecture

    def test_winner_matches_exhaustive_oracle(self):
        space = self.space()
        train_X, val_X = self.data()
        result = random_search(space, train_X, val_X)

        oracle = {}
        for arch in space.architectures:
            cfg = TrainConfig(
                min(TRIAL_EPOCH_CAP, 3), 32, 1e-2, 0.0, LossKind.MSE, space.seed
            )
            model = build_autoencoder(arch, 0.0, space.seed, LossKind.MSE)
            oracle[arch] = train(model, cfg, train_X, val_X)[1].validation_loss[-1]

        assert {t.architecture for t in result.trials} == set(space.architectures)
        for trial in result.trials:
            assert trial.validation_loss == oracle[trial.architecture]
        assert result.architecture == min(oracle, key=oracle.get)

    def test_retrain_returns_full_length_model(self):
        space = self.space(epoch_counts=[12], budget=2)
        result = random_search(space, *self.data(), retrain=True)
        assert result.model is not None
        assert result.history.epochs == 12
        assert result.model.architecture == result.architecture

    def test_trials_csv(self, tmp_path):
        result = random_search(self.space(budget=3), *self.data())
        frame = pd.read_csv(result.trials_to_csv(tmp_path / "trials.csv"))
        assert list(frame["trial"]) == [0, 1, 2]
        assert set(frame.columns) >= {"architecture", "learning_rate", "validation_loss"}

    def test_empty_space(self):
        with pytest.raises(ValueError):
            self.space(learning_rates=[])
        with pytest.raises(ValueError):
            self.space(budget=0)

    def test_architecture_must_fit_the_data(self):
        with pytest.raises(ValueError):
            random_search(self.space(architectures=[Architecture([5, 2, 5])]), *self.data())
