import numpy as np
import pytest
from scipy.spatial.distance import jensenshannon

from baybfed.attacks import (
    AttackConfig,
    TriggerSpec,
    adaptive_train,
    constrain_and_scale,
    p_statistic_grad,
    poison_dataset,
)
from baybfed.crp_jensen import compute_p, update_client_weight
from baybfed.data import generate_dataset
from baybfed.errors import InvalidInputError
from baybfed.hbbp import init_baseline
from baybfed.model import TinyModel, TrainHyper, local_train

TRIG = TriggerSpec((0, 1), -6.0, 0)


@pytest.fixture
def data():
    return generate_dataset(100, 10, 8, 4.0, seed=3)


class TestPoison:
    def test_zero_rate_unchanged(self, data):
        out = poison_dataset(data, TRIG, 0.0, seed=1)
        np.testing.assert_array_equal(out.features, data.features)
        np.testing.assert_array_equal(out.labels, data.labels)

    def test_full_rate_relabels_everything(self, data):
        out = poison_dataset(data, TRIG, 1.0, seed=1)
        assert np.all(out.labels == 0)
        assert np.all(out.features[:, [0, 1]] == -6.0)

    def test_half_rate_exact_count(self, data):
        out = poison_dataset(data, TRIG, 0.5, seed=1)
        stamped = np.all(out.features[:, [0, 1]] == -6.0, axis=1)
        assert stamped.sum() == 50
        assert np.all(out.labels[stamped] == 0)
        np.testing.assert_array_equal(out.features[~stamped], data.features[~stamped])
        np.testing.assert_array_equal(out.labels[~stamped], data.labels[~stamped])

    def test_deterministic(self, data):
        a = poison_dataset(data, TRIG, 0.3, seed=9)
        b = poison_dataset(data, TRIG, 0.3, seed=9)
        np.testing.assert_array_equal(a.features, b.features)

    def test_bad_coords(self, data):
        with pytest.raises(InvalidInputError):
            poison_dataset(data, TriggerSpec((8,), 1.0, 0), 0.5, seed=0)

    def test_bad_target(self, data):
        with pytest.raises(InvalidInputError):
            poison_dataset(data, TriggerSpec((0,), 1.0, 10), 0.5, seed=0)


class TestConstrainAndScale:
    def test_identity(self):
        np.testing.assert_array_equal(constrain_and_scale([1.0, 2.0], [0.5, 0.5], 1.0), [1.0, 2.0])

    def test_collapse(self):
        np.testing.assert_array_equal(constrain_and_scale([1.0, 2.0], [0.5, 0.5], 0.0), [0.5, 0.5])

    def test_hand_value(self):
        np.testing.assert_allclose(constrain_and_scale([1.0, 2.0], [0.0, 0.0], 10.0), [10.0, 20.0])

    def test_affine_midpoint(self):
        rng = np.random.default_rng(0)
        w, g = rng.normal(size=5), rng.normal(size=5)
        mid = constrain_and_scale(w, g, 4.0)
        np.testing.assert_allclose(mid, 0.5 * (constrain_and_scale(w, g, 2.0) + constrain_and_scale(w, g, 6.0)))


def test_attack_config_validation():
    with pytest.raises(InvalidInputError):
        AttackConfig(pdr=1.5)
    with pytest.raises(InvalidInputError):
        AttackConfig(alpha=-0.1)
    with pytest.raises(InvalidInputError):
        AttackConfig(kind="edge_case")


@pytest.fixture
def setting(data):
    rng = np.random.default_rng(0)
    model = TinyModel.init(8, 16, 10, rng)
    g = model.flatten()
    baseline, root = init_baseline(g)
    hyper = TrainHyper(0.1, 2, 16, seed=4)
    reference = local_train(model, data, hyper).flatten()
    ref_p = compute_p(update_client_weight(reference, g), baseline, 0.01)
    poisoned = poison_dataset(data, TRIG, 0.5, seed=2)
    return model, g, baseline, hyper, ref_p, poisoned


def test_evasion_gradient_matches_finite_differences(setting):
    model, g, baseline, _, ref_p, _ = setting
    rng = np.random.default_rng(1)
    s = g + rng.normal(0, 0.3, size=g.size)
    loss, grad = p_statistic_grad(s, g, ref_p, 0.01, baseline)
    assert loss > 0
    for k in rng.choice(g.size, 10, replace=False):
        e = np.zeros_like(s)
        e[k] = 1e-6
        fd = (p_statistic_grad(s + e, g, ref_p, 0.01, baseline)[0]
              - p_statistic_grad(s - e, g, ref_p, 0.01, baseline)[0]) / 2e-6
        assert fd == pytest.approx(grad[k], rel=1e-4, abs=1e-9)


def test_alpha_one_is_plain_poisoned_training(setting):
    model, g, baseline, hyper, ref_p, poisoned = setting
    plain = local_train(model, poisoned, hyper).flatten()
    adaptive = adaptive_train(model, poisoned, hyper, 1.0, 0.01, baseline, ref_p, g)
    np.testing.assert_allclose(adaptive, plain, rtol=0, atol=1e-12)


def test_alpha_zero_moves_p_toward_reference(setting):
    model, g, baseline, hyper, ref_p, poisoned = setting

    def distance(vec):
        return jensenshannon(compute_p(update_client_weight(vec, g), baseline, 0.01), ref_p) ** 2

    evasive = adaptive_train(model, poisoned, hyper, 0.0, 0.01, baseline, ref_p, g, scale=10.0)
    greedy = adaptive_train(model, poisoned, hyper, 1.0, 0.01, baseline, ref_p, g, scale=10.0)
    assert distance(evasive) < distance(greedy)


def test_invalid_alpha(setting):
    model, g, baseline, hyper, ref_p, poisoned = setting
    with pytest.raises(InvalidInputError):
        adaptive_train(model, poisoned, hyper, 1.5, 0.01, baseline, ref_p, g)
