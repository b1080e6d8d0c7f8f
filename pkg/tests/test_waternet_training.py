import numpy as np
import pytest

from uwbench.enhance import generate_inputs
from uwbench.waternet import (
    TrainConfig,
    Trainer,
    WaterNetConfig,
    identity_extractor,
    init_waternet,
    learning_rate,
    perceptual_loss,
    random_extractor,
)
from uwbench.waternet.loss import perceptual_loss_tensors
from uwbench.waternet.model import image_to_tensor
from uwbench.waternet.train import augment

from test_waternet_layers import assert_grads_close, finite_difference

TINY = WaterNetConfig(
    trunk_kernels=(3,),
    trunk_channels=4,
    head_kernel=3,
    ftu_kernels=(3,),
    ftu_channels=(3,),
)


def test_perceptual_loss_zero_at_equality():
    rng = np.random.default_rng(0)
    img = rng.random((8, 8, 3))
    loss, grad = perceptual_loss(identity_extractor(), img, img)
    assert loss == 0.0
    assert (grad == 0).all()


def test_perceptual_loss_identity_extractor_constant_images():
    # With a pass-through extractor the loss is the mean squared pixel
    # difference per batch element: (0.5 - 0.2)^2 = 0.09 for each element.
    for n in (1, 3):
        en = np.full((n, 3, 6, 6), 0.2)
        gt = np.full((n, 3, 6, 6), 0.5)
        loss, _ = perceptual_loss_tensors(identity_extractor(), en, gt)
        assert abs(loss - 0.09 * n) < 1e-12


def test_perceptual_loss_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    fx = random_extractor(seed=2, channels=4, depth=2, pool=True)
    en = rng.random((1, 3, 4, 4))
    gt = rng.random((1, 3, 4, 4))

    def loss():
        return perceptual_loss_tensors(fx, en, gt)[0]

    _, grad = perceptual_loss_tensors(fx, en, gt)
    assert_grads_close(grad, finite_difference(loss, en))


def test_perceptual_loss_rejects_mismatched_shapes():
    fx = identity_extractor()
    with pytest.raises(ValueError):
        perceptual_loss_tensors(fx, np.zeros((1, 3, 4, 4)), np.zeros((1, 3, 5, 4)))


def test_learning_rate_schedule():
    cfg = TrainConfig()
    assert learning_rate(cfg, 0) == 1e-3
    assert learning_rate(cfg, 9_999) == 1e-3
    assert abs(learning_rate(cfg, 10_000) - 1e-4) < 1e-19
    assert abs(learning_rate(cfg, 25_000) - 1e-5) < 1e-20


def _toy_batch(rng, n_pairs, patch):
    batch = []
    for _ in range(n_pairs):
        gt = rng.random((patch, patch, 3))
        raw = np.clip(gt * np.array([0.5, 0.8, 1.0]), 0.0, 1.0) ** 1.2
        batch.append((generate_inputs(raw), gt))
    return batch


def test_training_reduces_loss_on_toy_set():
    rng = np.random.default_rng(3)
    cfg = TrainConfig(batch_size=4, patch=16, seed=0)
    batch = _toy_batch(rng, 2, cfg.patch)
    trainer = Trainer(init_waternet(TINY, seed=0), random_extractor(seed=0), cfg)
    losses = [trainer.step(batch) for _ in range(40)]
    assert losses[-1] < losses[0]
    assert trainer.iteration == 40


def test_training_is_deterministic():
    rng = np.random.default_rng(4)
    cfg = TrainConfig(batch_size=4, patch=16, seed=0)
    batch = _toy_batch(rng, 2, cfg.patch)

    runs = []
    for _ in range(2):
        trainer = Trainer(init_waternet(TINY, seed=1), random_extractor(seed=1), cfg)
        losses = [trainer.step(batch) for _ in range(5)]
        runs.append((losses, trainer.model))
    assert runs[0][0] == runs[1][0]
    for la, lb in zip(runs[0][1].layers(), runs[1][1].layers()):
        assert np.array_equal(la.kernel, lb.kernel)
        assert np.array_equal(la.bias, lb.bias)


def test_oversized_batch_rejected():
    cfg = TrainConfig(batch_size=1, patch=16)
    trainer = Trainer(init_waternet(TINY, seed=5), identity_extractor(), cfg)
    rng = np.random.default_rng(6)
    batch = _toy_batch(rng, 2, cfg.patch)
    with pytest.raises(ValueError):
        trainer.step(batch)


def test_wrong_patch_size_rejected():
    cfg = TrainConfig(patch=16)
    trainer = Trainer(init_waternet(TINY, seed=7), identity_extractor(), cfg)
    rng = np.random.default_rng(8)
    with pytest.raises(ValueError):
        trainer.step(_toy_batch(rng, 1, 12))


def test_augment_count_and_distinctness():
    rng = np.random.default_rng(9)
    a = rng.random((8, 8, 3))
    b = rng.random((8, 8, 3))
    versions = augment((a, b))
    assert len(versions) == 8
    flat = [v[0].tobytes() for v in versions]
    assert len(set(flat)) == 8  # all distinct for a generic asymmetric image
    assert np.array_equal(versions[0][0], a)


def test_augment_rot180_is_involution():
    rng = np.random.default_rng(10)
    a = rng.random((6, 6, 3))
    rot180 = np.rot90(a, 2)
    assert np.array_equal(np.rot90(rot180, 2), a)
    versions = augment((a, a))
    assert any(np.array_equal(v[0], rot180) for v in versions)


def test_augment_preserves_pixel_multiset():
    rng = np.random.default_rng(11)
    a = rng.random((6, 6, 3))
    for va, vb in augment((a, a)):
        assert np.array_equal(np.sort(va.ravel()), np.sort(a.ravel()))
        assert np.array_equal(va, vb)


def test_augment_requires_square():
    rng = np.random.default_rng(12)
    with pytest.raises(ValueError):
        augment((rng.random((4, 6, 3)), rng.random((4, 6, 3))))


def test_augment_seeded_shuffle_is_deterministic():
    rng = np.random.default_rng(13)
    pair = (rng.random((4, 4, 3)), rng.random((4, 4, 3)))
    one = augment(pair, seed=42)
    two = augment(pair, seed=42)
    for (a1, _), (a2, _) in zip(one, two):
        assert np.array_equal(a1, a2)


def test_end_to_end_gradients_match_finite_differences():
    # Perturb every trainable parameter of a small float64 model and compare
    # the analytic gradients against central differences of the full loss.
    from uwbench.waternet.model import backward_tensors, forward_tensors

    rng = np.random.default_rng(14)
    model = init_waternet(TINY, seed=15, dtype=np.float64)
    fx = random_extractor(seed=16, channels=3, depth=1, pool=False)
    tensors = [rng.random((1, 3, 5, 5)) for _ in range(4)]
    gt = rng.random((1, 3, 5, 5))

    def loss():
        fused, _, _, _ = forward_tensors(model, *tensors)
        return perceptual_loss_tensors(fx, fused, gt)[0]

    fused, _, _, cache = forward_tensors(model, *tensors)
    _, grad_fused = perceptual_loss_tensors(fx, fused, gt)
    grads = backward_tensors(model, cache, grad_fused)

    for layer, (gk, gb) in zip(model.layers(), grads):
        assert_grads_close(gk, finite_difference(loss, layer.kernel))
        assert_grads_close(gb, finite_difference(loss, layer.bias))
