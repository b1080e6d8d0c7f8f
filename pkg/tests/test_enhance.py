import numpy as np
import pytest

from uwbench.enhance import (
    clahe_on_l,
    clahe_on_lab,
    equalize_channel,
    gamma_correct,
    generate_inputs,
    white_balance,
)
from uwbench.imaging import rgb_to_lab


def test_white_balance_constant_cast():
    # Gray mean 0.4 -> gains (2, 1, 2/3) by hand.
    img = np.empty((4, 6, 3))
    img[:] = [0.2, 0.4, 0.6]
    out, info = white_balance(img, with_info=True)
    np.testing.assert_allclose(out, 0.4, atol=1e-12)
    np.testing.assert_allclose(info.gains, [2.0, 1.0, 2.0 / 3.0])
    assert not info.clamped and info.zero_channels == ()


def test_white_balance_gray_is_identity():
    img = np.full((3, 3, 3), 0.5)
    out = white_balance(img)
    np.testing.assert_allclose(out, img, atol=1e-12)


def test_white_balance_zero_channel_rule():
    rng = np.random.default_rng(0)
    img = rng.uniform(0.3, 0.5, (8, 8, 3))
    img[..., 2] = 0.0
    out, info = white_balance(img, with_info=True)
    assert info.zero_channels == (2,)
    assert (out[..., 2] == 0.0).all()
    # R and G balanced to their joint mean.
    joint = (img[..., 0].mean() + img[..., 1].mean()) / 2
    assert abs(out[..., 0].mean() - joint) < 1e-9
    assert abs(out[..., 1].mean() - joint) < 1e-9


def test_white_balance_gain_clamp():
    img = np.empty((2, 2, 3))
    img[:] = [0.9, 0.01, 0.5]
    out, info = white_balance(img, with_info=True)
    assert info.clamped
    assert info.gains[1] == 3.0
    assert out.max() <= 1.0


def test_white_balance_equal_means_property():
    rng = np.random.default_rng(11)
    for _ in range(20):
        base = rng.uniform(0.25, 0.45, (16, 16, 3))
        base[..., 0] *= rng.uniform(0.8, 1.2)
        base[..., 2] *= rng.uniform(0.8, 1.2)
        out, info = white_balance(base, with_info=True)
        assert not info.clamped and info.zero_channels == ()
        means = out.reshape(-1, 3).mean(axis=0)
        assert np.ptp(means) < 1e-6


def test_equalize_two_level_single_tile_matches_hand_oracle():
    chan = np.empty((8, 8))
    chan[:4] = 25.0
    chan[4:] = 75.0
    out, grid = equalize_channel(chan, clip_limit=1.0, tiles=(1, 1))
    assert grid == (1, 1)
    # Oracle: plain histogram equalization of the 2-level histogram, CDF
    # scaled over the channel's own range [25, 75].
    lo, hi = 25.0, 75.0
    expect_low = lo + 0.5 * (hi - lo)
    expect_high = lo + 1.0 * (hi - lo)
    np.testing.assert_allclose(out[:4], expect_low, atol=1e-9)
    np.testing.assert_allclose(out[4:], expect_high, atol=1e-9)


def test_equalize_constant_channel_unchanged():
    chan = np.full((16, 16), 42.0)
    out, _ = equalize_channel(chan, clip_limit=0.01, tiles=(8, 8))
    assert (out == chan).all()


def test_clahe_preserves_ab_channels():
    rng = np.random.default_rng(5)
    lab = rgb_to_lab(rng.random((32, 32, 3)))
    out, _ = clahe_on_lab(lab)
    assert (out[..., 1] == lab[..., 1]).all()
    assert (out[..., 2] == lab[..., 2]).all()
    assert not (out[..., 0] == lab[..., 0]).all()


def test_clahe_constant_image_unchanged():
    img = np.full((32, 32, 3), 0.6)
    out = clahe_on_l(img)
    assert np.abs(out - img).max() < 1e-3


def test_clahe_grid_reduced_for_tiny_image():
    img = np.random.default_rng(1).random((4, 5, 3))
    out, info = clahe_on_l(img, tiles=(8, 8), with_info=True)
    assert out.shape == img.shape
    assert info.grid_reduced and info.tiles == (4, 5)


def test_clahe_rejects_bad_clip_limit():
    with pytest.raises(ValueError):
        clahe_on_l(np.zeros((4, 4, 3)), clip_limit=0.0)


def test_gamma_fixed_points_and_midpoint():
    img = np.array([[[0.0, 0.5, 1.0]]])
    out = gamma_correct(img, 0.7)
    assert out[0, 0, 0] == 0.0 and out[0, 0, 2] == 1.0
    assert abs(out[0, 0, 1] - 0.5**0.7) < 1e-12
    assert abs(0.5**0.7 - 0.61557) < 5e-6


def test_gamma_one_is_identity():
    rng = np.random.default_rng(2)
    img = rng.random((5, 5, 3))
    assert (gamma_correct(img, 1.0) == img).all()


def test_gamma_monotone():
    v = np.linspace(0, 1, 101).reshape(1, -1, 1).repeat(3, axis=2)
    out = gamma_correct(v, 0.7)
    assert (np.diff(out[0, :, 0]) >= 0).all()


def test_gamma_rejects_nonppositive():
    with pytest.raises(ValueError):
        gamma_correct(np.zeros((2, 2, 3)), 0.0)


def test_generate_inputs_bundle():
    rng = np.random.default_rng(9)
    img = rng.random((24, 24, 3))
    bundle = generate_inputs(img)
    for part in (bundle.raw, bundle.wb, bundle.he, bundle.gc):
        assert part.shape == img.shape
    assert (bundle.raw == img).all()

    again = generate_inputs(img)
    assert (bundle.wb == again.wb).all()
    assert (bundle.he == again.he).all()
    assert (bundle.gc == again.gc).all()


def test_generate_inputs_gray_case():
    img = np.full((16, 16, 3), 0.5)
    bundle = generate_inputs(img)
    np.testing.assert_allclose(bundle.gc, 0.5**0.7, atol=1e-12)
    # No contrast to equalize; CLAHE leaves a constant image alone.
    assert np.abs(bundle.he - img).max() < 1e-3
