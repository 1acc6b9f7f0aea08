import cv2
import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from conftest import DATA
from convtm.binarize import (XOR_DIAGONAL, XOR_STRAIGHT, adaptive_gaussian_binarize, gaussian_kernel,
                             generate_noisy_xor, xor_label)
from convtm.data_io import load_idx_images


def _golden_digit():
    img = load_idx_images(DATA / "digit-images.idx")[0]
    rows = (DATA / "digit-w11-c2.txt").read_text().split()
    return img, np.array([[int(ch) for ch in r] for r in rows], dtype=np.uint8)


def test_kernel_normalised():
    k = gaussian_kernel(11)
    assert k.sum() == pytest.approx(1.0)
    assert np.allclose(k, k[::-1])


@pytest.mark.parametrize("c", [1, 2, 5])
def test_constant_image(c):
    # every pixel equals its mean, and I > I - c whenever c > 0
    img = np.full((20, 20), 117, dtype=np.uint8)
    assert adaptive_gaussian_binarize(img, 11, c).min() == 1
    assert adaptive_gaussian_binarize(img, 11, -c).max() == 0
    ref = cv2.adaptiveThreshold(img, 1, cv2.ADAPTIVE_THRESH_GAUSSIAN_C, cv2.THRESH_BINARY, 11, c)
    assert ref.min() == 1


def test_single_bright_pixel():
    img = np.zeros((28, 28), dtype=np.uint8)
    img[14, 14] = 255
    bits = adaptive_gaussian_binarize(img, 11, 2)
    assert bits[14, 14] == 1
    # dark neighbours sit below a mean raised by the bright pixel
    assert bits[14, 15] == 0 and bits[13, 14] == 0


@pytest.mark.parametrize("window", [0, 1, 4, 10])
def test_even_or_tiny_window_rejected(window):
    with pytest.raises(ValueError):
        adaptive_gaussian_binarize(np.zeros((5, 5)), window, 2)


def test_golden_digit():
    img, golden = _golden_digit()
    assert np.array_equal(adaptive_gaussian_binarize(img, 11, 2), golden)


def test_golden_digit_against_opencv():
    img, golden = _golden_digit()
    ref = cv2.adaptiveThreshold(img, 1, cv2.ADAPTIVE_THRESH_GAUSSIAN_C, cv2.THRESH_BINARY, 11, 2)
    assert np.mean(ref == golden) >= 0.98


def test_random_images_against_oracle():
    rng = np.random.default_rng(6)
    for _ in range(5):
        img = rng.integers(0, 256, size=(int(rng.integers(3, 15)), int(rng.integers(3, 15)))).astype(np.uint8)
        window = int(rng.choice([3, 5, 7]))
        assert np.array_equal(adaptive_gaussian_binarize(img, window, 2), oracles.gaussian_threshold(img, window, 2))


def test_stack_matches_per_image():
    rng = np.random.default_rng(1)
    stack = rng.integers(0, 256, size=(4, 12, 9)).astype(np.uint8)
    bits = adaptive_gaussian_binarize(stack, 5, 2)
    for i in range(4):
        assert np.array_equal(bits[i], adaptive_gaussian_binarize(stack[i], 5, 2))


@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12))))
def test_output_is_binary_and_deterministic(img):
    a = adaptive_gaussian_binarize(img, 3, 2)
    assert set(np.unique(a).tolist()) <= {0, 1}
    assert np.array_equal(a, adaptive_gaussian_binarize(img, 3, 2))


def test_xor_without_noise_is_consistent():
    ds = generate_noisy_xor(500, 100, 0.0, seed=4)
    assert [xor_label(x) for x in ds.X_train] == ds.y_train.tolist()
    assert [xor_label(x) for x in ds.X_test] == ds.y_test.tolist()


def test_xor_default_sizes_and_noise_count():
    ds = generate_noisy_xor(seed=0)
    assert ds.X_train.shape == (2500, 4, 4) and ds.X_test.shape == (10000, 4, 4)
    assert int((ds.y_train != ds.y_train_clean).sum()) == 1000
    assert [xor_label(x) for x in ds.X_test] == ds.y_test.tolist()


def test_xor_patterns():
    assert {xor_label(np.pad(np.array(p).reshape(2, 2), ((0, 2), (2, 0)))) for p in XOR_DIAGONAL} == {1}
    assert {xor_label(np.pad(np.array(p).reshape(2, 2), ((0, 2), (2, 0)))) for p in XOR_STRAIGHT} == {0}


def test_xor_class_balance():
    y = generate_noisy_xor(10, 10_000, 0.0, seed=9).y_test
    assert abs(y.mean() - 0.5) <= 3 * np.sqrt(0.25 / y.size)


def test_xor_determinism():
    a, b = generate_noisy_xor(seed=3), generate_noisy_xor(seed=3)
    assert a.X_train.tobytes() == b.X_train.tobytes() and a.y_train.tobytes() == b.y_train.tobytes()


def test_xor_noise_bits_uncorrelated_with_label():
    ds = generate_noisy_xor(10, 10_000, 0.0, seed=12)
    y = ds.y_test.astype(float)
    limit = 3 / np.sqrt(y.size)
    for r in range(4):
        for c in range(4):
            if r < 2 and c >= 2:
                continue
            corr = np.corrcoef(ds.X_test[:, r, c].astype(float), y)[0, 1]
            assert abs(corr) <= limit


def test_xor_bad_noise_rate():
    with pytest.raises(ValueError):
        generate_noisy_xor(10, 10, 1.5)
