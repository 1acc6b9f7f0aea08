"""Booleanization of grey-scale images and the 2D Noisy XOR generator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


def gaussian_kernel(window: int) -> np.ndarray:
    """1-D Gaussian of odd length ``window``, normalised to sum 1.

    sigma = 0.3 * ((window - 1) / 2 - 1) + 0.8
    """
    sigma = 0.3 * ((window - 1) * 0.5 - 1) + 0.8
    x = np.arange(window) - (window - 1) / 2
    k = np.exp(-(x * x) / (2 * sigma * sigma))
    return k / k.sum()


def adaptive_gaussian_binarize(img, window: int = 11, c: float = 2) -> np.ndarray:
    """1 where a pixel exceeds its Gaussian-weighted neighbourhood mean minus ``c``.

    Works on a single ``(Y, X)`` image or a stack ``(n, Y, X)``; borders
    replicate the edge pixels.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    img = np.asarray(img)
    if img.ndim not in (2, 3) or min(img.shape[-2:]) == 0:
        raise ValueError("expected a non-empty (Y, X) image or (n, Y, X) stack")
    data = img.astype(np.float64)
    k = gaussian_kernel(window)
    mean = ndimage.correlate1d(data, k, axis=-1, mode="nearest")
    mean = ndimage.correlate1d(mean, k, axis=-2, mode="nearest")
    return (data > mean - c).astype(np.uint8)


# Upper-right 2x2 patch contents, row-major (top-left, top-right, bottom-left, bottom-right).
XOR_DIAGONAL = ((1, 0, 0, 1), (0, 1, 1, 0))
XOR_STRAIGHT = ((1, 1, 0, 0), (0, 0, 1, 1), (1, 0, 1, 0), (0, 1, 0, 1))


@dataclass
class XorDataset:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    y_train_clean: np.ndarray


def _xor_images(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    X = rng.integers(0, 2, size=(n, 4, 4), dtype=np.uint8)
    y = rng.integers(0, 2, size=n).astype(np.uint32)
    pick = rng.integers(0, 4, size=n)
    diag = np.array(XOR_DIAGONAL, dtype=np.uint8)
    straight = np.array(XOR_STRAIGHT, dtype=np.uint8)
    patch = np.where(y[:, None] == 1, diag[pick % 2], straight[pick])
    X[:, 0:2, 2:4] = patch.reshape(n, 2, 2)
    return X, y


def generate_noisy_xor(n_train: int = 2500, n_test: int = 10000, noise_rate: float = 0.4,
                       seed: int = 0) -> XorDataset:
    """4x4 images whose upper-right 2x2 patch decides the class.

    Diagonals are class 1, horizontal/vertical lines class 0; every other bit
    is noise.  Exactly ``round(noise_rate * n_train)`` training labels are
    flipped; test labels are clean.
    """
    if not 0.0 <= noise_rate <= 1.0:
        raise ValueError("noise_rate must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    X_train, y_clean = _xor_images(n_train, rng)
    X_test, y_test = _xor_images(n_test, rng)
    y_train = y_clean.copy()
    flip = rng.choice(n_train, size=int(round(noise_rate * n_train)), replace=False)
    y_train[flip] = 1 - y_train[flip]
    return XorDataset(X_train, y_train, X_test, y_test, y_clean)


def xor_label(image) -> int:
    """Clean class of a 4x4 XOR image from its upper-right patch."""
    patch = tuple(int(v) for v in np.asarray(image)[0:2, 2:4].ravel())
    if patch in XOR_DIAGONAL:
        return 1
    if patch in XOR_STRAIGHT:
        return 0
    raise ValueError(f"patch {patch} is not a valid XOR pattern")
