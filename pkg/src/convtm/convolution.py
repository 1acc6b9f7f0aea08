"""Patch layouts, coordinate augmentation and clause-as-filter evaluation.

Images are handled internally as ``(Z, Y, X)`` uint8 arrays of 0/1.  A patch
at origin ``(ox, oy)`` contributes ``W*W*Z`` pixel variables (x fastest, then
y, then z), followed by ``B_X - 1`` X-position bits and ``B_Y - 1``
Y-position bits.  Position bits use thermometer encoding against all origins
but the last: bit ``t`` is 1 iff ``coord <= threshold_t``.  Patches are
numbered row-major, ``b = iy * B_X + ix``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .automata import EvalMode, n_words, pack_bits, make_literals


def axis_origins(length: int, W: int, d: int) -> np.ndarray:
    """Origins ``0, d, 2d, ...`` with the last clamped to ``length - W``."""
    count = math.ceil((length - W) / d) + 1
    origins = np.minimum(np.arange(count) * d, length - W)
    return origins.astype(np.int64)


@dataclass(frozen=True)
class PatchLayout:
    X: int
    Y: int
    Z: int
    W: int
    d: int
    origins_x: np.ndarray = field(repr=False)
    origins_y: np.ndarray = field(repr=False)

    @property
    def B_X(self) -> int:
        return len(self.origins_x)

    @property
    def B_Y(self) -> int:
        return len(self.origins_y)

    @property
    def n_patches(self) -> int:
        return self.B_X * self.B_Y

    # The largest origin would give a bit that is 1 for every patch; its
    # negation is a constant-0 literal that Type II keeps including.
    @property
    def thresholds_x(self) -> np.ndarray:
        return self.origins_x[:-1]

    @property
    def thresholds_y(self) -> np.ndarray:
        return self.origins_y[:-1]

    @property
    def window(self) -> tuple[int, int]:
        return self.W, self.W

    @property
    def n_pixel_features(self) -> int:
        return self.W * self.W * self.Z

    @property
    def n_features(self) -> int:
        return self.n_pixel_features + len(self.thresholds_x) + len(self.thresholds_y)

    @property
    def positional(self) -> bool:
        return True

    def patch_origin(self, b: int) -> tuple[int, int]:
        if not 0 <= b < self.n_patches:
            raise IndexError(f"patch index {b} outside 0..{self.n_patches - 1}")
        return int(self.origins_x[b % self.B_X]), int(self.origins_y[b // self.B_X])

    def kernel_args(self):
        return (self.W, self.W, self.origins_x, self.origins_y, self.thresholds_x, self.thresholds_y)


@dataclass(frozen=True)
class WholeImageLayout:
    """Classic TM: the whole image is the single patch, no position bits."""

    X: int
    Y: int
    Z: int

    B_X = 1
    B_Y = 1
    n_patches = 1
    positional = False

    @property
    def window(self) -> tuple[int, int]:
        return self.X, self.Y

    @property
    def n_pixel_features(self) -> int:
        return self.X * self.Y * self.Z

    @property
    def n_features(self) -> int:
        return self.n_pixel_features

    def patch_origin(self, b: int) -> tuple[int, int]:
        if b != 0:
            raise IndexError("whole-image layout has a single patch")
        return 0, 0

    def kernel_args(self):
        zero = np.zeros(1, dtype=np.int64)
        none = np.zeros(0, dtype=np.int64)
        return (self.X, self.Y, zero, zero, none, none)


def build_layout(X: int, Y: int, Z: int, W: int, d: int = 1) -> PatchLayout:
    if W < 1 or d < 1 or Z < 1:
        raise ValueError("W, d and Z must be positive")
    if W > X or W > Y:
        raise ValueError(f"filter size {W} exceeds image {X}x{Y}")
    return PatchLayout(X, Y, Z, W, d, axis_origins(X, W, d), axis_origins(Y, W, d))


def encode_position(coord: int, thresholds) -> np.ndarray:
    """Thermometer bits: 1 where ``coord <= threshold``."""
    return (coord <= np.asarray(thresholds)).astype(np.uint8)


def as_zyx(images: np.ndarray, image_ndim: int) -> np.ndarray:
    """Convert ``(..., Y, X)`` or ``(..., Y, X, Z)`` bit images to ``(..., Z, Y, X)``."""
    images = np.asarray(images)
    if image_ndim == 2:
        out = images[..., None, :, :]
    elif image_ndim == 3:
        out = np.moveaxis(images, -1, -3)
    else:
        raise ValueError("images must be 2-D (Y, X) or 3-D (Y, X, Z)")
    return np.ascontiguousarray(out, dtype=np.uint8)


@dataclass
class AugmentedPatch:
    variables: np.ndarray
    index: int

    @property
    def literals(self) -> np.ndarray:
        return make_literals(self.variables)


def extract_patch(image, layout, b: int) -> AugmentedPatch:
    """Variables of patch ``b`` of an ``(Y, X)`` or ``(Y, X, Z)`` image."""
    image = np.asarray(image)
    zyx = as_zyx(image, image.ndim)
    if zyx.shape != (layout.Z, layout.Y, layout.X):
        raise ValueError(f"image shape {image.shape} does not match layout")
    ox, oy = layout.patch_origin(b)
    wx, wy = layout.window
    pixels = zyx[:, oy:oy + wy, ox:ox + wx].ravel()
    if layout.positional:
        pixels = np.concatenate([pixels, encode_position(ox, layout.thresholds_x),
                                 encode_position(oy, layout.thresholds_y)])
    return AugmentedPatch(pixels.astype(np.uint8), b)


@numba.njit(cache=True)
def _encode_patches(img, wx, wy, origins_x, origins_y, thresholds_x, thresholds_y, out):
    """Packed literal rows for every patch of one ``(Z, Y, X)`` image."""
    Z = img.shape[0]
    bx = origins_x.shape[0]
    by = origins_y.shape[0]
    tx = thresholds_x.shape[0]
    ty = thresholds_y.shape[0]
    o = wx * wy * Z + tx + ty
    out[:, :] = 0
    for iy in range(by):
        oy = origins_y[iy]
        for ix in range(bx):
            ox = origins_x[ix]
            row = out[iy * bx + ix]
            k = 0
            for z in range(Z):
                for dy in range(wy):
                    for dx in range(wx):
                        lit = k if img[z, oy + dy, ox + dx] else o + k
                        row[lit >> 6] |= np.uint64(1) << np.uint64(lit & 63)
                        k += 1
            for t in range(tx):
                lit = k if ox <= thresholds_x[t] else o + k
                row[lit >> 6] |= np.uint64(1) << np.uint64(lit & 63)
                k += 1
            for t in range(ty):
                lit = k if oy <= thresholds_y[t] else o + k
                row[lit >> 6] |= np.uint64(1) << np.uint64(lit & 63)
                k += 1


def encode_patches(image_zyx: np.ndarray, layout) -> np.ndarray:
    """``(n_patches, words)`` packed literal vectors for one ``(Z, Y, X)`` image."""
    out = np.zeros((layout.n_patches, n_words(2 * layout.n_features)), dtype=np.uint64)
    _encode_patches(np.ascontiguousarray(image_zyx, dtype=np.uint8), *layout.kernel_args(), out)
    return out


@numba.njit(cache=True)
def _count_matches(mask, lits, learning):
    """Number of patches on which the clause outputs 1."""
    empty = True
    for w in range(mask.shape[0]):
        if mask[w] != 0:
            empty = False
            break
    if empty:
        return lits.shape[0] if learning else 0
    count = 0
    for b in range(lits.shape[0]):
        ok = True
        for w in range(mask.shape[0]):
            m = mask[w]
            if (lits[b, w] & m) != m:
                ok = False
                break
        if ok:
            count += 1
    return count


@numba.njit(cache=True)
def _nth_match(mask, lits, nth):
    """Index of the ``nth`` matching patch in ascending order (empty mask matches all)."""
    seen = 0
    for b in range(lits.shape[0]):
        ok = True
        for w in range(mask.shape[0]):
            m = mask[w]
            if (lits[b, w] & m) != m:
                ok = False
                break
        if ok:
            if seen == nth:
                return b
            seen += 1
    return -1


def conv_clause_eval(included, image, layout, mode: EvalMode = EvalMode.INFERENCE) -> tuple[int, set]:
    """OR of the clause over all patches, plus the set of matching patches."""
    image = np.asarray(image)
    lits = encode_patches(as_zyx(image, image.ndim), layout)
    bits = np.zeros(2 * layout.n_features, dtype=np.uint8)
    bits[np.asarray(list(included), dtype=np.int64)] = 1
    mask = pack_bits(bits)
    if not mask.any():
        matching = set(range(layout.n_patches)) if mode is EvalMode.LEARNING else set()
    else:
        hit = np.all((lits & mask) == mask, axis=1)
        matching = set(np.flatnonzero(hit).tolist())
    return int(bool(matching)), matching


def select_update_patch(matching, rng: np.random.Generator) -> Optional[int]:
    """Uniform draw among the matching patches; None if there are none."""
    if not matching:
        return None
    ordered = sorted(matching)
    return ordered[int(rng.integers(0, len(ordered)))]
