"""Multiclass Tsetlin Machine, convolutional or classic.

Each class owns a positive and a negative clause bank plus integer clause
weights.  Prediction is the argmax of the weighted votes (lowest class index
wins ties).  A training example updates its own class with ``y = 1`` and one
uniformly drawn other class with ``y = 0``.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numba
import numpy as np

from . import _kernels
from .automata import Hyperparams, TaBank, masks_from_states, n_words, state_dtype
from .convolution import PatchLayout, WholeImageLayout, as_zyx, build_layout

logger = logging.getLogger(__name__)


@dataclass
class EpochMetrics:
    epoch: int
    train_acc: float
    test_acc: float
    seconds: float


@dataclass
class Evaluation:
    accuracy: float
    confusion: np.ndarray  # rows: true class, columns: predicted class


class ClassModel:
    """View on one class of a :class:`MulticlassModel`."""

    def __init__(self, parent: "MulticlassModel", index: int):
        self.parent = parent
        self.index = index
        n = parent.params.states
        self.positive = TaBank(parent.states[index, 0], parent.masks[index, 0], n, +1)
        self.negative = TaBank(parent.states[index, 1], parent.masks[index, 1], n, -1)

    @property
    def weights_positive(self) -> np.ndarray:
        return self.parent.weights[self.index, 0]

    @property
    def weights_negative(self) -> np.ndarray:
        return self.parent.weights[self.index, 1]

    def bank(self, polarity: int) -> TaBank:
        return self.positive if polarity > 0 else self.negative

    def score(self, image) -> int:
        imgs = self.parent._prepare(np.asarray(image)[None])
        wx, wy, ox, oy, tx, ty = self.parent.layout.kernel_args()
        s = _kernels._scores_serial(imgs, self.parent.masks[self.index:self.index + 1],
                                    self.parent.weights[self.index:self.index + 1], wx, wy, ox, oy, tx, ty)
        return int(s[0, 0])

    def predict_binary(self, image) -> int:
        """Single-machine decision ``0 <= v`` (ties go to 1)."""
        return int(self.score(image) >= 0)


def class_score(model: ClassModel, image) -> int:
    return model.score(image)


class MulticlassModel:
    """A TM (``params.filter_size is None``) or CTM over fixed-size bit images.

    Images are ``(Y, X)`` or ``(Y, X, Z)`` arrays of 0/1.
    """

    def __init__(self, n_classes: int, image_shape, params: Hyperparams, *, _init_states: bool = True):
        if n_classes < 2:
            raise ValueError("need at least two classes")
        image_shape = tuple(int(v) for v in image_shape)
        if len(image_shape) == 2:
            Y, X = image_shape
            Z = 1
        elif len(image_shape) == 3:
            Y, X, Z = image_shape
        else:
            raise ValueError(f"image shape must be (Y, X) or (Y, X, Z), got {image_shape}")
        if params.convolutional and Z != params.layers:
            raise ValueError(f"image has {Z} layers, hyperparameters say {params.layers}")
        self.n_classes = n_classes
        self.image_shape = image_shape
        self.params = params
        if params.convolutional:
            self.layout = build_layout(X, Y, Z, params.filter_size, params.stride)
        else:
            self.layout = WholeImageLayout(X, Y, Z)
        self.rng = np.random.default_rng(params.seed)
        C = params.clauses_per_polarity
        L = 2 * self.layout.n_features
        shape = (n_classes, 2, C, L)
        if _init_states:
            self.states = (params.states + self.rng.integers(0, 2, size=shape)).astype(state_dtype(params.states))
        else:
            self.states = np.full(shape, params.states, dtype=state_dtype(params.states))
        self.masks = masks_from_states(self.states, params.states)
        self.weights = np.ones((n_classes, 2, C), dtype=np.int32)

    @property
    def mode(self) -> str:
        return "ctm" if self.params.convolutional else "tm"

    @property
    def n_literals(self) -> int:
        return self.states.shape[-1]

    @property
    def nbytes(self) -> int:
        return self.states.nbytes + self.weights.nbytes

    def class_model(self, k: int) -> ClassModel:
        if not 0 <= k < self.n_classes:
            raise IndexError(f"class {k} out of range")
        return ClassModel(self, k)

    def refresh_masks(self) -> None:
        self.masks = masks_from_states(self.states, self.params.states)
        assert self.masks.shape[-1] == n_words(self.n_literals)

    def equals(self, other: "MulticlassModel") -> bool:
        return (self.n_classes == other.n_classes and self.image_shape == other.image_shape
                and self.params == other.params and self.states.dtype == other.states.dtype
                and np.array_equal(self.states, other.states)
                and np.array_equal(self.weights, other.weights))

    def _prepare(self, images) -> np.ndarray:
        images = np.asarray(images)
        ndim = len(self.image_shape)
        if images.shape[1:] != self.image_shape:
            raise ValueError(f"expected images of shape {self.image_shape}, got {images.shape[1:]}")
        if images.size and images.max() > 1:
            raise ValueError("images must be binary (0/1)")
        return as_zyx(images, ndim)

    def _batch(self, images) -> tuple[np.ndarray, bool]:
        images = np.asarray(images)
        single = images.shape == self.image_shape
        if single:
            images = images[None]
        return self._prepare(images), single

    def class_scores(self, images, workers: int = 1) -> np.ndarray:
        imgs, single = self._batch(images)
        wx, wy, ox, oy, tx, ty = self.layout.kernel_args()
        if workers > 1 and imgs.shape[0] > 1:
            numba.set_num_threads(min(workers, numba.config.NUMBA_NUM_THREADS))
            scores = _kernels._scores_parallel(imgs, self.masks, self.weights, wx, wy, ox, oy, tx, ty)
        else:
            scores = _kernels._scores_serial(imgs, self.masks, self.weights, wx, wy, ox, oy, tx, ty)
        return scores[0] if single else scores

    def predict(self, images, workers: int = 1):
        scores = self.class_scores(images, workers)
        if scores.ndim == 1:
            return int(np.argmax(scores))
        return np.argmax(scores, axis=1)

    def clause_outputs(self, images) -> np.ndarray:
        """Inference-mode clause outputs, shape ``(n, K, 2, m/2)``."""
        imgs, _ = self._batch(images)
        wx, wy, ox, oy, tx, ty = self.layout.kernel_args()
        return _kernels._clause_outputs(imgs, self.masks, wx, wy, ox, oy, tx, ty)

    def _check_labels(self, labels) -> np.ndarray:
        labels = np.asarray(labels, dtype=np.int64).ravel()
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise ValueError(f"labels must lie in 0..{self.n_classes - 1}")
        return labels

    def _train(self, imgs: np.ndarray, labels: np.ndarray, order: np.ndarray,
               rng: np.random.Generator) -> None:
        p = self.params
        wx, wy, ox, oy, tx, ty = self.layout.kernel_args()
        _kernels._train_examples(imgs, labels, order, self.states, self.masks, self.weights,
                                 wx, wy, ox, oy, tx, ty, p.threshold, 1.0 / p.specificity,
                                 p.states, p.weighting, p.boost_true_positive, rng)

    def train_example(self, image, label: int, rng: Optional[np.random.Generator] = None) -> None:
        imgs = self._prepare(np.asarray(image)[None])
        labels = self._check_labels([label])
        self._train(imgs, labels, np.zeros(1, dtype=np.int64), self.rng if rng is None else rng)

    def fit(self, X, y, epochs: Optional[int] = None, X_test=None, y_test=None, *,
            eval_train: bool = False, workers: int = 1,
            callback: Optional[Callable[[EpochMetrics], None]] = None) -> list[EpochMetrics]:
        """Online training, one seeded shuffle per epoch.

        Returns one :class:`EpochMetrics` per epoch; accuracies not computed
        are NaN.
        """
        imgs = self._prepare(X)
        labels = self._check_labels(y)
        if imgs.shape[0] == 0:
            raise ValueError("empty training set")
        if labels.shape[0] != imgs.shape[0]:
            raise ValueError("image and label counts differ")
        epochs = self.params.epochs if epochs is None else epochs
        history = []
        for epoch in range(1, epochs + 1):
            t0 = time.perf_counter()
            order = self.rng.permutation(imgs.shape[0])
            self._train(imgs, labels, order, self.rng)
            seconds = time.perf_counter() - t0
            train_acc = self.evaluate(X, y, workers=workers).accuracy if eval_train else float("nan")
            test_acc = float("nan")
            if X_test is not None:
                test_acc = self.evaluate(X_test, y_test, workers=workers).accuracy
            m = EpochMetrics(epoch, train_acc, test_acc, seconds)
            logger.info("epoch %d train %.4f test %.4f (%.2fs)", epoch, train_acc, test_acc, seconds)
            history.append(m)
            if callback is not None:
                callback(m)
        return history

    def evaluate(self, X, y, workers: int = 1) -> Evaluation:
        labels = self._check_labels(y)
        X = np.asarray(X)
        if X.shape[0] != labels.shape[0]:
            raise ValueError("image and label counts differ")
        confusion = np.zeros((self.n_classes, self.n_classes), dtype=np.int64)
        if labels.size == 0:
            return Evaluation(float("nan"), confusion)
        pred = self.predict(X, workers=workers)
        np.add.at(confusion, (labels, pred), 1)
        return Evaluation(float(np.mean(pred == labels)), confusion)


def predict(model: MulticlassModel, image):
    return model.predict(image)


def train_example(model: MulticlassModel, image, label: int, rng: Optional[np.random.Generator] = None) -> MulticlassModel:
    model.train_example(image, label, rng)
    return model


def fit(model: MulticlassModel, X, y, epochs: Optional[int] = None, **kwargs) -> list[EpochMetrics]:
    return model.fit(X, y, epochs, **kwargs)


def evaluate(model: MulticlassModel, X, y) -> Evaluation:
    return model.evaluate(X, y)
