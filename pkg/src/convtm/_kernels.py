"""Compiled hot paths: per-class update and batch scoring.

Array conventions (one model, ``K`` classes, ``C = m/2`` clauses per polarity,
``L = 2o`` literals, ``NW`` packed words, polarity axis 0 = positive):

    states   (K, 2, C, L)   TA states in 1..2N
    masks    (K, 2, C, NW)  packed include masks
    weights  (K, 2, C)      int32 clause weights >= 1

Random draws for one class update are consumed in this order: for each
polarity (positive first), for each clause ascending: one selector uniform;
if selected and the clause fired, one patch index; if the feedback is Type I,
one uniform per literal ascending.
"""

import numba
import numpy as np
from numba import prange

from .automata import _clause_eval_packed
from .convolution import _count_matches, _encode_patches, _nth_match
from .feedback import _apply_type_i, _apply_type_ii, _select_prob, _weight_update


@numba.njit(cache=True)
def _unpack_row(row, n_literals, out):
    for k in range(n_literals):
        out[k] = (row[k >> 6] >> np.uint64(k & 63)) & np.uint64(1)


@numba.njit(cache=True)
def _update_class(states, masks, weights, lits, y, T, s_inv, n_states, weighting, boost,
                  rng, counts, litbuf, qbuf):
    C = states.shape[1]
    L = states.shape[2]
    # vote sum with learning-mode clause outputs, before any update
    v = 0
    for p in range(2):
        for j in range(C):
            cnt = _count_matches(masks[p, j], lits, True)
            counts[p, j] = cnt
            if cnt > 0:
                if p == 0:
                    v += weights[p, j]
                else:
                    v -= weights[p, j]
    prob = _select_prob(v, T, y)
    for p in range(2):
        ftype = 1 if (p == 0) == (y == 1) else 2
        for j in range(C):
            if rng.random() >= prob:
                continue
            fired = 1 if counts[p, j] > 0 else 0
            if fired:
                nth = rng.integers(0, counts[p, j])
                b = _nth_match(masks[p, j], lits, nth)
                _unpack_row(lits[b], L, litbuf)
            if ftype == 1:
                for k in range(L):
                    qbuf[k] = 1 if rng.random() < s_inv else 0
                _apply_type_i(states[p, j], masks[p, j], fired, litbuf, qbuf, n_states, boost)
            elif fired:
                _apply_type_ii(states[p, j], masks[p, j], fired, litbuf, n_states)
            if weighting:
                weights[p, j] = _weight_update(weights[p, j], fired, ftype)
    return v


@numba.njit(cache=True)
def _train_examples(images, labels, order, states, masks, weights, wx, wy, ox, oy, tx, ty,
                    T, s_inv, n_states, weighting, boost, rng):
    K = states.shape[0]
    C = states.shape[2]
    L = states.shape[3]
    NW = masks.shape[3]
    B = ox.shape[0] * oy.shape[0]
    lits = np.zeros((B, NW), dtype=np.uint64)
    counts = np.zeros((2, C), dtype=np.int64)
    litbuf = np.zeros(L, dtype=np.uint8)
    qbuf = np.zeros(L, dtype=np.uint8)
    for i in range(order.shape[0]):
        e = order[i]
        _encode_patches(images[e], wx, wy, ox, oy, tx, ty, lits)
        target = labels[e]
        _update_class(states[target], masks[target], weights[target], lits, 1, T, s_inv,
                      n_states, weighting, boost, rng, counts, litbuf, qbuf)
        other = rng.integers(0, K - 1)
        if other >= target:
            other += 1
        _update_class(states[other], masks[other], weights[other], lits, 0, T, s_inv,
                      n_states, weighting, boost, rng, counts, litbuf, qbuf)


@numba.njit(cache=True)
def _clause_fires(mask, lits):
    """Inference-mode convolutional output with early exit."""
    for b in range(lits.shape[0]):
        if _clause_eval_packed(mask, lits[b], False):
            return 1
    return 0


@numba.njit(cache=True)
def _score_one(lits, masks, weights, out):
    K = masks.shape[0]
    C = masks.shape[2]
    for c in range(K):
        v = 0
        for p in range(2):
            for j in range(C):
                if _clause_fires(masks[c, p, j], lits):
                    if p == 0:
                        v += weights[c, p, j]
                    else:
                        v -= weights[c, p, j]
        out[c] = v


@numba.njit(cache=True)
def _scores_serial(images, masks, weights, wx, wy, ox, oy, tx, ty):
    n = images.shape[0]
    B = ox.shape[0] * oy.shape[0]
    scores = np.zeros((n, masks.shape[0]), dtype=np.int64)
    lits = np.zeros((B, masks.shape[3]), dtype=np.uint64)
    for e in range(n):
        _encode_patches(images[e], wx, wy, ox, oy, tx, ty, lits)
        _score_one(lits, masks, weights, scores[e])
    return scores


@numba.njit(cache=True, parallel=True)
def _scores_parallel(images, masks, weights, wx, wy, ox, oy, tx, ty):
    n = images.shape[0]
    B = ox.shape[0] * oy.shape[0]
    scores = np.zeros((n, masks.shape[0]), dtype=np.int64)
    for e in prange(n):
        lits = np.zeros((B, masks.shape[3]), dtype=np.uint64)
        _encode_patches(images[e], wx, wy, ox, oy, tx, ty, lits)
        _score_one(lits, masks, weights, scores[e])
    return scores


@numba.njit(cache=True)
def _clause_outputs(images, masks, wx, wy, ox, oy, tx, ty):
    """Inference-mode outputs ``(n, K, 2, C)`` of every clause."""
    n = images.shape[0]
    K = masks.shape[0]
    C = masks.shape[2]
    B = ox.shape[0] * oy.shape[0]
    out = np.zeros((n, K, 2, C), dtype=np.uint8)
    lits = np.zeros((B, masks.shape[3]), dtype=np.uint64)
    for e in range(n):
        _encode_patches(images[e], wx, wy, ox, oy, tx, ty, lits)
        for c in range(K):
            for p in range(2):
                for j in range(C):
                    out[e, c, p, j] = _clause_fires(masks[c, p, j], lits)
    return out
