"""Type I / Type II feedback, clause selection and integer clause weights.

Positive clauses receive Type I feedback for ``y = 1`` and Type II for
``y = 0``; negative clauses the other way around.  Selection of a clause for
feedback happens with probability ``(T - clamp(v)) / 2T`` (``y = 1``) or
``(T + clamp(v)) / 2T`` (``y = 0``).

The ``_apply_*`` kernels are the ones used by the training loop; the public
functions wrap them for single banks and explicit draws so they can be
checked against the set definitions directly.
"""

from __future__ import annotations

import enum

import numba
import numpy as np

from .automata import TaBank, _state_dec, _state_inc


class FeedbackType(enum.IntEnum):
    TYPE_I = 1
    TYPE_II = 2


@numba.njit(cache=True)
def _select_prob(v, T, y):
    if v > T:
        v = T
    elif v < -T:
        v = -T
    if y == 1:
        return (T - v) / (2.0 * T)
    return (T + v) / (2.0 * T)


def select_prob(v: int, T: int, y: int) -> float:
    if T < 1:
        raise ValueError("T must be >= 1")
    return float(_select_prob(int(v), int(T), int(y)))


@numba.njit(cache=True)
def _draw_selection(p, n, rng, out):
    """One uniform per clause, ascending; clause selected iff draw < p."""
    for j in range(n):
        out[j] = 1 if rng.random() < p else 0


def draw_selection(p: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Bernoulli(p) clause selectors as consumed by the training loop."""
    out = np.zeros(n, dtype=np.uint8)
    _draw_selection(float(p), n, rng, out)
    return out


@numba.njit(cache=True)
def _draw_q(s_inv, rng, out):
    for k in range(out.shape[0]):
        out[k] = 1 if rng.random() < s_inv else 0


def draw_q(s: float, n_literals: int, rng: np.random.Generator) -> np.ndarray:
    """Literal selectors for Type Ib, each 1 with probability ``1/s``."""
    out = np.zeros(n_literals, dtype=np.uint8)
    _draw_q(1.0 / s, rng, out)
    return out


@numba.njit(cache=True)
def _dispatch(positive, y):
    if positive == (y == 1):
        return 1
    return 2


def dispatch_feedback(polarity: int, y: int) -> FeedbackType:
    return FeedbackType(_dispatch(polarity > 0, int(y)))


@numba.njit(cache=True)
def _apply_type_i(states, mask, clause_output, lits, q, n_states, boost):
    for k in range(states.shape[0]):
        if clause_output == 1 and lits[k] == 1:
            if boost or q[k] == 0:
                _state_inc(states, mask, k, n_states)
        elif q[k] == 1:
            _state_dec(states, mask, k, n_states)


@numba.njit(cache=True)
def _apply_type_ii(states, mask, clause_output, lits, n_states):
    if clause_output == 0:
        return
    for k in range(states.shape[0]):
        if lits[k] == 0:
            _state_inc(states, mask, k, n_states)


@numba.njit(cache=True)
def _weight_update(w, clause_output, ftype):
    if clause_output == 1:
        if ftype == 1:
            return w + 1
        if w > 1:
            return w - 1
    return w


def weight_update(w: int, clause_output: int, feedback_type: FeedbackType) -> int:
    if w < 1:
        raise ValueError("weights are >= 1")
    return int(_weight_update(int(w), int(clause_output), int(feedback_type)))


def type_i_sets(clause: int, clause_output: int, lits, q, boost: bool = False) -> tuple[set, set]:
    """``(Ia, Ib)`` index sets for one selected clause.

    Without boosting, a literal whose ``q`` draw is 1 gets no Ia increment,
    so Ia fires with probability ``(s - 1) / s``.
    """
    lits = np.asarray(lits)
    q = np.asarray(q)
    if clause_output:
        ia = np.flatnonzero((lits == 1) & ((q == 0) | boost))
        ib = np.flatnonzero((lits == 0) & (q == 1))
    else:
        ia = np.empty(0, dtype=np.int64)
        ib = np.flatnonzero(q == 1)
    return {(clause, int(k)) for k in ia}, {(clause, int(k)) for k in ib}


def type_ii_set(clause: int, clause_output: int, lits) -> set:
    if not clause_output:
        return set()
    return {(clause, int(k)) for k in np.flatnonzero(np.asarray(lits) == 0)}


def type_i_feedback(bank: TaBank, clause: int, clause_output: int, lits, q,
                    boost: bool = False) -> TaBank:
    """Type Ia increments and Type Ib decrements on one selected clause.

    ``lits`` may be None when the clause output is 0; only Ib applies then.
    """
    if clause_output and lits is None:
        raise ValueError("a literal vector is required when the clause output is 1")
    q = np.ascontiguousarray(q, dtype=np.uint8)
    if lits is None:
        lits = np.zeros(bank.n_literals, dtype=np.uint8)
    lits = np.ascontiguousarray(lits, dtype=np.uint8)
    _apply_type_i(bank.states[clause], bank.mask[clause], int(clause_output), lits, q, bank.n_states, boost)
    return bank


def type_ii_feedback(bank: TaBank, clause: int, clause_output: int, lits) -> TaBank:
    lits = np.ascontiguousarray(lits, dtype=np.uint8)
    _apply_type_ii(bank.states[clause], bank.mask[clause], int(clause_output), lits, bank.n_states)
    return bank
