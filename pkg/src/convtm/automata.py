"""Tsetlin Automata banks, literal vectors and conjunctive clause evaluation.

A clause over ``o`` input variables has ``2o`` literals: the variables
themselves followed by their negations.  Each literal is guarded by one
Tsetlin Automaton with states ``1..2N``; states ``<= N`` exclude the literal,
states ``> N`` include it.

Besides the integer states, every bank keeps a bit-packed include mask
(``uint64`` words, literal ``k`` at bit ``k % 64`` of word ``k // 64``) that is
kept in sync on every state change, so clause evaluation reduces to
``(literals & mask) == mask``.

All indices are 0-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

import numba
import numpy as np

WORD_BITS = 64


class EvalMode(enum.Enum):
    """Empty clauses output 1 while learning and 0 during inference."""

    LEARNING = "learning"
    INFERENCE = "inference"


class Action(enum.IntEnum):
    EXCLUDE = 0
    INCLUDE = 1


@dataclass
class Hyperparams:
    """Training configuration shared by every class of a model.

    ``filter_size=None`` selects the classic (non-convolutional) machine.
    ``boost_true_positive`` makes Type Ia increments unconditional instead of
    firing with probability ``(s - 1) / s``.
    """

    clauses: int
    threshold: int
    specificity: float
    states: int = 128
    filter_size: Optional[int] = None
    stride: int = 1
    layers: int = 1
    weighting: bool = False
    boost_true_positive: bool = False
    epochs: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.clauses < 2 or self.clauses % 2:
            raise ValueError(f"clauses must be an even integer >= 2, got {self.clauses}")
        if self.threshold < 1:
            raise ValueError(f"threshold must be >= 1, got {self.threshold}")
        if self.specificity < 1.0:
            raise ValueError(f"specificity must be >= 1.0, got {self.specificity}")
        if self.states < 1:
            raise ValueError(f"states must be >= 1, got {self.states}")
        if self.filter_size is not None and self.filter_size < 1:
            raise ValueError(f"filter_size must be >= 1, got {self.filter_size}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")

    @property
    def convolutional(self) -> bool:
        return self.filter_size is not None

    @property
    def clauses_per_polarity(self) -> int:
        return self.clauses // 2


def state_dtype(n_states: int) -> np.dtype:
    """Smallest unsigned integer type holding states ``1..2N``."""
    top = 2 * n_states
    for dt in (np.uint8, np.uint16, np.uint32):
        if top <= np.iinfo(dt).max:
            return np.dtype(dt)
    raise ValueError(f"states per action too large: {n_states}")


def n_words(n_literals: int) -> int:
    return (n_literals + WORD_BITS - 1) // WORD_BITS


def ta_action(state: int, n_states: int) -> Action:
    if not 1 <= state <= 2 * n_states:
        raise ValueError(f"state {state} outside 1..{2 * n_states}")
    return Action.INCLUDE if state > n_states else Action.EXCLUDE


def make_literals(x) -> np.ndarray:
    """Literal vector ``(x_1..x_o, not x_1..not x_o)`` as a uint8 array."""
    x = np.asarray(x, dtype=np.uint8).ravel()
    if np.any(x > 1):
        raise ValueError("input variables must be 0/1")
    return np.concatenate([x, 1 - x])


def pack_bits(bits) -> np.ndarray:
    """Pack a 0/1 vector into little-endian uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    words = np.zeros(n_words(bits.size), dtype=np.uint64)
    idx = np.flatnonzero(bits)
    np.bitwise_or.at(words, idx // WORD_BITS, np.left_shift(np.uint64(1), (idx % WORD_BITS).astype(np.uint64)))
    return words


def unpack_bits(words: np.ndarray, n_bits: int) -> np.ndarray:
    k = np.arange(n_bits)
    return ((words[k // WORD_BITS] >> (k % WORD_BITS).astype(np.uint64)) & np.uint64(1)).astype(np.uint8)


@numba.njit(cache=True)
def _state_inc(states, mask, k, n_states):
    s = states[k]
    if s < 2 * n_states:
        states[k] = s + 1
        if s == n_states:
            mask[k >> 6] |= np.uint64(1) << np.uint64(k & 63)


@numba.njit(cache=True)
def _state_dec(states, mask, k, n_states):
    s = states[k]
    if s > 1:
        states[k] = s - 1
        if s == n_states + 1:
            mask[k >> 6] &= ~(np.uint64(1) << np.uint64(k & 63))


@numba.njit(cache=True)
def _clause_eval_packed(mask, lits, learning):
    empty = True
    for w in range(mask.shape[0]):
        m = mask[w]
        if m != 0:
            empty = False
            if (lits[w] & m) != m:
                return 0
    if empty:
        return 1 if learning else 0
    return 1


def masks_from_states(states: np.ndarray, n_states: int) -> np.ndarray:
    """Packed include masks for a ``(..., n_literals)`` state array."""
    include = (states > n_states).astype(np.uint8)
    n_lit = states.shape[-1]
    flat = include.reshape(-1, n_lit)
    out = np.zeros((flat.shape[0], n_words(n_lit)), dtype=np.uint64)
    for r in range(flat.shape[0]):
        out[r] = pack_bits(flat[r])
    return out.reshape(states.shape[:-1] + (out.shape[-1],))


class TaBank:
    """States of one polarity's clauses: an ``(m/2, 2o)`` matrix in ``1..2N``.

    ``states`` and ``mask`` may be views into a larger model array; the bank
    mutates them in place.
    """

    def __init__(self, states: np.ndarray, mask: np.ndarray, n_states: int, polarity: int):
        if polarity not in (1, -1):
            raise ValueError("polarity must be +1 or -1")
        if states.ndim != 2 or mask.shape != (states.shape[0], n_words(states.shape[1])):
            raise ValueError("states/mask shape mismatch")
        self.states = states
        self.mask = mask
        self.n_states = n_states
        self.polarity = polarity

    @classmethod
    def create(cls, n_clauses: int, n_literals: int, n_states: int, polarity: int = 1,
               rng: Optional[np.random.Generator] = None) -> "TaBank":
        """New bank with every automaton at ``N`` or ``N+1`` (uniform, seeded)."""
        rng = np.random.default_rng() if rng is None else rng
        states = (n_states + rng.integers(0, 2, size=(n_clauses, n_literals))).astype(state_dtype(n_states))
        return cls(states, masks_from_states(states, n_states), n_states, polarity)

    @classmethod
    def from_states(cls, states, n_states: int, polarity: int = 1) -> "TaBank":
        states = np.array(states, dtype=state_dtype(n_states), ndmin=2)
        if states.min(initial=1) < 1 or states.max(initial=1) > 2 * n_states:
            raise ValueError(f"states must lie in 1..{2 * n_states}")
        return cls(states, masks_from_states(states, n_states), n_states, polarity)

    @property
    def n_clauses(self) -> int:
        return self.states.shape[0]

    @property
    def n_literals(self) -> int:
        return self.states.shape[1]

    def action(self, clause: int, literal: int) -> Action:
        return ta_action(int(self.states[clause, literal]), self.n_states)

    def included(self, clause: int) -> np.ndarray:
        if not 0 <= clause < self.n_clauses:
            raise IndexError(f"clause {clause} out of range")
        return np.flatnonzero(self.states[clause] > self.n_states)

    def increment(self, indices: Iterable[tuple[int, int]]) -> None:
        for j, k in indices:
            _state_inc(self.states[j], self.mask[j], k, self.n_states)

    def decrement(self, indices: Iterable[tuple[int, int]]) -> None:
        for j, k in indices:
            _state_dec(self.states[j], self.mask[j], k, self.n_states)

    def eval(self, clause: int, lits, mode: EvalMode = EvalMode.INFERENCE) -> int:
        packed = pack_bits(lits)
        return int(_clause_eval_packed(self.mask[clause], packed, mode is EvalMode.LEARNING))


def included_literals(bank: TaBank, clause_index: int) -> np.ndarray:
    return bank.included(clause_index)


def clause_eval(included, lits, mode: EvalMode = EvalMode.INFERENCE) -> int:
    """Conjunction of the included literals of ``lits``.

    >>> clause_eval([0, 3], make_literals([1, 0]))
    1
    """
    included = np.asarray(list(included) if not isinstance(included, np.ndarray) else included, dtype=np.int64)
    if included.size == 0:
        return 1 if mode is EvalMode.LEARNING else 0
    return int(np.all(np.asarray(lits)[included] == 1))


def clause_eval_packed(mask: np.ndarray, packed_lits: np.ndarray, mode: EvalMode = EvalMode.INFERENCE) -> int:
    return int(_clause_eval_packed(mask, packed_lits, mode is EvalMode.LEARNING))


def state_inc(bank: TaBank, indices) -> TaBank:
    bank.increment(indices)
    return bank


def state_dec(bank: TaBank, indices) -> TaBank:
    bank.decrement(indices)
    return bank
