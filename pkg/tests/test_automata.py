import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from convtm.automata import (Action, EvalMode, Hyperparams, TaBank, clause_eval, clause_eval_packed,
                             included_literals, make_literals, pack_bits, state_dec, state_dtype,
                             state_inc, ta_action, unpack_bits)


@pytest.mark.parametrize("state,n,expected", [(4, 3, Action.INCLUDE), (3, 3, Action.EXCLUDE),
                                              (1, 1, Action.EXCLUDE), (2, 1, Action.INCLUDE)])
def test_ta_action(state, n, expected):
    assert ta_action(state, n) is expected


@pytest.mark.parametrize("state", [0, 7])
def test_ta_action_out_of_range(state):
    with pytest.raises(ValueError):
        ta_action(state, 3)


def test_included_literals_all_at_boundary():
    bank = TaBank.from_states(np.full((2, 6), 3), 3)
    assert included_literals(bank, 0).size == 0


def test_included_literals_two_variable_example():
    # x1 included (state 4), x2 excluded (state 3), not-x1 excluded, not-x2 included
    bank = TaBank.from_states([[4, 3, 2, 5]], 3)
    assert set(included_literals(bank, 0).tolist()) == {0, 3}


def test_included_literals_random_bank():
    rng = np.random.default_rng(5)
    states = rng.integers(1, 7, size=(1, 8))
    bank = TaBank.from_states(states, 3)
    naive = [k for k in range(8) if states[0, k] > 3]
    assert included_literals(bank, 0).tolist() == naive


def test_included_literals_bad_index():
    bank = TaBank.from_states(np.full((2, 4), 3), 3)
    with pytest.raises(IndexError):
        included_literals(bank, 2)


def test_clause_eval_examples():
    lits = make_literals([1, 0])
    assert clause_eval({0, 3}, lits) == 1
    assert clause_eval({0, 1}, lits) == 0
    assert clause_eval(set(), lits, EvalMode.INFERENCE) == 0
    assert clause_eval(set(), lits, EvalMode.LEARNING) == 1


def test_state_inc_dec():
    bank = TaBank.from_states([[4, 6, 1, 3]], 3)
    state_inc(bank, {(0, 0), (0, 1)})
    state_dec(bank, {(0, 2)})
    assert bank.states[0].tolist() == [5, 6, 1, 3]
    state_inc(bank, {(0, 3)})
    assert bank.action(0, 3) is Action.INCLUDE
    assert unpack_bits(bank.mask[0], 4).tolist() == [1, 1, 0, 1]


def test_create_starts_at_boundary():
    bank = TaBank.create(10, 50, 128, rng=np.random.default_rng(0))
    assert set(np.unique(bank.states).tolist()) <= {128, 129}
    assert bank.states.dtype == np.uint16


def test_state_dtype():
    assert state_dtype(127) == np.uint8
    assert state_dtype(128) == np.uint16
    assert state_dtype(3) == np.uint8


def test_hyperparams_validation():
    with pytest.raises(ValueError):
        Hyperparams(clauses=3, threshold=5, specificity=3.0)
    with pytest.raises(ValueError):
        Hyperparams(clauses=4, threshold=0, specificity=3.0)
    with pytest.raises(ValueError):
        Hyperparams(clauses=4, threshold=5, specificity=0.5)
    with pytest.raises(ValueError):
        Hyperparams(clauses=4, threshold=5, specificity=2.0, stride=0)
    assert Hyperparams(clauses=4, threshold=5, specificity=2.0).clauses_per_polarity == 2


def test_packed_eval_matches_naive_loop():
    """10,000 random clause / literal-vector pairs, exact agreement."""
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        o = int(rng.integers(1, 90))
        x = rng.integers(0, 2, size=o)
        lits = make_literals(x)
        density = rng.choice([0.0, 0.02, 0.1, 0.5])
        included = np.flatnonzero(rng.random(2 * o) < density)
        mode = EvalMode.LEARNING if rng.random() < 0.5 else EvalMode.INFERENCE
        mask = pack_bits(np.isin(np.arange(2 * o), included))
        got = clause_eval_packed(mask, pack_bits(lits), mode)
        assert got == oracles.clause_output(included, oracles.literals(x), mode is EvalMode.LEARNING)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=70))
def test_literal_complementarity(x):
    lits = make_literals(x)
    o = len(x)
    assert np.all(lits[:o] ^ lits[o:] == 1)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=130))
def test_pack_unpack_roundtrip(bits):
    assert unpack_bits(pack_bits(bits), len(bits)).tolist() == bits


@given(st.data())
def test_clause_eval_monotone_in_literal_flips(data):
    n = data.draw(st.integers(1, 40))
    lits = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    included = data.draw(st.sets(st.integers(0, n - 1)))
    before = clause_eval(included, lits)
    zeros = np.flatnonzero(lits == 0)
    if zeros.size:
        flipped = lits.copy()
        flipped[data.draw(st.sampled_from(zeros.tolist()))] = 1
        assert clause_eval(included, flipped) >= before


@given(st.integers(1, 6), st.lists(st.tuples(st.booleans(), st.integers(0, 3), st.integers(0, 7)),
                                    max_size=200), st.integers(0, 2**32 - 1))
def test_states_stay_in_bounds(n, ops, seed):
    bank = TaBank.create(4, 8, n, rng=np.random.default_rng(seed))
    for inc, j, k in ops:
        (state_inc if inc else state_dec)(bank, {(j, k)})
        assert 1 <= bank.states[j, k] <= 2 * n
    # the packed mask tracks the states exactly
    for j in range(4):
        assert unpack_bits(bank.mask[j], 8).tolist() == (bank.states[j] > n).astype(int).tolist()
