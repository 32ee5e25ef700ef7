import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raresample.errors import ForbiddenWord, InvalidModel, NotUnifilar, UnknownSymbol
from raresample.hmm import (
    Hmm,
    check_markov_order,
    check_unifilar,
    empirical_decay_rate,
    entropy_rate,
    log2_word_probability,
    markov_order,
    require_valid,
    sample_indices,
    sample_path,
    shannon_entropy,
    stationary_distribution,
    statistical_complexity,
    successor_table,
    validate,
    word_census,
    word_probability,
    words,
)
from raresample.models import BUNDLED, fair_coin, fig1_six_state, iid, load_bundled, period2, perturbed_coins

import oracles

PC_HMU = oracles.binary_entropy(0.6) / 3 + 2 * oracles.binary_entropy(0.8) / 3


def two_state(p_ab, p_ba):
    t = np.zeros((1, 2, 2))
    t[0] = [[1 - p_ab, p_ab], [p_ba, 1 - p_ba]]
    return Hmm(("A", "B"), ("x",), t)


# --- validation ---------------------------------------------------------------

def test_validate_perturbed_coins_clean(coins):
    assert validate(coins) == []


def test_validate_short_row():
    t = np.zeros((2, 2, 2))
    t[0, 0, 0], t[1, 0, 1] = 0.5, 0.4
    t[0, 1, 0], t[1, 1, 1] = 0.5, 0.5
    found = validate(Hmm(("A", "B"), ("0", "1"), t))
    assert [v.invariant for v in found] == ["row-stochastic"]
    assert found[0].indices == (0,)


def test_validate_reducible():
    found = validate(two_state(0.5, 0.0))
    assert [v.invariant for v in found] == ["irreducible"]


def test_validate_entry_range_and_labels():
    t = np.zeros((1, 2, 2))
    t[0] = [[1.5, -0.5], [0.0, 1.0]]
    found = validate(Hmm(("A", "A"), ("x",), t))
    kinds = {v.invariant for v in found}
    assert {"unique-labels", "entry-range"} <= kinds


def test_require_valid_raises_with_violations():
    with pytest.raises(InvalidModel) as exc:
        require_valid(two_state(0.5, 0.0))
    assert exc.value.violations


def test_hmm_rejects_bad_shape():
    with pytest.raises(ValueError):
        Hmm(("A",), ("0", "1"), np.ones((1, 1, 1)))


def test_hmm_is_read_only(coins):
    with pytest.raises(ValueError):
        coins.t[0, 0, 0] = 0.0


def test_unknown_symbol(coins):
    with pytest.raises(UnknownSymbol):
        word_probability(coins, "2")


# --- stationary distribution and entropies ------------------------------------

def test_stationary_symmetric():
    assert np.allclose(stationary_distribution(two_state(0.5, 0.5)), [0.5, 0.5], atol=1e-15)


def test_stationary_perturbed_coins(coins):
    assert np.allclose(stationary_distribution(coins), [1 / 3, 2 / 3], atol=1e-14)


def test_stationary_single_state():
    assert stationary_distribution(fair_coin()).tolist() == [1.0]


def test_stationary_matches_eig_oracle(bundled, ising):
    for m in (bundled, ising):
        assert np.allclose(stationary_distribution(m), oracles.eig_stationary(m.transition_matrix), atol=1e-12)


@pytest.mark.parametrize("p,h", [([0.5, 0.5], 1.0), ([1.0, 0.0], 0.0), ([1 / 3, 2 / 3], 0.9182958340544896)])
def test_shannon_entropy(p, h):
    assert shannon_entropy(p) == pytest.approx(h, abs=1e-12)


def test_statistical_complexity(coins, ising):
    assert statistical_complexity(coins) == pytest.approx(0.9182958340544896, abs=1e-12)
    assert statistical_complexity(fair_coin()) == 0.0
    pi = oracles.eig_stationary(ising.transition_matrix)
    assert statistical_complexity(ising) == pytest.approx(-(pi * np.log2(pi)).sum(), abs=1e-12)


def test_entropy_rate_examples(coins):
    assert entropy_rate(fair_coin()) == pytest.approx(1.0, abs=1e-15)
    assert entropy_rate(coins) == pytest.approx(PC_HMU, abs=1e-12)
    assert entropy_rate(coins) == pytest.approx(0.8049355947431, abs=1e-12)
    assert entropy_rate(period2()) == 0.0


def test_entropy_rate_requires_unifilar():
    t = np.zeros((1, 3, 3))
    t[0, 0, 1] = t[0, 0, 2] = 0.5
    t[0, 1, 0] = t[0, 2, 0] = 1.0
    hmm = Hmm(("A", "B", "C"), ("0",), t)
    assert not check_unifilar(hmm)
    with pytest.raises(NotUnifilar):
        entropy_rate(hmm)
    with pytest.raises(NotUnifilar):
        successor_table(hmm)


def test_block_entropy_slope_oracle(bundled, ising):
    for m in (bundled, ising):
        r = markov_order(m)
        if r is None:
            continue
        L = r + 2
        slope = oracles.block_entropy(np.array(m.t), L) - oracles.block_entropy(np.array(m.t), L - 1)
        assert entropy_rate(m) == pytest.approx(slope, abs=1e-6)


# --- unifilarity and Markov order ---------------------------------------------

def test_unifilar_examples(coins, ising):
    assert check_unifilar(coins)
    assert check_unifilar(ising)
    assert check_unifilar(fig1_six_state())


def test_markov_order_examples(coins, ising):
    assert check_markov_order(coins, 1)
    assert not check_markov_order(coins, 0)
    assert check_markov_order(ising, 2)
    assert not check_markov_order(ising, 1)
    assert markov_order(ising) == 2
    fig1 = fig1_six_state()
    assert not any(check_markov_order(fig1, r) for r in range(12))


def test_markov_order_brute_force(coins, ising):
    # Every admissible length-r history must end in one state.
    for m, r in ((coins, 1), (ising, 2)):
        ends = {}
        for i in range(m.n_states):
            for w in itertools.product(range(m.n_symbols), repeat=r):
                j = i
                for x in w:
                    nz = np.flatnonzero(m.t[x, j])
                    if nz.size == 0:
                        break
                    j = int(nz[0])
                else:
                    ends.setdefault(w, set()).add(j)
        assert all(len(v) == 1 for v in ends.values())


def test_markov_order_monotone(bundled, ising):
    for m in (bundled, ising):
        for r in range(5):
            if check_markov_order(m, r):
                assert all(check_markov_order(m, r2) for r2 in range(r + 1, r + 3))


# --- word probabilities -------------------------------------------------------

def test_word_probability_examples(coins):
    assert word_probability(coins, "") == 1.0
    assert word_probability(coins, "0") == pytest.approx(1 / 3, abs=1e-15)
    fig1 = fig1_six_state()
    assert word_probability(fig1, "22") == 0.0
    assert word_probability(fig1, "1221") == 0.0
    assert word_probability(fig1, "2") > 0.0


def test_word_probability_additive(bundled):
    for n in range(7):
        for w in words(bundled, n):
            ext = sum(word_probability(bundled, w + (x,)) for x in bundled.alphabet)
            assert ext == pytest.approx(word_probability(bundled, w), abs=1e-9)


def test_word_probability_long_word_log_space(coins):
    w = sample_path(coins, 5000, seed=3)
    lp = log2_word_probability(coins, w)
    assert math.isfinite(lp) and lp < -1000
    assert word_probability(coins, w) == 0.0
    short = w[:60]
    assert math.log2(word_probability(coins, short)) == pytest.approx(log2_word_probability(coins, short), abs=1e-9)


def test_empirical_decay_rate(coins):
    assert empirical_decay_rate(fair_coin(), "0110101") == pytest.approx(1.0, abs=1e-15)
    assert empirical_decay_rate(coins, "0") == pytest.approx(math.log2(3), abs=1e-12)
    w = sample_path(coins, 100_000, seed=11)
    assert empirical_decay_rate(coins, w) == pytest.approx(PC_HMU, abs=0.01)
    with pytest.raises(ForbiddenWord):
        empirical_decay_rate(fig1_six_state(), "1221")
    with pytest.raises(ValueError):
        empirical_decay_rate(coins, "")


# --- sampling ----------------------------------------------------------------

def test_sample_trivial():
    assert sample_path(fair_coin(), 0, seed=1) == []
    s = "".join(sample_path(period2(), 6, seed=5))
    assert s in ("010101", "101010")


def test_sample_reproducible(coins):
    a = sample_indices(coins, 10_000, seed=42)
    assert np.array_equal(a, sample_indices(coins, 10_000, seed=42))
    assert not np.array_equal(a, sample_indices(coins, 10_000, seed=43))


def test_sample_never_emits_forbidden_words():
    s = "".join(sample_path(fig1_six_state(), 20_000, seed=9))
    assert "22" not in s


@pytest.mark.slow
def test_symbol_frequency(coins):
    s = sample_indices(coins, 1_000_000, seed=2024)
    freq, sigma = oracles.census_sigma(s, 2, 1)
    assert abs(freq[0] - 1 / 3) < 3 * sigma[0]


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2])
def test_length3_census(coins, seed):
    s = sample_indices(coins, 1_000_000, seed=seed)
    freq, sigma = oracles.census_sigma(s, 2, 3)
    expect = np.array([word_probability(coins, w) for w in words(coins, 3)])
    assert np.all(np.abs(freq - expect) < 4 * sigma)


def test_word_census_counts():
    c = word_census([0, 1, 1, 0, 1], 2, 2)
    assert c.tolist() == [0, 2, 1, 1]
    assert word_census([0], 2, 3).tolist() == [0] * 8


# --- properties on random machines -------------------------------------------

@st.composite
def random_hmms(draw, unifilar=False):
    n = draw(st.integers(1, 5))
    a = draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    t = np.zeros((a, n, n))
    if unifilar:
        # Symbol 0 walks a cycle so every draw is irreducible.
        for i in range(n):
            probs = rng.dirichlet(np.ones(a))
            t[0, i, (i + 1) % n] = probs[0]
            for x in range(1, a):
                t[x, i, rng.integers(n)] = probs[x]
    else:
        w = rng.random((a, n, n)) * (rng.random((a, n, n)) < 0.6)
        for i in range(n):
            w[0, i, (i + 1) % n] += 0.1
        t = w / w.sum(axis=(0, 2))[None, :, None]
    return Hmm(tuple(f"s{i}" for i in range(n)), tuple(str(x) for x in range(a)), t)


@settings(max_examples=60, deadline=None)
@given(random_hmms())
def test_stationary_invariants(hmm):
    assert validate(hmm) == []
    pi = stationary_distribution(hmm)
    assert np.max(np.abs(pi @ hmm.transition_matrix - pi)) < 1e-12
    assert abs(pi.sum() - 1.0) < 1e-15
    assert np.all(pi > 0)


@settings(max_examples=40, deadline=None)
@given(random_hmms())
def test_additivity_random(hmm):
    for w in itertools.islice(words(hmm, 3), 12):
        ext = sum(word_probability(hmm, w + (x,)) for x in hmm.alphabet)
        assert ext == pytest.approx(word_probability(hmm, w), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(random_hmms(unifilar=True))
def test_markov_order_monotone_random(hmm):
    assert check_unifilar(hmm)
    for r in range(4):
        if check_markov_order(hmm, r):
            assert check_markov_order(hmm, r + 1) and check_markov_order(hmm, r + 2)


def test_iid_model():
    m = iid([0.25, 0.75], ("a", "b"))
    assert entropy_rate(m) == pytest.approx(oracles.binary_entropy(0.25), abs=1e-15)
    assert statistical_complexity(m) == 0.0


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_files_valid(name):
    assert validate(load_bundled(name)) == []


def test_bundled_matches_builders():
    assert np.allclose(load_bundled("perturbed_coins").t, perturbed_coins().t, rtol=0, atol=1e-15)
    assert np.array_equal(load_bundled("period2").t, period2().t)
    assert np.array_equal(load_bundled("fig1_six_state").t, fig1_six_state().t)
