import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cubeavg.bounds import (
    CONNECTED_PAIRS,
    connected_pairs_from_patterns,
    empirical_C_table,
    lemma1_margin,
    lemma2_margin,
    random_sequences,
)
from cubeavg.dynamics import BoundedSequence

# A four-term witness where the a-term of the aligned-range inequality fails.
# Phases in turns: a[0:4], b[0:4], c[0:7].
A_TERM_WITNESS = [0.4503, 0.3537, 0.9689, 0.2959, 0.4485, 0.4217, 0.0361, 0.2928,
                  0.0144, 0.0739, 0.3737, 0.3414, 0.1425, 0.6129, 0.3228]


def test_connected_pairs_derived_from_patterns():
    assert connected_pairs_from_patterns() == CONNECTED_PAIRS
    assert len(CONNECTED_PAIRS) == 9


def test_lemma1_all_ones_margin_zero():
    ones = BoundedSequence.ones(130)
    for ranges in ("printed", "aligned"):
        rep = lemma1_margin(ones, ones, ones, 64, ranges=ranges)
        assert rep.lhs == pytest.approx(1.0)
        assert rep.margin >= -1e-12


def test_lemma1_printed_ranges_fail_on_a_delta_at_zero():
    # the printed ranges skip index 0, which a point mass at 0 exploits
    a = np.zeros(4, dtype=complex)
    a[0] = 1
    ones = np.ones(4, dtype=complex)
    rep = lemma1_margin(a, ones, ones, 2, ranges="printed")
    assert rep.margin == pytest.approx(-0.25, abs=1e-9)


def test_lemma1_aligned_a_term_counterexample():
    z = np.exp(2j * np.pi * np.array(A_TERM_WITNESS))
    a, b, c = z[:4], z[4:8], z[8:]
    rep = lemma1_margin(a, b, c, 4, ranges="aligned")
    a_margin = rep.terms["a"]["sup_sq"] - rep.lhs
    assert a_margin < -0.1
    # the c-term still bounds it
    assert rep.terms["c"]["sup_sq"] - rep.lhs >= -1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 24), st.data())
def test_lemma1_aligned_c_term_holds_for_arbitrary_bounded_inputs(N, data):
    # |<a*b, c>| <= sup|C_hat| * ||a|| ||b|| gives the c-term for any |a|,|b| <= 1
    cplx = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)
    a = np.array(data.draw(st.lists(cplx, min_size=N, max_size=N)))
    b = np.array(data.draw(st.lists(cplx, min_size=N, max_size=N)))
    c = np.array(data.draw(st.lists(cplx, min_size=2 * N - 1, max_size=2 * N - 1)))
    rep = lemma1_margin(a, b, c, N, ranges="aligned")
    assert rep.terms["c"]["sup_sq"] - rep.lhs >= -1e-9


@pytest.mark.parametrize("kind", ["sign", "unit"])
def test_lemma1_printed_random(kind):
    children = np.random.SeedSequence(11).spawn(30)
    for child in children:
        a, b, c = random_sequences(np.random.default_rng(child), 3, 2 * 32, kind)
        assert lemma1_margin(a, b, c, 32).margin >= -1e-9


def test_lemma1_validation():
    with pytest.raises(ValueError):
        lemma1_margin(np.full(10, 2.0), np.ones(10), np.ones(20), 4)
    with pytest.raises(ValueError):
        lemma1_margin(np.ones(4), np.ones(4), np.ones(8), 4, ranges="printed")
    with pytest.raises(ValueError):
        lemma1_margin(np.ones(8), np.ones(8), np.ones(8), 4, ranges="bogus")


@pytest.mark.parametrize("N", [1, 2, 8, 16])
def test_lemma2_all_ones_ratio(N):
    ones = [BoundedSequence.ones(3 * N - 2)] * 7
    rep = lemma2_margin(ones, N)
    assert rep.lhs == pytest.approx(1.0)
    assert abs(rep.ratio - (N / (2 * N - 1)) ** 2) < 1e-12


def test_lemma2_zeros_and_validation():
    zeros = [BoundedSequence(np.zeros(10), 1.0)] * 7
    assert lemma2_margin(zeros, 4).ratio == 0.0
    with pytest.raises(ValueError):
        lemma2_margin(zeros[:6], 4)
    with pytest.raises(ValueError):
        lemma2_margin([BoundedSequence.ones(5)] * 7, 4)


def test_empirical_C_deterministic():
    t1 = empirical_C_table(3, [8, 16], seed=5)
    t2 = empirical_C_table(3, [8, 16], seed=5)
    assert t1 == t2
    assert all(np.isfinite(v) and v > 0 for v in t1.values())
