from itertools import product

import pytest
from hypothesis import given, strategies as st

from settleprob.charstring import CharString, leq
from settleprob.fork import brute_all
from settleprob.margin import (
    MarginWalk,
    is_forkable,
    margins_all_splits,
    mu,
    relative_margin,
    rho,
)

from conftest import EXAMPLE_W


def test_rho_examples():
    assert rho("") == 0
    assert rho("0101") == 1
    assert rho("11") == 2
    assert rho("1100") == 0
    assert rho("110") == 1
    assert rho(EXAMPLE_W) == 1


def test_mu_examples():
    assert mu("") == 0
    assert mu("1") == 1
    assert mu("0") == -1
    assert mu(EXAMPLE_W) == 0
    assert is_forkable(EXAMPLE_W)
    assert not is_forkable("0")
    assert is_forkable("")


def test_relative_margin_examples():
    assert relative_margin("", "0") == -1
    assert relative_margin("11", "") == 2
    assert relative_margin("0", "10") == 0
    # mu_x(empty) = rho(x) for any prefix.
    for x in ("", "0", "11", "0101", EXAMPLE_W):
        assert relative_margin(x, "") == rho(x)


def test_margin_walk_pinning():
    # rho > mu == 0 pins the margin at zero on an honest bit.
    w = MarginWalk(rho=3, mu=0)
    w.step(0)
    assert (w.rho, w.mu) == (2, 0)
    # Otherwise both decrease together.
    w = MarginWalk(rho=2, mu=2)
    w.step(0)
    assert (w.rho, w.mu) == (1, 1)
    # At rho == 0 the reach reflects, the margin keeps falling.
    w = MarginWalk(rho=0, mu=-2)
    w.step(0)
    assert (w.rho, w.mu) == (0, -3)
    w.step(1)
    assert (w.rho, w.mu) == (1, -2)


def test_margin_walk_copy_is_independent():
    a = MarginWalk(1, 1)
    b = a.copy()
    b.step(1)
    assert (a.rho, a.mu) == (1, 1)
    assert (b.rho, b.mu) == (2, 2)


def test_margins_all_splits_shape():
    out = margins_all_splits(EXAMPLE_W)
    assert len(out) == len(EXAMPLE_W) + 1
    assert out[0] == mu(EXAMPLE_W)
    assert out[-1] == rho(EXAMPLE_W)


def test_walk_matches_relative_margin():
    bits = CharString.parse(EXAMPLE_W).bits
    for m in range(len(bits) + 1):
        walk = MarginWalk(rho(bits[:m]), rho(bits[:m]))
        for b in bits[m:]:
            walk.step(b)
        assert walk.mu == relative_margin(bits[:m], bits[m:])
        assert walk.rho == rho(bits)


@pytest.mark.parametrize("n", range(0, 7))
def test_recursions_match_brute_force(n):
    """Exhaustive oracle agreement for every string of length <= 6."""
    for bits in product((0, 1), repeat=n):
        b_rho, b_margins = brute_all(bits)
        assert b_rho == rho(bits), bits
        assert b_margins == margins_all_splits(bits), bits


@given(st.lists(st.integers(0, 1), max_size=14), st.data())
def test_monotone_in_bitwise_order(bits, data):
    """Flipping honest slots to adversarial never lowers rho or mu."""
    flipped = list(bits)
    for i in range(len(bits)):
        if data.draw(st.booleans(), label=f"flip{i}"):
            flipped[i] = 1
    assert leq(CharString(bits), CharString(flipped))
    assert rho(bits) <= rho(flipped)
    assert mu(bits) <= mu(flipped)


@given(st.lists(st.integers(0, 1), max_size=16))
def test_mu_never_exceeds_rho(bits):
    for m in range(len(bits) + 1):
        assert relative_margin(bits[:m], bits[m:]) <= rho(bits)


@given(st.lists(st.integers(0, 1), max_size=16))
def test_single_bit_deltas(bits):
    """Appending one bit moves (rho, mu) exactly as the recursion says."""
    r, m = rho(bits), mu(bits)
    assert rho(bits + [1]) == r + 1
    assert mu(bits + [1]) == m + 1
    assert rho(bits + [0]) == max(r - 1, 0)
    assert mu(bits + [0]) == (0 if r > m == 0 else m - 1)
