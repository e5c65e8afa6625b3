from itertools import product

import pytest

from settleprob.charstring import BernoulliParams, MartingaleSource
from settleprob.errors import BadParams, InvalidAdversaryFork
from settleprob.exactprob import win_probability
from settleprob.fork import Fork
from settleprob.game import (
    AdversaryStrategy,
    CanonicalAdversary,
    NullAdversary,
    monte_carlo_insecurity,
    run_game,
    verify_transcript,
    win_predicate,
)
from settleprob.margin import relative_margin


# -- the win predicate ----------------------------------------------------


def test_win_predicate_examples():
    # s = 1, k = 0: any forkable prefix wins immediately.
    assert win_predicate("1", 1, 0)
    assert not win_predicate("0", 1, 0)
    # Needs k + 1 = 3 settled slots after s = 2; "0111" wins at t = 4.
    assert win_predicate("0111", 2, 2)
    assert not win_predicate("0100", 2, 2)


def test_win_predicate_matches_relative_margin():
    s, k = 3, 2
    for n in range(s + k, 10):
        for bits in product((0, 1), repeat=n):
            expect = any(
                relative_margin(bits[: s - 1], bits[s - 1 : t]) >= 0
                for t in range(s + k, n + 1)
            )
            assert win_predicate(bits, s, k) == expect, bits


# -- game mechanics -------------------------------------------------------


def test_null_adversary_never_wins():
    tr = run_game("0110101101", NullAdversary(), s=2, k=2)
    assert tr.outcome == "lose"
    assert tr.winning_slot is None
    # The honest chain has one vertex per honest slot plus genesis.
    assert len(tr.final_fork) == 1 + sum(1 for b in tr.bits if b == 0)


def test_run_game_rejects_bad_params():
    with pytest.raises(BadParams):
        run_game("0101", NullAdversary(), s=0, k=1)
    with pytest.raises(BadParams):
        run_game("0101", NullAdversary(), s=5, k=1)
    with pytest.raises(BadParams):
        run_game("0101", NullAdversary(), s=1, k=-1)


def test_cheating_adversary_is_caught():
    class Cheater(AdversaryStrategy):
        def augment(self, fork, prefix):
            # Append a vertex labeled beyond the current slot.
            return fork.add_path(0, [len(prefix) + 5])

    with pytest.raises(InvalidAdversaryFork):
        run_game("01", Cheater(), s=1, k=0)


def test_rewriting_adversary_is_caught():
    class Rewriter(AdversaryStrategy):
        def adversarial_move(self, fork, prefix):
            return Fork(labels=[0, len(prefix)], parents=[-1, 0])

    with pytest.raises(InvalidAdversaryFork):
        run_game("0101", Rewriter(), s=1, k=0)


def test_transcript_roundtrip():
    tr = run_game("110101", CanonicalAdversary(), s=1, k=1, deep_validate=True)
    blob = tr.to_json()
    assert blob["w"] == "110101"
    assert blob["outcome"] == tr.outcome
    assert len(blob["slots"]) == 6
    assert verify_transcript(tr)


# -- the canonical adversary ----------------------------------------------


@pytest.mark.parametrize("s,k", [(1, 0), (2, 1), (3, 2), (2, 3)])
def test_canonical_adversary_matches_predicate_exhaustive(s, k):
    """Play-out equivalence: the canonical adversary wins exactly when the
    margin criterion says a win is possible (all strings up to length 9)."""
    for n in range(s + k, 10):
        for bits in product((0, 1), repeat=n):
            tr = run_game(bits, CanonicalAdversary(), s, k, deep_validate=True)
            want = win_predicate(bits, s, k)
            assert (tr.outcome == "win") == want, bits
            assert verify_transcript(tr), bits


def test_canonical_adversary_all_adversarial():
    # Every slot adversarial: reserve alone must produce the diverging pair.
    tr = run_game("1" * 8, CanonicalAdversary(), s=3, k=4, deep_validate=True)
    assert tr.outcome == "win"
    assert verify_transcript(tr)


def test_canonical_adversary_wins_at_first_opportunity():
    # "11" settles immediately at t = s + k = 2.
    tr = run_game("1101", CanonicalAdversary(), s=1, k=1, deep_validate=True)
    assert tr.outcome == "win"
    assert tr.winning_slot == 2


# -- Monte Carlo ----------------------------------------------------------


def test_monte_carlo_methods_agree():
    kw = dict(T=12, s=3, k=2, trials=400, seed=11)
    walk = monte_carlo_insecurity(0.35, method="walk", **kw)
    game = monte_carlo_insecurity(0.35, method="game", **kw)
    # Different RNG streams, identical distribution: compare loosely.
    assert abs(walk["estimate"] - game["estimate"]) < 0.15
    assert walk["trials"] == game["trials"] == 400


def test_monte_carlo_deterministic_and_consistent():
    a = monte_carlo_insecurity(0.3, T=50, s=5, k=5, trials=20_000, seed=7)
    b = monte_carlo_insecurity(0.3, T=50, s=5, k=5, trials=20_000, seed=7)
    assert a == b
    lo, hi = a["ci95"]
    assert lo <= a["estimate"] <= hi


def test_monte_carlo_tracks_exact_win_probability():
    T, s, k = 60, 8, 8
    alpha = 0.3
    exact = win_probability(T, s, k, alpha)
    est = monte_carlo_insecurity(alpha, T=T, s=s, k=k, trials=40_000, seed=3)
    sigma = (exact * (1 - exact) / 40_000) ** 0.5
    assert abs(est["estimate"] - exact) < 4 * sigma


def test_monte_carlo_martingale_source():
    src = MartingaleSource(prob_fn=lambda p: 0.2, epsilon=0.5)
    out = monte_carlo_insecurity(src, T=30, s=4, k=4, trials=300, seed=1)
    assert 0.0 <= out["estimate"] <= 1.0
    assert out["method"] == "walk"


def test_monte_carlo_rejects_zero_trials():
    with pytest.raises(BadParams):
        monte_carlo_insecurity(0.3, T=10, s=2, k=2, trials=0)
