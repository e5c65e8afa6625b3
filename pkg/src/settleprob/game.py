"""The settlement game: challenger, adversary interface, and Monte Carlo.

One game round per slot of the characteristic string.  On an honest slot
the challenger appends a fresh honest vertex to a longest tine, with ties
broken by the adversary; on an adversarial slot the adversary may extend
the fork arbitrarily; after either move the adversary may augment the
fork further.  The adversary wins for target slot ``s`` and settlement
depth ``k`` if at some time ``t >= s + k`` the fork holds two distinct
maximum-length tines whose deepest common ancestor is labeled before
``s`` ("diverging prior to s").

The optimal adversary plays the canonical-fork construction: it keeps a
designated sub-fork evolving exactly as the canonical builder would,
parks reserve chains ahead of upcoming honest slots so that the
challenger is forced to extend the designated tine, and—the first time
the relative margin for the split before ``s`` turns nonnegative with a
suffix of length at least ``k + 1``—pads a disjoint tine pair out to
maximum length to exhibit the settlement violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .adversary import early_divergence_witness, tine_key
from .charstring import BernoulliParams, CharString, MartingaleSource, sample_bernoulli, sample_martingale
from .errors import BadParams, InvalidAdversaryFork
from .fork import Fork, _norm_bits
from .margin import MarginWalk

__all__ = [
    "AdversaryStrategy",
    "NullAdversary",
    "CanonicalAdversary",
    "SlotRecord",
    "GameTranscript",
    "run_game",
    "verify_transcript",
    "win_predicate",
    "monte_carlo_insecurity",
]


class AdversaryStrategy:
    """Base adversary: plays honestly (no forking, deterministic ties)."""

    def begin(self, bits: tuple[int, ...], s: int, k: int) -> None:
        pass

    def tie_break(self, fork: Fork, candidates: list[int], slot: int) -> int:
        return min(candidates, key=lambda v: tine_key(fork, v))

    def adversarial_move(self, fork: Fork, prefix: tuple[int, ...]) -> Fork:
        return fork

    def augment(self, fork: Fork, prefix: tuple[int, ...]) -> Fork:
        return fork


class NullAdversary(AdversaryStrategy):
    pass


@dataclass
class SlotRecord:
    slot: int
    adversarial: bool
    fork_size: int  # vertices in A_t (forks are append-only, so this is a snapshot)


@dataclass
class GameTranscript:
    bits: tuple[int, ...]
    s: int
    k: int
    records: list[SlotRecord]
    outcome: str  # "win" | "lose"
    winning_slot: Optional[int]
    win_fork_size: Optional[int]
    final_fork: Fork

    def to_json(self) -> dict:
        return {
            "w": "".join(str(b) for b in self.bits),
            "s": self.s,
            "k": self.k,
            "outcome": self.outcome,
            "winning_slot": self.winning_slot,
            "win_fork_size": self.win_fork_size,
            "slots": [
                {"slot": r.slot, "adversarial": r.adversarial, "fork_size": r.fork_size}
                for r in self.records
            ],
            "final_fork": self.final_fork.to_json(),
        }


def _settlement_violated(fork: Fork, s: int) -> bool:
    tops = fork.longest_vertices()
    for i, v1 in enumerate(tops):
        for v2 in tops[i + 1 :]:
            if fork.dca_label(v1, v2) < s:
                return True
    return False


def _check_extension(old: Fork, new: Fork, prefix, deep: bool) -> None:
    n = len(old)
    if len(new) < n or new.labels[:n] != old.labels or new.parents[:n] != old.parents:
        # Non-append-only extensions are allowed in principle but must embed.
        if not old.is_prefix_of(new):
            raise InvalidAdversaryFork("adversary fork does not extend the previous fork")
    if deep:
        new.validate(prefix)
    else:
        t = len(prefix)
        for v in range(n, len(new)):
            if not (1 <= new.labels[v] <= t) or new.labels[new.parents[v]] >= new.labels[v]:
                raise InvalidAdversaryFork(f"appended vertex {v} breaks label monotonicity")


def run_game(w, strategy: AdversaryStrategy, s: int, k: int, deep_validate: bool = False) -> GameTranscript:
    """Play the settlement game over ``w`` and report the outcome.

    The win check runs at every slot ``t >= s + k``; the first violation
    fixes the outcome, after which play continues only to complete the
    transcript.
    """
    bits = _norm_bits(w)
    T = len(bits)
    if not (1 <= s <= T) or k < 0:
        raise BadParams(f"need 1 <= s <= T and k >= 0, got s={s}, k={k}, T={T}")
    fork = Fork.genesis()
    strategy.begin(bits, s, k)
    records: list[SlotRecord] = []
    winning_slot: Optional[int] = None
    win_fork_size: Optional[int] = None
    for t in range(1, T + 1):
        prefix = bits[:t]
        if bits[t - 1] == 0:
            candidates = fork.longest_vertices()
            choice = strategy.tie_break(fork, candidates, t)
            if choice not in candidates:
                raise InvalidAdversaryFork(f"tie-break chose non-longest tine {choice}")
            stepped = fork.add_path(choice, [t])
        else:
            stepped = strategy.adversarial_move(fork, prefix)
            _check_extension(fork, stepped, prefix, deep_validate)
        augmented = strategy.augment(stepped, prefix)
        _check_extension(stepped, augmented, prefix, deep_validate)
        fork = augmented
        records.append(SlotRecord(slot=t, adversarial=bits[t - 1] == 1, fork_size=len(fork)))
        if winning_slot is None and t >= s + k and _settlement_violated(fork, s):
            winning_slot = t
            win_fork_size = len(fork)
    return GameTranscript(
        bits=bits,
        s=s,
        k=k,
        records=records,
        outcome="win" if winning_slot is not None else "lose",
        winning_slot=winning_slot,
        win_fork_size=win_fork_size,
        final_fork=fork,
    )


def verify_transcript(tr: GameTranscript) -> bool:
    """Re-check a claimed win from the stored fork snapshot."""
    if tr.outcome != "win":
        return tr.winning_slot is None
    n = tr.win_fork_size
    snap = Fork(tr.final_fork.labels[:n], tr.final_fork.parents[:n])
    snap.validate(tr.bits[: tr.winning_slot])
    return tr.winning_slot >= tr.s + tr.k and _settlement_violated(snap, tr.s)


class CanonicalAdversary(AdversaryStrategy):
    """Optimal adversary: steers the challenger along the canonical fork.

    Internally mirrors the canonical builder on a designated ("pure")
    sub-fork of the game fork; win-padding chains live only in the game
    fork.  Reserve chains for the next honest slot are appended during the
    augmentation phase, making the designated tine a longest one so the
    tie-break can route the next honest vertex onto it.
    """

    def begin(self, bits, s, k) -> None:
        self.bits = bits
        self.s = s
        self.k = k
        self.pure = Fork.genesis()
        self.pure_to_game = [0]
        self.walk = MarginWalk(0, 0)
        self.won = False
        self.planned_tip: Optional[int] = None  # game vertex the challenger should extend
        self.pending_parent: Optional[int] = None  # pure vertex behind the pending chain
        self.pending_chain: list[int] = []
        self.pending_game_ids: list[int] = []
        # The game calls augment only after slot 1, so the very first
        # reserve chain must be planned here; from genesis it is empty.
        if bits and bits[0] == 0:
            self.planned_tip = 0
            self.pending_parent = 0
            self.pending_chain = []
            self.pending_game_ids = []

    def tie_break(self, fork: Fork, candidates: list[int], slot: int) -> int:
        if self.planned_tip is not None and self.planned_tip in candidates:
            return self.planned_tip
        return min(candidates, key=lambda v: tine_key(fork, v))

    def augment(self, fork: Fork, prefix) -> Fork:
        t = len(prefix)
        if prefix[t - 1] == 0:
            # The challenger just appended the honest vertex behind our
            # pending reserve chain; fold both into the pure sub-fork.
            self.pure = self.pure.add_path(self.pending_parent, self.pending_chain + [t])
            self.pure_to_game.extend(self.pending_game_ids + [len(fork) - 1])
            self.pending_parent = None
            self.pending_chain = []
            self.pending_game_ids = []
        self.walk.step(prefix[t - 1])
        if t <= self.s - 1:
            self.walk.mu = self.walk.rho
        if not self.won and t >= self.s + self.k and self.walk.mu >= 0:
            fork = self._pad_win_pair(fork, prefix)
        if t < len(self.bits) and self.bits[t] == 0:
            fork = self._plant_reserve_chain(fork, prefix)
        return fork

    def _plant_reserve_chain(self, fork: Fork, prefix) -> Fork:
        pure = self.pure
        reaches = pure.reaches(prefix)
        zero = [v for v in range(len(reaches)) if reaches[v] == 0]
        if not zero:
            s_tine = min(pure.longest_vertices(), key=lambda v: tine_key(pure, v))
        else:
            maxr = max(reaches)
            big = [v for v in range(len(reaches)) if reaches[v] == maxr]
            s_tine, _ = early_divergence_witness(pure, zero, big)
        g = pure.gap(s_tine)
        start = pure.labels[s_tine]
        chain = [i + 1 for i in range(start, len(prefix)) if prefix[i] == 1][:g]
        self.pending_parent = s_tine
        self.pending_chain = chain
        game_parent = self.pure_to_game[s_tine]
        if chain:
            base = len(fork)
            fork = fork.add_path(game_parent, chain)
            self.pending_game_ids = list(range(base, base + len(chain)))
            self.planned_tip = len(fork) - 1
        else:
            self.pending_game_ids = []
            self.planned_tip = game_parent
        return fork

    def _pad_win_pair(self, fork: Fork, prefix) -> Fork:
        pure = self.pure
        reaches = pure.reaches(prefix)
        nv = len(reaches)
        best = None
        pair = None
        for v1 in range(nv):
            if reaches[v1] < 0:
                continue
            for v2 in range(v1, nv):
                if reaches[v2] < 0:
                    continue
                if v1 == v2 and pure.gap(v1) == 0:
                    continue  # a single maximal tine cannot diverge from itself
                if pure.dca_label(v1, v2) <= self.s - 1:
                    m = min(reaches[v1], reaches[v2])
                    if best is None or m > best:
                        best = m
                        pair = (v1, v2)
        if pair is None:
            # Degenerate case: the only nonnegative-reach tine diverging
            # before s is a maximal one.  Spend one unit of reserve to grow
            # two fresh sibling chains past the current height instead.
            for v in range(nv):
                if reaches[v] >= 0 and pure.gap(v) == 0 and pure.labels[v] <= self.s - 1:
                    slots = [i + 1 for i in range(pure.labels[v], len(prefix)) if prefix[i] == 1]
                    if slots:
                        fork = fork.add_path(self.pure_to_game[v], slots[:1])
                        fork = fork.add_path(self.pure_to_game[v], slots[:1])
                        self.won = True
                        return fork
            return fork
        for v in pair:
            g = pure.gap(v)
            if g == 0:
                continue
            start = pure.labels[v]
            chain = [i + 1 for i in range(start, len(prefix)) if prefix[i] == 1][:g]
            fork = fork.add_path(self.pure_to_game[v], chain)
        self.won = True
        return fork


def win_predicate(w, s: int, k: int) -> bool:
    """Margin criterion for the adversary to win: some suffix y starting at
    slot ``s`` with |y| >= k + 1 has nonnegative relative margin."""
    bits = _norm_bits(w)
    walk = MarginWalk(0, 0)
    for t in range(1, len(bits) + 1):
        walk.step(bits[t - 1])
        if t <= s - 1:
            walk.mu = walk.rho
        elif t >= s + k and walk.mu >= 0:
            return True
    return False


def monte_carlo_insecurity(
    dist,
    T: int,
    s: int,
    k: int,
    trials: int,
    seed: int = 0,
    method: str = "walk",
) -> dict:
    """Empirical probability that the optimal adversary wins (D, T; s, k).

    ``method="walk"`` evaluates the margin win criterion directly (the
    play-out equivalence is exercised exhaustively in the test suite);
    ``method="game"`` runs full games with the canonical adversary and is
    practical only for small T and trial counts.
    """
    if trials <= 0:
        raise BadParams("trials must be positive")
    if isinstance(dist, float):
        dist = BernoulliParams(alpha=dist, n=T)
    wins = 0
    if method == "walk" and isinstance(dist, BernoulliParams):
        rng = np.random.Generator(np.random.PCG64(seed))
        batch = 100_000
        done = 0
        while done < trials:
            b = min(batch, trials - done)
            bits = (rng.random((b, T)) < dist.alpha).astype(np.int64)
            r = np.zeros(b, dtype=np.int64)
            m = np.zeros(b, dtype=np.int64)
            won = np.zeros(b, dtype=bool)
            for t in range(1, T + 1):
                one = bits[:, t - 1] == 1
                m = np.where(one, m + 1, np.where((r > 0) & (m == 0), 0, m - 1))
                r = np.where(one, r + 1, np.maximum(r - 1, 0))
                if t <= s - 1:
                    m = r.copy()
                elif t >= s + k:
                    won |= m >= 0
            wins += int(won.sum())
            done += b
    else:
        for i in range(trials):
            if isinstance(dist, BernoulliParams):
                w = sample_bernoulli(dist, seed + i)
            elif isinstance(dist, MartingaleSource):
                w = sample_martingale(dist, T, seed + i)
            else:
                raise BadParams(f"unsupported distribution {dist!r}")
            if method == "game":
                tr = run_game(w, CanonicalAdversary(), s, k)
                wins += tr.outcome == "win"
            else:
                wins += win_predicate(w, s, k)
    p = wins / trials
    half = 1.96 * (p * (1.0 - p) / trials) ** 0.5
    return {
        "estimate": p,
        "wins": wins,
        "trials": trials,
        "ci95": (max(0.0, p - half), min(1.0, p + half)),
        "method": method,
    }
