"""Exact settlement-failure probabilities via dynamic programming.

Under the i.i.d. slot distribution with adversarial probability
``alpha = (1 - eps) / 2``, the pair (rho(x·y), mu_x(y)) evolves as a Markov
chain as ``y`` grows bit by bit:

    with prob alpha:      (r, s) -> (r + 1, s + 1)
    with prob 1 - alpha:  r -> max(r - 1, 0)
                          s -> 0      if r > s = 0
                               s - 1  otherwise

The marginal chain of ``r`` alone is a reflecting biased walk on the
nonnegative integers whose stationary law is

    Pr[R = r] = (2 eps / (1 + eps)) * beta^r,   beta = (1 - eps)/(1 + eps),

and which stochastically dominates the reach of every prefix length, so
seeding the DP with the stationary law yields an upper bound uniform in
the length of ``x``.  The matrix is truncated at ``r_max`` with overflow
mass folded into the top bucket, which preserves the upper-bound reading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import BadParams, NonConvergent

__all__ = [
    "ReachPmf",
    "ProbMatrix",
    "stationary_pmf",
    "finite_reach_pmf",
    "margin_dp",
    "prob_nonneg_margin",
    "prob_nonneg_margin_grid",
    "settlement_tail",
    "win_probability",
]

DEFAULT_INIT_RMAX = 64


@dataclass(frozen=True)
class ReachPmf:
    """Distribution of the reach walk; ``tail_mass`` sits above the last bucket."""

    probs: tuple[float, ...]
    tail_mass: float
    kind: str

    def total(self) -> float:
        return math.fsum(self.probs) + self.tail_mass


def stationary_pmf(eps: float, r_max: int = DEFAULT_INIT_RMAX) -> ReachPmf:
    """Stationary law of the reflecting reach walk, truncated at ``r_max``."""
    if not (0.0 < eps <= 1.0):
        raise BadParams(f"stationary law requires eps in (0, 1], got {eps}")
    beta = (1.0 - eps) / (1.0 + eps)
    head = 2.0 * eps / (1.0 + eps)
    probs = tuple(head * beta**r for r in range(r_max + 1))
    return ReachPmf(probs=probs, tail_mass=beta ** (r_max + 1), kind=f"stationary(eps={eps})")


def finite_reach_pmf(m: int, alpha: float) -> ReachPmf:
    """Exact law of the reach after ``m`` i.i.d. slots (support 0..m)."""
    if m < 0:
        raise BadParams(f"m must be nonnegative, got {m}")
    if not (0.0 <= alpha < 1.0):
        raise BadParams(f"alpha must lie in [0, 1), got {alpha}")
    p = np.zeros(m + 1)
    p[0] = 1.0
    for _ in range(m):
        nxt = np.zeros_like(p)
        nxt[1:] += alpha * p[:-1]
        nxt[:-1] += (1.0 - alpha) * p[1:]
        nxt[0] += (1.0 - alpha) * p[0]
        p = nxt
    return ReachPmf(probs=tuple(p), tail_mass=0.0, kind=f"finite(m={m},alpha={alpha})")


@dataclass
class ProbMatrix:
    """Joint law of (r, s) after ``steps`` suffix bits.

    ``matrix[r, j]`` holds Pr[r, s = j - s_max]; row ``r_max`` and the edge
    columns absorb folded overflow.
    """

    matrix: np.ndarray
    alpha: float
    steps: int
    r_max: int
    s_max: int

    def prob(self, r: int, s: int) -> float:
        return float(self.matrix[r, s + self.s_max])

    def prob_nonneg(self) -> float:
        """Pr[s >= 0] with compensated summation."""
        return math.fsum(self.matrix[:, self.s_max:].ravel().tolist())

    def total(self) -> float:
        return math.fsum(self.matrix.ravel().tolist())


def _init_matrix(initial: ReachPmf, r_max: int, s_max: int) -> np.ndarray:
    M = np.zeros((r_max + 1, 2 * s_max + 1))
    for r, p in enumerate(initial.probs):
        rr = min(r, r_max)
        M[rr, s_max + min(rr, s_max)] += p
    M[r_max, s_max + min(r_max, s_max)] += initial.tail_mass
    return M


def _dp_step(M: np.ndarray, alpha: float) -> np.ndarray:
    q = 1.0 - alpha
    new = np.zeros_like(M)
    # Adversarial bit: (r, s) -> (r + 1, s + 1), folding at the top edges.
    new[1:, 1:] += alpha * M[:-1, :-1]
    new[-1, 1:] += alpha * M[-1, :-1]
    new[1:, -1] += alpha * M[:-1, -1]
    new[-1, -1] += alpha * M[-1, -1]
    z = (M.shape[1] - 1) // 2  # column of s == 0
    # Honest bit, r == 0: r stays put, s decreases (bottom-folded).
    new[0, :-1] += q * M[0, 1:]
    new[0, 0] += q * M[0, 0]
    # Honest bit, r >= 1, s == 0: margin pinned at zero.
    new[:-1, z] += q * M[1:, z]
    # Honest bit, r >= 1, s != 0: both coordinates decrease.
    body = M[1:, :].copy()
    body[:, z] = 0.0
    new[:-1, :-1] += q * body[:, 1:]
    new[:-1, 0] += q * body[:, 0]
    return new


def _default_initial(alpha: float, k: int) -> ReachPmf:
    eps = 1.0 - 2.0 * alpha
    if eps <= 0.0:
        raise BadParams(
            f"alpha = {alpha} has no stationary reach law; pass an explicit initial pmf"
        )
    # Seed the stationary law out to r = 2k: large initial reaches still
    # carry non-trivial conditional win probability, so truncating the seed
    # too early inflates tiny answers by its entire tail mass.
    return stationary_pmf(eps, r_max=max(DEFAULT_INIT_RMAX, 2 * k))


def margin_dp(
    k: int,
    alpha: float,
    initial: Optional[ReachPmf] = None,
    r_max: Optional[int] = None,
) -> ProbMatrix:
    """Joint (r, s) law after ``k`` suffix bits from the given initial reach law."""
    if k < 0:
        raise BadParams(f"k must be nonnegative, got {k}")
    if not (0.0 <= alpha < 1.0):
        raise BadParams(f"alpha must lie in [0, 1), got {alpha}")
    if initial is None:
        initial = _default_initial(alpha, k)
    if r_max is None:
        r_max = k + min(len(initial.probs) - 1, DEFAULT_INIT_RMAX)
    s_max = r_max
    M = _init_matrix(initial, r_max, s_max)
    for _ in range(k):
        M = _dp_step(M, alpha)
    return ProbMatrix(matrix=M, alpha=alpha, steps=k, r_max=r_max, s_max=s_max)


def _dp_iter(alpha: float, initial: ReachPmf, r_max: int) -> Iterator[tuple[int, np.ndarray]]:
    s_max = r_max
    M = _init_matrix(initial, r_max, s_max)
    t = 0
    yield t, M
    while True:
        M = _dp_step(M, alpha)
        t += 1
        yield t, M


def prob_nonneg_margin(
    k: int,
    alpha: float,
    initial: Optional[ReachPmf] = None,
    r_max: Optional[int] = None,
) -> float:
    """Pr[mu_x(y) >= 0] for |y| = k, the prefix entering via ``initial``."""
    return margin_dp(k, alpha, initial=initial, r_max=r_max).prob_nonneg()


def prob_nonneg_margin_grid(
    ks: Sequence[int],
    alpha: float,
    initial: Optional[ReachPmf] = None,
) -> dict[int, float]:
    """Pr[s >= 0] at several horizons from a single DP sweep."""
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 0:
        raise BadParams("ks must be nonnegative")
    if initial is None:
        initial = _default_initial(alpha, ks[-1])
    r_max = ks[-1] + min(len(initial.probs) - 1, DEFAULT_INIT_RMAX)
    s_max = r_max
    want = set(ks)
    out: dict[int, float] = {}
    for t, M in _dp_iter(alpha, initial, r_max):
        if t in want:
            out[t] = math.fsum(M[:, s_max:].ravel().tolist())
        if t >= ks[-1]:
            break
    return out


def settlement_tail(
    k_min: int,
    alpha: float,
    initial: Optional[ReachPmf] = None,
    rel_tol: float = 1e-9,
    max_steps: int = 200_000,
) -> float:
    """Union-bound tail sum over suffix lengths t >= k_min of Pr[mu >= 0].

    Truncates once the running term falls below ``rel_tol`` of the
    accumulated sum and closes with a geometric tail estimate; raises
    :class:`NonConvergent` after 50 consecutive non-decreasing terms.
    """
    if k_min < 0:
        raise BadParams(f"k_min must be nonnegative, got {k_min}")
    if initial is None:
        initial = _default_initial(alpha, k_min)
    r_max = k_min + min(len(initial.probs) - 1, DEFAULT_INIT_RMAX) + 64
    s_max = r_max
    acc: list[float] = []
    prev_term = None
    flat_run = 0
    for t, M in _dp_iter(alpha, initial, r_max):
        if t < k_min:
            continue
        term = math.fsum(M[:, s_max:].ravel().tolist())
        if term == 0.0:
            return math.fsum(acc)
        acc.append(term)
        if prev_term is not None:
            if term >= prev_term:
                flat_run += 1
                if flat_run >= 50:
                    raise NonConvergent(
                        f"settlement tail terms not decaying after {t - k_min + 1} terms"
                    )
            else:
                flat_run = 0
            ratio = term / prev_term
            if term < rel_tol * math.fsum(acc) and ratio < 1.0:
                return math.fsum(acc) + term * ratio / (1.0 - ratio)
        prev_term = term
        if t - k_min >= max_steps:
            raise NonConvergent(f"settlement tail did not converge within {max_steps} terms")
    raise NonConvergent("unreachable")  # pragma: no cover


def win_probability(T: int, s: int, k: int, alpha: float) -> float:
    """Exact probability that some suffix y of length >= k + 1 starting at
    slot ``s`` satisfies mu_x(y) >= 0 within horizon ``T``.

    The prefix ``x = w[:s-1]`` enters through its exact reach law; the event
    is absorbed the first time it holds, so overlapping suffix lengths are
    not double-counted.
    """
    if not (1 <= s <= T):
        raise BadParams(f"need 1 <= s <= T, got s={s}, T={T}")
    if k < 0:
        raise BadParams(f"k must be nonnegative, got {k}")
    steps = T - s + 1
    initial = finite_reach_pmf(s - 1, alpha)
    r_max = (s - 1) + steps  # exact: no folding possible
    s_max = r_max
    M = _init_matrix(initial, r_max, s_max)
    won = 0.0
    for t in range(1, steps + 1):
        M = _dp_step(M, alpha)
        if t >= k + 1:
            region = M[:, s_max:]
            won += float(region.sum())
            region[:] = 0.0
    return won
