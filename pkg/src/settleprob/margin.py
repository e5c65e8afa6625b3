"""Reach and relative-margin recursions over characteristic strings.

Both quantities admit simple one-pass recursions over the bits of the
string.  With ``rho`` the maximum reach over closed forks and ``mu_x`` the
relative margin after a prefix ``x``:

    rho(empty) = 0
    rho(w1)    = rho(w) + 1
    rho(w0)    = 0            if rho(w) = 0
               = rho(w) - 1   otherwise

    mu_x(empty) = rho(x)
    mu_x(y1)    = mu_x(y) + 1
    mu_x(y0)    = 0            if rho(xy) > mu_x(y) = 0
                = mu_x(y) - 1  otherwise

A string ``w`` is forkable exactly when ``mu(w) >= 0`` (taking ``x`` empty).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .charstring import CharString

__all__ = [
    "MarginWalk",
    "rho",
    "mu",
    "relative_margin",
    "is_forkable",
    "margins_all_splits",
]


@dataclass
class MarginWalk:
    """Incremental (rho, mu) state for one split point.

    The walk starts at the split: before any ``step`` call it represents
    ``y`` empty, so ``mu == rho`` must hold for whatever prefix produced
    the initial state.
    """

    rho: int = 0
    mu: int = 0

    def step(self, bit: int) -> "MarginWalk":
        """Consume one suffix bit in place and return self."""
        if bit == 1:
            self.rho += 1
            self.mu += 1
        else:
            if self.rho > self.mu == 0:
                new_mu = 0
            else:
                new_mu = self.mu - 1
            self.rho = self.rho - 1 if self.rho > 0 else 0
            self.mu = new_mu
        return self

    def copy(self) -> "MarginWalk":
        return MarginWalk(self.rho, self.mu)


def _bits(w) -> Iterable[int]:
    if isinstance(w, str):
        return CharString.parse(w).bits
    return tuple(int(b) for b in w)


def rho(w) -> int:
    """Maximum reach over closed forks for ``w``."""
    r = 0
    for b in _bits(w):
        if b == 1:
            r += 1
        elif r > 0:
            r -= 1
    return r


def relative_margin(x, y) -> int:
    """``mu_x(y)``: the margin of ``y`` relative to the prefix ``x``."""
    walk = MarginWalk(rho(x), rho(x))
    # mu_x(empty) = rho(x); rho tracks the full string x·y from there on.
    for b in _bits(y):
        walk.step(b)
    return walk.mu


def mu(w) -> int:
    """Plain margin, i.e. the relative margin with an empty prefix."""
    return relative_margin((), w)


def is_forkable(w) -> bool:
    return mu(w) >= 0


def margins_all_splits(w) -> list[int]:
    """``mu_{w[:m]}(w[m:])`` for every split ``m`` in ``0..len(w)``.

    Entry ``m == len(w)`` equals ``rho(w)`` since the suffix is empty.
    Runs in O(n^2) by replaying the walk once per split.
    """
    bits = tuple(_bits(w))
    out = []
    for m in range(len(bits) + 1):
        out.append(relative_margin(bits[:m], bits[m:]))
    return out
