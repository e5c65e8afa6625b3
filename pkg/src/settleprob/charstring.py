"""Characteristic strings and their samplers.

A characteristic string records, slot by slot, which party was scheduled:
bit 0 marks an honestly assigned slot and bit 1 an adversarial one.  The
distributions of interest are the i.i.d. Bernoulli family (each slot is
adversarial with probability ``alpha``) and the broader martingale family
where the conditional probability of an adversarial slot, given the past,
never exceeds ``(1 - epsilon) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import BadParams, LengthMismatch, MartingaleViolation

__all__ = [
    "CharString",
    "BernoulliParams",
    "MartingaleSource",
    "sample_bernoulli",
    "sample_martingale",
    "leq",
]


class CharString:
    """An immutable bit string over {0, 1}.

    Bits are exposed with ordinary 0-based Python indexing; fork-level code
    that speaks about "slot i" (1-based) maps slot i to ``bits[i - 1]``.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits: Sequence[int] = ()):
        as_tuple = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in as_tuple):
            raise BadParams(f"bits must be 0 or 1, got {as_tuple!r}")
        self._bits = as_tuple

    @classmethod
    def parse(cls, text: str) -> "CharString":
        """Build from a textual form such as ``"010100110"``."""
        if not all(c in "01" for c in text):
            raise BadParams(f"cannot parse characteristic string from {text!r}")
        return cls(int(c) for c in text)

    @property
    def bits(self) -> tuple[int, ...]:
        return self._bits

    def __len__(self) -> int:
        return len(self._bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self._bits)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return CharString(self._bits[idx])
        return self._bits[idx]

    def __add__(self, other) -> "CharString":
        if not isinstance(other, CharString):
            other = CharString(other)
        return CharString(self._bits + other._bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, CharString) and self._bits == other._bits

    def __hash__(self) -> int:
        return hash(self._bits)

    def __repr__(self) -> str:
        return f"CharString({str(self)!r})"

    def __str__(self) -> str:
        return "".join(str(b) for b in self._bits)

    def prefix(self, m: int) -> "CharString":
        return CharString(self._bits[:m])

    def suffix(self, m: int) -> "CharString":
        """The part after the first ``m`` slots."""
        return CharString(self._bits[m:])

    def ones(self) -> int:
        return sum(self._bits)

    def ones_after(self, slot: int) -> int:
        """Number of adversarial slots with index strictly greater than ``slot`` (1-based)."""
        return sum(self._bits[slot:])


@dataclass(frozen=True)
class BernoulliParams:
    """I.i.d. slot distribution: each slot adversarial with probability ``alpha``."""

    alpha: float
    n: int

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise BadParams(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.n < 0:
            raise BadParams(f"n must be nonnegative, got {self.n}")

    @property
    def epsilon(self) -> float:
        return 1.0 - 2.0 * self.alpha


@dataclass(frozen=True)
class MartingaleSource:
    """Adaptive slot distribution bounded by the epsilon-martingale condition.

    ``prob_fn(prefix)`` returns the conditional probability that the next
    slot is adversarial given the sampled prefix.  The callback must be a
    deterministic function of the prefix and must never exceed
    ``(1 - epsilon) / 2``.
    """

    prob_fn: Callable[[CharString], float]
    epsilon: float

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1.0):
            raise BadParams(f"epsilon must lie in (0, 1], got {self.epsilon}")

    @property
    def ceiling(self) -> float:
        return (1.0 - self.epsilon) / 2.0


def sample_bernoulli(params: BernoulliParams, seed: int) -> CharString:
    """Draw an i.i.d. characteristic string of length ``params.n``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.random(params.n) < params.alpha
    return CharString(int(b) for b in draws)


def sample_martingale(source: MartingaleSource, n: int, seed: int) -> CharString:
    """Draw ``n`` slots from an adaptive source, enforcing the martingale ceiling.

    Raises :class:`MartingaleViolation` the moment ``prob_fn`` returns a value
    outside ``[0, (1 - epsilon) / 2]``.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    bits: list[int] = []
    for t in range(n):
        p = float(source.prob_fn(CharString(bits)))
        if not (0.0 <= p <= source.ceiling + 1e-12):
            raise MartingaleViolation(
                f"slot {t + 1}: conditional probability {p} exceeds ceiling {source.ceiling}"
            )
        bits.append(1 if rng.random() < p else 0)
    return CharString(bits)


def leq(a: CharString, b: CharString) -> bool:
    """Bitwise partial order: ``a <= b`` iff a_i <= b_i for every slot."""
    if len(a) != len(b):
        raise LengthMismatch(f"cannot compare strings of lengths {len(a)} and {len(b)}")
    return all(x <= y for x, y in zip(a, b))
