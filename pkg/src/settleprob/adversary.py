"""Optimal online adversaries: margin-optimal and canonical fork builders.

Both builders share the same skeleton: adversarial slots leave the fork
untouched, and each honest slot performs a conservative extension of a
carefully chosen tine ``s``:

* the *margin-optimal* builder (one distinguished split ``x``) picks the
  zero-reach tine diverging earliest from a maximal-reach tine belonging
  to a pair witnessing the current relative margin;

* the *canonical* builder picks the zero-reach tine diverging earliest
  with respect to the whole set of maximal-reach tines, breaking ties by
  the lexicographic tine order.  The resulting forks are canonical: they
  simultaneously witness the relative margin of every split, and the
  builder designates one witness pair per split.

The lexicographic order compares tines by their label sequences and falls
back on vertex creation order, which makes every choice deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .charstring import CharString
from .errors import EmptySet, WitnessMismatch
from .fork import Fork, _norm_bits
from .margin import margins_all_splits, rho

__all__ = [
    "tine_key",
    "early_divergence_witness",
    "build_margin_optimal_fork",
    "CanonicalBuilder",
    "CanonicalForkResult",
    "build_canonical_fork",
    "verify_canonical",
]


def tine_key(fork: Fork, v: int):
    """Sort key realizing the lexicographic tine order."""
    return (fork.path_labels(v), v)


def early_divergence_witness(fork: Fork, group_a, group_b) -> tuple[int, int]:
    """The pair (a, b) minimizing the divergence label, ties broken lexicographically.

    Divergence of a pair is the label of its deepest common ancestor; among
    the pairs achieving the minimum, the one least in the lexicographic
    order on (a, b) wins.
    """
    group_a, group_b = list(group_a), list(group_b)
    if not group_a or not group_b:
        raise EmptySet("early-divergence witness of an empty tine set")
    best = None
    best_pair = None
    for a in sorted(group_a, key=lambda v: tine_key(fork, v)):
        for b in sorted(group_b, key=lambda v: tine_key(fork, v)):
            d = fork.dca_label(a, b)
            if best is None or d < best:
                best = d
                best_pair = (a, b)
    return best_pair


def _margin_witness_pair(fork: Fork, reaches, split: int):
    """A pair (t_rho, t_other) realizing (rho(F), mu_x(F)) for the given split.

    Scans all tine pairs disjoint over the suffix; among the pairs whose min
    reach attains the margin, prefers one whose first member has maximal
    reach, then the lexicographically least.
    """
    nv = len(reaches)
    maxr = max(reaches)
    best = None
    pairs = []
    for u in range(nv):
        for v in range(nv):
            if fork.dca_label(u, v) <= split:
                m = min(reaches[u], reaches[v])
                if best is None or m > best:
                    best = m
                    pairs = [(u, v)]
                elif m == best:
                    pairs.append((u, v))
    with_rho = [p for p in pairs if reaches[p[0]] == maxr]
    pool = with_rho if with_rho else pairs
    return min(pool, key=lambda p: (tine_key(fork, p[0]), tine_key(fork, p[1])))


def build_margin_optimal_fork(x, y) -> Fork:
    """Closed fork for x·y attaining both rho(xy) and mu_x(y).

    Online over the bits of ``w = x·y``: adversarial slots are skipped;
    each honest slot conservatively extends either the unique longest tine
    (when no tine has reach zero) or the zero-reach tine diverging earliest
    from the designated maximal-reach tine.
    """
    xb, yb = _norm_bits(x), _norm_bits(y)
    w = xb + yb
    split = len(xb)
    fork = Fork.genesis()
    for i in range(1, len(w) + 1):
        if w[i - 1] == 1:
            continue
        prefix = w[: i - 1]
        reaches = fork.reaches(prefix)
        zero = [v for v in range(len(reaches)) if reaches[v] == 0]
        if not zero:
            s = min(fork.longest_vertices(), key=lambda v: tine_key(fork, v))
        else:
            if i - 1 >= split:
                t_rho, _ = _margin_witness_pair(fork, reaches, split)
            else:
                maxr = max(reaches)
                t_rho = min(
                    (v for v in range(len(reaches)) if reaches[v] == maxr),
                    key=lambda v: tine_key(fork, v),
                )
            s = min(zero, key=lambda v: (fork.dca_label(v, t_rho), tine_key(fork, v)))
        fork = fork.conservative_extend(w[:i], s)
    return fork


class CanonicalBuilder:
    """Online construction of canonical forks, one bit at a time."""

    def __init__(self):
        self.fork = Fork.genesis()
        self.bits: list[int] = []
        self.prev_max_reach: list[int] = [0]  # R of the previous fork
        self.last_extension_tip: int = 0

    def step(self, bit: int) -> None:
        fork = self.fork
        reaches = fork.reaches(self.bits)
        maxr = max(reaches)
        self.prev_max_reach = [v for v in range(len(reaches)) if reaches[v] == maxr]
        self.bits.append(int(bit))
        if bit == 1:
            return
        zero = [v for v in range(len(reaches)) if reaches[v] == 0]
        if not zero:
            s = min(fork.longest_vertices(), key=lambda v: tine_key(fork, v))
        else:
            s, _ = early_divergence_witness(fork, zero, self.prev_max_reach)
        self.fork = fork.conservative_extend(self.bits, s)
        self.last_extension_tip = len(self.fork) - 1

    def reserve_chain(self, s: int) -> list[int]:
        """Labels the next conservative extension of tine ``s`` would append."""
        g = self.fork.gap(s)
        start = self.fork.labels[s]
        pool = [i + 1 for i in range(start, len(self.bits)) if self.bits[i] == 1]
        return pool[:g]

    def choose_extension_tine(self) -> int:
        """The tine the next honest slot will extend (A* rule on the current fork)."""
        fork = self.fork
        reaches = fork.reaches(self.bits)
        maxr = max(reaches)
        big = [v for v in range(len(reaches)) if reaches[v] == maxr]
        zero = [v for v in range(len(reaches)) if reaches[v] == 0]
        if not zero:
            return min(fork.longest_vertices(), key=lambda v: tine_key(fork, v))
        s, _ = early_divergence_witness(fork, zero, big)
        return s


@dataclass
class CanonicalForkResult:
    """A canonical fork together with its designated witness tines.

    ``witnesses[m]`` is a pair ``(tau_rho, tau)`` of vertex ids whose tines
    are disjoint over the suffix past split ``m`` and realize
    ``(rho(w), mu_{w[:m]}(w[m:]))``.  ``witness_rho`` alone realizes
    ``rho(w)`` (the split ``m == n`` with empty suffix).
    """

    bits: tuple[int, ...]
    fork: Fork
    witness_rho: int
    witnesses: dict[int, tuple[int, int]] = field(default_factory=dict)


def build_canonical_fork(w) -> CanonicalForkResult:
    bits = _norm_bits(w)
    builder = CanonicalBuilder()
    for b in bits:
        builder.step(b)
    return designate_witnesses(builder)


def designate_witnesses(builder: CanonicalBuilder) -> CanonicalForkResult:
    bits = tuple(builder.bits)
    n = len(bits)
    fork = builder.fork
    reaches = fork.reaches(bits)
    maxr = max(reaches)
    big = [v for v in range(len(reaches)) if reaches[v] == maxr]
    tau_rho = min(big, key=lambda v: tine_key(fork, v))
    result = CanonicalForkResult(bits=bits, fork=fork, witness_rho=tau_rho)
    if n == 0:
        return result
    # Split n-1: the previous fork's maximal tines against the new ones.
    tau_w, tau_rho_w = early_divergence_witness(fork, builder.prev_max_reach, big)
    result.witnesses[n - 1] = (tau_rho_w, tau_w)
    # Earlier splits: tines disjoint (past the split) from some maximal tine.
    nv = len(reaches)
    div = [min(fork.dca_label(t, r) for r in big) for t in range(nv)]
    for m in range(n - 1):
        group = [t for t in range(nv) if div[t] <= m]
        # The root is disjoint from everything, so the group is never empty.
        top = max(reaches[t] for t in group)
        cand = [t for t in group if reaches[t] == top]
        tau_x, tau_rho_x = early_divergence_witness(fork, cand, big)
        result.witnesses[m] = (tau_rho_x, tau_x)
    return result


def verify_canonical(result: CanonicalForkResult) -> list[str]:
    """Check every designated witness against the margin recursions.

    Raises :class:`WitnessMismatch` on the first failing split; returns a
    list of advisory notes (e.g. witness tines with adversarial terminals,
    which the strict definition of canonicity does not allow but which do
    not affect any computed value).
    """
    bits = result.bits
    fork = result.fork
    fork.validate(bits)
    if not fork.is_closed(bits):
        raise WitnessMismatch(-1, "canonical fork must be closed")
    reaches = fork.reaches(bits)
    want_rho = rho(bits)
    if reaches[result.witness_rho] != want_rho:
        raise WitnessMismatch(
            len(bits), f"rho witness has reach {reaches[result.witness_rho]}, expected {want_rho}"
        )
    if max(reaches) != want_rho:
        raise WitnessMismatch(len(bits), f"fork rho {max(reaches)} != recursion {want_rho}")
    margins = margins_all_splits(bits)
    notes = []
    for m in range(len(bits)):
        if m not in result.witnesses:
            raise WitnessMismatch(m, "no designated witness")
        rv, mv = result.witnesses[m]
        if fork.dca_label(rv, mv) > m:
            raise WitnessMismatch(m, "witness tines share an edge past the split")
        if reaches[rv] != want_rho:
            raise WitnessMismatch(m, f"rho-side witness has reach {reaches[rv]}, expected {want_rho}")
        if reaches[mv] != margins[m]:
            raise WitnessMismatch(
                m, f"margin-side witness has reach {reaches[mv]}, expected {margins[m]}"
            )
        for v in (rv, mv):
            lab = fork.labels[v]
            if lab > 0 and bits[lab - 1] == 1:
                notes.append(f"split {m}: witness tine {v} ends at adversarial slot {lab}")
    return notes
