"""Forks: rooted labeled trees of block-production histories.

A fork for a characteristic string ``w`` of length ``n`` is a rooted tree
whose vertices carry slot labels, subject to four axioms:

  F1  the root is the unique vertex labeled 0 (genesis);
  F2  labels strictly increase along every root-to-vertex path;
  F3  every honest slot of ``w`` labels exactly one vertex;
  F4  the depths of honest vertices strictly increase with their labels.

A *tine* is a root-to-vertex path; we identify tines with their terminal
vertex ids.  A fork is *closed* when every leaf is honest.  For a tine ``t``:

    gap(t)     = height(F) - length(t)
    reserve(t) = number of adversarial slots after label(t)
    reach(t)   = reserve(t) - gap(t)

Two tines are *disjoint over the suffix past split m* when they share no
edge terminating at a label greater than ``m``; because shared edges are
exactly the edges of the common prefix, this reduces to the label of the
deepest common ancestor being at most ``m``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterator, Optional, Sequence

from .charstring import CharString
from .errors import (
    BadParams,
    EnumerationOverflow,
    ForkAxiomError,
    InsufficientReserve,
    NotClosed,
    NotHonestSlot,
    TooLong,
    UnknownTine,
)

__all__ = [
    "Fork",
    "TineStats",
    "enumerate_closed_forks",
    "brute_all",
    "brute_rho",
    "brute_relative_margin",
    "find_slot_cp_violation",
]

MAX_EXHAUSTIVE_LEN = 10
DEFAULT_ENUM_CAP = 10**7


def _norm_bits(w) -> tuple[int, ...]:
    if isinstance(w, CharString):
        return w.bits
    if isinstance(w, str):
        return CharString.parse(w).bits
    return tuple(int(b) for b in w)


@dataclass(frozen=True)
class TineStats:
    length: int
    gap: int
    reserve: int
    reach: int


class Fork:
    """An immutable fork.  Vertex 0 is the genesis root.

    ``labels[v]`` is the slot label of vertex ``v`` and ``parents[v]`` its
    parent id (-1 for the root).  Vertex ids double as creation order, which
    the lexicographic tine order uses as its final tie-breaker.
    """

    __slots__ = ("labels", "parents", "_depths", "_children", "_paths", "_canon")

    def __init__(self, labels: Sequence[int], parents: Sequence[int]):
        labels = tuple(int(x) for x in labels)
        parents = tuple(int(x) for x in parents)
        if len(labels) != len(parents) or not labels:
            raise BadParams("labels and parents must be nonempty and of equal length")
        if parents[0] != -1:
            raise BadParams("vertex 0 must be the root (parent -1)")
        n = len(labels)
        for v in range(1, n):
            if not (0 <= parents[v] < n) or parents[v] == v:
                raise BadParams(f"vertex {v} has invalid parent {parents[v]}")
        self.labels = labels
        self.parents = parents
        self._depths: Optional[tuple[int, ...]] = None
        self._children: Optional[tuple[tuple[int, ...], ...]] = None
        self._paths: dict[int, tuple[int, ...]] = {}
        self._canon = None

    # -- construction ---------------------------------------------------

    @classmethod
    def genesis(cls) -> "Fork":
        return cls((0,), (-1,))

    @classmethod
    def from_edges(cls, labeled_edges: Sequence[tuple[int, int]]) -> "Fork":
        """Build from (parent_id, label) pairs appended in order after the root."""
        labels = [0]
        parents = [-1]
        for parent, label in labeled_edges:
            labels.append(label)
            parents.append(parent)
        return cls(labels, parents)

    def add_path(self, start: int, path_labels: Sequence[int]) -> "Fork":
        """Return a new fork with a chain of fresh vertices hung below ``start``."""
        if not (0 <= start < len(self.labels)):
            raise UnknownTine(f"no vertex {start}")
        labels = list(self.labels)
        parents = list(self.parents)
        at = start
        for lab in path_labels:
            labels.append(int(lab))
            parents.append(at)
            at = len(labels) - 1
        return Fork(labels, parents)

    # -- basic structure ------------------------------------------------

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def num_vertices(self) -> int:
        return len(self.labels)

    def depth(self, v: int) -> int:
        return self.depths[v]

    @property
    def depths(self) -> tuple[int, ...]:
        if self._depths is None:
            n = len(self.labels)
            depths = [-1] * n
            depths[0] = 0
            for v in range(n):
                if depths[v] >= 0:
                    continue
                chain = []
                u = v
                while depths[u] < 0:
                    chain.append(u)
                    u = self.parents[u]
                    if len(chain) > n:
                        raise BadParams("parent pointers contain a cycle")
                d = depths[u]
                for u2 in reversed(chain):
                    d += 1
                    depths[u2] = d
            self._depths = tuple(depths)
        return self._depths

    @property
    def children(self) -> tuple[tuple[int, ...], ...]:
        if self._children is None:
            kids: list[list[int]] = [[] for _ in self.labels]
            for v in range(1, len(self.labels)):
                kids[self.parents[v]].append(v)
            self._children = tuple(tuple(k) for k in kids)
        return self._children

    @property
    def height(self) -> int:
        return max(self.depths)

    def leaves(self) -> list[int]:
        kids = self.children
        return [v for v in range(len(self.labels)) if not kids[v]]

    def longest_vertices(self) -> list[int]:
        h = self.height
        return [v for v in range(len(self.labels)) if self.depths[v] == h]

    def path_vertices(self, v: int) -> tuple[int, ...]:
        """Vertex ids along the tine ending at ``v``, root first."""
        cached = self._paths.get(v)
        if cached is not None:
            return cached
        chain = []
        u = v
        while u != -1:
            chain.append(u)
            u = self.parents[u]
        path = tuple(reversed(chain))
        self._paths[v] = path
        return path

    def path_labels(self, v: int) -> tuple[int, ...]:
        return tuple(self.labels[u] for u in self.path_vertices(v))

    def dca(self, v1: int, v2: int) -> int:
        """Deepest common ancestor of two tines."""
        p1, p2 = self.path_vertices(v1), self.path_vertices(v2)
        out = 0
        for a, b in zip(p1, p2):
            if a != b:
                break
            out = a
        return out

    def dca_label(self, v1: int, v2: int) -> int:
        return self.labels[self.dca(v1, v2)]

    def disjoint_over(self, v1: int, v2: int, split: int) -> bool:
        """True when the two tines share no edge labeled past ``split``."""
        return self.dca_label(v1, v2) <= split

    # -- axioms ---------------------------------------------------------

    def validate(self, w) -> None:
        """Raise :class:`ForkAxiomError` naming the first violated axiom."""
        bits = _norm_bits(w)
        n = len(bits)
        for v, lab in enumerate(self.labels):
            if lab < 0 or lab > n:
                raise ForkAxiomError("F2", (v,), f"label {lab} outside 0..{n}")
        if self.labels[0] != 0:
            raise ForkAxiomError("F1", (0,), "root must be labeled 0")
        for v in range(1, len(self.labels)):
            if self.labels[v] == 0:
                raise ForkAxiomError("F1", (v,), "only the root may be labeled 0")
        for v in range(1, len(self.labels)):
            p = self.parents[v]
            if self.labels[p] >= self.labels[v]:
                raise ForkAxiomError(
                    "F2", (p, v),
                    f"labels must strictly increase along paths ({self.labels[p]} -> {self.labels[v]})",
                )
        honest_vertex: dict[int, int] = {}
        for v in range(1, len(self.labels)):
            lab = self.labels[v]
            if bits[lab - 1] == 0:
                if lab in honest_vertex:
                    raise ForkAxiomError("F3", (honest_vertex[lab], v), f"honest slot {lab} labels two vertices")
                honest_vertex[lab] = v
        for i, b in enumerate(bits):
            if b == 0 and (i + 1) not in honest_vertex:
                raise ForkAxiomError("F3", (), f"honest slot {i + 1} labels no vertex")
        prev_lab = 0
        prev_v = 0
        for lab in sorted(honest_vertex):
            v = honest_vertex[lab]
            if self.depths[v] <= self.depths[prev_v]:
                raise ForkAxiomError(
                    "F4", (prev_v, v),
                    f"honest depth must increase with label ({prev_lab}@{self.depths[prev_v]} vs {lab}@{self.depths[v]})",
                )
            prev_lab, prev_v = lab, v

    def is_valid(self, w) -> bool:
        try:
            self.validate(w)
            return True
        except ForkAxiomError:
            return False

    def is_honest_vertex(self, w, v: int) -> bool:
        lab = self.labels[v]
        if lab == 0:
            return True
        return _norm_bits(w)[lab - 1] == 0

    def is_closed(self, w) -> bool:
        """Closed forks have honest labels on every leaf."""
        return all(self.is_honest_vertex(w, v) for v in self.leaves())

    # -- tine statistics ------------------------------------------------

    def gap(self, v: int) -> int:
        return self.height - self.depths[v]

    def reserve(self, w, v: int) -> int:
        bits = _norm_bits(w)
        return sum(bits[self.labels[v]:])

    def reach(self, w, v: int) -> int:
        return self.reserve(w, v) - self.gap(v)

    def tine_stats(self, w, v: int) -> TineStats:
        if not (0 <= v < len(self.labels)):
            raise UnknownTine(f"no vertex {v}")
        res = self.reserve(w, v)
        g = self.gap(v)
        return TineStats(length=self.depths[v], gap=g, reserve=res, reach=res - g)

    def reaches(self, w) -> list[int]:
        """Reach of every tine, indexed by terminal vertex id (O(V) total)."""
        bits = _norm_bits(w)
        suffix_ones = [0] * (len(bits) + 2)
        for i in range(len(bits) - 1, -1, -1):
            suffix_ones[i + 1] = suffix_ones[i + 2] + bits[i]
        h = self.height
        return [suffix_ones[self.labels[v] + 1] - (h - self.depths[v]) for v in range(len(self.labels))]

    # -- balance --------------------------------------------------------

    def is_x_balanced(self, split: int) -> bool:
        """Two maximum-length tines sharing no edge labeled past ``split``.

        The degenerate pair (t, t) counts when the tine itself has no edge
        past the split, mirroring the self-pair convention of the relative
        margin.
        """
        tops = self.longest_vertices()
        for v1 in tops:
            for v2 in tops:
                if self.dca_label(v1, v2) <= split:
                    return True
        return False

    def is_balanced(self) -> bool:
        return self.is_x_balanced(0)

    # -- prefix and equality --------------------------------------------

    def canonical_form(self):
        """Order-independent tree encoding: (label, sorted child forms)."""
        if self._canon is None:
            kids = self.children
            memo: dict[int, tuple] = {}
            # Post-order traversal without recursion.
            stack: list[tuple[int, bool]] = [(0, False)]
            while stack:
                v, expanded = stack.pop()
                if expanded:
                    memo[v] = (self.labels[v], tuple(sorted(memo[c] for c in kids[v])))
                else:
                    stack.append((v, True))
                    for c in kids[v]:
                        stack.append((c, False))
            self._canon = memo[0]
        return self._canon

    def __eq__(self, other) -> bool:
        return isinstance(other, Fork) and self.canonical_form() == other.canonical_form()

    def __hash__(self) -> int:
        return hash(self.canonical_form())

    def is_prefix_of(self, other: "Fork") -> bool:
        """Label-preserving embedding of this fork into ``other`` fixing the root."""
        if not isinstance(other, Fork):
            return False

        def embeds(u: int, v: int) -> bool:
            mine = {}
            for c in self.children[u]:
                mine.setdefault(self.labels[c], []).append(c)
            theirs = {}
            for c in other.children[v]:
                theirs.setdefault(other.labels[c], []).append(c)
            for lab, group in mine.items():
                cands = theirs.get(lab, [])
                if len(cands) < len(group):
                    return False
                # Injective matching inside a same-label group: small in
                # practice (adversarial duplicates only), so backtracking
                # over permutations is fine.
                for perm in permutations(cands, len(group)):
                    if all(embeds(a, b) for a, b in zip(group, perm)):
                        break
                else:
                    return False
            return True

        return self.labels[0] == other.labels[0] and embeds(0, 0)

    # -- serialization --------------------------------------------------

    def to_json(self) -> dict:
        return {
            "vertices": [
                {"id": v, "label": self.labels[v], "parent": self.parents[v]}
                for v in range(len(self.labels))
            ]
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Fork":
        verts = sorted(obj["vertices"], key=lambda r: r["id"])
        if [r["id"] for r in verts] != list(range(len(verts))):
            raise BadParams("vertex ids must be 0..n-1")
        return cls([r["label"] for r in verts], [r["parent"] for r in verts])

    def to_dot(self, w=None) -> str:
        """Graphviz rendering; honest vertices are drawn as boxes."""
        bits = _norm_bits(w) if w is not None else None
        lines = ["digraph fork {", "  rankdir=LR;"]
        for v in range(len(self.labels)):
            lab = self.labels[v]
            honest = bits is None or lab == 0 or bits[lab - 1] == 0
            shape = "box" if honest else "ellipse"
            lines.append(f'  v{v} [label="{lab}", shape={shape}];')
        for v in range(1, len(self.labels)):
            lines.append(f"  v{self.parents[v]} -> v{v};")
        lines.append("}")
        return "\n".join(lines)

    # -- conservative extension -----------------------------------------

    def conservative_extend(self, w, s: int) -> "Fork":
        """Extend a closed fork for ``w[:-1]`` through tine ``s`` into a fork for ``w``.

        ``w`` must end in an honest slot.  The extension appends ``gap(s)``
        adversarial vertices (smallest unused adversarial labels past
        ``label(s)``) and then the new honest vertex, producing a tine of
        length ``height + 1`` and reach 0 while lowering every pre-existing
        tine's reach by exactly one.
        """
        bits = _norm_bits(w)
        if not bits or bits[-1] != 0:
            raise NotHonestSlot("conservative extension requires the new slot to be honest")
        old = bits[:-1]
        if not self.is_closed(old):
            raise NotClosed("conservative extension starts from a closed fork")
        if not (0 <= s < len(self.labels)):
            raise UnknownTine(f"no vertex {s}")
        g = self.gap(s)
        start = self.labels[s]
        pool = [i + 1 for i in range(start, len(old)) if old[i] == 1]
        if len(pool) < g:
            raise InsufficientReserve(
                f"tine {s} has gap {g} but only {len(pool)} adversarial slots past label {start}"
            )
        return self.add_path(s, pool[:g] + [len(bits)])


# -- exhaustive oracle ---------------------------------------------------


def enumerate_closed_forks(w, cap: int = DEFAULT_ENUM_CAP) -> Iterator[Fork]:
    """Yield every closed fork for ``w``, exactly once each.

    Closed forks decompose uniquely by attributing each adversarial vertex
    to its least-label honest descendant; the enumeration rebuilds that
    decomposition by inserting honest vertices in label order, each behind a
    freshly chosen chain of adversarial labels hung off an existing vertex.
    Vertices labeled after the last honest slot can never appear in a closed
    fork, so trailing adversarial slots contribute nothing.
    """
    bits = _norm_bits(w)
    if len(bits) > MAX_EXHAUSTIVE_LEN:
        raise TooLong(f"exhaustive enumeration capped at |w| <= {MAX_EXHAUSTIVE_LEN}")
    honest = [i + 1 for i, b in enumerate(bits) if b == 0]
    adv = [i + 1 for i, b in enumerate(bits) if b == 1]
    count = 0

    def rec(labels: list[int], parents: list[int], depths: list[int], hmax: int, hi: int):
        nonlocal count
        if hi == len(honest):
            count += 1
            if count > cap:
                raise EnumerationOverflow(f"more than {cap} closed forks")
            yield Fork(tuple(labels), tuple(parents))
            return
        i = honest[hi]
        for v in range(len(labels)):
            avail = [a for a in adv if labels[v] < a < i]
            need = max(0, hmax - depths[v])
            for size in range(need, len(avail) + 1):
                for chain in combinations(avail, size):
                    base = len(labels)
                    at = v
                    d = depths[v]
                    for lab in chain + (i,):
                        labels.append(lab)
                        parents.append(at)
                        d += 1
                        depths.append(d)
                        at = len(labels) - 1
                    yield from rec(labels, parents, depths, d, hi + 1)
                    del labels[base:], parents[base:], depths[base:]

    yield from rec([0], [-1], [0], 0, 0)


def brute_all(w, cap: int = DEFAULT_ENUM_CAP) -> tuple[int, list[int]]:
    """Exhaustive (rho, margins-by-split) for ``w``, |w| <= 10.

    ``margins[m]`` is the maximum over closed forks of the best min-reach
    among tine pairs disjoint over the suffix past ``m``; entry ``m == n``
    degenerates to rho.  This is deliberately independent of the one-pass
    recursions so it can serve as their oracle.
    """
    bits = _norm_bits(w)
    n = len(bits)
    best_rho = None
    margins = [None] * (n + 1)
    for fork in enumerate_closed_forks(bits, cap=cap):
        reaches = fork.reaches(bits)
        r = max(reaches)
        if best_rho is None or r > best_rho:
            best_rho = r
        nv = len(reaches)
        paths = [fork.path_vertices(v) for v in range(nv)]
        # For each pair, bucket its min reach under the dca label, then
        # sweep splits once.
        by_dca = [None] * (n + 1)
        for v1 in range(nv):
            p1 = paths[v1]
            for v2 in range(v1, nv):
                p2 = paths[v2]
                d = 0
                for a, b in zip(p1, p2):
                    if a != b:
                        break
                    d = a
                lab = fork.labels[d]
                mr = reaches[v1] if reaches[v1] < reaches[v2] else reaches[v2]
                if by_dca[lab] is None or mr > by_dca[lab]:
                    by_dca[lab] = mr
        running = None
        for m in range(n + 1):
            if by_dca[m] is not None and (running is None or by_dca[m] > running):
                running = by_dca[m]
            if running is not None and (margins[m] is None or running > margins[m]):
                margins[m] = running
    if best_rho is None:
        raise EnumerationOverflow("no closed forks found (unreachable)")
    return best_rho, margins


def brute_rho(w, cap: int = DEFAULT_ENUM_CAP) -> int:
    return brute_all(w, cap=cap)[0]


def brute_relative_margin(x, y, cap: int = DEFAULT_ENUM_CAP) -> int:
    xb, yb = _norm_bits(x), _norm_bits(y)
    _, margins = brute_all(xb + yb, cap=cap)
    return margins[len(xb)]


# -- common-prefix violations --------------------------------------------


def find_slot_cp_violation(fork: Fork, w, k: int):
    """First pair of viable tines violating the k-common-prefix property.

    A tine is viable when it is at least as long as the depth of every
    honest vertex with a label at most its own.  The check trims the
    earlier tine at label ``l(t1) - k`` and asks whether the trimmed path
    is a prefix of the later tine.  Returns ``(t1, t2)`` or ``None``.
    """
    bits = _norm_bits(w)
    depths = fork.depths
    honest = sorted(
        (fork.labels[v], depths[v])
        for v in range(len(fork.labels))
        if fork.labels[v] > 0 and bits[fork.labels[v] - 1] == 0
    )

    def viable(v: int) -> bool:
        need = 0
        for lab, d in honest:
            if lab > fork.labels[v]:
                break
            need = d
        return depths[v] >= need

    viable_ids = [v for v in range(len(fork.labels)) if viable(v)]
    for t1 in viable_ids:
        for t2 in viable_ids:
            if fork.labels[t1] > fork.labels[t2]:
                continue
            cutoff = fork.labels[t1] - k
            trimmed_tip = 0
            for u in fork.path_vertices(t1):
                if fork.labels[u] <= cutoff:
                    trimmed_tip = u
            if trimmed_tip not in fork.path_vertices(t2):
                return (t1, t2)
    return None
