"""Set partitions of [k] and their lattice structure.

Covers enumeration of the full and noncrossing lattices, the refinement
order with meet/join, Kreweras complements, inner/outer classification,
the Mobius function of both lattices, and counting/iteration of index
tuples whose coincidence pattern matches a partition.

Partitions are kept in canonical block form (each block sorted, blocks
ordered by their minima), so values are hashable, comparable, and the
enumeration order is reproducible.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import CrossingPartitionError, DimensionError, SizeGuardError

# Enumeration guards.  Callers may pass an explicit max_k to raise them.
MAX_FULL_ENUMERATION = 10
MAX_NONCROSSING_ENUMERATION = 12
MAX_INDEX_TUPLES = 2_000_000

Block = tuple[int, ...]


@dataclass(frozen=True)
class Partition:
    """A set partition of [k] in canonical block form."""

    k: int
    blocks: tuple[Block, ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("ground set must be nonempty")
        seen = []
        for block in self.blocks:
            if not block:
                raise ValueError("empty block")
            if list(block) != sorted(block):
                raise ValueError("block not internally sorted")
            seen.extend(block)
        if sorted(seen) != list(range(1, self.k + 1)):
            raise ValueError(f"blocks do not partition [{self.k}]")
        mins = [b[0] for b in self.blocks]
        if mins != sorted(mins):
            raise ValueError("blocks not ordered by minimum")

    @classmethod
    def of(cls, blocks, k: int | None = None) -> "Partition":
        """Build from any iterable of iterables, canonicalizing order."""
        blks = sorted((tuple(sorted(b)) for b in blocks if b), key=lambda b: b[0])
        if k is None:
            k = max((b[-1] for b in blks), default=0)
        return cls(k, tuple(blks))

    @classmethod
    def zero_hat(cls, k: int) -> "Partition":
        return cls(k, tuple((i,) for i in range(1, k + 1)))

    @classmethod
    def one_hat(cls, k: int) -> "Partition":
        return cls(k, (tuple(range(1, k + 1)),))

    @classmethod
    def from_rgs(cls, rgs) -> "Partition":
        """From a restricted-growth string (0-based block labels)."""
        blocks: list[list[int]] = []
        for pos, label in enumerate(rgs, start=1):
            if label == len(blocks):
                blocks.append([pos])
            else:
                blocks[label].append(pos)
        return cls(len(tuple(rgs)), tuple(tuple(b) for b in blocks))

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Parse the text syntax "((1,6,7)(2,5)(3))"; whitespace ignored."""
        compact = re.sub(r"\s+", "", text)
        if not re.fullmatch(r"\((\(\d+(,\d+)*\))+\)", compact):
            raise ValueError(f"bad partition syntax: {text!r}")
        blocks = [
            tuple(int(x) for x in grp.split(","))
            for grp in re.findall(r"\(([\d,]+)\)", compact[1:-1])
        ]
        return cls.of(blocks)

    def __str__(self) -> str:
        return "(" + "".join("(" + ",".join(map(str, b)) + ")" for b in self.blocks) + ")"

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def rgs(self) -> tuple[int, ...]:
        """Restricted-growth string; canonical block order makes it valid."""
        labels = [0] * self.k
        for idx, block in enumerate(self.blocks):
            for el in block:
                labels[el - 1] = idx
        return tuple(labels)

    def block_index(self) -> tuple[int, ...]:
        """For each element of [k], the index of its block."""
        return self.rgs()

    def block_of(self, element: int) -> Block:
        return self.blocks[self.rgs()[element - 1]]


def _check_same_k(a: Partition, b: Partition) -> None:
    if a.k != b.k:
        raise DimensionError(f"ground sets differ: {a.k} vs {b.k}")


# ---------------------------------------------------------------------------
# enumeration


def _rgs_strings(k: int):
    """All restricted-growth strings of length k, lexicographically."""
    a = [0] * k

    def rec(i: int, m: int):
        if i == k:
            yield tuple(a)
            return
        for v in range(m + 2):
            a[i] = v
            yield from rec(i + 1, max(m, v))

    yield from rec(1, 0) if k > 1 else iter([(0,)] if k == 1 else [])


@lru_cache(maxsize=None)
def _all_set_partitions(k: int) -> tuple[Partition, ...]:
    return tuple(Partition.from_rgs(r) for r in _rgs_strings(k))


def _nc_block_lists(segment: tuple[int, ...]):
    """Noncrossing partitions of a sorted segment, as lists of blocks.

    The block of the smallest point splits the rest into independent gaps;
    no block may straddle a gap boundary without crossing it.
    """
    if not segment:
        yield []
        return
    first, rest = segment[0], segment[1:]
    for r in range(len(rest) + 1):
        for tail in itertools.combinations(rest, r):
            block = (first,) + tail
            bounds = list(block) + [segment[-1] + 1]
            gaps = [
                tuple(x for x in rest if lo < x < hi)
                for lo, hi in zip(bounds, bounds[1:])
            ]
            for combo in itertools.product(*map(_nc_block_lists, gaps)):
                yield [block] + [b for sub in combo for b in sub]


@lru_cache(maxsize=None)
def _all_noncrossing(k: int) -> tuple[Partition, ...]:
    parts = [Partition.of(bs, k) for bs in _nc_block_lists(tuple(range(1, k + 1)))]
    parts.sort(key=Partition.rgs)
    return tuple(parts)


def enumerate_set_partitions(k: int, max_k: int = MAX_FULL_ENUMERATION) -> list[Partition]:
    """All of P(k), ordered lexicographically by restricted-growth string."""
    if not 1 <= k <= max_k:
        raise SizeGuardError(f"k={k} outside enumeration guard [1, {max_k}]")
    return list(_all_set_partitions(k))


def enumerate_noncrossing(k: int, max_k: int = MAX_NONCROSSING_ENUMERATION) -> list[Partition]:
    """All of NC(k), in the same restricted-growth-string order."""
    if not 1 <= k <= max_k:
        raise SizeGuardError(f"k={k} outside enumeration guard [1, {max_k}]")
    return list(_all_noncrossing(k))


# ---------------------------------------------------------------------------
# order and lattice operations


@lru_cache(maxsize=None)
def is_noncrossing(p: Partition) -> bool:
    """True iff no a < b < c < d has a, c and b, d in two distinct blocks."""
    labels = p.rgs()
    last = {}
    for pos, lab in enumerate(labels):
        last[lab] = pos
    stack: list[int] = []
    open_set = set()
    for pos, lab in enumerate(labels):
        if lab in open_set:
            if stack[-1] != lab:
                return False
        else:
            stack.append(lab)
            open_set.add(lab)
        if pos == last[lab]:
            if stack[-1] != lab:
                return False
            stack.pop()
            open_set.remove(lab)
    return True


def refines(s: Partition, p: Partition) -> bool:
    """The lattice order s <= p: every block of s sits inside a block of p."""
    _check_same_k(s, p)
    plabels = p.rgs()
    for block in s.blocks:
        lab = plabels[block[0] - 1]
        if any(plabels[el - 1] != lab for el in block[1:]):
            return False
    return True


@lru_cache(maxsize=None)
def meet(s: Partition, p: Partition) -> Partition:
    """Common refinement: blockwise intersections, empty ones dropped."""
    _check_same_k(s, p)
    groups: dict[tuple[int, int], list[int]] = {}
    sl, pl = s.rgs(), p.rgs()
    for el in range(1, s.k + 1):
        groups.setdefault((sl[el - 1], pl[el - 1]), []).append(el)
    return Partition.of(groups.values(), s.k)


@lru_cache(maxsize=None)
def join(s: Partition, p: Partition) -> Partition:
    """Finest common coarsening: transitive closure of the union relation."""
    _check_same_k(s, p)
    parent = list(range(s.k + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for block in s.blocks + p.blocks:
        for a, b in zip(block, block[1:]):
            union(a, b)
    groups: dict[int, list[int]] = {}
    for el in range(1, s.k + 1):
        groups.setdefault(find(el), []).append(el)
    return Partition.of(groups.values(), s.k)


def kreweras(p: Partition) -> Partition:
    """Kreweras complement on the interleaved ground set 1, 1', ..., k, k'.

    Computed through the permutation model of NC(k): the blocks, read as
    increasing cycles, compose against the long cycle (1 2 ... k).
    """
    if not is_noncrossing(p):
        raise CrossingPartitionError(f"{p} is crossing")
    k = p.k
    alpha = {}
    for block in p.blocks:
        for a, b in zip(block, block[1:]):
            alpha[a] = b
        alpha[block[-1]] = block[0]
    alpha_inv = {v: u for u, v in alpha.items()}
    beta = {i: alpha_inv[i % k + 1] for i in range(1, k + 1)}
    blocks = []
    remaining = set(range(1, k + 1))
    while remaining:
        start = min(remaining)
        cycle = [start]
        nxt = beta[start]
        while nxt != start:
            cycle.append(nxt)
            nxt = beta[nxt]
        remaining.difference_update(cycle)
        blocks.append(cycle)
    return Partition.of(blocks, k)


def opposite(p: Partition) -> Partition:
    """Reverse the ground set: i maps to k - i + 1, blockwise."""
    return Partition.of([[p.k - i + 1 for i in b] for b in p.blocks], p.k)


def concat(p: Partition, s: Partition) -> Partition:
    """Place s after p on a ground set of size p.k + s.k."""
    shifted = [[i + p.k for i in b] for b in s.blocks]
    return Partition.of(list(p.blocks) + shifted, p.k + s.k)


def rotate(p: Partition, shift: int = 1) -> Partition:
    """Cyclically shift all elements by `shift` (mod k)."""
    k = p.k
    return Partition.of([[(i - 1 + shift) % k + 1 for i in b] for b in p.blocks], k)


def restrict(p: Partition, elements) -> Partition:
    """Partition induced on a subset, re-indexed to 1..len(elements)."""
    elems = sorted(elements)
    index = {el: i + 1 for i, el in enumerate(elems)}
    chosen = set(elems)
    blocks = []
    for block in p.blocks:
        hit = [index[el] for el in block if el in chosen]
        if hit:
            blocks.append(hit)
    return Partition.of(blocks, len(elems))


def coarsenings(p: Partition) -> list[Partition]:
    """All sigma >= p, by partitioning the set of blocks of p."""
    m = p.num_blocks
    out = []
    for grouping in _all_set_partitions(m):
        merged = [
            sorted(el for idx in grp for el in p.blocks[idx - 1])
            for grp in grouping.blocks
        ]
        out.append(Partition.of(merged, p.k))
    return out


@lru_cache(maxsize=None)
def noncrossing_refinements(p: Partition) -> tuple[Partition, ...]:
    """All rho in NC(k) with rho <= p."""
    return tuple(r for r in _all_noncrossing(p.k) if refines(r, p))


# ---------------------------------------------------------------------------
# inner/outer classification


@dataclass(frozen=True)
class ClassSplit:
    """Outer/inner decomposition of a noncrossing partition.

    `covered_sets[i]` is the full integer interval spanned by `outer[i]`;
    inner blocks each sit inside exactly one covered set.
    """

    outer: tuple[Block, ...]
    inner: tuple[Block, ...]
    covered_sets: tuple[frozenset, ...]

    @property
    def outer_count(self) -> int:
        return len(self.outer)

    @property
    def inner_count(self) -> int:
        return len(self.inner)

    def inner_support(self) -> tuple[int, ...]:
        """C(pi): all elements lying in inner blocks, sorted."""
        return tuple(sorted(el for b in self.inner for el in b))

    def covered_interior(self, i: int) -> tuple[int, ...]:
        """Elements strictly covered by outer[i] (its span minus itself)."""
        return tuple(sorted(self.covered_sets[i] - set(self.outer[i])))


def classify_classes(p: Partition) -> ClassSplit:
    """Split blocks into inner (strictly enclosed by another block's span)
    and outer, with the covered interval of each outer block."""
    if not is_noncrossing(p):
        raise CrossingPartitionError(f"{p} is crossing")
    spans = [(b[0], b[-1]) for b in p.blocks]
    inner, outer = [], []
    for b, (lo, hi) in zip(p.blocks, spans):
        covered = any(
            other is not b and olo < lo and hi < ohi
            for other, (olo, ohi) in zip(p.blocks, spans)
        )
        (inner if covered else outer).append(b)
    covered_sets = tuple(frozenset(range(b[0], b[-1] + 1)) for b in outer)
    return ClassSplit(tuple(outer), tuple(inner), covered_sets)


# ---------------------------------------------------------------------------
# Mobius function

_MOBIUS_CACHE: dict[tuple[Partition, Partition, bool], Fraction] = {}


def _interval_members(s: Partition, p: Partition, noncrossing: bool) -> list[Partition]:
    """All z with s <= z <= p (and z noncrossing, if asked)."""
    plabels = p.rgs()
    groups: dict[int, list[int]] = {}
    for idx, block in enumerate(s.blocks):
        groups.setdefault(plabels[block[0] - 1], []).append(idx)
    choices = []
    for sub_indices in groups.values():
        ways = []
        for grouping in _all_set_partitions(len(sub_indices)):
            merged = [
                sorted(
                    el
                    for pos in grp
                    for el in s.blocks[sub_indices[pos - 1]]
                )
                for grp in grouping.blocks
            ]
            ways.append(merged)
        choices.append(ways)
    members = []
    for combo in itertools.product(*choices):
        z = Partition.of([blk for part in combo for blk in part], s.k)
        if not noncrossing or is_noncrossing(z):
            members.append(z)
    return members


def mobius(s: Partition, p: Partition, lattice: str = "full") -> Fraction:
    """Mobius function of the interval [s, p] in P(k) or NC(k).

    Computed from the defining recursion mu(x, x) = 1,
    mu(x, y) = -sum over x <= z < y of mu(x, z); memoized per interval.
    """
    if lattice not in ("full", "noncrossing"):
        raise ValueError(f"unknown lattice {lattice!r}")
    nc = lattice == "noncrossing"
    if nc and (not is_noncrossing(s) or not is_noncrossing(p)):
        raise CrossingPartitionError("noncrossing lattice requires noncrossing endpoints")
    if not refines(s, p):
        raise ValueError(f"{s} does not refine {p}: interval is empty")
    key = (s, p, nc)
    if key in _MOBIUS_CACHE:
        return _MOBIUS_CACHE[key]
    members = _interval_members(s, p, nc)
    # Finest first: any strict refinement has strictly more blocks.
    members.sort(key=lambda q: (-q.num_blocks, q.blocks))
    values: dict[Partition, Fraction] = {}
    for z in members:
        if z == s:
            values[z] = Fraction(1)
        else:
            values[z] = -sum(
                (values[y] for y in members if y != z and refines(y, z)),
                Fraction(0),
            )
        _MOBIUS_CACHE[(s, z, nc)] = values[z]
    return values[p]


def mobius_zero_hat_full(p: Partition) -> Fraction:
    """Closed form for mu(0-hat, p) in the full lattice: the product over
    blocks of (-1)^(n-1) (n-1)!."""
    out = Fraction(1)
    for block in p.blocks:
        n = len(block)
        sign = -1 if (n - 1) % 2 else 1
        fact = 1
        for i in range(2, n):
            fact *= i
        out *= sign * fact
    return out


# ---------------------------------------------------------------------------
# index tuples


def falling_factorial(n: int, m: int) -> int:
    out = 1
    for i in range(m):
        out *= n - i
    return out


def kernel_index_counts(p: Partition, n: int) -> tuple[int, int]:
    """(|[N]^k with pattern exactly p|, |[N]^k with pattern >= p|)."""
    if n < 1:
        raise ValueError("N must be positive")
    m = p.num_blocks
    return max(falling_factorial(n, m), 0), n**m


def iter_exact_index_tuples(p: Partition, n: int, max_tuples: int = MAX_INDEX_TUPLES):
    """Tuples v in [N]^k whose coincidence pattern is exactly p."""
    m = p.num_blocks
    if n**m > max_tuples:
        raise SizeGuardError(f"N^|p| = {n ** m} exceeds iteration guard")
    labels = p.rgs()
    for assignment in itertools.permutations(range(1, n + 1), m):
        yield tuple(assignment[labels[i]] for i in range(p.k))


def iter_geq_index_tuples(p: Partition, n: int, max_tuples: int = MAX_INDEX_TUPLES):
    """Tuples v in [N]^k constant on the blocks of p (pattern >= p)."""
    m = p.num_blocks
    if n**m > max_tuples:
        raise SizeGuardError(f"N^|p| = {n ** m} exceeds iteration guard")
    labels = p.rgs()
    for assignment in itertools.product(range(1, n + 1), repeat=m):
        yield tuple(assignment[labels[i]] for i in range(p.k))
