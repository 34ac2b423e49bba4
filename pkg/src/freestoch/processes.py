"""Consistent tuples of free-increment measures, specified by cumulants.

A tuple is stored as one word of primitive atoms per component.  Atoms are
single free-increment processes with a declared per-unit-time cumulant
sequence; distinct atoms are freely independent by construction, so the
joint unit-time cumulant of any word is the atom's own sequence when the
word stays on one atom and zero otherwise.  This makes identical copies,
free families, and diagonal-measure components all closed under one rule:
the cumulant of a set of components is the cumulant of the concatenation
of their words.

Interval dependence enters only through the scaling law: the cumulant of
increments over intervals J_1..J_n at pattern pi is the product over
blocks of the intersection lengths times the unit-time cumulant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import CrossingPartitionError, DimensionError, SizeGuardError
from .partitions import Partition, enumerate_noncrossing, is_noncrossing, refines
from .rational import format_rational, parse_rational

_ATOM_UIDS = itertools.count(1)


@dataclass(frozen=True)
class Atom:
    """A primitive free-increment process with unit-time cumulants r_n.

    The uid keeps separately created atoms freely independent even when
    their parameters coincide (two free Poissons in a free family).
    """

    uid: int
    kind: str  # "poisson" | "semicircular" | "custom"
    data: tuple

    def cumulant(self, order: int) -> Fraction:
        if order < 1:
            raise ValueError("cumulant order must be >= 1")
        if self.kind == "poisson":
            return Fraction(self.data[0])
        if self.kind == "semicircular":
            return Fraction(1) if order == 2 else Fraction(0)
        if order > len(self.data):
            raise SizeGuardError(
                f"custom process declares cumulants up to order {len(self.data)}, "
                f"order {order} requested"
            )
        return self.data[order - 1]


def _new_atom(kind: str, data: tuple) -> Atom:
    return Atom(next(_ATOM_UIDS), kind, data)


def word_cumulant(word: tuple[Atom, ...]) -> Fraction:
    """Unit-time cumulant of a word of atoms; zero across distinct atoms."""
    if not word:
        raise ValueError("empty word")
    first = word[0]
    if any(a is not first and a != first for a in word[1:]):
        return Fraction(0)
    return first.cumulant(len(word))


@dataclass(frozen=True)
class ProcessSpec:
    """A consistent tuple of free stochastic measures, one word per component."""

    words: tuple[tuple[Atom, ...], ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.labels and len(self.labels) != len(self.words):
            raise DimensionError("one label per component")

    @property
    def k(self) -> int:
        return len(self.words)

    def subset_word(self, subset) -> tuple[Atom, ...]:
        """Concatenated word of the components in an increasing subset."""
        return tuple(a for i in subset for a in self.words[i - 1])

    def unit_cumulant(self, subset) -> Fraction:
        """R(B; X) per unit time."""
        return word_cumulant(self.subset_word(subset))

    def partition_cumulant(self, p: Partition) -> Fraction:
        """R_p(X) per unit time: the product over blocks."""
        if p.k != self.k:
            raise DimensionError(f"partition of [{p.k}] vs {self.k} components")
        out = Fraction(1)
        for block in p.blocks:
            out *= self.unit_cumulant(block)
            if out == 0:
                return out
        return out

    def restrict(self, indices) -> "ProcessSpec":
        """Sub-tuple of the chosen components, in the given order."""
        return ProcessSpec(tuple(self.words[i - 1] for i in indices))

    def reverse(self) -> "ProcessSpec":
        """The tuple read backwards (adjoint order), each word reversed."""
        return ProcessSpec(tuple(w[::-1] for w in reversed(self.words)))

    def atoms(self) -> tuple[Atom, ...]:
        seen: dict[Atom, None] = {}
        for w in self.words:
            for a in w:
                seen.setdefault(a)
        return tuple(seen)


# ---------------------------------------------------------------------------
# constructors


def make_free_poisson(rate) -> ProcessSpec:
    """One component with every unit-time cumulant equal to the rate."""
    rate = Fraction(rate)
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    return ProcessSpec(((_new_atom("poisson", (rate,)),),), ("poisson",))


def make_semicircular() -> ProcessSpec:
    """One centered component with unit variance and no higher cumulants."""
    return ProcessSpec(((_new_atom("semicircular", ()),),), ("semicircular",))


def make_custom_process(seq) -> ProcessSpec:
    """One component with the given cumulant sequence r_1, r_2, ..."""
    data = tuple(Fraction(x) for x in seq)
    if not data:
        raise ValueError("need at least r_1")
    return ProcessSpec(((_new_atom("custom", data),),), ("custom",))


def make_tuple(base: ProcessSpec, mode: str, k: int | None = None,
               components: list[ProcessSpec] | None = None) -> ProcessSpec:
    """Identical copies of a single process, or a freely independent family.

    identical: all k components share the base's atom, so every mixed
    cumulant is the base's r_n.  free_family: each input keeps its own
    internal structure but gets fresh atoms, so cumulants across inputs
    vanish (this holds even if the same spec object is passed twice).
    """
    if mode == "identical":
        if base.k != 1:
            raise DimensionError("identical copies need a single-component base")
        if k is None or k < 1:
            raise ValueError("identical copies need k >= 1")
        return ProcessSpec((base.words[0],) * k, tuple(f"copy{i + 1}" for i in range(k)))
    if mode == "free_family":
        specs = components if components is not None else []
        if base is not None and components is None:
            raise ValueError("free_family takes components=[...]")
        words: list[tuple[Atom, ...]] = []
        labels: list[str] = []
        for s_idx, spec in enumerate(specs):
            fresh = {a: _new_atom(a.kind, a.data) for a in spec.atoms()}
            for c_idx, w in enumerate(spec.words):
                words.append(tuple(fresh[a] for a in w))
                labels.append(f"f{s_idx + 1}c{c_idx + 1}")
        if not words:
            raise ValueError("free_family needs at least one component")
        return ProcessSpec(tuple(words), tuple(labels))
    raise ValueError(f"unknown mode {mode!r}")


def free_family(specs: list[ProcessSpec]) -> ProcessSpec:
    return make_tuple(None, "free_family", components=specs)


def derived_diagonal_tuple(spec: ProcessSpec, groups) -> ProcessSpec:
    """The tuple of diagonal measures over the given index groups.

    Component j stands for the diagonal measure of the sub-tuple over
    G_j, and its cumulants are those of the concatenated underlying word.
    That substitution rule is validated against an independent expansion
    by diagonal_substitution_residual; see the tests.
    """
    groups = [tuple(g) for g in groups]
    if any(not g for g in groups):
        raise ValueError("empty group")
    for g in groups:
        if any(not 1 <= i <= spec.k for i in g):
            raise DimensionError(f"group {g} outside [1, {spec.k}]")
    words = tuple(spec.subset_word(sorted(g)) for g in groups)
    return ProcessSpec(words, tuple(f"diag{j + 1}" for j in range(len(groups))))


# ---------------------------------------------------------------------------
# subdivisions and interval scaling


@dataclass(frozen=True)
class Subdivision:
    """Ordered interval lengths of [0, t), all positive exact rationals."""

    t: Fraction
    lengths: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.lengths:
            raise ValueError("need at least one interval")
        if any(l <= 0 for l in self.lengths):
            raise ValueError("interval lengths must be positive")
        if sum(self.lengths) != self.t:
            raise ValueError(f"lengths sum to {sum(self.lengths)}, not t={self.t}")

    @classmethod
    def uniform(cls, n: int, t=1) -> "Subdivision":
        t = Fraction(t)
        return cls(t, (t / n,) * n)

    @classmethod
    def of(cls, lengths) -> "Subdivision":
        lens = tuple(Fraction(l) for l in lengths)
        return cls(sum(lens, Fraction(0)), lens)

    @property
    def n(self) -> int:
        return len(self.lengths)

    @property
    def mesh(self) -> Fraction:
        return max(self.lengths)

    def intervals(self) -> list[tuple[Fraction, Fraction]]:
        out, pos = [], Fraction(0)
        for l in self.lengths:
            out.append((pos, pos + l))
            pos += l
        return out

    def describe(self) -> str:
        if len(set(self.lengths)) == 1:
            return f"uniform(N={self.n},t={format_rational(self.t)})"
        return "lengths(" + ",".join(format_rational(l) for l in self.lengths) + ")"


def _intersection_length(intervals) -> Fraction:
    lo = max(a for a, _ in intervals)
    hi = min(b for _, b in intervals)
    return max(hi - lo, Fraction(0))


def increment_cumulant(spec: ProcessSpec, p: Partition, intervals) -> Fraction:
    """R_p of the components evaluated on the given intervals.

    Equals the product over blocks of the intersection length inside the
    block, times the unit-time R_p.
    """
    if not is_noncrossing(p):
        raise CrossingPartitionError(f"{p} is crossing")
    ivs = [(Fraction(a), Fraction(b)) for a, b in intervals]
    if p.k != len(ivs) or p.k != spec.k:
        raise DimensionError("partition, intervals, and components must agree")
    if any(b <= a for a, b in ivs):
        raise ValueError("intervals must be nonempty half-open [a, b)")
    out = Fraction(1)
    for block in p.blocks:
        out *= _intersection_length([ivs[i - 1] for i in block])
        if out == 0:
            return out
    return out * spec.partition_cumulant(p)


def tuple_increment_cumulants(spec: ProcessSpec, sub: Subdivision, indices):
    """Cumulant functional of (X^(1)(I_v1), ..., X^(k)(I_vk)).

    The value on a subset is the shared interval length (zero unless the
    subset's indices coincide) times the unit-time cumulant.  Feeding this
    to moments_from_cumulants gives the mixed moment of one Riemann-sum
    term, independently of the expectation engine.
    """
    from .cumulants import CumulantFunctional, nonempty_subsets

    if len(indices) != spec.k:
        raise DimensionError("one interval index per component")
    values = {}
    for b in nonempty_subsets(spec.k):
        chosen = {indices[i - 1] for i in b}
        if len(chosen) == 1:
            values[b] = sub.lengths[next(iter(chosen)) - 1] * spec.unit_cumulant(b)
        else:
            values[b] = Fraction(0)
    return CumulantFunctional(spec.k, values)


# ---------------------------------------------------------------------------
# the substitution-rule oracle


def _interval_partition(sizes) -> Partition:
    blocks, pos = [], 0
    for s in sizes:
        blocks.append(tuple(range(pos + 1, pos + s + 1)))
        pos += s
    return Partition(pos, tuple(blocks))


def diagonal_substitution_residual(spec: ProcessSpec, groups) -> dict[int, Fraction]:
    """Difference of two expansions of the t-polynomial moment of a
    product of diagonal measures, keyed by power of t.

    Route (a) expands over noncrossing coarsenings of the interval
    pattern on the flattened word; route (b) applies the forward
    moment-cumulant sum to the derived tuple.  The derived tuple's
    substitution rule is trustworthy only because this comes back empty.
    """
    groups = [tuple(sorted(g)) for g in groups]
    flat = [i for g in groups for i in g]
    ell = len(flat)
    flattened = spec.restrict(flat)
    sigma = _interval_partition([len(g) for g in groups])

    poly_a: dict[int, Fraction] = {}
    for tau in enumerate_noncrossing(ell):
        if refines(sigma, tau):
            val = flattened.partition_cumulant(tau)
            if val:
                poly_a[tau.num_blocks] = poly_a.get(tau.num_blocks, Fraction(0)) + val

    derived = derived_diagonal_tuple(spec, groups)
    poly_b: dict[int, Fraction] = {}
    for rho in enumerate_noncrossing(len(groups)):
        val = derived.partition_cumulant(rho)
        if val:
            poly_b[rho.num_blocks] = poly_b.get(rho.num_blocks, Fraction(0)) + val

    diff = {}
    for deg in set(poly_a) | set(poly_b):
        d = poly_a.get(deg, Fraction(0)) - poly_b.get(deg, Fraction(0))
        if d:
            diff[deg] = d
    return diff


# ---------------------------------------------------------------------------
# JSON descriptors


def spec_to_descriptor(spec: ProcessSpec) -> dict:
    atoms = spec.atoms()
    if len(atoms) == 1 and all(len(w) == 1 for w in spec.words):
        atom = atoms[0]
        base = _atom_descriptor(atom)
        if spec.k == 1:
            return base
        return {"type": "tuple", "mode": "identical", "k": spec.k, "base": base}
    if all(len(w) == 1 for w in spec.words) and len(atoms) == spec.k:
        return {
            "type": "tuple",
            "mode": "free_family",
            "components": [_atom_descriptor(w[0]) for w in spec.words],
        }
    raise ValueError("no descriptor for derived or mixed tuples")


def _atom_descriptor(atom: Atom) -> dict:
    if atom.kind == "poisson":
        return {"type": "free_poisson", "rate": format_rational(atom.data[0])}
    if atom.kind == "semicircular":
        return {"type": "semicircular"}
    return {
        "type": "custom",
        "cumulants": {str(i + 1): format_rational(v) for i, v in enumerate(atom.data)},
    }


def spec_from_descriptor(obj) -> ProcessSpec:
    """Build a spec from its JSON descriptor (dict or shorthand name)."""
    if isinstance(obj, str):
        name = obj.strip()
        if name == "free_poisson":
            return make_free_poisson(1)
        if name == "semicircular":
            return make_semicircular()
        raise ValueError(f"unknown process name {name!r}")
    kind = obj.get("type")
    if kind == "free_poisson":
        return make_free_poisson(parse_rational(obj.get("rate", "1")))
    if kind == "semicircular":
        return make_semicircular()
    if kind == "custom":
        cum = obj["cumulants"]
        seq = [parse_rational(cum[str(i)]) for i in range(1, len(cum) + 1)]
        return make_custom_process(seq)
    if kind == "tuple":
        mode = obj["mode"]
        if mode == "identical":
            return make_tuple(spec_from_descriptor(obj["base"]), "identical", k=int(obj["k"]))
        if mode == "free_family":
            return free_family([spec_from_descriptor(c) for c in obj["components"]])
        raise ValueError(f"unknown tuple mode {mode!r}")
    raise ValueError(f"unknown process type {kind!r}")
