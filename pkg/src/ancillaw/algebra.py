"""Label-free algebra of N identical particles.

States are written as elementary vectors |phi_1, ..., phi_N> whose inner
product is the permanent (bosons) or determinant (fermions) of the matrix of
one-particle overlaps. Expanded states are kept in a canonical form: every
elementary term is sorted into a fixed order of (mode, spin) basis states,
with the exchange sign eta^(parity) folded into its coefficient.
"""
from __future__ import annotations

import enum
import math
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .kernels import determinant, permanent

PRUNE = 1e-14
ATOL = 1e-12


class IncompatibleError(ValueError):
    """Operands differ in particle count or exchange statistics."""


class Statistics(enum.Enum):
    BOSON = 1
    FERMION = -1

    @property
    def eta(self) -> int:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "Statistics":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown statistics {text!r}") from None


class Spin(enum.IntEnum):
    DOWN = 0
    UP = 1

    def __str__(self):
        return self.name.lower()


class BasisState(NamedTuple):
    """A (mode, spin) single-particle basis state; tuple order is the canonical order."""

    mode: str
    spin: Spin

    def __str__(self):
        return f"{self.mode}{'↑' if self.spin is Spin.UP else '↓'}"


def basis(mode: str, spin) -> BasisState:
    if not mode:
        raise ValueError("mode label must be non-empty")
    if isinstance(spin, str):
        spin = Spin[spin.upper()]
    return BasisState(mode, Spin(spin))



class OneParticleKet:
    """Superposition of single-particle basis states."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[BasisState, complex] | None = None):
        merged: dict[BasisState, complex] = {}
        for b, c in (terms or {}).items():
            merged[b] = merged.get(b, 0j) + complex(c)
        self.terms = {b: c for b, c in sorted(merged.items()) if abs(c) >= PRUNE}

    @classmethod
    def of(cls, *pairs) -> "OneParticleKet":
        """Build from ``(coefficient, mode, spin)`` triples or bare BasisStates."""
        terms: dict[BasisState, complex] = {}
        for p in pairs:
            if isinstance(p, BasisState):
                c, b = 1.0, p
            else:
                c, mode, spin = p
                b = basis(mode, spin)
            terms[b] = terms.get(b, 0j) + c
        return cls(terms)

    @classmethod
    def uniform(cls, states: Sequence[BasisState]) -> "OneParticleKet":
        amp = 1 / math.sqrt(len(states))
        return cls({b: amp for b in states})

    def norm_squared(self) -> float:
        return sum(abs(c) ** 2 for c in self.terms.values())

    def is_normalized(self, tol=ATOL) -> bool:
        return abs(self.norm_squared() - 1) <= tol

    def scaled(self, a: complex) -> "OneParticleKet":
        return OneParticleKet({b: a * c for b, c in self.terms.items()})

    def __add__(self, other: "OneParticleKet") -> "OneParticleKet":
        out = dict(self.terms)
        for b, c in other.terms.items():
            out[b] = out.get(b, 0j) + c
        return OneParticleKet(out)

    def __eq__(self, other):
        if not isinstance(other, OneParticleKet):
            return NotImplemented
        keys = self.terms.keys() | other.terms.keys()
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= ATOL for k in keys)

    def __repr__(self):
        inner = " + ".join(f"{c:.4g}|{b}>" for b, c in self.terms.items()) or "0"
        return f"OneParticleKet({inner})"


@dataclass(frozen=True)
class ProductKet:
    """Elementary (generally unnormalized) N-particle vector |phi_1, ..., phi_N>."""

    slots: tuple[OneParticleKet, ...]
    stats: Statistics

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        if len(self.slots) < 1:
            raise ValueError("a ProductKet needs at least one slot")

    def __len__(self):
        return len(self.slots)

    def swapped(self, i: int, j: int) -> "ProductKet":
        s = list(self.slots)
        s[i], s[j] = s[j], s[i]
        return ProductKet(tuple(s), self.stats)

    def with_slot(self, i: int, ket: OneParticleKet) -> "ProductKet":
        s = list(self.slots)
        s[i] = ket
        return ProductKet(tuple(s), self.stats)


@dataclass
class CanonicalState:
    """Merged sum of canonical elementary terms with raw coefficients.

    Coefficients refer to the unnormalized elementary vectors; a bosonic basis
    with repeated states has self-overlap equal to the product of the
    multiplicity factorials (see :func:`self_overlap`).
    """

    terms: dict = field(default_factory=dict)
    stats: Statistics = Statistics.BOSON
    particle_count: int = 0

    def __post_init__(self):
        for b in self.terms:
            if len(b) != self.particle_count:
                raise ValueError(f"term {b} does not have {self.particle_count} particles")
        self.terms = {b: c for b, c in sorted(self.terms.items()) if abs(c) >= PRUNE}

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def scaled(self, a: complex) -> "CanonicalState":
        return CanonicalState({b: a * c for b, c in self.terms.items()}, self.stats, self.particle_count)

    def normalized(self) -> "CanonicalState":
        n = norm(self)
        if n == 0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return self.scaled(1 / n)

    def __add__(self, other: "CanonicalState") -> "CanonicalState":
        _check_compatible(self, other)
        out = dict(self.terms)
        for b, c in other.terms.items():
            out[b] = out.get(b, 0j) + c
        return CanonicalState(out, self.stats, self.particle_count)

    def allclose(self, other: "CanonicalState", atol=ATOL) -> bool:
        if self.stats is not other.stats or self.particle_count != other.particle_count:
            return False
        keys = self.terms.keys() | other.terms.keys()
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= atol for k in keys)

    def modes(self) -> set[str]:
        return {s.mode for b in self.terms for s in b}

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c:.6g})|{', '.join(map(str, b))}>" for b, c in self.terms.items())


def _check_compatible(a, b):
    if a.stats is not b.stats:
        raise IncompatibleError(f"statistics differ: {a.stats.name} vs {b.stats.name}")
    na = a.particle_count if isinstance(a, CanonicalState) else len(a)
    nb = b.particle_count if isinstance(b, CanonicalState) else len(b)
    if na != nb:
        raise IncompatibleError(f"particle counts differ: {na} vs {nb}")


def one_particle_overlap(bra: OneParticleKet, ket: OneParticleKet) -> complex:
    small, large = (bra.terms, ket.terms) if len(bra.terms) <= len(ket.terms) else (ket.terms, bra.terms)
    total = 0j
    for b in small:
        if b in large:
            total += bra.terms[b].conjugate() * ket.terms[b]
    return total


def gram_matrix(bra: ProductKet, ket: ProductKet) -> np.ndarray:
    """Entry (i, j) is <bra slot i | ket slot j>."""
    return np.array([[one_particle_overlap(x, y) for y in ket.slots] for x in bra.slots], dtype=complex)


def product_overlap(bra: ProductKet, ket: ProductKet) -> complex:
    _check_compatible(bra, ket)
    g = gram_matrix(bra, ket)
    return permanent(g) if bra.stats is Statistics.BOSON else determinant(g)


def canonicalize(seq: Sequence[BasisState], stats: Statistics):
    """Sort ``seq`` into canonical order.

    Returns ``(sorted_basis, sign)`` with ``sign = eta**inversions``, or
    ``None`` when a fermionic sequence repeats a basis state (zero vector).
    """
    seq = tuple(seq)
    if stats is Statistics.FERMION and len(set(seq)) != len(seq):
        return None
    sign = 1
    if stats is Statistics.FERMION:
        inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
        sign = -1 if inversions & 1 else 1
    return tuple(sorted(seq)), sign


def _insert(sorted_basis: tuple, b: BasisState, stats: Statistics):
    """Append ``b`` after ``sorted_basis`` and move it into canonical position."""
    if stats is Statistics.FERMION:
        pos = bisect_left(sorted_basis, b)
        if pos < len(sorted_basis) and sorted_basis[pos] == b:
            return None
        passed = len(sorted_basis) - pos
        sign = -1 if passed & 1 else 1
    else:
        pos = bisect_right(sorted_basis, b)
        sign = 1
    return sorted_basis[:pos] + (b,) + sorted_basis[pos:], sign


def elementary_terms(ket: ProductKet) -> Iterator[tuple[tuple[BasisState, ...], complex]]:
    """Unmerged multilinear expansion: one (slot-ordered basis, coefficient) per component."""
    for choice in product(*(s.terms.items() for s in ket.slots)):
        coeff = 1 + 0j
        for _, c in choice:
            coeff *= c
        yield tuple(b for b, _ in choice), coeff


def expand(ket: ProductKet) -> CanonicalState:
    """Expand by multilinearity and merge into canonical form.

    Slots are absorbed one at a time and equal canonical prefixes merged after
    each step, which is equivalent to sorting every full elementary term
    (the parity of the full sort is the product of the insertion parities)
    but keeps fermionic Pauli cancellations and bosonic merges from
    multiplying out.
    """
    stats = ket.stats
    partial: dict[tuple, complex] = {(): 1 + 0j}
    for slot in ket.slots:
        nxt: dict[tuple, complex] = {}
        for prefix, c in partial.items():
            for b, a in slot.terms.items():
                placed = _insert(prefix, b, stats)
                if placed is None:
                    continue
                key, sign = placed
                nxt[key] = nxt.get(key, 0j) + sign * c * a
        partial = {k: v for k, v in nxt.items() if abs(v) >= PRUNE}
    return CanonicalState(partial, stats, len(ket))


def expand_naive(ket: ProductKet) -> CanonicalState:
    """Reference expansion: canonicalize each elementary term independently, then merge."""
    out: dict[tuple, complex] = {}
    for seq, c in elementary_terms(ket):
        placed = canonicalize(seq, ket.stats)
        if placed is None:
            continue
        key, sign = placed
        out[key] = out.get(key, 0j) + sign * c
    return CanonicalState(out, ket.stats, len(ket))


def self_overlap(b: Sequence[BasisState], stats: Statistics) -> int:
    """<b|b> for a canonical basis sequence."""
    counts = Counter(b).values()
    if stats is Statistics.FERMION:
        return 0 if any(m > 1 for m in counts) else 1
    return math.prod(math.factorial(m) for m in counts)


def inner(a: CanonicalState, b: CanonicalState) -> complex:
    _check_compatible(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for key in small.terms:
        if key in large.terms:
            total += a.terms[key].conjugate() * b.terms[key] * self_overlap(key, a.stats)
    return total


def _fermion_norm(ket: ProductKet) -> float:
    # sqrt(det(A A^+)) taken as the product of singular values of the slot
    # amplitude matrix A, so Pauli-forbidden kets give round-off, not its root
    states = sorted(set().union(*(s.terms for s in ket.slots)))
    if len(states) < len(ket):
        return 0.0
    a = np.array([[s.terms.get(b, 0j) for b in states] for s in ket.slots], dtype=complex)
    return float(np.prod(np.linalg.svd(a, compute_uv=False)))


def norm(state) -> float:
    if isinstance(state, ProductKet):
        if state.stats is Statistics.FERMION:
            return _fermion_norm(state)
        return math.sqrt(max(product_overlap(state, state).real, 0.0))
    return math.sqrt(sum(abs(c) ** 2 * self_overlap(b, state.stats) for b, c in state.terms.items()))


def from_terms(terms: Mapping[Sequence[BasisState], complex], stats: Statistics) -> CanonicalState:
    """Canonical state from arbitrarily ordered elementary terms (signs applied)."""
    out: dict[tuple, complex] = {}
    count = None
    for seq, c in terms.items():
        count = len(seq) if count is None else count
        if len(seq) != count:
            raise ValueError("terms have different particle counts")
        placed = canonicalize(seq, stats)
        if placed is None:
            continue
        key, sign = placed
        out[key] = out.get(key, 0j) + sign * c
    return CanonicalState(out, stats, count or 0)
