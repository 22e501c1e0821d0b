"""Postselection, mode merging, factorization, reduced states and sampling."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .algebra import (
    ATOL,
    BasisState,
    CanonicalState,
    canonicalize,
    inner,
    norm,
    self_overlap,
)

GENERATOR_NAME = "numpy.random.PCG64"


class NotFactorizableError(ValueError):
    pass


class NotReducibleError(ValueError):
    pass


class OccupancyPattern(dict):
    """Required particle count per mode; modes not listed are unconstrained."""

    def __init__(self, constraints=()):
        if not isinstance(constraints, Mapping):
            constraints = {m: 1 for m in constraints}
        super().__init__(constraints)
        for mode, count in self.items():
            if count < 0:
                raise ValueError(f"negative occupancy for {mode}")

    @classmethod
    def single(cls, modes: Iterable[str]) -> "OccupancyPattern":
        return cls({m: 1 for m in modes})

    def matches(self, b) -> bool:
        occ = Counter(s.mode for s in b)
        return all(occ.get(m, 0) == k for m, k in self.items())


def postselect_single_occupancy(state: CanonicalState, pattern) -> tuple[float, CanonicalState]:
    """Project onto the occupancy sector ``pattern`` and renormalize.

    An empty projection gives probability 0 and an empty state rather than
    raising.
    """
    pattern = pattern if isinstance(pattern, OccupancyPattern) else OccupancyPattern(pattern)
    total = norm(state) ** 2
    if total == 0:
        raise ZeroDivisionError("cannot postselect on the zero vector")
    kept = CanonicalState(
        {b: c for b, c in state.terms.items() if pattern.matches(b)}, state.stats, state.particle_count
    )
    if not kept.terms:
        return 0.0, kept
    return norm(kept) ** 2 / total, kept.normalized()


def merge_modes(state: CanonicalState, mapping: Mapping[str, str]) -> CanonicalState:
    out: dict[tuple, complex] = {}
    for b, c in state.terms.items():
        relabeled = [BasisState(mapping.get(s.mode, s.mode), s.spin) for s in b]
        placed = canonicalize(relabeled, state.stats)
        if placed is None:
            continue
        key, sign = placed
        out[key] = out.get(key, 0j) + sign * c
    return CanonicalState(out, state.stats, state.particle_count)


def factor_out_mode(state: CanonicalState, mode: str) -> tuple[int, BasisState, CanonicalState]:
    """Split off the single particle sitting in ``mode``.

    The particle is moved to the last position of every term (one exchange
    sign per particle it passes). The returned remainder is normalized with
    its leading coefficient's real part made non-negative; the sign needed
    for that is returned, so ``attach_mode(remainder, single, sign)`` gives
    back the (normalized) input.
    """
    if not state.terms:
        raise NotFactorizableError("empty state")
    eta = state.stats.eta
    single = None
    rest: dict[tuple, complex] = {}
    for b, c in state.terms.items():
        hits = [i for i, s in enumerate(b) if s.mode == mode]
        if len(hits) != 1:
            raise NotFactorizableError(f"mode {mode} holds {len(hits)} particles in term {b}")
        pos = hits[0]
        if single is None:
            single = b[pos]
        elif b[pos] != single:
            raise NotFactorizableError(f"mode {mode} has inconsistent spin across terms")
        moves = len(b) - 1 - pos
        rest[b[:pos] + b[pos + 1 :]] = c * (eta**moves)
    remainder = CanonicalState(rest, state.stats, state.particle_count - 1)
    lead = next(iter(remainder.terms.values()))
    sign = -1 if lead.real < 0 or (lead.real == 0 and lead.imag < 0) else 1
    return sign, single, remainder.scaled(sign).normalized()


def attach_mode(remainder: CanonicalState, single: BasisState, sign: int = 1) -> CanonicalState:
    out: dict[tuple, complex] = {}
    for b, c in remainder.terms.items():
        placed = canonicalize(b + (single,), remainder.stats)
        if placed is None:
            continue
        key, s = placed
        out[key] = out.get(key, 0j) + sign * s * c
    return CanonicalState(out, remainder.stats, remainder.particle_count + 1)


def fidelity(a: CanonicalState, b: CanonicalState) -> float:
    return abs(inner(a, b)) ** 2


@dataclass
class ReducedDensity:
    kept_basis: list
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=ATOL):
            raise ValueError("reduced density matrix is not Hermitian")

    @property
    def dim(self):
        return len(self.kept_basis)


def reduce(state: CanonicalState, keep: Iterable[str]) -> ReducedDensity:
    """Trace out every mode not in ``keep``.

    Only valid when the kept and traced particles sit in disjoint modes, so
    every term splits into a kept and a traced canonical sub-sequence; the
    exchange sign of bringing the kept particles to the front is applied.
    """
    keep = set(keep)
    stats = state.stats
    eta = stats.eta
    columns: dict[tuple, dict[tuple, complex]] = {}
    kept_count = None
    for b, c in state.terms.items():
        kept, traced = [], []
        moves = 0
        for s in b:
            if s.mode in keep:
                kept.append(s)
                moves += len(traced)
            else:
                traced.append(s)
        if kept_count is None:
            kept_count = len(kept)
        elif len(kept) != kept_count:
            raise NotReducibleError("terms have different particle numbers in the kept modes")
        k, r = tuple(kept), tuple(traced)
        amp = c * (eta**moves) * math.sqrt(self_overlap(k, stats) * self_overlap(r, stats))
        col = columns.setdefault(r, {})
        col[k] = col.get(k, 0j) + amp
    kept_basis = sorted({k for col in columns.values() for k in col})
    index = {k: i for i, k in enumerate(kept_basis)}
    rho = np.zeros((len(kept_basis), len(kept_basis)), dtype=complex)
    for col in columns.values():
        v = np.zeros(len(kept_basis), dtype=complex)
        for k, a in col.items():
            v[index[k]] += a
        rho += np.outer(v, v.conj())
    tr = np.trace(rho).real
    if tr <= 0:
        raise NotReducibleError("state has zero weight")
    return ReducedDensity(kept_basis, rho / tr)


def purity(rho: ReducedDensity) -> float:
    m = rho.matrix
    return float(np.trace(m @ m).real)


@dataclass
class OutcomeDistribution:
    entries: list  # (canonical basis, probability), canonical order

    @property
    def outcomes(self):
        return [b for b, _ in self.entries]

    @property
    def probabilities(self):
        return np.array([p for _, p in self.entries])

    def probability(self, predicate: Callable) -> float:
        return float(sum(p for b, p in self.entries if predicate(b)))


def occupancy_distribution(state: CanonicalState) -> OutcomeDistribution:
    total = norm(state) ** 2
    return OutcomeDistribution(
        [(b, abs(c) ** 2 * self_overlap(b, state.stats) / total) for b, c in state.terms.items()]
    )


@dataclass
class Samples:
    outcomes: list
    counts: np.ndarray
    shots: int
    seed: int
    generator: str = GENERATOR_NAME
    exact: np.ndarray = field(default=None, repr=False)

    def as_dict(self):
        return {b: int(k) for b, k in zip(self.outcomes, self.counts) if k}

    def frequency(self, predicate: Callable) -> float:
        hit = sum(int(k) for b, k in zip(self.outcomes, self.counts) if predicate(b))
        return hit / self.shots


def sample(state: CanonicalState, shots: int, seed: int) -> Samples:
    """Draw ``shots`` projective measurements by inverse CDF over the exact distribution."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    dist = occupancy_distribution(state)
    p = dist.probabilities
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    idx = np.minimum(idx, len(p) - 1)
    counts = np.bincount(idx, minlength=len(p))
    return Samples(dist.outcomes, counts, shots, seed, exact=p)
