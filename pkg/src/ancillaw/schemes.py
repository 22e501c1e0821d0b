"""Builders for the ancilla-mode and extraction schemes, and their success probabilities."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .algebra import (
    BasisState,
    CanonicalState,
    OneParticleKet,
    ProductKet,
    Spin,
    Statistics,
    basis,
    expand,
    from_terms,
    inner,
    norm,
)
from .measurement import (
    OccupancyPattern,
    factor_out_mode,
    fidelity,
    merge_modes,
    postselect_single_occupancy,
)

ANCILLA = "C"


class PauliForbiddenError(ValueError):
    """The requested fermionic state is the zero vector."""


class SchemeVariant(enum.Enum):
    ANCILLA_SEPARATE = "ancilla-separate"
    ANCILLA_COMMON = "ancilla-common"
    EXTRACTION = "extraction"


def measurement_modes(n):
    return [f"M{i}" for i in range(1, n + 1)]


def ancilla_modes(n, variant):
    if variant is SchemeVariant.ANCILLA_COMMON:
        return [ANCILLA] * n
    return [f"{ANCILLA}{i}" for i in range(1, n + 1)]


def _check(n, variant, stats):
    if n < 2:
        raise ValueError("n must be >= 2")
    if variant is SchemeVariant.EXTRACTION and stats is Statistics.FERMION:
        raise PauliForbiddenError(
            "the extraction protocol is bosonic only: for n >= 3 two down fermions share "
            "the nonlocal mode and the state has zero norm"
        )


def build_initial(n: int, variant: SchemeVariant, stats: Statistics) -> ProductKet:
    _check(n, variant, stats)
    if variant is SchemeVariant.EXTRACTION:
        slots = [OneParticleKet.of((1, "M", Spin.UP))] + [OneParticleKet.of((1, "M", Spin.DOWN))] * (n - 1)
    else:
        slots = [OneParticleKet.of((1, f"A{i}", Spin.DOWN)) for i in range(1, n + 1)]
        slots.append(OneParticleKet.of((1, f"A{n + 1}", Spin.UP)))
    return ProductKet(tuple(slots), stats)


def nonlocal_mode(n: int, spin: Spin) -> OneParticleKet:
    return OneParticleKet.uniform([basis(m, spin) for m in measurement_modes(n)])


def build_network_state(n: int, variant: SchemeVariant, stats: Statistics) -> ProductKet:
    """State right after the splitter nodes (raw product ket, not rescaled)."""
    _check(n, variant, stats)
    ms = measurement_modes(n)
    if variant is SchemeVariant.EXTRACTION:
        slots = [nonlocal_mode(n, Spin.UP)] + [nonlocal_mode(n, Spin.DOWN)] * (n - 1)
        return ProductKet(tuple(slots), stats)
    slots = [
        OneParticleKet.uniform([basis(m, Spin.DOWN), basis(c, Spin.DOWN)])
        for m, c in zip(ms, ancilla_modes(n, variant))
    ]
    slots.append(nonlocal_mode(n, Spin.UP))
    return ProductKet(tuple(slots), stats)


def build_w_state(n: int, stats: Statistics, modes=None) -> CanonicalState:
    """Uniform superposition of the single-up terms, written in the given mode order."""
    modes = list(modes) if modes is not None else measurement_modes(n)
    if n < 2 or len(modes) != n:
        raise ValueError("need n >= 2 modes")
    amp = 1 / math.sqrt(n)
    terms = {}
    for k in range(n):
        seq = tuple(BasisState(m, Spin.UP if i == k else Spin.DOWN) for i, m in enumerate(modes))
        terms[seq] = amp
    return from_terms(terms, stats)


def build_target(n: int, stats: Statistics) -> CanonicalState:
    """Post-merge state: term i has C↓ in slot i and M_i↑ in the last slot."""
    if n < 2:
        raise ValueError("n must be >= 2")
    ms = measurement_modes(n)
    amp = 1 / math.sqrt(n)
    terms = {}
    for i in range(n):
        seq = [BasisState(ANCILLA if j == i else m, Spin.DOWN) for j, m in enumerate(ms)]
        seq.append(BasisState(ms[i], Spin.UP))
        terms[tuple(seq)] = amp
    return from_terms(terms, stats)


SELECTORS = ("boson-ancilla", "fermion-ancilla", "boson-common", "extraction")


def _closed_form_exact(selector: str, n: int) -> Fraction:
    if n < 2:
        raise ValueError("n must be >= 2")
    if selector == "boson-ancilla":
        return Fraction(1, 2**n)
    if selector == "fermion-ancilla":
        return Fraction(1, n + 1)
    if selector == "boson-common":
        return Fraction(1, sum(math.factorial(n) // math.factorial(n - m) for m in range(n + 1)))
    if selector == "extraction":
        return Fraction(1, math.factorial(n - 1) * n ** (n - 1))
    raise ValueError(f"unknown selector {selector!r}; expected one of {', '.join(SELECTORS)}")


def closed_form_prob(selector: str, n: int) -> float:
    return float(_closed_form_exact(selector, n))


def extraction_multinomial_prob(n: int) -> float:
    """Probability that the extraction state leaves one particle per mode: n!/n^n.

    This is what brute-force evolution gives. It equals the published
    closed form 1/((n-1)! n^(n-1)) only at n = 2; that form drops the
    (n-1)! orderings of the down particles that feed each W term.
    """
    return float(Fraction(math.factorial(n), n**n))


def selector_for(variant: SchemeVariant, stats: Statistics) -> str:
    """Closed form governing a brute-force pipeline.

    With separate ancilla modes no postselected term has two particles in one
    mode, so the 1/2^n result holds for either statistics.
    """
    if variant is SchemeVariant.ANCILLA_SEPARATE:
        return "boson-ancilla"
    if variant is SchemeVariant.ANCILLA_COMMON:
        return "fermion-ancilla" if stats is Statistics.FERMION else "boson-common"
    if stats is Statistics.FERMION:
        raise PauliForbiddenError("extraction is not defined for fermions")
    return "extraction"


@dataclass
class PipelineResult:
    n: int
    variant: SchemeVariant
    stats: Statistics
    probability: float
    postselected: CanonicalState
    final: CanonicalState
    w_fidelity: float
    eta: int | None


def simulate(n: int, variant: SchemeVariant, stats: Statistics) -> PipelineResult:
    """Brute-force run: expand, postselect one particle per M_i, merge C_i -> C, factor out C."""
    ket = build_network_state(n, variant, stats)
    state = expand(ket)
    if norm(state) < 1e-10:
        raise PauliForbiddenError("network state has zero norm")
    prob, kept = postselect_single_occupancy(state, OccupancyPattern.single(measurement_modes(n)))
    w = build_w_state(n, stats)
    if variant is SchemeVariant.EXTRACTION:
        return PipelineResult(n, variant, stats, prob, kept, kept, fidelity(kept, w), None)
    merged = merge_modes(kept, {c: ANCILLA for c in ancilla_modes(n, variant)})
    sign, _, remainder = factor_out_mode(merged, ANCILLA)
    overlap = inner(w, remainder)
    eta = sign * (1 if overlap.real >= 0 else -1)
    return PipelineResult(n, variant, stats, prob, kept, merged, abs(overlap) ** 2, eta)


@dataclass
class ProbabilityRow:
    n: int
    p_boson_ancilla: float
    p_fermion_ancilla: float
    p_boson_common: float
    p_extraction: float


@dataclass
class ProbabilityTable:
    rows: list

    COLUMNS = ("n", "p_boson_ancilla", "p_fermion_ancilla", "p_boson_common", "p_extraction")

    @classmethod
    def compute(cls, n_min: int, n_max: int) -> "ProbabilityTable":
        if not 2 <= n_min <= n_max:
            raise ValueError(f"bad range {n_min}..{n_max}")
        return cls([ProbabilityRow(n, *(closed_form_prob(s, n) for s in SELECTORS)) for n in range(n_min, n_max + 1)])

    def to_csv(self) -> str:
        lines = [",".join(self.COLUMNS)]
        for r in self.rows:
            lines.append(",".join([str(r.n)] + [fmt(getattr(r, c)) for c in self.COLUMNS[1:]]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        rows = [{k: (v if isinstance(v, int) else float(fmt(v))) for k, v in asdict(r).items()} for r in self.rows]
        return json.dumps({"rows": rows}, indent=2) + "\n"


def fmt(x: float) -> str:
    """12 significant digits, locale-independent."""
    return format(x, ".12g")
