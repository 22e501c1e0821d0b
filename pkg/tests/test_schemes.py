import math
from itertools import product

import pytest

from ancillaw.algebra import BasisState, OneParticleKet, Spin, Statistics, basis, elementary_terms, expand, from_terms, inner, norm
from ancillaw.dsl import parse, scheme_source
from ancillaw.measurement import factor_out_mode
from ancillaw.runner import execute
from ancillaw.schemes import (
    SELECTORS,
    PauliForbiddenError,
    ProbabilityTable,
    SchemeVariant,
    build_initial,
    build_network_state,
    build_target,
    build_w_state,
    closed_form_prob,
    extraction_multinomial_prob,
    selector_for,
    simulate,
)

B, F = Statistics.BOSON, Statistics.FERMION
SEP, COM, EXT = SchemeVariant.ANCILLA_SEPARATE, SchemeVariant.ANCILLA_COMMON, SchemeVariant.EXTRACTION
S2 = 1 / math.sqrt(2)
UP, DOWN = Spin.UP, Spin.DOWN


def test_initial_ancilla():
    ket = build_initial(2, SEP, B)
    assert [list(s.terms) for s in ket.slots] == [[basis("A1", DOWN)], [basis("A2", DOWN)], [basis("A3", UP)]]


def test_initial_extraction_norm():
    ket = build_initial(3, EXT, B)
    assert [list(s.terms)[0] for s in ket.slots] == [basis("M", UP), basis("M", DOWN), basis("M", DOWN)]
    assert norm(ket) == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("builder", [build_initial, build_network_state])
def test_extraction_fermion_rejected(builder):
    with pytest.raises(PauliForbiddenError):
        builder(2, EXT, F)


def test_n_below_two_rejected():
    with pytest.raises(ValueError):
        build_network_state(1, SEP, B)


def test_network_separate_slots():
    ket = build_network_state(2, SEP, B)
    assert ket.slots == (
        OneParticleKet.of((S2, "M1", "down"), (S2, "C1", "down")),
        OneParticleKet.of((S2, "M2", "down"), (S2, "C2", "down")),
        OneParticleKet.of((S2, "M1", "up"), (S2, "M2", "up")),
    )


def test_network_common_slots():
    ket = build_network_state(2, COM, F)
    assert ket.slots[0] == OneParticleKet.of((S2, "M1", "down"), (S2, "C", "down"))
    assert ket.slots[1] == OneParticleKet.of((S2, "M2", "down"), (S2, "C", "down"))


def test_network_extraction_expansion():
    s = expand(build_network_state(2, EXT, B))
    assert len(s) == 4
    assert all(c == pytest.approx(0.5) for _, c in s)
    modes = {tuple(sorted((x.mode, x.spin) for x in b)) for b, _ in s}
    assert len(modes) == 4


class TestW:
    def test_n2(self):
        w = build_w_state(2, F)
        expected = from_terms(
            {(basis("M1", UP), basis("M2", DOWN)): S2, (basis("M1", DOWN), basis("M2", UP)): S2}, F
        )
        assert w.allclose(expected)

    def test_n3_magnitudes(self):
        w = build_w_state(3, B)
        assert len(w) == 3
        assert all(abs(c) == pytest.approx(1 / math.sqrt(3)) for _, c in w)

    @pytest.mark.parametrize("n", range(2, 9))
    @pytest.mark.parametrize("stats", [B, F])
    def test_normalized(self, n, stats):
        w = build_w_state(n, stats)
        assert inner(w, w) == pytest.approx(1, abs=1e-12)


class TestTarget:
    @pytest.mark.parametrize("stats", [B, F])
    def test_n2(self, stats):
        Cd, M1d, M2d, M1u, M2u = (basis(*x) for x in [("C", DOWN), ("M1", DOWN), ("M2", DOWN), ("M1", UP), ("M2", UP)])
        expected = from_terms({(Cd, M2d, M1u): S2, (M1d, Cd, M2u): S2}, stats)
        assert build_target(2, stats).allclose(expected)

    @pytest.mark.parametrize("n", range(2, 9))
    @pytest.mark.parametrize("stats", [B, F])
    def test_shape(self, n, stats):
        t = build_target(n, stats)
        assert len(t) == n
        assert norm(t) == pytest.approx(1, abs=1e-12)
        assert all(abs(c) == pytest.approx(1 / math.sqrt(n)) for _, c in t)

    @pytest.mark.parametrize("n", range(2, 9))
    @pytest.mark.parametrize("stats", [B, F])
    def test_factorizes_into_w(self, n, stats):
        sign, single, rest = factor_out_mode(build_target(n, stats), "C")
        assert sign == stats.eta
        assert single == BasisState("C", DOWN)
        assert rest.allclose(build_w_state(n, stats), atol=1e-12)


class TestClosedForms:
    def test_values(self):
        assert closed_form_prob("boson-ancilla", 3) == 0.125
        assert closed_form_prob("fermion-ancilla", 3) == 0.25
        assert closed_form_prob("boson-common", 2) == pytest.approx(0.2)
        assert closed_form_prob("boson-common", 3) == 0.0625
        assert closed_form_prob("extraction", 3) == pytest.approx(1 / 18)
        assert closed_form_prob("extraction", 2) == 0.5

    def test_unknown_selector(self):
        with pytest.raises(ValueError):
            closed_form_prob("bogus", 3)

    @pytest.mark.parametrize("n", range(3, 21))
    def test_ordering(self, n):
        p = {s: closed_form_prob(s, n) for s in SELECTORS}
        assert p["extraction"] < p["boson-ancilla"] < p["fermion-ancilla"]

    def test_selectors(self):
        assert selector_for(SEP, F) == "boson-ancilla"
        assert selector_for(COM, F) == "fermion-ancilla"
        assert selector_for(COM, B) == "boson-common"
        with pytest.raises(PauliForbiddenError):
            selector_for(EXT, F)


@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("variant,stats", [(SEP, B), (SEP, F), (COM, B), (COM, F)])
def test_brute_force_matches_closed_form(n, variant, stats):
    r = simulate(n, variant, stats)
    assert r.probability == pytest.approx(closed_form_prob(selector_for(variant, stats), n), abs=1e-10)
    assert r.w_fidelity == pytest.approx(1, abs=1e-10)
    assert r.eta == stats.eta


def multinomial_all_distinct(n):
    """n particles independently uniform over n modes; fraction landing one per mode."""
    hits = sum(1 for c in product(range(n), repeat=n) if len(set(c)) == n)
    return hits / n**n


@pytest.mark.parametrize("n", range(2, 7))
def test_extraction_brute_force_is_multinomial(n):
    r = simulate(n, EXT, B)
    assert r.probability == pytest.approx(multinomial_all_distinct(n), abs=1e-12)
    assert r.probability == pytest.approx(extraction_multinomial_prob(n), abs=1e-12)
    assert r.w_fidelity == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("n", range(2, 9))
def test_separate_component_count(n):
    ket = build_network_state(n, SEP, B)
    assert sum(1 for _ in elementary_terms(ket)) == n * 2**n


@pytest.mark.parametrize("n", range(2, 9))
def test_fermion_common_term_count(n):
    assert len(expand(build_network_state(n, COM, F))) == n * (n + 1)


def test_table():
    t = ProbabilityTable.compute(2, 8)
    assert len(t.rows) == 7
    for a, b in zip(t.rows, t.rows[1:]):
        for col in ProbabilityTable.COLUMNS[1:]:
            assert getattr(b, col) < getattr(a, col)
    with pytest.raises(ValueError):
        ProbabilityTable.compute(3, 2)


def relabel(text, mapping):
    import re

    return re.sub(r"\b[A-Z][A-Za-z0-9_]*\b", lambda m: mapping.get(m.group(), m.group()), text)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("variant,stats", [(SEP, B), (SEP, F), (COM, B), (COM, F)])
def test_observables_independent_of_ordering_convention(n, variant, stats):
    # reversed measurement names and an ancilla that sorts last change every canonical sign
    mapping = {f"M{i}": f"Q{n + 1 - i}" for i in range(1, n + 1)}
    mapping.update({"C": "Z"} | {f"C{i}": f"Y{i}" for i in range(1, n + 1)})
    base = execute(parse(scheme_source(n, variant, stats)))
    moved = execute(parse(relabel(scheme_source(n, variant, stats), mapping)))
    assert moved.steps[0]["probability"] == pytest.approx(base.steps[0]["probability"], abs=1e-12)
    assert moved.fidelity == pytest.approx(1, abs=1e-10)
    assert moved.eta == base.eta == stats.eta
