"""Line-oriented description format for splitter networks.

    statistics = boson
    particle: 1/sqrt(2)*M1 down + 1/sqrt(2)*C1 down
    particle: 1/sqrt(2)*M2 down + 1/sqrt(2)*C2 down
    particle: 1/sqrt(2)*M1 up + 1/sqrt(2)*M2 up
    postselect single M1, M2
    merge C1, C2 -> C
    verify w

``#`` starts a comment. Coefficients are products of ``p``, ``p/q`` and
``1/sqrt(k)`` factors, evaluated once at parse time.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .algebra import OneParticleKet, ProductKet, Spin, Statistics, basis, norm
from .schemes import (
    ANCILLA,
    PauliForbiddenError,
    SchemeVariant,
    ancilla_modes,
    measurement_modes,
)

NORM_WARN = 1e-9
NORM_ERROR = 1e-6

_MODE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_NUMBER = r"\d+(?:\.\d+)?"
_FACTOR = re.compile(rf"(?:1/sqrt\(\s*(?P<k>\d+)\s*\)|(?P<p>{_NUMBER})(?:\s*/\s*(?P<q>{_NUMBER}))?)\Z")


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class SchemeParseError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(map(str, self.diagnostics)))


@dataclass(frozen=True)
class Coefficient:
    factors: tuple  # normalized source text of each factor

    @property
    def value(self) -> float:
        v = 1.0
        for f in self.factors:
            m = _FACTOR.match(f)
            if m["k"] is not None:
                v /= math.sqrt(int(m["k"]))
            elif m["q"] is not None:
                v *= float(m["p"]) / float(m["q"])
            else:
                v *= float(m["p"])
        return v

    def __str__(self):
        return "*".join(self.factors)


@dataclass(frozen=True)
class Term:
    coeff: Coefficient | None
    mode: str
    spin: Spin

    def __str__(self):
        head = f"{self.coeff}*" if self.coeff is not None else ""
        return f"{head}{self.mode} {self.spin}"


@dataclass(frozen=True)
class ParticleSpec:
    terms: tuple

    def ket(self) -> OneParticleKet:
        amps = {}
        for t in self.terms:
            b = basis(t.mode, t.spin)
            amps[b] = amps.get(b, 0.0) + (t.coeff.value if t.coeff is not None else 1.0)
        return OneParticleKet(amps)

    def modes(self):
        return {t.mode for t in self.terms}


@dataclass(frozen=True)
class Postselect:
    modes: tuple

    kind = "postselect"

    def __str__(self):
        return "postselect single " + ", ".join(self.modes)


@dataclass(frozen=True)
class Merge:
    sources: tuple
    target: str

    kind = "merge"

    def __str__(self):
        return f"merge {', '.join(self.sources)} -> {self.target}"


@dataclass(frozen=True)
class Verify:
    target: str = "w"

    kind = "verify"

    def __str__(self):
        return f"verify {self.target}"


@dataclass
class SchemeAst:
    statistics: Statistics
    particles: tuple
    steps: tuple = ()
    warnings: list = field(default_factory=list, compare=False)

    def modes(self):
        return set().union(*(p.modes() for p in self.particles))


class _Line:
    """Source line with column bookkeeping (columns are 1-based)."""

    def __init__(self, number, text):
        self.number = number
        self.text = text

    def diag(self, offset, message, severity="error"):
        return ParseDiagnostic(self.number, offset + 1, message, severity)


def _strip(text, start, end):
    """Trim whitespace in text[start:end]; returns new (start, end)."""
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def _split(text, start, end, sep):
    """Split text[start:end] on ``sep`` keeping absolute offsets."""
    pieces = []
    pos = start
    while True:
        i = text.find(sep, pos, end)
        if i < 0:
            pieces.append(_strip(text, pos, end))
            return pieces
        pieces.append(_strip(text, pos, i))
        pos = i + len(sep)


def _parse_mode(line, start, end, diags):
    s, e = _strip(line.text, start, end)
    name = line.text[s:e]
    if not _MODE.match(name):
        diags.append(line.diag(s, f"invalid mode label {name!r}"))
        return None
    return name


def _parse_term(line, start, end, diags):
    text = line.text
    parts = _split(text, start, end, "*")
    *coeff_parts, (ms, me) = parts
    factors = []
    for s, e in coeff_parts:
        token = re.sub(r"\s+", "", text[s:e])
        m = _FACTOR.match(token)
        if not m:
            diags.append(line.diag(s, f"invalid coefficient {text[s:e]!r}"))
            return None
        if m["q"] is not None and float(m["q"]) == 0:
            diags.append(line.diag(s, "division by zero in coefficient"))
            return None
        if m["k"] is not None and int(m["k"]) == 0:
            diags.append(line.diag(s, "sqrt(0) in coefficient"))
            return None
        factors.append(token)
    words = list(re.finditer(r"\S+", text[ms:me]))
    if len(words) != 2:
        diags.append(line.diag(ms, "expected '<mode> <spin>'"))
        return None
    mode_tok, spin_tok = words
    mode = mode_tok.group()
    if not _MODE.match(mode):
        diags.append(line.diag(ms + mode_tok.start(), f"invalid mode label {mode!r}"))
        return None
    spin = spin_tok.group()
    if spin not in ("up", "down"):
        diags.append(line.diag(ms + spin_tok.start(), f"unknown spin {spin!r}; expected 'up' or 'down'"))
        return None
    return Term(Coefficient(tuple(factors)) if factors else None, mode, Spin[spin.upper()])


def _parse_particle(line, start, diags):
    terms = []
    ok = True
    for s, e in _split(line.text, start, len(line.text), "+"):
        if s == e:
            diags.append(line.diag(s, "empty term"))
            ok = False
            continue
        t = _parse_term(line, s, e, diags)
        if t is None:
            ok = False
        else:
            terms.append(t)
    if not ok:
        return None
    spec = ParticleSpec(tuple(terms))
    dev = abs(spec.ket().norm_squared() - 1)
    if dev >= NORM_ERROR:
        diags.append(line.diag(start, f"particle is not normalized (norm^2 = {spec.ket().norm_squared():.12g})"))
        return None
    if dev >= NORM_WARN:
        diags.append(line.diag(start, f"particle norm^2 deviates from 1 by {dev:.3g}", "warning"))
    return spec


def _mode_list(line, start, end, diags):
    modes = []
    for s, e in _split(line.text, start, end, ","):
        m = _parse_mode(line, s, e, diags)
        if m is None:
            return None
        modes.append(m)
    return tuple(modes)


def _parse_step(line, diags):
    text = line.text
    s, e = _strip(text, 0, len(text))
    m = re.match(r"postselect\s+single\s+", text[s:e])
    if m:
        modes = _mode_list(line, s + m.end(), e, diags)
        return Postselect(modes) if modes else None
    m = re.match(r"merge\s+", text[s:e])
    if m:
        arrow = text.find("->", s, e)
        if arrow < 0:
            diags.append(line.diag(s, "merge needs '<modes> -> <mode>'"))
            return None
        sources = _mode_list(line, s + m.end(), arrow, diags)
        target = _parse_mode(line, arrow + 2, e, diags)
        if sources is None or target is None:
            return None
        return Merge(sources, target)
    m = re.fullmatch(r"verify\s+(\S+)", text[s:e])
    if m:
        if m.group(1) != "w":
            diags.append(line.diag(s + m.start(1), f"unknown verify target {m.group(1)!r}"))
            return None
        return Verify()
    word = text[s:e].split()[0]
    diags.append(line.diag(s, f"unknown directive {word!r}"))
    return None


def parse(source: str) -> SchemeAst:
    """Parse a scheme description; raises SchemeParseError listing every error found."""
    diags: list[ParseDiagnostic] = []
    stats = None
    particles: list[tuple[ParticleSpec, _Line]] = []
    steps: list[tuple[object, _Line]] = []
    for number, raw in enumerate(source.splitlines(), start=1):
        text = raw.split("#", 1)[0].rstrip()
        if not text.strip():
            continue
        line = _Line(number, text)
        s, _ = _strip(text, 0, len(text))
        m = re.match(r"statistics\s*=\s*(\S*)\s*\Z", text[s:])
        if m:
            if stats is not None:
                diags.append(line.diag(s, "duplicate 'statistics' directive"))
            elif particles or steps:
                diags.append(line.diag(s, "'statistics' must come first"))
            elif m.group(1) in ("boson", "fermion"):
                stats = Statistics.parse(m.group(1))
            else:
                diags.append(line.diag(s + m.start(1), f"unknown statistics {m.group(1)!r}"))
                stats = False
            continue
        m = re.match(r"particle\s*:", text[s:])
        if m:
            if stats is None:
                diags.append(line.diag(s, "missing 'statistics' header before particles"))
                stats = False
            if steps:
                diags.append(line.diag(s, "particles must be declared before steps"))
            spec = _parse_particle(line, s + m.end(), diags)
            if spec is not None:
                particles.append((spec, line))
            continue
        step = _parse_step(line, diags)
        if step is not None:
            steps.append((step, line))
    if stats is None:
        diags.append(ParseDiagnostic(1, 1, "missing 'statistics' header"))
    if not particles and not any(d.severity == "error" for d in diags):
        diags.append(ParseDiagnostic(max(1, len(source.splitlines())), 1, "no particles declared"))
    declared = set().union(*(p.modes() for p, _ in particles)) if particles else set()
    for step, line in steps:
        used = step.modes if isinstance(step, Postselect) else step.sources if isinstance(step, Merge) else ()
        for mode in used:
            if mode not in declared:
                diags.append(line.diag(line.text.find(mode), f"mode {mode!r} does not appear in any particle"))
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise SchemeParseError(errors)
    return SchemeAst(
        stats, tuple(p for p, _ in particles), tuple(s for s, _ in steps), [d for d in diags if d.severity == "warning"]
    )


def pretty_print(ast: SchemeAst) -> str:
    lines = [f"statistics = {ast.statistics.name.lower()}"]
    lines += ["particle: " + " + ".join(map(str, p.terms)) for p in ast.particles]
    lines += [str(s) for s in ast.steps]
    return "\n".join(lines) + "\n"


def compile_scheme(ast: SchemeAst):
    """Returns the product ket of the declared particles and the steps in order."""
    ket = ProductKet(tuple(p.ket() for p in ast.particles), ast.statistics)
    if ast.statistics is Statistics.FERMION and norm(ket) < 1e-10:
        raise PauliForbiddenError("fermionic scheme has a zero-norm input state (Pauli exclusion)")
    return ket, list(ast.steps)


def scheme_source(n: int, variant: SchemeVariant, stats: Statistics, verify: bool = True) -> str:
    """Description text for one of the built-in schemes."""
    ms = measurement_modes(n)
    up = " + ".join(f"1/sqrt({n})*{m} up" for m in ms)
    lines = [f"# {variant.value}, n = {n}", f"statistics = {stats.name.lower()}"]
    if variant is SchemeVariant.EXTRACTION:
        down = " + ".join(f"1/sqrt({n})*{m} down" for m in ms)
        lines.append(f"particle: {up}")
        lines += [f"particle: {down}"] * (n - 1)
    else:
        for m, c in zip(ms, ancilla_modes(n, variant)):
            lines.append(f"particle: 1/sqrt(2)*{m} down + 1/sqrt(2)*{c} down")
        lines.append(f"particle: {up}")
    lines.append("postselect single " + ", ".join(ms))
    if variant is SchemeVariant.ANCILLA_SEPARATE:
        lines.append(f"merge {', '.join(ancilla_modes(n, variant))} -> {ANCILLA}")
    if verify:
        lines.append("verify w")
    return "\n".join(lines) + "\n"
