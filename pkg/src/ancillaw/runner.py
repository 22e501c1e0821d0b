"""Execute a compiled scheme step by step and collect a report."""
from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import expand, inner, norm
from .dsl import Merge, Postselect, SchemeAst, Verify, compile_scheme
from .measurement import (
    NotFactorizableError,
    OccupancyPattern,
    factor_out_mode,
    merge_modes,
    postselect_single_occupancy,
    sample,
)
from .schemes import PauliForbiddenError, build_w_state

VERIFY_TOL = 1e-10


class VerificationError(RuntimeError):
    """A ``verify w`` step found fidelity below 1."""


@dataclass
class RunReport:
    scheme: str
    statistics: str
    n: int
    steps: list = field(default_factory=list)  # {"kind", "probability"}
    fidelity: float | None = None
    eta: int | None = None
    sampling: dict | None = None

    def as_dict(self):
        out = {
            "scheme": self.scheme,
            "statistics": self.statistics,
            "n": self.n,
            "steps": self.steps,
            "fidelity": self.fidelity,
            "eta": self.eta,
        }
        if self.sampling is not None:
            out["sampling"] = self.sampling
        return out

    @property
    def success_probability(self):
        p = 1.0
        for s in self.steps:
            if s["kind"] == "postselect":
                p *= s["probability"]
        return p


def _verify(state, keep, stats):
    extra = state.modes() - set(keep)
    sign = None
    if len(extra) == 1:
        sign, _, state = factor_out_mode(state, extra.pop())
    elif extra:
        raise NotFactorizableError(f"cannot isolate W modes from {sorted(extra)}")
    if state.particle_count != len(keep):
        raise NotFactorizableError("particle count does not match the W modes")
    w = build_w_state(len(keep), stats, modes=keep)
    overlap = inner(w, state)
    eta = None if sign is None else sign * (1 if overlap.real >= 0 else -1)
    return abs(overlap) ** 2, eta


def execute(ast: SchemeAst, name: str = "scheme", shots: int | None = None, seed: int = 0) -> RunReport:
    """Run every step of ``ast``.

    Raises PauliForbiddenError, NotFactorizableError or VerificationError
    (carrying the partial report as ``.report``) on physics failures.
    """
    ket, steps = compile_scheme(ast)
    state = expand(ket)
    if norm(state) < 1e-10:
        raise PauliForbiddenError("input state has zero norm")
    state = state.normalized()
    initial = state
    selections = [s for s in steps if isinstance(s, Postselect)]
    keep = list(selections[-1].modes) if selections else sorted(state.modes())
    n = len(selections[0].modes) if selections else len(ket)
    report = RunReport(name, ast.statistics.name.lower(), n)
    try:
        for step in steps:
            if isinstance(step, Postselect):
                prob, state = postselect_single_occupancy(state, OccupancyPattern.single(step.modes))
                report.steps.append({"kind": "postselect", "probability": prob})
                if prob == 0:
                    raise VerificationError("postselection has zero probability")
            elif isinstance(step, Merge):
                state = merge_modes(state, {m: step.target for m in step.sources})
                state = state.normalized()
                report.steps.append({"kind": "merge", "probability": 1.0})
            elif isinstance(step, Verify):
                report.fidelity, report.eta = _verify(state, keep, ast.statistics)
                report.steps.append({"kind": "verify", "probability": report.fidelity})
                if report.fidelity < 1 - VERIFY_TOL:
                    raise VerificationError(f"fidelity with W is {report.fidelity:.12g}")
    except (NotFactorizableError, VerificationError) as exc:
        exc.report = report
        raise
    finally:
        if shots:
            drawn = sample(initial, shots, seed)
            pattern = OccupancyPattern.single(selections[0].modes) if selections else OccupancyPattern()
            report.sampling = {
                "seed": seed,
                "shots": shots,
                "generator": drawn.generator,
                "success_frequency": drawn.frequency(pattern.matches),
            }
    return report
