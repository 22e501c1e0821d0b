"""Regenerate the shipped scheme files in schemes/."""
from pathlib import Path

from ancillaw.algebra import Statistics
from ancillaw.dsl import scheme_source
from ancillaw.schemes import SchemeVariant

OUT = Path(__file__).resolve().parent.parent / "schemes"

if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    for variant in SchemeVariant:
        for stats in Statistics:
            if variant is SchemeVariant.EXTRACTION and stats is Statistics.FERMION:
                continue
            for n in range(2, 6):
                path = OUT / f"{variant.value}_{stats.name.lower()}_n{n}.scheme"
                path.write_text(scheme_source(n, variant, stats))
                print(path.name)
