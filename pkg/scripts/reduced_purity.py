"""Purity of the measurement-mode state after postselection, tracing out the C_i modes."""
import argparse

from ancillaw.algebra import Statistics, expand
from ancillaw.measurement import postselect_single_occupancy, purity, reduce
from ancillaw.schemes import SchemeVariant, build_network_state, measurement_modes

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=6)
    args = ap.parse_args()
    print("n,statistics,purity,1/n")
    for n in range(2, args.n_max + 1):
        for stats in Statistics:
            state = expand(build_network_state(n, SchemeVariant.ANCILLA_SEPARATE, stats)).normalized()
            _, kept = postselect_single_occupancy(state, measurement_modes(n))
            print(f"{n},{stats.name.lower()},{purity(reduce(kept, measurement_modes(n))):.12g},{1 / n:.12g}")
