"""Single-round successes versus contenders for FDMA, TDMA and single-subband NOMA.

Uses a 10 ms frame so ten 1 ms TDMA slots and ten 100 kHz FDMA channels
offer the same 1000 symbols per resource.
"""
import argparse
import csv
import sys
from dataclasses import replace

from noma_access.access import OmaConfig, Scheme
from noma_access.engine import NomaOptions, ScenarioConfig, one_shot_curve

GRID = [1, 2, 4, 6, 8, 10, 12, 15, 20, 30, 50, 80, 100, 120, 133, 150]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--replications", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    base = ScenarioConfig(frame_duration_s=0.01, oma=OmaConfig(num_resources=10),
                          noma=NomaOptions(num_subbands=1), master_seed=args.seed)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["scheme", "n", "mean_success", "ci95"])
    for scheme in (Scheme.FDMA, Scheme.TDMA, Scheme.NOMA):
        for n, mean, ci in one_shot_curve(replace(base, scheme=scheme), GRID, args.replications):
            out.writerow([scheme.value, n, f"{mean:.6g}", f"{ci:.3g}"])


if __name__ == "__main__":
    main()
