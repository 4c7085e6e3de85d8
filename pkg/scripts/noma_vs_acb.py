"""Mean successes per frame versus arrival rate, NOMA with four subbands against ACB random access."""
import argparse
import sys

from noma_access.access import Scheme
from noma_access.cli import SweepSpec, run_command
from noma_access.engine import ScenarioConfig


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--lambdas", type=float, nargs="+", default=[5, 10, 20, 40, 80, 160])
    p.add_argument("--frames", type=int, default=20)
    p.add_argument("--replications", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    first = True
    for scheme in (Scheme.NOMA, Scheme.ACB_RA):
        base = ScenarioConfig(scheme=scheme, num_frames=args.frames,
                              num_replications=args.replications, master_seed=args.seed)
        text = run_command(SweepSpec(base, "arrival_rate_lambda", tuple(args.lambdas)))
        sys.stdout.write(text if first else text.split("\n", 1)[1])
        first = False


if __name__ == "__main__":
    main()
