"""Two-user rate regions: SIC corner points against the orthogonal split curve."""
import argparse
import sys

from noma_access.cli import region_command


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--snr1-db", type=float, default=0.0)
    p.add_argument("--snr2-db", type=float, default=6.0)
    p.add_argument("--alpha-steps", type=int, default=101)
    args = p.parse_args()
    sys.stdout.write(region_command(args.snr1_db, args.snr2_db, args.alpha_steps))


if __name__ == "__main__":
    main()
