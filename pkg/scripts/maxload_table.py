"""Decodable devices per subband over a grid of SNR and subband size."""
import argparse
import sys

from noma_access.cli import maxload_command


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--gamma-db", type=float, nargs="+", default=[0, 10, 20, 30, 40])
    p.add_argument("--tw", type=float, nargs="+", default=[250, 1000, 10000])
    p.add_argument("--model", default="equal_share")
    args = p.parse_args()
    header = True
    for tw in args.tw:
        text = maxload_command(args.gamma_db, tw, 1024, args.model)
        sys.stdout.write(text if header else text.split("\n", 1)[1])
        header = False


if __name__ == "__main__":
    main()
