"""Hybrid detector ROC as the number of sampled flip configurations grows.

Fast-flip regime (lambda = 10, -20 dB), where the search budget matters most.

    python3 scripts/gibbs_study.py --samples 100,500,5000 --workers 4
"""

import argparse

from mrfm_detect.cli import run_command


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--samples", default="100,500,5000")
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--strategy", default="prior-only", choices=("prior-only", "gibbs-sweep"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/gibbs")
    args = ap.parse_args()
    raise SystemExit(run_command([
        "gibbs-study", "--lambda", "10", "--snr-db", "-20", "--samples", args.samples,
        "--strategy", args.strategy, "--trials", str(args.trials), "--seed", str(args.seed),
        "--workers", str(args.workers), "--out", args.out]))


if __name__ == "__main__":
    main()
