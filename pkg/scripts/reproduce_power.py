"""Probability of detection at P_F = 0.1 against SNR, lambda = 1.

    python3 scripts/reproduce_power.py --trials 500 --workers 4
"""

import argparse

from mrfm_detect.cli import run_command


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--samples", type=int, default=5000)
    ap.add_argument("--snr-grid", default="-36:-6:1.5")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/power")
    args = ap.parse_args()
    raise SystemExit(run_command([
        "power", "--lambda", "1", f"--snr-grid={args.snr_grid}", "--trials", str(args.trials),
        "--samples", str(args.samples), "--seed", str(args.seed), "--workers", str(args.workers),
        "--out", args.out]))


if __name__ == "__main__":
    main()
