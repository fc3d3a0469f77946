"""ROC curves for the four detectors in three regimes.

Writes results/roc/<regime>/roc_<kind>.csv plus a summary JSON per regime.

    python3 scripts/reproduce_roc.py --trials 500 --workers 4
"""

import argparse
from pathlib import Path

from mrfm_detect.cli import run_command

REGIMES = {
    "snr-25_lambda1": ["--snr-db", "-25", "--lambda", "1"],
    "snr-20_lambda1": ["--snr-db", "-20", "--lambda", "1"],
    "snr-20_lambda10": ["--snr-db", "-20", "--lambda", "10"],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--samples", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/roc")
    args = ap.parse_args()
    for name, flags in REGIMES.items():
        out = Path(args.out) / name
        code = run_command(["roc", *flags, "--trials", str(args.trials), "--samples", str(args.samples),
                            "--seed", str(args.seed), "--workers", str(args.workers), "--out", str(out)])
        if code:
            raise SystemExit(code)


if __name__ == "__main__":
    main()
