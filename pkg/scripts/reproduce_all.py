"""Regenerate every CSV/JSON data set under out/ from data/configs.

Usage:
  python -m scripts.reproduce_all                  # Run all missing experiments
  python -m scripts.reproduce_all --only linear    # Names containing "linear"
  python -m scripts.reproduce_all --threads 4      # Parallel sweeps
  python -m scripts.reproduce_all --force          # Overwrite existing outputs
"""

import argparse
import sys
import time
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from pite_lab.main import main as pite_main

CONFIGS = Path("data/configs")
OUT_DIR = Path("out")

# (name, command, config, extra args)
EXPERIMENTS = [
    ("heisenberg_dos", "spectrum", "heisenberg_dos.json", []),
    ("double_well_dos", "spectrum", "double_well_spectrum.json", []),
    ("linear_dtau_max", "sweep", "linear_dtau_max.json", ["--window", "0.25pi"]),
    ("exponential_dtau_max_k025", "sweep", "exponential_dtau_max_k025.json", ["--window", "0.25pi"]),
    ("exponential_dtau_max_k05", "sweep", "exponential_dtau_max_k05.json", ["--window", "0.25pi"]),
    ("exponential_dtau_max_k1", "sweep", "exponential_dtau_max_k1.json", ["--window", "0.25pi"]),
    ("linear_steps", "sweep", "linear_steps.json", []),
    ("linear_dtau_min", "sweep", "linear_dtau_min.json", []),
    ("alpha_shift_k20", "sweep", "alpha_shift_k20.json", []),
    ("alpha_shift_k40", "sweep", "alpha_shift_k40.json", []),
    ("alpha_shift_k20_samples", "sample", "alpha_shift_k20.json", []),
    ("double_well_linear", "sweep", "double_well_linear.json", ["--window", "0.25pi"]),
    ("double_well_exponential", "sweep", "double_well_exponential.json", ["--window", "0.25pi"]),
    ("bounds_k025", "bounds", "bounds.json", ["--kappa-bar", "0.25"]),
    ("bounds_k05", "bounds", "bounds.json", ["--kappa-bar", "0.5"]),
    ("bounds_k1", "bounds", "bounds.json", ["--kappa-bar", "1"]),
    ("circuit_check", "circuit-check", "circuit_check.json", []),
    ("cost", "cost", "bounds.json", []),
]


def output_for(name: str, command: str) -> Path:
    ext = ".json" if command in ("circuit-check", "cost") else ".csv"
    return OUT_DIR / f"{name}{ext}"


def run_experiment(name: str, command: str, config: str, extra: list[str], threads: int) -> int:
    out = output_for(name, command)
    argv = [command, "--config", str(CONFIGS / config), "--output", str(out), *extra]
    if command in ("sweep", "sample"):
        argv += ["--threads", str(threads)]
    print(f"  {name} ({command})...", end=" ", flush=True)
    start = time.time()
    status = pite_main(argv)
    print(f"{'OK' if status == 0 else f'FAILED (exit {status})'} in {time.time() - start:.1f}s")
    return status


def main():
    parser = argparse.ArgumentParser(description="Reproduce all data sets")
    parser.add_argument(
        "--only", nargs="+",
        help="Only run experiments whose name contains one of these substrings"
    )
    parser.add_argument("--threads", type=int, default=1, help="Worker threads for sweeps")
    parser.add_argument(
        "--force", action="store_true",
        help="Rerun even if the output file already exists"
    )
    args = parser.parse_args()
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    selected = [
        e for e in EXPERIMENTS
        if not args.only or any(key in e[0] for key in args.only)
    ]
    if not selected:
        print("No matching experiments")
        sys.exit(1)

    total = len(selected)
    skipped = 0
    failed = []
    for name, command, config, extra in selected:
        if output_for(name, command).exists() and not args.force:
            print(f"  Skipping {name} (already exists)")
            skipped += 1
            continue
        if run_experiment(name, command, config, extra, args.threads) != 0:
            failed.append(name)

    print(f"\nDone: {total - skipped - len(failed)} run, {skipped} skipped, {len(failed)} failed")
    if failed:
        for name in failed:
            print(f"  - {name}")
        sys.exit(1)


if __name__ == "__main__":
    main()
