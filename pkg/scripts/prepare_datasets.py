#!/usr/bin/env python3
"""Convert the raw UCI benchmark files into the canonical CSVs under data/.

Inputs (download them per `cbpt datasets`):
  glass.data             Glass identification, comma separated, 11 columns
  sat.trn / sat.tst      Statlog Landsat satellite, space separated, 37 columns

Usage:
  python scripts/prepare_datasets.py --glass glass.data --out-dir data
  python scripts/prepare_datasets.py --sat-trn sat.trn --sat-tst sat.tst --out-dir data
"""

import argparse
import csv
from pathlib import Path

GLASS_FEATURES = ["RI", "Na", "Mg", "Al", "Si", "K", "Ca", "Ba", "Fe"]


def convert_glass(src, dst):
    rows = []
    with open(src) as fh:
        for line in fh:
            parts = line.strip().split(",")
            if not parts or parts == [""]:
                continue
            if len(parts) != 11:
                raise SystemExit(f"{src}: expected 11 columns, got {len(parts)}")
            rows.append(parts[1:])  # drop the running row id
    with open(dst, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GLASS_FEATURES + ["class"])
        writer.writerows(rows)
    print(f"wrote {dst} ({len(rows)} rows)")


def convert_statlog(trn, tst, dst):
    rows = []
    for src in (trn, tst):
        with open(src) as fh:
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                if len(parts) != 37:
                    raise SystemExit(f"{src}: expected 37 columns, got {len(parts)}")
                rows.append(parts)
    with open(dst, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(1, 37)] + ["class"])
        writer.writerows(rows)
    print(f"wrote {dst} ({len(rows)} rows)")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--glass", type=Path, help="path to glass.data")
    parser.add_argument("--sat-trn", type=Path, help="path to sat.trn")
    parser.add_argument("--sat-tst", type=Path, help="path to sat.tst")
    parser.add_argument("--out-dir", type=Path, default=Path("data"))
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    did_something = False
    if args.glass:
        convert_glass(args.glass, args.out_dir / "glass.csv")
        did_something = True
    if args.sat_trn or args.sat_tst:
        if not (args.sat_trn and args.sat_tst):
            raise SystemExit("--sat-trn and --sat-tst must be given together")
        convert_statlog(args.sat_trn, args.sat_tst, args.out_dir / "statlog.csv")
        did_something = True
    if not did_something:
        parser.error("nothing to do; pass --glass and/or --sat-trn/--sat-tst")


if __name__ == "__main__":
    main()
