#!/usr/bin/env python3
"""Build the benchmark CSVs under data/uci/ from locally available sources.

Sources:
  * the `keel-ds` wheel (KEEL repository copies of the UCI sets)
  * scikit-learn's bundled copy of the Wisconsin diagnostic breast cancer set

Output files have no header row and carry the class label in the last column.

  python3 tools/prepare_datasets.py               # pip-downloads keel-ds
  python3 tools/prepare_datasets.py --keel-wheel path/to/keel_ds-*.whl
"""

import argparse
import csv
import os
import pathlib
import subprocess
import sys
import tempfile
import zipfile

KEEL_FILES = {
    # output name: (member inside the wheel, expected rows, expected features)
    "pima": ("keel_ds/data/balanced/raw/pima.dat", 768, 8),
    "haberman": ("keel_ds/data/imbalanced/raw/haberman.dat", 306, 3),
    "liver": ("keel_ds/data/balanced/raw/bupa.dat", 345, 6),
    "cancer": ("keel_ds/data/balanced/raw/wisconsin.dat", 683, 9),
    # The KEEL copy of New-thyroid only ships "hyper vs rest" (both binarized
    # files mark the same 35 rows), so this set is binary.
    "new_thyroid": ("keel_ds/data/imbalanced/raw/new-thyroid1.dat", 215, 5),
}


def parse_keel(text):
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        rows.append([cell.strip() for cell in line.split(",")])
    return rows


def fetch_keel_wheel(workdir):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "keel-ds==0.2.5",
         "-d", workdir],
        check=True)
    wheels = sorted(pathlib.Path(workdir).glob("keel_ds-*.whl"))
    if not wheels:
        raise SystemExit("keel-ds wheel not found after download")
    return wheels[0]


def write_rows(path, rows):
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def sklearn_breast_cancer():
    import sklearn.datasets
    base = pathlib.Path(sklearn.datasets.__file__).parent / "data"
    with open(base / "breast_cancer.csv") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        names = header[2:]
        rows = []
        for r in reader:
            rows.append(r[:-1] + [names[int(r[-1])]])
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--keel-wheel", help="path to an already downloaded keel_ds wheel")
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parents[1] / "data" / "uci"))
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        wheel = pathlib.Path(args.keel_wheel) if args.keel_wheel else fetch_keel_wheel(tmp)
        with zipfile.ZipFile(wheel) as zf:
            for name, (member, n_rows, n_feat) in KEEL_FILES.items():
                rows = parse_keel(zf.read(member).decode("utf-8"))
                if len(rows) != n_rows or any(len(r) != n_feat + 1 for r in rows):
                    raise SystemExit(f"{name}: unexpected shape in {member}")
                write_rows(out / f"{name}.csv", rows)
                print(f"{name}: {len(rows)} rows, {n_feat} features")

    rows = sklearn_breast_cancer()
    if len(rows) != 569:
        raise SystemExit("breast cancer diagnostic: unexpected row count")
    write_rows(out / "breast_cancer_diagnostic.csv", rows)
    print(f"breast_cancer_diagnostic: {len(rows)} rows, 30 features")
    return 0


if __name__ == "__main__":
    sys.exit(main())
