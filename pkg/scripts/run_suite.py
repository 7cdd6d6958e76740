"""Run every experiment into a directory, then re-derive each verdict from the CSVs alone."""
import argparse
import json
import sys
from pathlib import Path

from parahyp import harness
from parahyp.cli import main as cli_main
from parahyp.storage import read_csv


def rejudge(out: Path) -> dict[str, bool]:
    verdicts = {}
    for name in harness.EXPERIMENT_NAMES:
        summary = json.loads((out / f"{name}.json").read_text())
        tables = {}
        for path in out.glob(f"{name}*.csv"):
            table = path.stem[len(name) + 1:] or "series"
            tables[table] = read_csv(path)
        _, ok = harness.judge(name, tables, summary["tolerance"])
        verdicts[name] = ok
    return verdicts


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="suite_out")
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    code = cli_main(["suite", "--all", "--seed", str(args.seed), "--out", args.out])
    for name, ok in rejudge(Path(args.out)).items():
        print(f"re-derived {name}: {'PASS' if ok else 'FAIL'}")
    sys.exit(code)


if __name__ == "__main__":
    main()
