"""Run every acceptance criterion, print the table, write the deterministic summary."""
import argparse
import sys

from hypb import acceptance, io


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--only", type=int)
    ap.add_argument("--out", default="reproduce.json")
    args = ap.parse_args()
    results, times = acceptance.reproduce_all(args.only)
    print(acceptance.format_table(results, times))
    print(f"total {sum(times.values()):.2f}s")
    io.write_atomic(args.out, acceptance.summary_json(results))
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
