import argparse
import logging
import sys
from pathlib import Path

# Ensure project root on path
ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from services.datasets import build_paired_manifest, write_manifest  # noqa: E402
from services.datasets.synthetic import write_paired_corpus  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description="Generate a paired sharp/blurred synthetic corpus")
    parser.add_argument("out", type=Path)
    parser.add_argument("--pairs", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--size", type=int, default=200)
    parser.add_argument("--cell", type=int, default=40)
    parser.add_argument("--sigma", type=float, default=2.5)
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO)
    high, low = write_paired_corpus(args.out, args.pairs, args.seed, size=args.size, cell=args.cell, sigma=args.sigma)
    manifest = write_manifest(build_paired_manifest(high, low), args.out / "manifest.jsonl")
    print(f"✅ {args.pairs} pairs written, manifest at {manifest}")


if __name__ == "__main__":
    main()
