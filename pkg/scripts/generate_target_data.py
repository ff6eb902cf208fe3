"""Regenerate the shipped level-512 target expansions.

Runs the kink-aware composite Gauss-Legendre analysis at two panel
densities, requires agreement to 1e-13, and writes one CSV per basis
family into src/chaos_descent/data/.
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from chaos_descent.basis import FAMILIES
from chaos_descent.target import (BENCHMARK_LEVEL, _data_filename,
                                  piecewise_gauss_analyze, target_value)

OUT_DIR = pathlib.Path(__file__).resolve().parents[1] / \
    "src" / "chaos_descent" / "data"


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for family in FAMILIES:
        coarse = piecewise_gauss_analyze(
            target_value, BENCHMARK_LEVEL, family, panels=2048)
        fine = piecewise_gauss_analyze(
            target_value, BENCHMARK_LEVEL, family, panels=3072)
        gap = float(np.max(np.abs(coarse.coeffs - fine.coeffs)))
        if gap > 1e-13:
            raise SystemExit(f"{family}: refinement gap {gap:.3e} too large")
        path = OUT_DIR / _data_filename(family)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("index,coefficient\n")
            for i, c in enumerate(fine.coeffs):
                fh.write(f"{i},{c:.17g}\n")
        print(f"{path.name}: {BENCHMARK_LEVEL + 1} rows, "
              f"refinement gap {gap:.2e}")


if __name__ == "__main__":
    main()
