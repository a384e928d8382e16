"""Build Haar and D4 scaling/detail profiles and dump them as CSV.

Usage: python scripts/cascade_profiles.py [outdir]
"""

import csv
import sys
from pathlib import Path

from wavelab.classic_mra import (
    cascade,
    d4_taps,
    detail_taps,
    haar_taps,
    shift_orthonormality,
    wavelet_detail,
)


def dump(path: Path, resolution: int, samples) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "value"])
        for i, v in enumerate(samples):
            writer.writerow([f"{i / resolution:.10g}", f"{v.real:.17g}"])


def main() -> None:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("cascade_out")
    outdir.mkdir(parents=True, exist_ok=True)
    for name, taps, iters in (("haar", haar_taps(), 5), ("d4", d4_taps(), 40)):
        profile = cascade(taps, 2, iters, 1024, tol=1e-8)
        psi = wavelet_detail(profile, detail_taps(taps))
        _, gram_dev = shift_orthonormality(profile)
        dump(outdir / f"{name}_phi.csv", 1024, profile.samples)
        dump(outdir / f"{name}_psi.csv", 1024, psi)
        print(
            f"{name}: iterations={profile.iterations} "
            f"last_sup_diff={profile.last_sup_diff:.3e} "
            f"integral={profile.integral.real:.12f} gram_deviation={gram_dev:.3e}"
        )
    print(f"profiles written to {outdir}/")


if __name__ == "__main__":
    main()
