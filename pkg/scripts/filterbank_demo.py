"""Push a chirp through the two-band pipeline and report reconstruction.

Usage: python scripts/filterbank_demo.py [length]
"""

import sys

import numpy as np

from wavelab.classic_mra import d4_taps, detail_taps, filterbank_roundtrip, haar_taps


def main() -> None:
    length = int(sys.argv[1]) if len(sys.argv) > 1 else 1024
    t = np.arange(length) / length
    signal = np.exp(2j * np.pi * (4 * t + 24 * t**2)) * np.hanning(length)
    for name, taps in (("haar", haar_taps()), ("d4", d4_taps())):
        banks = [taps, detail_taps(taps)]
        result = filterbank_roundtrip(signal, banks, banks, 2)
        low, high = result.subbands
        print(
            f"{name}: pr_error={result.pr_error:.3e} "
            f"energy_error={result.energy_error:.3e} "
            f"low_band_energy={np.sum(np.abs(low) ** 2):.4f} "
            f"high_band_energy={np.sum(np.abs(high) ** 2):.4f}"
        )


if __name__ == "__main__":
    main()
