"""Walk a random orbit of the unitary loop action on filter banks.

Starting from the indicator bank, repeatedly act by random pointwise
unitary matrix fields, verify every bank on the orbit, and close the loop
by recovering each step's connecting unitary.

Usage: python scripts/loop_group_orbit.py [N] [steps] [seed]
"""

import sys

import numpy as np

from wavelab.code_space import CylinderFn, IfsSpec, sup_distance
from wavelab.ifs_filters import (
    MatrixField,
    apply_loop_group,
    build_indicator,
    connecting_unitary,
    verify_filter,
)


def random_field(rng, spec, depth=1):
    size = spec.N**depth
    entries = np.empty((spec.N, spec.N, size), dtype=complex)
    for w in range(size):
        a = rng.normal(size=(spec.N, spec.N)) + 1j * rng.normal(size=(spec.N, spec.N))
        q, r = np.linalg.qr(a)
        entries[:, :, w] = q * (np.diag(r) / np.abs(np.diag(r)))
    return MatrixField(
        spec,
        tuple(
            tuple(CylinderFn(spec, depth, entries[j, k]) for k in range(spec.N))
            for j in range(spec.N)
        ),
    )


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    steps = int(sys.argv[2]) if len(sys.argv) > 2 else 6
    seed = int(sys.argv[3]) if len(sys.argv) > 3 else 0
    rng = np.random.default_rng(seed)
    spec = IfsSpec(n)
    bank = build_indicator(spec)
    print(f"orbit over N={n}, {steps} random actions, seed={seed}")
    for step in range(1, steps + 1):
        field = random_field(rng, spec)
        acted = apply_loop_group(bank, field)
        report = verify_filter(acted, probe_depth=3, tol=1e-11)
        recovered = connecting_unitary(bank, acted)
        recovery = max(
            sup_distance(recovered.entries[j][k], field.entries[j][k])
            for j in range(n)
            for k in range(n)
        )
        print(
            f"step {step}: verified={report.passed} "
            f"orthonormality={report.orthonormality_residual:.2e} "
            f"completeness={report.completeness:.2e} "
            f"unitary_recovery={recovery:.2e}"
        )
        bank = acted


if __name__ == "__main__":
    main()
