"""Positive-definite kernel conditions on finite sigma-closed point sets.

A finite point set with a self-map stands in for the phase space; kernels
become Hermitian matrices and every functional condition a finite matrix
identity:

  contraction_check     smallest eigenvalue of K - m conj(m)' K(s., s.),
                        nonnegative exactly when weighted composition by
                        (m, sigma) contracts the kernel space
  refinement_residual   K = (sum_n m_n(x) conj(m_n(y))) K(sigma x, sigma y)
  product_kernel        truncated product of filter Gram sums along orbits
  preimage_orthogonality  branch-averaged Gram of the filters at each fiber

Grids should be closed under the map; ``squaring_chain`` builds the
canonical example for z -> z**2 (a geometric chain plus the fixed point,
with the last hop to 0 accurate to the square of the smallest modulus).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from . import jsonio

HERMITIAN_TOL = 1e-13
PSD_EIG_TOL = -1e-10


@dataclass(frozen=True)
class FinitePointSet:
    """Point labels with coordinates plus the index form of the self-map."""

    points: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points)
        if pts.ndim not in (1, 2) or pts.shape[0] == 0:
            raise InputError("points must be a nonempty vector or matrix")
        sig = np.array(self.sigma, dtype=int)
        if sig.shape != (pts.shape[0],):
            raise InputError("sigma must give one target index per point")
        if np.any(sig < 0) or np.any(sig >= pts.shape[0]):
            raise InputError("sigma indices out of range")
        pts.setflags(write=False)
        sig.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "sigma", sig)
        pre: list[list[int]] = [[] for _ in range(pts.shape[0])]
        for y, x in enumerate(sig):
            pre[x].append(y)
        object.__setattr__(
            self, "_preimages", tuple(tuple(p) for p in pre)
        )

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def preimages(self) -> tuple[tuple[int, ...], ...]:
        return self._preimages

    def preimage_counts(self) -> np.ndarray:
        return np.array([len(p) for p in self._preimages])

    def orbits_reach_fixed_point(self) -> bool:
        sig = self.sigma
        for start in range(self.size):
            i = int(start)
            for _ in range(self.size + 1):
                if sig[i] == i:
                    break
                i = int(sig[i])
            else:
                return False
            if sig[i] != i:
                return False
        return True

    @classmethod
    def squaring_chain(cls, z0: complex, length: int) -> "FinitePointSet":
        """Chain z0, z0**2, z0**4, ... plus the fixed point 0, sigma-closed.

        The last chain element maps to 0; for |z0| < 1 and a dozen points
        the closure error |z_last|**2 is far below double rounding.
        """
        if length < 2:
            raise InputError("need at least the chain head and the fixed point")
        if abs(z0) >= 1.0 or z0 == 0:
            raise InputError("chain head must satisfy 0 < |z0| < 1")
        pts = []
        z = complex(z0)
        for _ in range(length - 1):
            pts.append(z)
            z = z * z
        pts.append(0.0 + 0.0j)
        sigma = list(range(1, length)) + [length - 1]
        return cls(np.array(pts, dtype=complex), np.array(sigma))

    def to_json(self) -> dict:
        pts = self.points
        if pts.ndim == 1:
            encoded = jsonio.encode_cvector(pts)
        else:
            encoded = [[float(x) for x in row] for row in pts]
        return {"points": encoded, "sigma": [int(i) for i in self.sigma]}

    @classmethod
    def from_json(cls, obj: dict) -> "FinitePointSet":
        raw = obj.get("points")
        if not isinstance(raw, list) or not raw:
            raise InputError("point set JSON needs a nonempty 'points' list")
        pts = jsonio.decode_cvector(raw)
        return cls(pts, np.array(obj.get("sigma", []), dtype=int))


@dataclass(frozen=True)
class KernelMatrix:
    """A Hermitian kernel over the point set, with its comparison tolerance."""

    matrix: np.ndarray
    tol: float = HERMITIAN_TOL

    def __post_init__(self):
        k = np.array(self.matrix, dtype=complex)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise InputError("kernel must be a square matrix")
        if np.max(np.abs(k - k.conj().T)) > self.tol:
            raise InputError("kernel must be Hermitian")
        k.setflags(write=False)
        object.__setattr__(self, "matrix", k)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def min_eigenvalue(self) -> float:
        herm = (self.matrix + self.matrix.conj().T) / 2.0
        return float(np.min(np.linalg.eigvalsh(herm)))

    def is_positive(self, eig_tol: float = PSD_EIG_TOL) -> bool:
        return self.min_eigenvalue() >= eig_tol

    def to_json(self) -> dict:
        return {"matrix": jsonio.encode_cmatrix(self.matrix)}

    @classmethod
    def from_json(cls, obj: dict) -> "KernelMatrix":
        return cls(jsonio.decode_cmatrix(obj["matrix"]))


def _filter_values(m_list: Sequence[Sequence[complex]], size: int) -> list[np.ndarray]:
    out = []
    for m in m_list:
        v = np.asarray(m, dtype=complex).ravel()
        if v.shape != (size,):
            raise InputError(f"filter values must have length {size}")
        out.append(v)
    if not out:
        raise InputError("need at least one filter")
    return out


def contraction_check(
    kernel: KernelMatrix, m: Sequence[complex], pset: FinitePointSet
) -> float:
    """Smallest eigenvalue of K(x,y) - m(x) conj(m(y)) K(sigma x, sigma y).

    Nonnegative (within eigensolver tolerance) exactly when weighted
    composition by (m, sigma) is a contraction of the kernel space.
    """
    (mv,) = _filter_values([m], pset.size)
    k = kernel.matrix
    pulled = k[np.ix_(pset.sigma, pset.sigma)]
    diff = k - np.outer(mv, np.conj(mv)) * pulled
    return KernelMatrix((diff + diff.conj().T) / 2.0, tol=np.inf).min_eigenvalue()


def refinement_residual(
    kernel: KernelMatrix, m_list: Sequence[Sequence[complex]], pset: FinitePointSet
) -> float:
    """max |K(x,y) - (sum_n m_n(x) conj(m_n(y))) K(sigma x, sigma y)|."""
    values = _filter_values(m_list, pset.size)
    gram = np.zeros((pset.size, pset.size), dtype=complex)
    for v in values:
        gram += np.outer(v, np.conj(v))
    pulled = kernel.matrix[np.ix_(pset.sigma, pset.sigma)]
    return float(np.max(np.abs(kernel.matrix - gram * pulled)))


@dataclass(frozen=True)
class ProductKernelResult:
    kernel: KernelMatrix
    tail_bound: float
    orbits_reach_fixed_point: bool


def product_kernel(
    m_list: Sequence[Sequence[complex]], pset: FinitePointSet, terms: int
) -> ProductKernelResult:
    """Truncated product of filter Gram sums along the orbit of the map.

    Factor k evaluates the Gram sum at sigma**k of each point, k = 0 ..
    terms - 1; zero terms yield the constant kernel 1.  The tail bound is
    the entrywise change contributed by the last factor.  When some orbit
    never settles on a fixed point the truncation cannot stabilize; that
    is reported through the flag, never hidden.
    """
    if terms < 0:
        raise InputError("term count must be >= 0")
    values = _filter_values(m_list, pset.size)
    size = pset.size
    out = np.ones((size, size), dtype=complex)
    prev = out
    idx = np.arange(size)
    for _ in range(terms):
        gram = np.zeros((size, size), dtype=complex)
        for v in values:
            pulled = v[idx]
            gram += np.outer(pulled, np.conj(pulled))
        prev = out
        out = out * gram
        idx = pset.sigma[idx]
    tail = float(np.max(np.abs(out - prev))) if terms > 0 else 0.0
    return ProductKernelResult(
        KernelMatrix(out, tol=1e-10), tail, pset.orbits_reach_fixed_point()
    )


def preimage_orthogonality(
    m_list: Sequence[Sequence[complex]], pset: FinitePointSet
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Residual matrix of the fiber-averaged Gram identity.

    Entry (i, j) holds the worst |(1/n(x)) sum_{sigma(y)=x} m_i(y)
    conj(m_j(y)) - delta_ij| over points x with nonempty fibers; points
    without preimages are skipped and reported.
    """
    values = _filter_values(m_list, pset.size)
    n_filters = len(values)
    residual = np.zeros((n_filters, n_filters))
    skipped = []
    for x, fiber in enumerate(pset.preimages):
        if not fiber:
            skipped.append(x)
            continue
        fiber = np.array(fiber)
        for i in range(n_filters):
            for j in range(n_filters):
                avg = np.sum(values[i][fiber] * np.conj(values[j][fiber])) / fiber.shape[0]
                target = 1.0 if i == j else 0.0
                residual[i, j] = max(residual[i, j], abs(avg - target))
    return residual, tuple(skipped)


def discrete_cuntz_residual(
    m_list: Sequence[Sequence[complex]], pset: FinitePointSet
) -> float:
    """max |A_i T_j - delta_ij I| for the finite weighted-composition pair.

    T_j f = m_j (f o sigma); A_i is the fiber-average adjoint candidate
    carrying conj(m_i)/n(x).  Their products collapse to the preimage
    Gram identity, so the residual vanishes together with it.  Rows of
    points without preimages are outside the fiber system and skipped.
    """
    values = _filter_values(m_list, pset.size)
    size = pset.size
    t_mats = []
    for v in values:
        t = np.zeros((size, size), dtype=complex)
        t[np.arange(size), pset.sigma] = v
        t_mats.append(t)
    a_mats = []
    counts = pset.preimage_counts()
    for v in values:
        a = np.zeros((size, size), dtype=complex)
        for x, fiber in enumerate(pset.preimages):
            for y in fiber:
                a[x, y] = np.conj(v[y]) / counts[x]
        a_mats.append(a)
    rows = np.array([x for x, fiber in enumerate(pset.preimages) if fiber])
    if rows.size == 0:
        raise InputError("no point has preimages; the fiber system is empty")
    worst = 0.0
    eye = np.eye(size)
    for i, a in enumerate(a_mats):
        for j, t in enumerate(t_mats):
            target = eye if i == j else np.zeros((size, size))
            diff = (a @ t - target)[rows]
            worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def szego_kernel(points: Sequence[complex]) -> KernelMatrix:
    """K(z, w) = 1 / (1 - z conj(w)) on points inside the unit disk."""
    z = np.asarray(points, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise InputError("Szego kernel needs points strictly inside the disk")
    return KernelMatrix(1.0 / (1.0 - np.outer(z, np.conj(z))))
