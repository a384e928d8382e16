"""Multirate filter algebra on the unit circle via Laurent polynomials.

The dilation z -> z**N turns composition into coefficient upsampling and
its adjoint into decimation, both exact on finite coefficient maps:

    upsample(f, N)     sum f_n z**(nN)
    downsample(f, N)   sum f_(nN) z**n    (the 1/N root average in
                       function form; pure extraction in coefficients)

Filter conditions are therefore checked without any grid: the bank
(m_1..m_N) satisfies the averaged convention when
downsample(conj_reflect(m_j) * m_k, N) equals delta_jk.  The unit-sum
convention differs by a factor N and is exposed through a flag.

Grid scans back the coefficient checks up: the banded matrix
M(z) = (1/sqrt N) (m_j(eps**k z)) is unitary on |z| = 1 exactly when the
coefficient residuals vanish, and column rotation under z -> eps z holds
identically.  Matrix Blaschke factors V (I - P + phi_a(z**N) P) supply
unitary-on-the-circle rational functions of the quotient variable z**N.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InputError
from . import jsonio

PRUNE_TOL = 1e-15


class LaurentPoly:
    """Finite Laurent polynomial sum c_k z**k with complex coefficients.

    Coefficients with modulus at most PRUNE_TOL are dropped on
    construction, so identities that cancel to rounding noise compare
    equal to the zero polynomial.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: dict[int, complex] | None = None):
        pruned = {}
        for k, c in (coeffs or {}).items():
            c = complex(c)
            if abs(c) > PRUNE_TOL:
                pruned[int(k)] = c
        self._coeffs = pruned

    # -- constructors ---------------------------------------------------------
    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls()

    @classmethod
    def one(cls) -> "LaurentPoly":
        return cls({0: 1.0})

    @classmethod
    def monomial(cls, degree: int, coeff: complex = 1.0) -> "LaurentPoly":
        return cls({degree: coeff})

    @classmethod
    def from_coefficients(cls, min_degree: int, coeffs: Sequence[complex]) -> "LaurentPoly":
        return cls({min_degree + i: c for i, c in enumerate(coeffs)})

    # -- inspection -----------------------------------------------------------
    def items(self) -> list[tuple[int, complex]]:
        return sorted(self._coeffs.items())

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def coefficient(self, degree: int) -> complex:
        return self._coeffs.get(degree, 0.0 + 0.0j)

    def coefficients(self) -> tuple[int, np.ndarray]:
        """Contiguous coefficient block (min_degree, values)."""
        if not self._coeffs:
            return 0, np.zeros(0, dtype=complex)
        lo = min(self._coeffs)
        hi = max(self._coeffs)
        out = np.zeros(hi - lo + 1, dtype=complex)
        for k, c in self._coeffs.items():
            out[k - lo] = c
        return lo, out

    def max_abs(self) -> float:
        if not self._coeffs:
            return 0.0
        return max(abs(c) for c in self._coeffs.values())

    def __repr__(self) -> str:
        if not self._coeffs:
            return "LaurentPoly(0)"
        terms = " + ".join(f"({c:.4g})z^{k}" for k, c in self.items())
        return f"LaurentPoly({terms})"

    # -- ring operations --------------------------------------------------------
    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self._coeffs)
        for k, c in other._coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) + (-self)

    def __neg__(self):
        return LaurentPoly({k: -c for k, c in self._coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return LaurentPoly({k: c * other for k, c in self._coeffs.items()})
        out: dict[int, complex] = {}
        for k1, c1 in self._coeffs.items():
            for k2, c2 in other._coeffs.items():
                out[k1 + k2] = out.get(k1 + k2, 0.0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def conj_reflect(self) -> "LaurentPoly":
        """Coefficientwise boundary conjugate: c_k z**k -> conj(c_k) z**-k."""
        return LaurentPoly({-k: np.conj(c) for k, c in self._coeffs.items()})

    def alternate(self) -> "LaurentPoly":
        """f(-z): flip the sign of odd coefficients."""
        return LaurentPoly({k: c * (-1) ** (k % 2) for k, c in self._coeffs.items()})

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for k, c in self._coeffs.items():
            out = out + c * z**k
        if out.ndim == 0:
            return complex(out)
        return out

    def distance(self, other: "LaurentPoly") -> float:
        return (self - other).max_abs()

    # -- multirate -----------------------------------------------------------
    def upsample(self, n: int) -> "LaurentPoly":
        if n < 2:
            raise InputError("band count must be >= 2")
        return LaurentPoly({k * n: c for k, c in self._coeffs.items()})

    def downsample(self, n: int) -> "LaurentPoly":
        if n < 2:
            raise InputError("band count must be >= 2")
        return LaurentPoly({k // n: c for k, c in self._coeffs.items() if k % n == 0})

    # -- files ---------------------------------------------------------------
    def to_json(self) -> dict:
        lo, coeffs = self.coefficients()
        return {"min_degree": lo, "coeffs": jsonio.encode_cvector(coeffs)}

    @classmethod
    def from_json(cls, obj: dict) -> "LaurentPoly":
        if not isinstance(obj, dict) or "coeffs" not in obj:
            raise InputError("Laurent JSON needs 'min_degree' and 'coeffs'")
        return cls.from_coefficients(
            int(obj.get("min_degree", 0)), jsonio.decode_cvector(obj["coeffs"])
        )


def _as_poly(x) -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, (int, float, complex)):
        return LaurentPoly({0: x})
    raise InputError(f"cannot coerce {type(x).__name__} to a Laurent polynomial")


def upsample(f: LaurentPoly, n: int) -> LaurentPoly:
    return f.upsample(n)


def downsample(f: LaurentPoly, n: int) -> LaurentPoly:
    return f.downsample(n)


def weighted_compose_circle(m: LaurentPoly, f: LaurentPoly, n: int) -> LaurentPoly:
    """m(z) f(z**N): coefficients (S_m f)_k = sum over u + N v = k of m_u f_v."""
    return m * f.upsample(n)


def unit_circle_grid(n_points: int) -> np.ndarray:
    if n_points < 1:
        raise InputError("grid needs at least one point")
    return np.exp(2j * np.pi * np.arange(n_points) / n_points)


@dataclass(frozen=True)
class CuntzReport:
    """Exact coefficient residuals of the two filter conditions."""

    gram: tuple[tuple[LaurentPoly, ...], ...]  # scaled decimated Gram minus delta
    orthonormality: float
    completeness: float
    convention: str

    def passed(self, tol: float = 0.0) -> bool:
        return self.orthonormality <= tol and self.completeness <= tol

    def to_json(self) -> dict:
        return {
            "orthonormality_residual": float(self.orthonormality),
            "completeness_residual": float(self.completeness),
            "convention": self.convention,
            "gram_residuals": [[q.to_json() for q in row] for row in self.gram],
        }


def _convention_scale(convention: str, n: int) -> float:
    if convention == "averaged":
        return 1.0
    if convention == "unit-sum":
        return float(n)
    raise InputError(f"unknown convention {convention!r}")


def cuntz_residuals(
    filters: Sequence[LaurentPoly], n: int, convention: str = "averaged"
) -> CuntzReport:
    """Filter-condition residuals computed exactly in coefficients.

    Orthonormality: scale * downsample(conj_reflect(m_j) m_k, N) - delta.
    Completeness: reconstruction of the monomial probes z**t, t < N, which
    generate all of L2 under the band structure.
    """
    filters = list(filters)
    scale = _convention_scale(convention, n)
    gram_rows = []
    worst = 0.0
    for j, mj in enumerate(filters):
        row = []
        for k, mk in enumerate(filters):
            q = scale * (mj.conj_reflect() * mk).downsample(n)
            if j == k:
                q = q - LaurentPoly.one()
            row.append(q)
            worst = max(worst, q.max_abs())
        gram_rows.append(tuple(row))
    comp = 0.0
    for t in range(n):
        probe = LaurentPoly.monomial(t)
        recon = LaurentPoly.zero()
        for m in filters:
            low = (m.conj_reflect() * probe).downsample(n)
            recon = recon + m * low.upsample(n)
        comp = max(comp, (scale * recon - probe).max_abs())
    return CuntzReport(tuple(gram_rows), worst, comp, convention)


def cqf_complete(m0: LaurentPoly, convention: str = "unit-sum") -> list[list[LaurentPoly]]:
    """Complete a low-pass filter to the 2 x 2 conjugate quadrature matrix.

    The high-pass partner has coefficients conj(c_n) (-1)**n z**(-n-1).
    The matrix is unitary on |z| = 1 (unit-sum convention) or sqrt(2)
    times a unitary (averaged) whenever m0 satisfies the corresponding
    power-sum condition.
    """
    _convention_scale(convention, 2)
    m1 = LaurentPoly(
        {-k - 1: np.conj(c) * (-1) ** (k % 2) for k, c in m0.items()}
    )
    row2_col2 = LaurentPoly({-k - 1: -np.conj(c) for k, c in m0.items()})
    return [[m0, m1], [m0.alternate(), row2_col2]]


def power_sum_residual(m0: LaurentPoly, convention: str = "unit-sum") -> float:
    """Exact residual of |m0(z)|**2 + |m0(-z)|**2 = 1 (or 2 when averaged)."""
    target = 1.0 if convention == "unit-sum" else 2.0
    _convention_scale(convention, 2)
    sq = m0.conj_reflect() * m0
    total = sq + sq.alternate() - LaurentPoly({0: target})
    return total.max_abs()


def matrix_grid_unitarity(
    evaluate: Callable[[complex], np.ndarray],
    n_grid: int = 256,
    scale: float = 1.0,
) -> float:
    """max over the grid of max-abs entries of M(z) M(z)* - scale * I."""
    worst = 0.0
    for z in unit_circle_grid(n_grid):
        m = np.asarray(evaluate(z), dtype=complex)
        worst = max(worst, float(np.max(np.abs(m @ m.conj().T - scale * np.eye(m.shape[0])))))
    return worst


class MultibandMatrix:
    """Evaluator for the banded matrix (1/sqrt N) (m_j(eps**k z))_j,k."""

    def __init__(self, filters: Sequence[LaurentPoly], n: int):
        if len(filters) != n:
            raise InputError(f"expected {n} filters, got {len(filters)}")
        self.filters = list(filters)
        self.n = n
        self._eps = np.exp(2j * np.pi / n)

    def eval(self, z: complex) -> np.ndarray:
        cols = [self._eps**k * z for k in range(self.n)]
        return np.array(
            [[m(c) for c in cols] for m in self.filters], dtype=complex
        ) / np.sqrt(self.n)

    __call__ = eval


def build_M_matrix(filters: Sequence[LaurentPoly], n: int) -> MultibandMatrix:
    return MultibandMatrix(filters, n)


def shift_relation_residual(matrix: MultibandMatrix, n_grid: int = 256) -> float:
    """max over the grid of |M(eps z) - M(z) Pi| with Pi the column rotation."""
    eps = np.exp(2j * np.pi / matrix.n)
    order = list(range(1, matrix.n)) + [0]
    worst = 0.0
    for z in unit_circle_grid(n_grid):
        lhs = matrix.eval(eps * z)
        rhs = matrix.eval(z)[:, order]
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


@dataclass(frozen=True)
class BlaschkeFactor:
    """One unitary-on-the-circle factor I - P + phi_a(z**power) P.

    ``a`` is the Moebius parameter with |a| != 1; ``a = None`` encodes the
    point at infinity, phi(w) = 1/w.  ``projection`` must be an orthogonal
    projection matrix.
    """

    projection: np.ndarray
    a: complex | None
    power: int

    def __post_init__(self):
        p = np.array(self.projection, dtype=complex)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise InputError("projection must be a square matrix")
        if np.max(np.abs(p - p.conj().T)) > 1e-13 or np.max(np.abs(p @ p - p)) > 1e-13:
            raise InputError("projection must satisfy P = P* = P^2")
        p.setflags(write=False)
        object.__setattr__(self, "projection", p)
        if self.a is not None:
            a = complex(self.a)
            if abs(abs(a) - 1.0) < 1e-12:
                raise InputError("Moebius parameter must satisfy |a| != 1")
            object.__setattr__(self, "a", a)
        if self.power < 2:
            raise InputError("factor power must be >= 2")

    @property
    def size(self) -> int:
        return self.projection.shape[0]

    def mobius(self, w: complex) -> complex:
        if self.a is None:
            return 1.0 / w
        return (w - self.a) / (1.0 - w * np.conj(self.a))

    def eval(self, z: complex) -> np.ndarray:
        w = complex(z) ** self.power
        eye = np.eye(self.size, dtype=complex)
        return eye - self.projection + self.mobius(w) * self.projection

    def to_json(self) -> dict:
        return {
            "a": "inf" if self.a is None else jsonio.encode_complex(self.a),
            "P": jsonio.encode_cmatrix(self.projection),
            "power": self.power,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BlaschkeFactor":
        a = obj.get("a", [0.0, 0.0])
        return cls(
            jsonio.decode_cmatrix(obj["P"]),
            None if a == "inf" else jsonio.decode_complex(a),
            int(obj.get("power", 2)),
        )


@dataclass(frozen=True)
class BlaschkeProduct:
    """Constant unitary times a product of Blaschke factors in z**N."""

    left_unitary: np.ndarray
    factors: tuple[BlaschkeFactor, ...]

    def __post_init__(self):
        v = np.array(self.left_unitary, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InputError("left unitary must be a square matrix")
        if np.max(np.abs(v.conj().T @ v - np.eye(v.shape[0]))) > 1e-12:
            raise InputError("left factor must be unitary")
        v.setflags(write=False)
        object.__setattr__(self, "left_unitary", v)
        object.__setattr__(self, "factors", tuple(self.factors))
        for f in self.factors:
            if f.size != v.shape[0]:
                raise InputError("factor size differs from the left unitary")

    @property
    def size(self) -> int:
        return self.left_unitary.shape[0]

    def eval(self, z: complex) -> np.ndarray:
        out = np.array(self.left_unitary)
        for f in self.factors:
            out = out @ f.eval(z)
        return out

    __call__ = eval

    def unitarity_residual(self, n_grid: int = 256) -> float:
        return matrix_grid_unitarity(self.eval, n_grid)

    def periodicity_residual(self, band: int, n_grid: int = 256) -> float:
        """max |U(eps z) - U(z)|; zero up to rounding since only z**N enters."""
        eps = np.exp(2j * np.pi / band)
        worst = 0.0
        for z in unit_circle_grid(n_grid):
            worst = max(worst, float(np.max(np.abs(self.eval(eps * z) - self.eval(z)))))
        return worst

    def to_json(self) -> dict:
        return {
            "V": jsonio.encode_cmatrix(self.left_unitary),
            "factors": [f.to_json() for f in self.factors],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BlaschkeProduct":
        return cls(
            jsonio.decode_cmatrix(obj["V"]),
            tuple(BlaschkeFactor.from_json(f) for f in obj.get("factors", [])),
        )


def blaschke_product(
    factors: Sequence[BlaschkeFactor], left_unitary: np.ndarray | None = None
) -> BlaschkeProduct:
    factors = tuple(factors)
    if left_unitary is None:
        if not factors:
            raise InputError("an empty product needs an explicit left unitary")
        left_unitary = np.eye(factors[0].size)
    return BlaschkeProduct(left_unitary, factors)


@dataclass(frozen=True)
class LoopActionResult:
    """A loop-acted evaluator plus the unitarity diagnosis of the acting map."""

    evaluate: Callable[[complex], np.ndarray]
    g_unitarity_residual: float
    non_unitary_warning: bool

    def eval(self, z: complex) -> np.ndarray:
        return self.evaluate(z)

    __call__ = eval


def loop_action_circle(
    g: Callable[[complex], np.ndarray],
    u: Callable[[complex], np.ndarray],
    band: int,
    n_grid: int = 256,
    tol: float = 1e-12,
) -> LoopActionResult:
    """Act by the quotient-variable map: z -> G(z**N) U(z).

    G is sampled at the grid's N-th powers; exceeding ``tol`` in unitarity
    only sets a warning flag, the action itself is still returned.
    """
    resid = 0.0
    for z in unit_circle_grid(n_grid):
        w = z**band
        m = np.asarray(g(w), dtype=complex)
        resid = max(resid, float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0])))))

    def evaluate(z: complex) -> np.ndarray:
        return np.asarray(g(complex(z) ** band), dtype=complex) @ np.asarray(
            u(z), dtype=complex
        )

    return LoopActionResult(evaluate, resid, resid > tol)


def haar_pair() -> list[LaurentPoly]:
    """The averaged-convention prototype pair ((1+z)/sqrt2, (1-z)/sqrt2)."""
    s = 1.0 / np.sqrt(2.0)
    return [
        LaurentPoly.from_coefficients(0, [s, s]),
        LaurentPoly.from_coefficients(0, [s, -s]),
    ]
