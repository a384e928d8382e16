"""Concrete invariant measures: the logistic map and affine integer fractals.

The quadratic map 4x(1-x) preserves the arcsine density on [0, 1]; its
moments are the scaled central binomials C(2k, k) / 4**k, reproduced
exactly (for polynomial degree < 2n) by the n-point Chebyshev rule with
equal weights.  The branch-average operator and the integral form of the
shift adjoint are exposed side by side as a three-way diagnostic; the
operation reports all pairings and asserts nothing about which candidate
is the adjoint.

Affine fractals are attractors of tau_n(x) = A^{-1}(x + b_n) for an
expanding integer matrix A and digit vectors b_n.  Truncated digit sums
give the code-to-point map; a seeded chaos game samples the invariant
measure, whose exact first and second moments follow from the affine
self-similarity identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from . import jsonio

CHAOS_BURN_IN = 64


@dataclass(frozen=True)
class ChebyshevRule:
    """Equal-weight quadrature exact for the arcsine measure on [0, 1]."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError("node count must be >= 1")

    def nodes(self) -> np.ndarray:
        j = np.arange(1, self.n + 1)
        return (1.0 - np.cos((2 * j - 1) * np.pi / (2 * self.n))) / 2.0

    def integrate_values(self, values) -> complex:
        values = np.asarray(values)
        if values.shape[-1] != self.n:
            raise InputError(f"expected {self.n} values")
        return complex(values.mean(axis=-1))

    def integrate(self, fn) -> complex:
        return self.integrate_values(fn(self.nodes()))


def arcsine_moment(k: int) -> float:
    """int x**k darcsine = C(2k, k) / 4**k."""
    if k < 0:
        raise InputError("moment order must be >= 0")
    return math.comb(2 * k, k) / 4.0**k


def logistic_invariance(max_degree: int = 8, nodes: int = 64) -> float:
    """max_k |int (4x(1-x))**k dmu - int x**k dmu| over k <= max_degree."""
    if nodes <= max_degree:
        raise InputError("need more quadrature nodes than the top degree")
    rule = ChebyshevRule(nodes)
    x = rule.nodes()
    s = 4.0 * x * (1.0 - x)
    worst = 0.0
    for k in range(max_degree + 1):
        worst = max(worst, abs(np.mean(s**k) - np.mean(x**k)))
    return float(worst)


@dataclass(frozen=True)
class AdjointComparison:
    """Three pairings, reported verbatim; interpretation is the caller's."""

    branch_average: complex  # <(f o tau_+ + f o tau_-)/2, g>
    composition: complex  # <f, g o sigma>
    integral_adjoint: complex  # <averaged-primitive form of f, g>

    def to_json(self) -> dict:
        return {
            "branch_average_pairing": jsonio.encode_complex(self.branch_average),
            "composition_pairing": jsonio.encode_complex(self.composition),
            "integral_adjoint_pairing": jsonio.encode_complex(self.integral_adjoint),
        }


def _polyval(coeffs: Sequence[complex], x: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(x, np.asarray(coeffs, dtype=complex))


def _integral_adjoint_coeffs(coeffs: Sequence[complex]) -> np.ndarray:
    # (1/2) [ (1/x) int_0^x f + (1/(1-x)) int_x^1 f ], both closed-form
    # polynomials: term a_k x**k contributes a_k x**k/(k+1) to the first
    # part, and the second is (F(1) - F(x)) / (1 - x) by exact division.
    a = np.asarray(coeffs, dtype=complex)
    part1 = a / (np.arange(a.shape[0]) + 1.0)
    primitive = np.concatenate(([0.0], a / (np.arange(a.shape[0]) + 1.0)))
    g = -primitive
    g[0] += primitive.sum()  # F(1) - F(x)
    quotient, remainder = np.polynomial.polynomial.polydiv(g, [1.0, -1.0])
    if np.max(np.abs(remainder)) > 1e-10:
        raise InputError("division by (1 - x) left an unexpected remainder")
    out = np.zeros(max(part1.shape[0], quotient.shape[0]), dtype=complex)
    out[: part1.shape[0]] += part1
    out[: quotient.shape[0]] += quotient
    return out / 2.0


def logistic_adjoint_compare(
    f_coeffs: Sequence[complex], g_coeffs: Sequence[complex], nodes: int | None = None
) -> AdjointComparison:
    """Pair three adjoint candidates against g under the arcsine measure.

    All integrands are polynomials, so the quadrature below is exact; the
    branch averages use tau_pm(x) = (1 +- sqrt(1 - x)) / 2 pointwise.
    """
    f = np.asarray(f_coeffs, dtype=complex)
    g = np.asarray(g_coeffs, dtype=complex)
    if nodes is None:
        nodes = f.shape[0] + 2 * g.shape[0] + 4
    rule = ChebyshevRule(nodes)
    x = rule.nodes()
    root = np.sqrt(1.0 - x)
    tau_plus = (1.0 + root) / 2.0
    tau_minus = (1.0 - root) / 2.0
    gx = _polyval(g, x)
    branch = np.mean((_polyval(f, tau_plus) + _polyval(f, tau_minus)) / 2.0 * np.conj(gx))
    comp = np.mean(_polyval(f, x) * np.conj(_polyval(g, 4.0 * x * (1.0 - x))))
    integral = np.mean(_polyval(_integral_adjoint_coeffs(f), x) * np.conj(gx))
    return AdjointComparison(complex(branch), complex(comp), complex(integral))


@dataclass(frozen=True)
class AffineIfs:
    """Expanding integer matrix A with digit vectors; branches A^{-1}(x + b)."""

    matrix: np.ndarray
    digits: np.ndarray
    weights: tuple[float, ...] = ()

    def __post_init__(self):
        a = np.array(self.matrix, dtype=int)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError("matrix must be square")
        d = a.shape[0]
        b = np.array(self.digits, dtype=int)
        if b.ndim != 2 or b.shape[1] != d or b.shape[0] < 1:
            raise InputError(f"digits must be row vectors of dimension {d}")
        eigs = np.linalg.eigvals(a.astype(float))
        if np.min(np.abs(eigs)) <= 1.0 + 1e-12:
            raise InputError("matrix spectrum must lie strictly outside the unit circle")
        inv = np.linalg.inv(a.astype(float))
        for i in range(b.shape[0]):
            for j in range(i + 1, b.shape[0]):
                q = inv @ (b[i] - b[j])
                if np.max(np.abs(q - np.round(q))) < 1e-9:
                    raise InputError(f"digits {i} and {j} coincide modulo the matrix lattice")
        w = self.weights or (1.0 / b.shape[0],) * b.shape[0]
        w = tuple(float(p) for p in w)
        if len(w) != b.shape[0]:
            raise InputError("one weight per digit required")
        if any(p <= 0 for p in w) or abs(sum(w) - 1.0) > 1e-12:
            raise InputError("weights must be positive and sum to 1")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "digits", b)
        object.__setattr__(self, "weights", w)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def branch_count(self) -> int:
        return self.digits.shape[0]

    def inverse_matrix(self) -> np.ndarray:
        return np.linalg.inv(self.matrix.astype(float))

    def mean_fixed_point(self) -> np.ndarray:
        """E[x] = (A - I)^{-1} (sum_n p_n b_n) from the self-similarity law."""
        b_bar = np.asarray(self.weights) @ self.digits.astype(float)
        return np.linalg.solve(
            self.matrix.astype(float) - np.eye(self.dimension), b_bar
        )

    def second_moment(self) -> np.ndarray:
        """E[x x^T] solved from the affine fixed-point equation."""
        d = self.dimension
        inv = self.inverse_matrix()
        p = np.asarray(self.weights)
        b = self.digits.astype(float)
        mean = self.mean_fixed_point()
        b_bar = p @ b
        b2 = np.einsum("n,ni,nj->ij", p, b, b)
        rhs = inv @ (np.outer(mean, b_bar) + np.outer(b_bar, mean) + b2) @ inv.T
        op = np.eye(d * d) - np.kron(inv, inv)
        return np.linalg.solve(op, rhs.ravel()).reshape(d, d)

    def to_json(self) -> dict:
        return {
            "A": [[int(v) for v in row] for row in self.matrix],
            "digits": [[int(v) for v in row] for row in self.digits],
            "weights": list(self.weights),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AffineIfs":
        return cls(
            np.array(obj["A"], dtype=int),
            np.array(obj["digits"], dtype=int),
            tuple(obj.get("weights") or ()),
        )


def sierpinski_ifs() -> AffineIfs:
    return AffineIfs(2 * np.eye(2, dtype=int), np.array([[0, 0], [1, 0], [0, 1]]))


def code_to_point(ifs: AffineIfs, word: Sequence[int]) -> np.ndarray:
    """Truncated digit sum sum_k A^{-k} b_{w_k} of a symbol word."""
    word = [int(s) for s in word]
    if not word:
        raise InputError("word must have length >= 1")
    for s in word:
        if not 1 <= s <= ifs.branch_count:
            raise InputError(f"symbol {s} outside 1..{ifs.branch_count}")
    inv = ifs.inverse_matrix()
    x = np.zeros(ifs.dimension)
    for s in reversed(word):
        x = inv @ (x + ifs.digits[s - 1])
    return x


def chaos_game(
    ifs: AffineIfs, samples: int, seed: int, burn_in: int = CHAOS_BURN_IN
) -> np.ndarray:
    """Iterate random branches; a seed is mandatory for reproducibility."""
    if samples < 1:
        raise InputError("need at least one sample")
    if seed is None:
        raise InputError("a seed is required; there is no entropy default")
    rng = np.random.default_rng(int(seed))
    picks = rng.choice(ifs.branch_count, size=samples + burn_in, p=ifs.weights)
    inv = ifs.inverse_matrix().tolist()
    shifts = [(ifs.inverse_matrix() @ b).tolist() for b in ifs.digits.astype(float)]
    d = ifs.dimension
    out = np.empty((samples, d))
    x = [0.0] * d
    rows = range(d)
    for i, pick in enumerate(picks):
        sh = shifts[pick]
        x = [sum(inv[r][c] * x[c] for c in rows) + sh[r] for r in rows]
        if i >= burn_in:
            out[i - burn_in] = x
    return out


@dataclass(frozen=True)
class MomentCheck:
    name: str
    statistic: float
    expected: float
    z: float

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "expected": self.expected,
            "z": self.z,
        }


@dataclass(frozen=True)
class InvarianceReport:
    checks: tuple[MomentCheck, ...]
    samples: int
    seed: int

    @property
    def max_abs_z(self) -> float:
        return max(abs(c.z) for c in self.checks)

    def passed(self, z_bound: float = 4.0) -> bool:
        return self.max_abs_z < z_bound

    def to_json(self) -> dict:
        return {
            "checks": [c.to_json() for c in self.checks],
            "samples": self.samples,
            "seed": self.seed,
            "max_abs_z": self.max_abs_z,
        }


def _z_score(values: np.ndarray, expected: float) -> tuple[float, float]:
    n = values.shape[0]
    mean = float(np.mean(values))
    spread = float(np.std(values, ddof=1))
    if spread == 0.0:
        return mean, 0.0 if mean == expected else float("inf")
    return mean, (mean - expected) / (spread / np.sqrt(n))


def strong_invariance_check(
    ifs: AffineIfs, samples: int, seed: int, moment_order: int = 2
) -> InvarianceReport:
    """Monte Carlo z-scores for the self-similarity law of the sampled measure.

    Each monomial g of order <= moment_order is tested two ways: the
    per-sample difference g(x) - sum_n p_n g(tau_n x) should have mean
    zero under the invariance law, and the first moments should match the
    analytic fixed point of the affine recursion.
    """
    if samples < 10_000:
        raise InputError("use at least 1e4 samples for a meaningful z-score")
    if moment_order < 1 or moment_order > 2:
        raise InputError("moment order must be 1 or 2")
    pts = chaos_game(ifs, samples, seed)
    inv = ifs.inverse_matrix()
    p = np.asarray(ifs.weights)
    branch_pts = [
        (pts + ifs.digits[n].astype(float)) @ inv.T for n in range(ifs.branch_count)
    ]
    checks: list[MomentCheck] = []

    mean_target = ifs.mean_fixed_point()
    for r in range(ifs.dimension):
        stat, z = _z_score(pts[:, r], float(mean_target[r]))
        checks.append(MomentCheck(f"mean[{r}]", stat, float(mean_target[r]), z))

    monomials: list[tuple[int, ...]] = [(r,) for r in range(ifs.dimension)]
    if moment_order >= 2:
        monomials += [
            (r, s) for r in range(ifs.dimension) for s in range(r, ifs.dimension)
        ]
    for mono in monomials:
        def evaluate(arr: np.ndarray) -> np.ndarray:
            out = np.ones(arr.shape[0])
            for axis in mono:
                out = out * arr[:, axis]
            return out

        diff = evaluate(pts) - sum(
            p[n] * evaluate(branch_pts[n]) for n in range(ifs.branch_count)
        )
        stat, z = _z_score(diff, 0.0)
        name = "self_similarity[" + ",".join(str(a) for a in mono) + "]"
        checks.append(MomentCheck(name, stat, 0.0, z))
    return InvarianceReport(tuple(checks), samples, int(seed))
