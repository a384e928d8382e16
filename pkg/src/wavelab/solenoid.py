"""Path-space moments over the inverse limit of the shift.

Points of the inverse limit are sequences (x_0, x_1, ...) with
sigma(x_{n+1}) = x_n.  They are never materialized: a path observable is
kept symbolically as a sum of products of coordinate pulls

    F = sum_terms coeff * prod_n (g_n o pi_n),

and every statement about the path measure P attached to a weight W and
an R_W-harmonic density h is evaluated through the nested-transfer moment
formula

    E_P[ prod (f_n o pi_n) ] = int f_0 R_W(f_1 R_W(... R_W(f_K h))) dmu.

The two-sided shift acts by pure index rewriting: pi_n o shift = pi_(n-1)
for n >= 1 while pi_0 o shift = sigma o pi_0, and the inverse raises all
indices by one.  The weighted shift F -> (m o pi_0) (F o shift) dilates
the weighted composition operator S_m; its inverse divides by m o pi_1
and therefore requires m bounded away from zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, PreconditionError, SpecMismatchError
from .code_space import (
    CylinderFn,
    IfsSpec,
    compose_sigma,
    conditional_expectation,
    harmonic_solve,
    integrate,
    lift,
    multiply,
    ruelle_apply,
    shift_iterate,
    sup_distance,
    weighted_adjoint,
    weighted_compose,
)

HARMONIC_TOL = 1e-10
NONVANISHING_TOL = 1e-12


@dataclass(frozen=True)
class PathTerm:
    """One product coeff * prod (g_n o pi_n), at most one factor per index."""

    coeff: complex
    factors: tuple[tuple[int, CylinderFn], ...]

    def __post_init__(self):
        object.__setattr__(self, "coeff", complex(self.coeff))
        object.__setattr__(self, "factors", tuple(self.factors))
        indices = [n for n, _ in self.factors]
        if indices != sorted(set(indices)):
            raise InputError("factors must be sorted with unique coordinates")
        if indices and indices[0] < 0:
            raise InputError("coordinate indices must be >= 0")


def _merge_factors(
    factors: Sequence[tuple[int, CylinderFn]],
) -> tuple[tuple[int, CylinderFn], ...]:
    by_index: dict[int, CylinderFn] = {}
    for n, g in factors:
        by_index[n] = multiply(by_index[n], g) if n in by_index else g
    return tuple(sorted(by_index.items()))


@dataclass(frozen=True)
class PathCylinderFn:
    """Finite sum of coordinate products, the observables of the path space."""

    spec: IfsSpec
    terms: tuple[PathTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            for _, g in t.factors:
                if g.spec != self.spec:
                    raise SpecMismatchError("factor spec differs from path spec")

    # -- constructors ------------------------------------------------------
    @classmethod
    def coordinate(cls, n: int, g: CylinderFn) -> "PathCylinderFn":
        """The pull g o pi_n of a base function through coordinate n."""
        if n < 0:
            raise InputError("coordinate index must be >= 0")
        return cls(g.spec, (PathTerm(1.0, ((n, g),)),))

    @classmethod
    def constant(cls, spec: IfsSpec, value: complex) -> "PathCylinderFn":
        return cls(spec, (PathTerm(value, ()),))

    # -- algebra -----------------------------------------------------------
    def __add__(self, other: "PathCylinderFn") -> "PathCylinderFn":
        if self.spec != other.spec:
            raise SpecMismatchError("path functions over different systems")
        return PathCylinderFn(self.spec, self.terms + other.terms)

    def __sub__(self, other: "PathCylinderFn") -> "PathCylinderFn":
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return PathCylinderFn(
                self.spec,
                tuple(PathTerm(t.coeff * other, t.factors) for t in self.terms),
            )
        if self.spec != other.spec:
            raise SpecMismatchError("path functions over different systems")
        terms = []
        for s in self.terms:
            for t in other.terms:
                terms.append(
                    PathTerm(s.coeff * t.coeff, _merge_factors(s.factors + t.factors))
                )
        return PathCylinderFn(self.spec, tuple(terms))

    __rmul__ = __mul__

    def conj(self) -> "PathCylinderFn":
        return PathCylinderFn(
            self.spec,
            tuple(
                PathTerm(np.conj(t.coeff), tuple((n, g.conj()) for n, g in t.factors))
                for t in self.terms
            ),
        )

    # -- shift actions -------------------------------------------------------
    def compose_shift(self) -> "PathCylinderFn":
        """F o shift: indices drop by one, coordinate 0 picks up sigma."""
        terms = []
        for t in self.terms:
            factors = [
                (0, compose_sigma(g)) if n == 0 else (n - 1, g)
                for n, g in t.factors
            ]
            terms.append(PathTerm(t.coeff, _merge_factors(factors)))
        return PathCylinderFn(self.spec, tuple(terms))

    def compose_shift_inverse(self) -> "PathCylinderFn":
        """F o shift^{-1}: every coordinate index rises by one."""
        terms = [
            PathTerm(t.coeff, tuple((n + 1, g) for n, g in t.factors))
            for t in self.terms
        ]
        return PathCylinderFn(self.spec, tuple(terms))

    # -- normal form -----------------------------------------------------------
    def collapse(self) -> tuple[int, CylinderFn]:
        """Rewrite as a single pull (G o pi_M) through the top coordinate.

        Uses g o pi_n = (g o sigma^(M-n)) o pi_M, which is faithful because
        the top coordinate determines all lower ones.
        """
        top = 0
        for t in self.terms:
            for n, _ in t.factors:
                top = max(top, n)
        total = CylinderFn.constant(self.spec, 0.0)
        for t in self.terms:
            acc = CylinderFn.constant(self.spec, t.coeff)
            for n, g in t.factors:
                acc = multiply(acc, shift_iterate(g, top - n))
            total = total + acc
        return top, total


def path_sup_distance(f: PathCylinderFn, g: PathCylinderFn) -> float:
    """Sup distance of the collapsed normal forms (pointwise, not only a.e.)."""
    if f.spec != g.spec:
        raise SpecMismatchError("path functions over different systems")
    _, a = (f - g).collapse()
    return a.sup_norm()


def weighted_shift(f: PathCylinderFn, m: CylinderFn) -> PathCylinderFn:
    """The dilation F -> (m o pi_0) (F o shift) of S_m."""
    if m.spec != f.spec:
        raise SpecMismatchError("weight spec differs from path spec")
    return PathCylinderFn.coordinate(0, m) * f.compose_shift()


def weighted_shift_inverse(f: PathCylinderFn, m: CylinderFn) -> PathCylinderFn:
    """Inverse dilation F -> (F o shift^{-1}) / (m o pi_1).

    Requires min |m| > 1e-12: the reciprocal enters as a genuine factor.
    """
    if m.spec != f.spec:
        raise SpecMismatchError("weight spec differs from path spec")
    low = float(np.min(np.abs(m.values)))
    if low <= NONVANISHING_TOL:
        raise PreconditionError(
            f"inverse weighted shift needs a nonvanishing weight (min |m| = {low:.3e})"
        )
    recip = CylinderFn(m.spec, m.depth, 1.0 / m.values)
    return PathCylinderFn.coordinate(1, recip) * f.compose_shift_inverse()


def expectation(f: PathCylinderFn, weight: CylinderFn, h: CylinderFn) -> complex:
    """E_P[F] by the nested transfer formula, term by term."""
    if weight.spec != f.spec or h.spec != f.spec:
        raise SpecMismatchError("weight or density spec differs from path spec")
    total = 0.0 + 0.0j
    for term in f.terms:
        top = max((n for n, _ in term.factors), default=0)
        slots: list[CylinderFn] = [CylinderFn.ones(f.spec) for _ in range(top + 1)]
        for n, g in term.factors:
            slots[n] = multiply(slots[n], g)
        acc = multiply(slots[top], h)
        for n in range(top - 1, -1, -1):
            acc = multiply(slots[n], ruelle_apply(weight, acc))
        total += term.coeff * integrate(acc)
    return complex(total)


def pairing(f: PathCylinderFn, g: PathCylinderFn, weight: CylinderFn, h: CylinderFn) -> complex:
    """<F, G>_P = E_P[F conj(G)]."""
    return expectation(f * g.conj(), weight, h)


def harmonic_for(weight: CylinderFn, tol: float = HARMONIC_TOL) -> CylinderFn:
    """The default transfer-harmonic density: 1 when admissible, else solved."""
    ones = CylinderFn.ones(weight.spec)
    if sup_distance(conditional_expectation(lift(weight, max(weight.depth, 1))), lift(ones, 1)) < tol:
        return ones
    return harmonic_solve(weight, tol=tol)


@dataclass(frozen=True)
class MomentSpec:
    """Everything a path moment needs: weight, harmonic density, coordinates."""

    spec: IfsSpec
    weight: CylinderFn
    h: CylinderFn
    coords: tuple[CylinderFn, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if not self.coords:
            raise InputError("moment spec needs at least the coordinate-0 function")
        for g in (self.weight, self.h, *self.coords):
            if g.spec != self.spec:
                raise SpecMismatchError("moment component spec mismatch")

    def validate(self, tol: float = HARMONIC_TOL) -> None:
        w = self.weight.values
        if float(np.max(np.abs(w.imag))) > 1e-12 or float(np.min(w.real)) < -1e-12:
            raise InputError("weight must be real and nonnegative")
        if abs(integrate(self.h) - 1.0) > tol:
            raise InputError("harmonic density must integrate to 1")
        resid = sup_distance(
            lift(ruelle_apply(self.weight, self.h), max(self.h.depth, self.weight.depth - 1)),
            lift(self.h, max(self.h.depth, self.weight.depth - 1)),
        )
        if resid >= tol:
            raise InputError(f"density is not transfer-harmonic (residual {resid:.3e})")

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "W": self.weight.to_json(),
            "h": self.h.to_json(),
            "coords": [g.to_json() for g in self.coords],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MomentSpec":
        spec = IfsSpec.from_json(obj["spec"])
        weight = CylinderFn.from_json(obj["W"])
        h_raw = obj.get("h", "auto")
        h = harmonic_for(weight) if h_raw == "auto" else CylinderFn.from_json(h_raw)
        coords = tuple(CylinderFn.from_json(g) for g in obj.get("coords", []))
        return cls(spec, weight, h, coords)


def moment(ms: MomentSpec) -> complex:
    """int f_0 R_W(f_1 R_W(... R_W(f_K h))) dmu, evaluated innermost first."""
    ms.validate()
    acc = multiply(ms.coords[-1], ms.h)
    for g in reversed(ms.coords[:-1]):
        acc = multiply(g, ruelle_apply(ms.weight, acc))
    return integrate(acc)


def dilation_check(
    m: CylinderFn, f: CylinderFn, g: CylinderFn, n: int, h: CylinderFn | None = None
) -> float:
    """Residual of the dilation identities between base and path space.

    n >= 0 compares <S_m^n f, g> with <U^n (f o pi_0), g o pi_0>_P; n < 0
    compares the adjoint power against <f o pi_0, U^{|n|} (g o pi_0)>_P,
    the unitary pairing, which never divides by m.
    """
    weight = m.abs2()
    if h is None:
        h = harmonic_for(weight)
    lhs_fn = f
    if n >= 0:
        for _ in range(n):
            lhs_fn = weighted_compose(m, lhs_fn)
        lhs = integrate(multiply(lhs_fn, multiply(g.conj(), h)))
        pf = PathCylinderFn.coordinate(0, f)
        for _ in range(n):
            pf = weighted_shift(pf, m)
        rhs = pairing(pf, PathCylinderFn.coordinate(0, g), weight, h)
    else:
        for _ in range(-n):
            lhs_fn = weighted_adjoint(m, lhs_fn)
        lhs = integrate(multiply(lhs_fn, multiply(g.conj(), h)))
        pg = PathCylinderFn.coordinate(0, g)
        for _ in range(-n):
            pg = weighted_shift(pg, m)
        rhs = pairing(PathCylinderFn.coordinate(0, f), pg, weight, h)
    return abs(lhs - rhs)


@dataclass(frozen=True)
class CovarianceReport:
    conjugation: float
    scaling: float

    @property
    def max_residual(self) -> float:
        return max(self.conjugation, self.scaling)


def shift_covariance_check(m: CylinderFn, f: CylinderFn, g: CylinderFn) -> CovarianceReport:
    """Covariance of the weighted shift with multiplication operators.

    Conjugating multiplication by f o pi_0 through the weighted shift must
    give multiplication by (f o sigma) o pi_0; tested in the multiplied
    form U M_f G = M_{f o sigma} U G on coordinate probes, which stays
    meaningful when m vanishes somewhere.  The scaling residual checks
    U 1 = m o pi_0.
    """
    worst = 0.0
    for k in range(3):
        probe = PathCylinderFn.coordinate(k, g)
        lhs = weighted_shift(PathCylinderFn.coordinate(0, f) * probe, m)
        rhs = PathCylinderFn.coordinate(0, compose_sigma(f)) * weighted_shift(probe, m)
        worst = max(worst, path_sup_distance(lhs, rhs))
    one = PathCylinderFn.constant(m.spec, 1.0)
    scaling = path_sup_distance(weighted_shift(one, m), PathCylinderFn.coordinate(0, m))
    return CovarianceReport(worst, scaling)


def w0_isometry_residual(
    f: CylinderFn, g: CylinderFn, weight: CylinderFn, h: CylinderFn | None = None
) -> float:
    """|<f o pi_0, g o pi_0>_P - int f conj(g) h dmu|; zero by the marginal law."""
    if h is None:
        h = harmonic_for(weight)
    lhs = pairing(
        PathCylinderFn.coordinate(0, f), PathCylinderFn.coordinate(0, g), weight, h
    )
    rhs = integrate(multiply(multiply(f, g.conj()), h))
    return abs(lhs - rhs)


def measure_change_residual(
    f: PathCylinderFn, weight: CylinderFn, h: CylinderFn | None = None
) -> float:
    """Residual of E[(W o pi_0) F] = E[F o shift^{-1}], the density of P o shift."""
    if h is None:
        h = harmonic_for(weight)
    lhs = expectation(PathCylinderFn.coordinate(0, weight) * f, weight, h)
    rhs = expectation(f.compose_shift_inverse(), weight, h)
    return abs(lhs - rhs)


def marginal_residual(
    f0: CylinderFn, order: int, weight: CylinderFn, h: CylinderFn | None = None
) -> float:
    """Moment with trailing all-ones coordinates minus int f_0 h dmu."""
    if h is None:
        h = harmonic_for(weight)
    coords = (f0,) + tuple(CylinderFn.ones(f0.spec) for _ in range(order))
    val = moment(MomentSpec(f0.spec, weight, h, coords))
    return abs(val - integrate(multiply(f0, h)))


def probability_residual(
    order: int, weight: CylinderFn, h: CylinderFn | None = None
) -> float:
    """All-ones moment minus 1: P is a probability measure."""
    spec = weight.spec
    if h is None:
        h = harmonic_for(weight)
    coords = tuple(CylinderFn.ones(spec) for _ in range(order + 1))
    return abs(moment(MomentSpec(spec, weight, h, coords)) - 1.0)


def cocycle_weight(m: CylinderFn, k: int) -> CylinderFn:
    """The k-step product m (m o sigma) ... (m o sigma^(k-1))."""
    if k < 0:
        raise InputError("cocycle order must be >= 0")
    acc = CylinderFn.ones(m.spec)
    for i in range(k):
        acc = multiply(acc, shift_iterate(m, i))
    return acc


def state_moment(
    m: CylinderFn, f: CylinderFn, k: int, h: CylinderFn | None = None
) -> complex:
    """The functional int m^(k) f h dmu exposed by the path representation.

    Equals <(f o pi_0) U^k 1, 1>_P, the mixed moment of the multiplication
    operator and the weighted shift in the path space.
    """
    if h is None:
        h = harmonic_for(m.abs2())
    return integrate(multiply(multiply(cocycle_weight(m, k), f), h))
