"""Exact shift-operator algebra on finite-depth cylinder functions.

The state space is the set of one-sided symbol sequences over {1..N},
carrying the product measure with branch weights p_1..p_N.  A depth-L
cylinder function depends on the first L symbols only and is stored as a
dense complex vector of length N**L, indexed with the first symbol most
significant:

    index(w) = sum_k (w_k - 1) * N**(L - k)

The shift sigma drops the first symbol and the branches tau_n prepend
symbol n, so both act by pure index bookkeeping and every operator
identity below is exact up to float rounding at any finite depth:

    compose_sigma(f)             (S f)(w1 w2 ...) = f(w2 ...)
    adjoint_sigma(f)             (S* f)(v) = sum_n p_n f(n v)
    conditional_expectation(f)   S S* f, projection onto shift composites
    weighted_compose(m, f)       m * (f o sigma)
    ruelle_apply(W, f)           S*(W f), transfer operator with weight W

Depth bookkeeping: compose_sigma raises depth by one, adjoint_sigma
lowers it by one, and products lift both operands to the larger depth.
Raising depth allocates N**L cells; the cap (default 2**24, overridable
through the WAVELAB_MAX_CELLS environment variable) guards against
accidental blowup.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, ConvergenceError, InputError, SpecMismatchError
from . import jsonio

DEFAULT_MAX_CELLS = 2**24
_CELLS_ENV = "WAVELAB_MAX_CELLS"

WEIGHT_SUM_TOL = 1e-14


def max_cells() -> int:
    """Current cap on the number of stored values per cylinder function."""
    raw = os.environ.get(_CELLS_ENV)
    if raw is None:
        return DEFAULT_MAX_CELLS
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InputError(f"{_CELLS_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise InputError(f"{_CELLS_ENV} must be positive, got {cap}")
    return cap


def _check_cells(n_values: int) -> None:
    cap = max_cells()
    if n_values > cap:
        raise CapacityError(
            f"{n_values} cells exceed the cap of {cap}; "
            f"set {_CELLS_ENV} to raise it"
        )


@dataclass(frozen=True)
class IfsSpec:
    """Branch count and branch weights of the symbol system.

    ``weights`` defaults to the uniform distribution; they must be positive
    and sum to one within 1e-14.
    """

    N: int
    weights: tuple[float, ...] = ()

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 2:
            raise InputError(f"branch count must be an integer >= 2, got {self.N}")
        w = self.weights
        if not w:
            w = (1.0 / self.N,) * self.N
        w = tuple(float(p) for p in w)
        if len(w) != self.N:
            raise InputError(f"expected {self.N} weights, got {len(w)}")
        if any(p <= 0 for p in w):
            raise InputError("branch weights must be positive")
        if abs(sum(w) - 1.0) >= WEIGHT_SUM_TOL:
            raise InputError(f"branch weights must sum to 1, got {sum(w)!r}")
        object.__setattr__(self, "weights", w)

    @property
    def uniform(self) -> bool:
        return all(abs(p - 1.0 / self.N) < WEIGHT_SUM_TOL for p in self.weights)

    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def to_json(self) -> dict:
        return {"N": self.N, "weights": list(self.weights)}

    @classmethod
    def from_json(cls, obj: dict) -> "IfsSpec":
        if "N" not in obj:
            raise InputError("spec JSON needs an 'N' field")
        return cls(int(obj["N"]), tuple(obj.get("weights") or ()))


@dataclass(frozen=True)
class Word:
    """A finite string of symbols from {1..N}, canonically indexable."""

    symbols: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def validate(self, n_branches: int) -> "Word":
        for s in self.symbols:
            if not 1 <= s <= n_branches:
                raise InputError(f"symbol {s} outside 1..{n_branches}")
        return self

    def index(self, n_branches: int) -> int:
        """Canonical index, first symbol most significant."""
        self.validate(n_branches)
        i = 0
        for s in self.symbols:
            i = i * n_branches + (s - 1)
        return i

    @classmethod
    def from_index(cls, n_branches: int, length: int, index: int) -> "Word":
        if not 0 <= index < n_branches**length:
            raise InputError(f"index {index} out of range for length {length}")
        symbols = []
        for _ in range(length):
            symbols.append(index % n_branches + 1)
            index //= n_branches
        return cls(tuple(reversed(symbols)))


def all_words(n_branches: int, length: int) -> Iterator[Word]:
    for i in range(n_branches**length):
        yield Word.from_index(n_branches, length, i)


@dataclass(frozen=True, eq=False)
class CylinderFn:
    """A complex function of the first ``depth`` symbols.

    ``values`` holds one entry per word of length ``depth`` in canonical
    order; the array is copied and frozen on construction.
    """

    spec: IfsSpec
    depth: int
    values: np.ndarray

    def __post_init__(self):
        if self.depth < 0:
            raise InputError(f"depth must be >= 0, got {self.depth}")
        size = self.spec.N**self.depth
        _check_cells(size)
        vals = np.array(self.values, dtype=np.complex128).ravel()
        if vals.shape != (size,):
            raise InputError(
                f"depth {self.depth} over {self.spec.N} branches needs "
                f"{size} values, got {vals.shape[0]}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # -- constructors --------------------------------------------------------
    @classmethod
    def constant(cls, spec: IfsSpec, value: complex) -> "CylinderFn":
        return cls(spec, 0, np.array([value], dtype=np.complex128))

    @classmethod
    def ones(cls, spec: IfsSpec) -> "CylinderFn":
        return cls.constant(spec, 1.0)

    @classmethod
    def indicator(cls, spec: IfsSpec, word: Word | Sequence[int]) -> "CylinderFn":
        if not isinstance(word, Word):
            word = Word(tuple(word))
        word.validate(spec.N)
        vals = np.zeros(spec.N ** len(word), dtype=np.complex128)
        vals[word.index(spec.N)] = 1.0
        return cls(spec, len(word), vals)

    # -- pointwise arithmetic --------------------------------------------------
    def _binary(self, other, op):
        if isinstance(other, CylinderFn):
            a, b, depth = _align(self, other)
            return CylinderFn(self.spec, depth, op(a, b))
        return CylinderFn(self.spec, self.depth, op(self.values, complex(other)))

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return CylinderFn(self.spec, self.depth, self.values / complex(other))

    def __neg__(self):
        return CylinderFn(self.spec, self.depth, -self.values)

    def conj(self) -> "CylinderFn":
        return CylinderFn(self.spec, self.depth, np.conj(self.values))

    def abs2(self) -> "CylinderFn":
        return CylinderFn(self.spec, self.depth, np.abs(self.values) ** 2 + 0j)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_json(self) -> dict:
        return {
            "N": self.spec.N,
            "weights": list(self.spec.weights),
            "depth": self.depth,
            "values": jsonio.encode_cvector(self.values),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CylinderFn":
        spec = IfsSpec.from_json(obj)
        if "depth" not in obj or "values" not in obj:
            raise InputError("cylinder JSON needs 'depth' and 'values'")
        return cls(spec, int(obj["depth"]), jsonio.decode_cvector(obj["values"]))


def _require_same_spec(f: CylinderFn, g: CylinderFn) -> None:
    if f.spec != g.spec:
        raise SpecMismatchError(
            f"operands live over different systems: {f.spec} vs {g.spec}"
        )


def _align(f: CylinderFn, g: CylinderFn) -> tuple[np.ndarray, np.ndarray, int]:
    _require_same_spec(f, g)
    depth = max(f.depth, g.depth)
    return _lift_values(f, depth), _lift_values(g, depth), depth


def _lift_values(f: CylinderFn, depth: int) -> np.ndarray:
    if depth < f.depth:
        raise InputError(f"cannot lift depth {f.depth} down to {depth}")
    if depth == f.depth:
        return f.values
    reps = f.spec.N ** (depth - f.depth)
    _check_cells(f.values.shape[0] * reps)
    return np.repeat(f.values, reps)


def lift(f: CylinderFn, depth: int) -> CylinderFn:
    """View ``f`` as a function of the first ``depth`` >= f.depth symbols."""
    return CylinderFn(f.spec, depth, _lift_values(f, depth))


def restrict(f: CylinderFn, depth: int) -> CylinderFn:
    """Average out trailing symbols, the inverse of ``lift`` on its range."""
    if depth > f.depth:
        raise InputError(f"cannot restrict depth {f.depth} up to {depth}")
    vals = f.values
    p = f.spec.weight_array()
    for _ in range(f.depth - depth):
        vals = vals.reshape(-1, f.spec.N) @ p
    return CylinderFn(f.spec, depth, vals)


def integrate(f: CylinderFn) -> complex:
    """Integral against the product measure: sum_w p_{w_1}..p_{w_L} f(w)."""
    vals = f.values
    p = f.spec.weight_array()
    for _ in range(f.depth):
        vals = p @ vals.reshape(f.spec.N, -1)
    return complex(vals[0])


def multiply(f: CylinderFn, g: CylinderFn) -> CylinderFn:
    """Pointwise product at the common lifted depth."""
    a, b, depth = _align(f, g)
    return CylinderFn(f.spec, depth, a * b)


def inner_product(f: CylinderFn, g: CylinderFn) -> complex:
    """L2 pairing int f conj(g) dmu."""
    return integrate(multiply(f, g.conj()))


def l2_norm(f: CylinderFn) -> float:
    return float(np.sqrt(max(integrate(f.abs2()).real, 0.0)))


def sup_distance(f: CylinderFn, g: CylinderFn) -> float:
    a, b, _ = _align(f, g)
    return float(np.max(np.abs(a - b)))


def compose_sigma(f: CylinderFn) -> CylinderFn:
    """The isometry S: precompose with the shift, raising depth by one."""
    _check_cells(f.values.shape[0] * f.spec.N)
    return CylinderFn(f.spec, f.depth + 1, np.tile(f.values, f.spec.N))


def adjoint_sigma(f: CylinderFn) -> CylinderFn:
    """S*: weighted average over prepended symbols, lowering depth by one."""
    if f.depth == 0:
        return f
    p = f.spec.weight_array()
    return CylinderFn(f.spec, f.depth - 1, p @ f.values.reshape(f.spec.N, -1))


def conditional_expectation(f: CylinderFn) -> CylinderFn:
    """The orthogonal projection S S* onto functions of the shifted tail."""
    if f.depth == 0:
        return f
    return compose_sigma(adjoint_sigma(f))


def precompose_branch(f: CylinderFn, branch: int) -> CylinderFn:
    """f o tau_branch: pin the first symbol, lowering depth by one."""
    if not 1 <= branch <= f.spec.N:
        raise InputError(f"branch {branch} outside 1..{f.spec.N}")
    if f.depth == 0:
        return f
    return CylinderFn(
        f.spec, f.depth - 1, f.values.reshape(f.spec.N, -1)[branch - 1]
    )


def shift_iterate(f: CylinderFn, k: int) -> CylinderFn:
    """f o sigma^k."""
    if k < 0:
        raise InputError("shift power must be >= 0")
    for _ in range(k):
        f = compose_sigma(f)
    return f


def weighted_compose(m: CylinderFn, f: CylinderFn) -> CylinderFn:
    """S_m f = m * (f o sigma)."""
    _require_same_spec(m, f)
    return multiply(m, compose_sigma(f))


def weighted_adjoint(m: CylinderFn, f: CylinderFn) -> CylinderFn:
    """S_m* f = S*(conj(m) * f)."""
    _require_same_spec(m, f)
    return adjoint_sigma(multiply(m.conj(), f))


def _require_weight(W: CylinderFn, tol: float = 1e-12) -> None:
    if float(np.max(np.abs(W.values.imag))) > tol:
        raise InputError("transfer weight must be real")
    if float(np.min(W.values.real)) < -tol:
        raise InputError("transfer weight must be nonnegative")


def ruelle_apply(W: CylinderFn, f: CylinderFn) -> CylinderFn:
    """Transfer operator R_W f = S*(W f) for a nonnegative weight W."""
    _require_weight(W)
    return adjoint_sigma(multiply(W, f))


def harmonic_solve(
    W: CylinderFn,
    depth: int | None = None,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> CylinderFn:
    """Power-iterate R_W from the constant function until R_W h = h.

    The natural depth of a transfer fixed point is W.depth - 1, which is
    the default.  The returned h is normalized to integrate(h) = 1 and
    certified to satisfy sup|R_W h - h| < tol; otherwise a
    ConvergenceError carrying the last residual is raised.
    """
    _require_weight(W)
    if depth is None:
        depth = max(W.depth - 1, 0)
    if W.depth > depth + 1:
        raise InputError(
            f"iteration depth {depth} cannot hold a fixed point of a "
            f"depth-{W.depth} weight; need depth >= {W.depth - 1}"
        )
    h = lift(CylinderFn.ones(W.spec), depth)
    residual = None
    for _ in range(max_iter):
        nxt = lift(ruelle_apply(W, h), depth)
        total = integrate(nxt)
        if abs(total) < 1e-300:
            raise ConvergenceError("transfer iterate vanished", residual=residual)
        nxt = nxt / total
        residual = sup_distance(lift(ruelle_apply(W, nxt), depth), nxt)
        h = nxt
        if residual < tol:
            return h
    raise ConvergenceError(
        f"no transfer fixed point after {max_iter} iterations "
        f"(last residual {residual:.3e})",
        residual=residual,
    )


def density_check(W: CylinderFn, word: Word | Sequence[int]) -> tuple[complex, complex]:
    """Both sides of int R_W(1_A) dmu = int_A W dmu for a cylinder A."""
    ind = CylinderFn.indicator(W.spec, word)
    lhs = integrate(ruelle_apply(W, ind))
    rhs = integrate(multiply(W, ind))
    return lhs, rhs
