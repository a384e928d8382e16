"""Brute-force reference implementations over explicit word tables.

Everything here works on dictionaries mapping symbol tuples to values,
with plain Python loops: slow, obviously correct, and structurally
independent of the array indexing used by the package.
"""

import itertools
from math import prod

import numpy as np

from wavelab.code_space import CylinderFn, Word


def words(n: int, length: int):
    return list(itertools.product(range(1, n + 1), repeat=length))


def table_of(f: CylinderFn) -> dict:
    n, depth = f.spec.N, f.depth
    return {
        tuple(Word.from_index(n, depth, i).symbols): f.values[i]
        for i in range(len(f.values))
    }


def cylinder_of(spec, table: dict) -> CylinderFn:
    depth = len(next(iter(table)))
    values = np.zeros(spec.N**depth, dtype=complex)
    for w, v in table.items():
        values[Word(w).index(spec.N)] = v
    return CylinderFn(spec, depth, values)


def measure(weights, word) -> float:
    return prod(weights[s - 1] for s in word)


def integrate(table: dict, weights) -> complex:
    return sum(measure(weights, w) * v for w, v in table.items())


def lift(table: dict, n: int, depth: int) -> dict:
    base = len(next(iter(table)))
    if base == depth:
        return dict(table)
    out = {}
    for w in words(n, depth):
        out[w] = table[w[:base]]
    return out


def compose_shift(table: dict, n: int) -> dict:
    depth = len(next(iter(table)))
    return {w: table[w[1:]] for w in words(n, depth + 1)}


def adjoint_shift(table: dict, n: int, weights) -> dict:
    depth = len(next(iter(table)))
    if depth == 0:
        return dict(table)
    out = {}
    for v in words(n, depth - 1):
        out[v] = sum(weights[s - 1] * table[(s,) + v] for s in range(1, n + 1))
    return out


def multiply(t1: dict, t2: dict, n: int) -> dict:
    depth = max(len(next(iter(t1))), len(next(iter(t2))))
    a, b = lift(t1, n, depth), lift(t2, n, depth)
    return {w: a[w] * b[w] for w in words(n, depth)}


def inner(t1: dict, t2: dict, n: int, weights) -> complex:
    depth = max(len(next(iter(t1))), len(next(iter(t2))))
    a, b = lift(t1, n, depth), lift(t2, n, depth)
    return sum(measure(weights, w) * a[w] * np.conj(b[w]) for w in words(n, depth))


def random_table(rng, n: int, depth: int, scale: float = 1.0) -> dict:
    return {
        w: complex(rng.normal(0, scale), rng.normal(0, scale))
        for w in words(n, depth)
    }
