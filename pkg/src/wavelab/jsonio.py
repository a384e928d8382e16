"""Complex-valued JSON plumbing.

Every file format in this package serializes a complex number as a
two-element ``[re, im]`` list.  ``dumps`` sorts keys so that identical
inputs produce byte-identical output.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .errors import InputError


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(obj: Any) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    raise InputError(f"expected [re, im] pair, got {obj!r}")


def encode_cvector(values) -> list[list[float]]:
    return [encode_complex(z) for z in np.asarray(values).ravel()]


def decode_cvector(obj) -> np.ndarray:
    if not isinstance(obj, (list, tuple)):
        raise InputError("expected a list of [re, im] pairs")
    return np.array([decode_complex(z) for z in obj], dtype=np.complex128)


def encode_cmatrix(m) -> list[list[list[float]]]:
    m = np.asarray(m)
    return [encode_cvector(row) for row in m]


def decode_cmatrix(obj) -> np.ndarray:
    if not isinstance(obj, (list, tuple)) or not obj:
        raise InputError("expected a nested list of [re, im] pairs")
    return np.array([decode_cvector(row) for row in obj], dtype=np.complex128)


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True)


def load_file(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def dump_file(path: str, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")
