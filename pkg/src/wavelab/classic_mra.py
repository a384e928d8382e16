"""Scaling functions on the line and the multirate filter-bank pipeline.

The cascade iteration phi <- sqrt(N) sum_k c_k phi(N x - k) is run on an
integer-resolution grid, where N x - k lands exactly on grid points, so
grid iterates coincide with the function-space iterates pointwise.  The
seed is the unit box.

The analysis/synthesis pipeline mirrors the circle operators in sequence
space with periodic boundary: analysis correlates with the conjugate taps
and decimates, synthesis zero-stuffs and convolves.  For taps from a bank
that satisfies the averaged filter conditions the round trip reconstructs
the input exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, PreconditionError
from .circle_filters import LaurentPoly

TAP_SUM_TOL = 1e-12
DIVERGENCE_RUN = 5


@dataclass(frozen=True)
class ScalingProfile:
    """Sampled fixed point of the two-scale equation.

    ``samples[i]`` approximates phi(i / resolution) on the support
    [0, (len(taps) - 1) / (N - 1)].
    """

    taps: np.ndarray
    dilation: int
    resolution: int
    samples: np.ndarray
    iterations: int
    sup_diffs: tuple[float, ...]
    converged: bool
    diverged: bool

    def grid(self) -> np.ndarray:
        return np.arange(self.samples.shape[0]) / self.resolution

    @property
    def integral(self) -> complex:
        return complex(self.samples.sum() / self.resolution)

    @property
    def last_sup_diff(self) -> float:
        return self.sup_diffs[-1] if self.sup_diffs else float("nan")


def _refine(values: np.ndarray, out_len: int, taps: np.ndarray, n: int, res: int) -> np.ndarray:
    out = np.zeros(out_len, dtype=complex)
    scale = np.sqrt(n)
    m = values.shape[0]
    for k, c in enumerate(taps):
        if c == 0:
            continue
        shift = k * res
        i_min = -(-shift // n)  # ceil(shift / n)
        i_max = min(out_len - 1, (m - 1 + shift) // n)
        if i_min > i_max:
            continue
        src = np.arange(i_min, i_max + 1) * n - shift
        out[i_min : i_max + 1] += scale * c * values[src]
    return out


def cascade(
    taps: Sequence[complex],
    dilation: int = 2,
    iterations: int = 20,
    resolution: int = 1024,
    tol: float = 1e-6,
) -> ScalingProfile:
    """Iterate the two-scale refinement from the unit box.

    Preconditions: at least two taps summing to sqrt(N) within 1e-12
    (otherwise no integrable fixed point with unit mass exists).  The
    iteration stops early at an exact fixed point, and flags divergence
    when the sup-difference grows for DIVERGENCE_RUN consecutive steps.
    """
    taps = np.asarray(taps, dtype=complex)
    n = int(dilation)
    if n < 2:
        raise InputError("dilation factor must be >= 2")
    if taps.ndim != 1 or taps.shape[0] < 2:
        raise InputError("need at least two taps")
    if resolution < 1:
        raise InputError("resolution must be a positive integer")
    tap_sum = complex(taps.sum())
    if abs(tap_sum - np.sqrt(n)) > TAP_SUM_TOL:
        raise PreconditionError(
            f"taps must sum to sqrt({n}) = {np.sqrt(n):.15g}, got {tap_sum:.15g}"
        )
    out_len = (taps.shape[0] - 1) * resolution // (n - 1) + 1
    phi = np.zeros(out_len, dtype=complex)
    phi[: min(resolution, out_len)] = 1.0  # unit box on [0, 1)

    sup_diffs: list[float] = []
    growing = 0
    diverged = False
    done = 0
    for it in range(iterations):
        nxt = _refine(phi, out_len, taps, n, resolution)
        diff = float(np.max(np.abs(nxt - phi)))
        sup_diffs.append(diff)
        phi = nxt
        done = it + 1
        if diff == 0.0:
            break
        if len(sup_diffs) > 1 and diff > sup_diffs[-2]:
            growing += 1
            if growing >= DIVERGENCE_RUN:
                diverged = True
                break
        else:
            growing = 0
    converged = bool(sup_diffs and sup_diffs[-1] < tol and not diverged)
    phi.setflags(write=False)
    return ScalingProfile(
        taps=taps,
        dilation=n,
        resolution=resolution,
        samples=phi,
        iterations=done,
        sup_diffs=tuple(sup_diffs),
        converged=converged,
        diverged=diverged,
    )


def wavelet_detail(profile: ScalingProfile, detail_taps: Sequence[complex]) -> np.ndarray:
    """Samples of psi(x) = sqrt(N) sum_k d_k phi(N x - k) on the same grid."""
    d = np.asarray(detail_taps, dtype=complex)
    if d.ndim != 1 or d.shape[0] < 1:
        raise InputError("need at least one detail tap")
    n = profile.dilation
    res = profile.resolution
    out_len = ((d.shape[0] - 1) * res + profile.samples.shape[0] - 1) // n + 1
    return _refine(profile.samples, out_len, d, n, res)


def fourier_product(m0: LaurentPoly, t: float, terms: int) -> tuple[complex, float]:
    """Truncated product prod_{k=1..K} m0(e^{i t / 2^k}) / sqrt(2).

    Requires m0(1) = sqrt(2) (each factor then tends to 1), and reports the
    K-term tail as |value_K - value_{K-1}|.
    """
    if terms < 0:
        raise InputError("term count must be >= 0")
    if abs(m0(1.0) - np.sqrt(2.0)) > 1e-12:
        raise PreconditionError("m0(1) must equal sqrt(2) for the product to converge")
    value = 1.0 + 0.0j
    prev = value
    for k in range(1, terms + 1):
        prev = value
        value = value * m0(np.exp(1j * t / 2.0**k)) / np.sqrt(2.0)
    return complex(value), float(abs(value - prev))


@dataclass(frozen=True)
class FilterbankResult:
    subbands: tuple[np.ndarray, ...]
    reconstruction: np.ndarray
    pr_error: float
    energy_in: float
    energy_subbands: float

    @property
    def energy_error(self) -> float:
        return abs(self.energy_in - self.energy_subbands)


def filterbank_roundtrip(
    signal: Sequence[complex],
    analysis_taps: Sequence[Sequence[complex]],
    synthesis_taps: Sequence[Sequence[complex]],
    n: int,
    analysis_offsets: Sequence[int] | None = None,
    synthesis_offsets: Sequence[int] | None = None,
) -> FilterbankResult:
    """Filter, decimate by N, zero-stuff, dual-filter, and sum (periodic).

    Band b computes sub[k] = sum_u conj(a_b[u]) x[N k + u + off], the
    sequence form of the adjoint weighted composition; synthesis applies
    the weighted composition itself.  Offsets let taps start at a nonzero
    degree.
    """
    x = np.asarray(signal, dtype=complex)
    if x.ndim != 1 or x.shape[0] < 1:
        raise InputError("signal must be a nonempty 1-d sequence")
    length = x.shape[0]
    if n < 2:
        raise InputError("band count must be >= 2")
    if length % n != 0:
        raise InputError(f"signal length {length} not divisible by {n}")
    a_banks = [np.asarray(t, dtype=complex) for t in analysis_taps]
    s_banks = [np.asarray(t, dtype=complex) for t in synthesis_taps]
    if len(a_banks) != len(s_banks):
        raise InputError("analysis and synthesis bank counts differ")
    a_off = list(analysis_offsets or [0] * len(a_banks))
    s_off = list(synthesis_offsets or [0] * len(s_banks))
    if len(a_off) != len(a_banks) or len(s_off) != len(s_banks):
        raise InputError("offset count differs from bank count")

    base = n * np.arange(length // n)
    subbands = []
    recon = np.zeros(length, dtype=complex)
    for a, s, oa, os in zip(a_banks, s_banks, a_off, s_off):
        sub = np.zeros(length // n, dtype=complex)
        for u, c in enumerate(a):
            sub += np.conj(c) * x[(base + u + oa) % length]
        subbands.append(sub)
        up = np.zeros(length, dtype=complex)
        up[::n] = sub
        for v, c in enumerate(s):
            recon += c * np.roll(up, v + os)
    pr_error = float(np.max(np.abs(recon - x)))
    energy_in = float(np.sum(np.abs(x) ** 2))
    energy_sub = float(sum(np.sum(np.abs(s) ** 2) for s in subbands))
    return FilterbankResult(tuple(subbands), recon, pr_error, energy_in, energy_sub)


def shift_autocorrelation(profile: ScalingProfile) -> np.ndarray:
    """Inner products g_m = <phi, phi(. - m)> for m = 0..K by grid quadrature."""
    phi = profile.samples
    res = profile.resolution
    k_max = (phi.shape[0] - 1) // res
    out = np.zeros(k_max + 1, dtype=complex)
    for m in range(k_max + 1):
        shift = m * res
        out[m] = np.vdot(phi[: phi.shape[0] - shift], phi[shift:]) / res
    return out


def shift_orthonormality(profile: ScalingProfile) -> tuple[np.ndarray, float]:
    """Gram matrix of the integer shifts of phi and its deviation from I."""
    g = shift_autocorrelation(profile)
    k = g.shape[0] - 1
    size = 2 * k + 1
    gram = np.zeros((size, size), dtype=complex)
    for a in range(size):
        for b in range(size):
            m = a - b
            if abs(m) > k:
                continue  # shifts further apart than the support: no overlap
            gram[a, b] = g[m] if m >= 0 else np.conj(g[-m])
    deviation = float(np.max(np.abs(gram - np.eye(size))))
    return gram, deviation


def harmonic_profile(profile: ScalingProfile, t_values: Sequence[float]) -> np.ndarray:
    """Samples of the shift symbol sum_m <phi, phi(. - m)> e^{-i m t}.

    By Poisson summation this equals the periodized squared Fourier
    transform of phi; it is identically 1 exactly when the integer shifts
    are orthonormal.
    """
    g = shift_autocorrelation(profile)
    t = np.asarray(t_values, dtype=float)
    out = np.full(t.shape, g[0], dtype=complex)
    for m in range(1, g.shape[0]):
        out += g[m] * np.exp(-1j * m * t) + np.conj(g[m]) * np.exp(1j * m * t)
    return out


def haar_taps() -> np.ndarray:
    return np.array([1.0, 1.0]) / np.sqrt(2.0)


def d4_taps() -> np.ndarray:
    """Four-tap orthogonal filter with two vanishing moments (sum sqrt 2)."""
    s3 = np.sqrt(3.0)
    return np.array([1.0 + s3, 3.0 + s3, 3.0 - s3, 1.0 - s3]) / (4.0 * np.sqrt(2.0))


def detail_taps(taps: Sequence[complex]) -> np.ndarray:
    """Alternating-flip high-pass partner d_k = (-1)^k conj(c_{L-1-k})."""
    c = np.asarray(taps, dtype=complex)
    signs = (-1.0) ** np.arange(c.shape[0])
    return signs * np.conj(c[::-1])
