import numpy as np
import pytest

from wavelab.circle_filters import LaurentPoly, cuntz_residuals
from wavelab.classic_mra import (
    cascade,
    d4_taps,
    detail_taps,
    filterbank_roundtrip,
    fourier_product,
    haar_taps,
    harmonic_profile,
    shift_orthonormality,
    wavelet_detail,
)
from wavelab.errors import InputError, PreconditionError


def taps_as_poly(taps):
    return LaurentPoly.from_coefficients(0, taps)


# ---------------------------------------------------------------------------
# cascade
# ---------------------------------------------------------------------------

def test_haar_cascade_is_box_after_one_iteration():
    profile = cascade(haar_taps(), 2, 20, 512)
    assert profile.iterations == 1
    assert profile.sup_diffs == (0.0,)
    assert profile.converged and not profile.diverged
    assert np.allclose(profile.samples[:512], 1.0)
    assert profile.samples[512] == 0.0
    assert profile.integral == pytest.approx(1.0)


def test_d4_cascade_converges_to_exact_values():
    profile = cascade(d4_taps(), 2, 64, 256, tol=1e-9)
    assert profile.converged
    res = profile.resolution
    assert profile.samples[res].real == pytest.approx((1 + np.sqrt(3)) / 2, abs=1e-9)
    assert profile.samples[2 * res].real == pytest.approx((1 - np.sqrt(3)) / 2, abs=1e-9)
    assert abs(profile.integral - 1.0) < 1e-9


def test_d4_taps_are_an_orthogonal_pair():
    # the taps themselves: sum sqrt2, alternating sum 0, shift-2 orthogonality
    c = d4_taps()
    assert c.sum() == pytest.approx(np.sqrt(2))
    assert (c * (-1.0) ** np.arange(4)).sum() == pytest.approx(0.0, abs=1e-15)
    assert np.dot(c[:2], c[2:]) == pytest.approx(0.0, abs=1e-15)
    report = cuntz_residuals(
        [taps_as_poly(c), taps_as_poly(detail_taps(c))], 2
    )
    assert report.orthonormality < 1e-15
    assert report.completeness < 1e-15


def test_cascade_integral_conserved_each_iteration():
    taps = d4_taps()
    profile = cascade(taps, 2, 1, 256)
    for _ in range(4):
        nxt = cascade(taps, 2, profile.iterations + 1, 256)
        assert abs(nxt.integral - 1.0) < 1e-12
        profile = nxt


def test_cascade_rejects_bad_tap_sum():
    with pytest.raises(PreconditionError):
        cascade([1.0, 0.0], 2, 5, 64)


def test_cascade_flags_divergence():
    # valid sum but wildly non-contractive mask: sup-differences blow up
    taps = np.array([4.0, -6.0, 4.0, -0.5857864376269049])
    taps = taps / taps.sum() * np.sqrt(2)
    profile = cascade(taps, 2, 60, 128)
    assert profile.diverged and not profile.converged


# ---------------------------------------------------------------------------
# detail function
# ---------------------------------------------------------------------------

def test_haar_detail_is_step():
    profile = cascade(haar_taps(), 2, 5, 512)
    psi = wavelet_detail(profile, detail_taps(haar_taps()))
    assert np.allclose(psi[:256], 1.0)
    assert np.allclose(psi[256:512], -1.0)
    assert psi[512] == 0.0
    assert abs(psi.sum()) / 512 < 1e-14


def test_detail_with_scaling_taps_reproduces_phi():
    profile = cascade(haar_taps(), 2, 5, 256)
    psi = wavelet_detail(profile, haar_taps())
    assert np.allclose(psi[: profile.samples.shape[0]], profile.samples)


def test_d4_detail_mean_vanishes():
    profile = cascade(d4_taps(), 2, 40, 512, tol=1e-8)
    psi = wavelet_detail(profile, detail_taps(d4_taps()))
    assert abs(psi.sum() / 512) < 1e-8


# ---------------------------------------------------------------------------
# Fourier-domain product
# ---------------------------------------------------------------------------

def test_fourier_product_at_zero():
    m0 = taps_as_poly(haar_taps())
    value, tail = fourier_product(m0, 0.0, 25)
    assert value == pytest.approx(1.0)
    assert tail < 1e-15


def test_fourier_product_haar_closed_form():
    # infinite product equals (e^{it} - 1) / (it)
    m0 = taps_as_poly(haar_taps())
    value, _ = fourier_product(m0, 2 * np.pi, 40)
    assert abs(value) < 1e-9
    value, _ = fourier_product(m0, np.pi, 40)
    assert abs(value) == pytest.approx(2 / np.pi, abs=1e-9)
    for t in (0.3, 1.7, 4.0):
        value, _ = fourier_product(m0, t, 48)
        closed = (np.exp(1j * t) - 1.0) / (1j * t)
        assert value == pytest.approx(closed, abs=1e-9)


def test_fourier_product_precondition():
    with pytest.raises(PreconditionError):
        fourier_product(LaurentPoly.from_coefficients(0, [0.5, 0.5]), 1.0, 10)


# ---------------------------------------------------------------------------
# filter-bank pipeline
# ---------------------------------------------------------------------------

def test_haar_pipeline_hand_example():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    h = haar_taps()
    result = filterbank_roundtrip(x, [h, detail_taps(h)], [h, detail_taps(h)], 2)
    assert np.allclose(result.subbands[0], np.array([3.0, 7.0]) / np.sqrt(2))
    assert np.allclose(result.subbands[1], np.array([-1.0, -1.0]) / np.sqrt(2))
    assert result.pr_error < 1e-14
    assert result.energy_in == pytest.approx(30.0)
    assert result.energy_subbands == pytest.approx(30.0)


def test_delta_signal_reconstructs():
    x = np.zeros(8, dtype=complex)
    x[3] = 1.0
    d = d4_taps()
    result = filterbank_roundtrip(x, [d, detail_taps(d)], [d, detail_taps(d)], 2)
    assert result.pr_error < 1e-14


def test_random_signal_roundtrips():
    rng = np.random.default_rng(7)
    x = rng.normal(size=1024) + 1j * rng.normal(size=1024)
    for taps in (haar_taps(), d4_taps()):
        result = filterbank_roundtrip(
            x, [taps, detail_taps(taps)], [taps, detail_taps(taps)], 2
        )
        assert result.pr_error < 1e-12
        assert result.energy_error < 1e-10


def test_pipeline_rejects_bad_length():
    with pytest.raises(InputError):
        filterbank_roundtrip(np.ones(5), [haar_taps()], [haar_taps()], 2)


def test_pr_fails_iff_coefficient_residuals_do():
    rng = np.random.default_rng(8)
    junk = [rng.normal(size=4), rng.normal(size=4)]
    x = rng.normal(size=64)
    result = filterbank_roundtrip(x, junk, junk, 2)
    report = cuntz_residuals([taps_as_poly(t) for t in junk], 2)
    assert result.pr_error > 1e-3
    assert report.orthonormality > 1e-3


def test_offset_taps_still_reconstruct():
    # taps declared to start at degree -1: same bank up to delay
    rng = np.random.default_rng(9)
    x = rng.normal(size=32)
    h = haar_taps()
    result = filterbank_roundtrip(
        x,
        [h, detail_taps(h)],
        [h, detail_taps(h)],
        2,
        analysis_offsets=[-2, -2],
        synthesis_offsets=[-2, -2],
    )
    assert result.pr_error < 1e-13


# ---------------------------------------------------------------------------
# shift Gram and the periodized transform
# ---------------------------------------------------------------------------

def test_haar_gram_is_exactly_identity():
    profile = cascade(haar_taps(), 2, 5, 512)
    gram, deviation = shift_orthonormality(profile)
    assert deviation == 0.0
    assert np.allclose(gram, np.eye(gram.shape[0]))


def test_d4_gram_deviation_small():
    profile = cascade(d4_taps(), 2, 15, 1024, tol=1e-4)
    _, deviation = shift_orthonormality(profile)
    assert deviation < 1e-3


def test_stretched_box_fails_gram():
    # width-2 box: overlapping shifts, flagged by an O(1) deviation
    profile = cascade(haar_taps(), 2, 3, 128)
    stretched = type(profile)(
        taps=profile.taps,
        dilation=2,
        resolution=128,
        samples=np.concatenate([profile.samples[:-1], profile.samples]),
        iterations=1,
        sup_diffs=(0.0,),
        converged=True,
        diverged=False,
    )
    _, deviation = shift_orthonormality(stretched)
    assert deviation > 0.5


def test_harmonic_profile_near_one_for_orthonormal():
    profile = cascade(haar_taps(), 2, 5, 512)
    values = harmonic_profile(profile, np.linspace(0, 2 * np.pi, 17))
    assert np.max(np.abs(values - 1.0)) < 1e-13
    d4 = cascade(d4_taps(), 2, 30, 512, tol=1e-7)
    values = harmonic_profile(d4, np.linspace(0, 2 * np.pi, 17))
    assert np.max(np.abs(values - 1.0)) < 1e-3


def test_dilation_shift_commutation_on_samples():
    # U T U^{-1} = T^2 for U f = f(./2)/sqrt2 and T f = f(. - 1), checked
    # pointwise on an explicit function
    f = lambda x: np.exp(-((x - 3.1) ** 2)) * np.cos(x)
    u_inv = lambda g: (lambda x: np.sqrt(2) * g(2 * x))
    u = lambda g: (lambda x: g(x / 2) / np.sqrt(2))
    t = lambda g: (lambda x: g(x - 1))
    x = np.linspace(-4, 8, 241)
    lhs = u(t(u_inv(f)))(x)
    rhs = t(t(f))(x)
    assert np.max(np.abs(lhs - rhs)) < 1e-14
