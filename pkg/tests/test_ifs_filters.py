import numpy as np
import pytest

import oracle
from conftest import random_cylinder
from wavelab.code_space import (
    CylinderFn,
    IfsSpec,
    adjoint_sigma,
    compose_sigma,
    conditional_expectation,
    inner_product,
    integrate,
    multiply,
    sup_distance,
)
from wavelab.errors import (
    InputError,
    ModuleBasisError,
    PreconditionError,
    UnsupportedConstructionError,
)
from wavelab.ifs_filters import (
    CoefficientTree,
    FilterBank,
    MatrixField,
    analysis,
    apply_loop_group,
    build_indicator,
    build_roots_of_unity,
    connecting_unitary,
    endomorphism_check,
    gram_schmidt_module,
    matrix_field,
    multires_decompose,
    multires_reconstruct,
    synthesis,
    unitarity_report,
    verify_filter,
)


def broken_bank(spec):
    ones = compose_sigma(CylinderFn.ones(spec))
    return FilterBank(spec, (ones,) * spec.N)


def fourier_matrix(n):
    eps = np.exp(2j * np.pi / n)
    return np.array(
        [[eps ** (k * j) for k in range(1, n + 1)] for j in range(1, n + 1)]
    ) / np.sqrt(n)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def test_roots_bank_values(spec2, spec3):
    bank = build_roots_of_unity(spec2)
    assert np.allclose(bank.filters[0].values, [-1, 1])
    assert np.allclose(bank.filters[1].values, [1, 1])
    bank3 = build_roots_of_unity(spec3)
    for n in range(1, 4):
        expected = [np.exp(2j * np.pi * n * l / 3) for l in (1, 2, 3)]
        assert np.allclose(bank3.filters[n - 1].values, expected)
    # branch-averaged cross product vanishes: (m_1 conj(m_2)) averaged
    cross = adjoint_sigma(multiply(bank.filters[0], bank.filters[1].conj()))
    assert abs(cross.values[0]) < 1e-15


def test_roots_bank_rejects_nonuniform(spec_weighted):
    with pytest.raises(UnsupportedConstructionError):
        build_roots_of_unity(spec_weighted)


def test_indicator_bank_values(spec2, spec_weighted):
    bank = build_indicator(spec2)
    assert np.allclose(bank.filters[0].values, [np.sqrt(2), 0])
    assert np.allclose(bank.filters[1].values, [0, np.sqrt(2)])
    wbank = build_indicator(spec_weighted)
    assert np.allclose(wbank.filters[0].values, [2.0, 0])
    assert np.allclose(wbank.filters[1].values, [0, 2.0 / np.sqrt(3)])


def test_indicator_bank_cuntz_on_probes(rng, spec_weighted):
    bank = build_indicator(spec_weighted)
    f = random_cylinder(rng, spec_weighted, 2)
    for j, mj in enumerate(bank.filters):
        for k, mk in enumerate(bank.filters):
            # S_j* S_k f = delta_jk f
            out = adjoint_sigma(multiply(mj.conj(), multiply(mk, compose_sigma(f))))
            target = f if j == k else 0.0 * f
            assert sup_distance(out, target) < 1e-13


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def test_verify_builtin_banks(spec2, spec3):
    for spec in (spec2, spec3):
        for builder in (build_indicator, build_roots_of_unity):
            report = verify_filter(builder(spec), probe_depth=4, tol=1e-13)
            assert report.passed
            assert report.orthonormality_residual < 1e-14
            assert report.completeness < 1e-13


def test_verify_rejects_broken_bank(spec2):
    report = verify_filter(broken_bank(spec2), probe_depth=3, tol=1e-12)
    assert not report.passed
    assert report.orthonormality_residual == pytest.approx(1.0)


def test_verify_report_json(spec2):
    report = verify_filter(build_indicator(spec2), probe_depth=2, tol=1e-12)
    obj = report.to_json()
    assert obj["pass"] is True
    assert len(obj["orthonormality_matrix"]) == 2


def test_completeness_against_oracle(rng, spec2):
    """Batched completeness scan equals the word-by-word reconstruction."""
    bank = build_roots_of_unity(spec2)
    report = verify_filter(bank, probe_depth=3, tol=1e-12)
    worst = 0.0
    for w in oracle.words(2, 3):
        probe = CylinderFn.indicator(spec2, w)
        recon = 0.0 * probe
        for m in bank.filters:
            recon = recon + multiply(m, conditional_expectation(multiply(m.conj(), probe)))
        worst = max(worst, sup_distance(recon, probe))
    assert report.completeness == pytest.approx(worst, abs=1e-15)


# ---------------------------------------------------------------------------
# analysis / synthesis
# ---------------------------------------------------------------------------

def test_analysis_examples(spec2):
    ind = build_indicator(spec2)
    f = CylinderFn.indicator(spec2, [1])
    parts = analysis(ind, f)
    assert parts[0].depth == 0
    assert parts[0].values[0] == pytest.approx(1 / np.sqrt(2))
    assert parts[1].sup_norm() == 0
    assert sup_distance(synthesis(ind, parts), f) < 1e-15

    roots = build_roots_of_unity(spec2)
    one = compose_sigma(CylinderFn.ones(spec2))
    parts = analysis(roots, one)
    assert parts[0].sup_norm() < 1e-15  # the constant rides on m_2 = 1
    assert parts[1].values[0] == pytest.approx(1.0)

    zero = 0.0 * f
    assert all(p.sup_norm() == 0 for p in analysis(ind, zero))


def test_roundtrip_random(rng, spec2, spec3):
    for spec in (spec2, spec3):
        for builder in (build_indicator, build_roots_of_unity):
            bank = builder(spec)
            f = random_cylinder(rng, spec, 3)
            assert sup_distance(synthesis(bank, analysis(bank, f)), f) < 1e-13


# ---------------------------------------------------------------------------
# multiresolution trees
# ---------------------------------------------------------------------------

def test_multires_level_zero(spec2, rng):
    bank = build_roots_of_unity(spec2)
    f = random_cylinder(rng, spec2, 2)
    tree = multires_decompose(bank, f, 0)
    assert tree.is_leaf and tree.leaf is f


def test_multires_packet(spec2, rng):
    bank = build_roots_of_unity(spec2)
    f = random_cylinder(rng, spec2, 2)
    tree = multires_decompose(bank, f, 2)
    leaves = list(tree.leaves())
    assert len(leaves) == 4 and all(l.depth == 0 for l in leaves)
    assert sup_distance(multires_reconstruct(bank, tree), f) < 1e-13
    energy = sum(integrate(l.abs2()).real for l in leaves)
    assert energy == pytest.approx(integrate(f.abs2()).real, abs=1e-12)


def test_multires_single_branch(spec3, rng):
    bank = build_indicator(spec3)
    f = random_cylinder(rng, spec3, 3)
    tree = multires_decompose(bank, f, 3, mode="single")
    # cascade on branch 1: 3 levels leave 2 details per level plus one core
    assert len(list(tree.leaves())) == 2 * 3 + 1
    assert sup_distance(multires_reconstruct(bank, tree), f) < 1e-13


def test_multires_levels_too_large(spec2, rng):
    bank = build_indicator(spec2)
    f = random_cylinder(rng, spec2, 1)
    with pytest.raises(InputError):
        multires_decompose(bank, f, 2)
    with pytest.raises(InputError):
        multires_decompose(bank, f, 1, mode="wavelets")


def test_tree_json_roundtrip(spec2, rng):
    bank = build_indicator(spec2)
    f = random_cylinder(rng, spec2, 2)
    tree = multires_decompose(bank, f, 1)
    back = CoefficientTree.from_json(tree.to_json())
    assert sup_distance(multires_reconstruct(bank, back), f) < 1e-13


# ---------------------------------------------------------------------------
# module Gram-Schmidt
# ---------------------------------------------------------------------------

def test_gram_schmidt_fixes_orthonormal_input(spec2):
    bank = build_indicator(spec2)
    out = gram_schmidt_module(bank.filters)
    for a, b in zip(out.filters, bank.filters):
        assert sup_distance(a, b) < 1e-13


def test_gram_schmidt_example(spec2):
    g1 = CylinderFn(spec2, 1, [1, 1])
    g2 = CylinderFn(spec2, 1, [1, -1])
    out = gram_schmidt_module([g1, g2])
    assert np.allclose(out.filters[0].values, [1, 1])
    assert np.allclose(out.filters[1].values, [1, -1])
    assert verify_filter(out, 3, 1e-12).passed


def test_gram_schmidt_dependent_generators(spec2):
    g1 = CylinderFn(spec2, 1, [1, 1])
    with pytest.raises(ModuleBasisError):
        gram_schmidt_module([g1, g1])


def test_gram_schmidt_random_generators(rng, spec2, spec3):
    for spec in (spec2, spec3):
        gens = [random_cylinder(rng, spec, 2) for _ in range(spec.N)]
        bank = gram_schmidt_module(gens)
        report = verify_filter(bank, probe_depth=3, tol=1e-10)
        assert report.passed
        # output spans the same module: each generator reconstructs from it
        for g in gens:
            recon = 0.0 * g
            for m in bank.filters:
                recon = recon + multiply(
                    m, conditional_expectation(multiply(m.conj(), g))
                )
            assert sup_distance(recon, g) < 1e-10


# ---------------------------------------------------------------------------
# connecting unitaries and the loop-group action
# ---------------------------------------------------------------------------

def test_connecting_unitary_identity(spec2):
    bank = build_indicator(spec2)
    field = connecting_unitary(bank, bank)
    assert unitarity_report(field) < 1e-14
    eye = MatrixField.identity(spec2)
    for row_a, row_b in zip(field.entries, eye.entries):
        for a, b in zip(row_a, row_b):
            assert sup_distance(a, b) < 1e-14


@pytest.mark.parametrize("n", [2, 3])
def test_connecting_unitary_is_fourier_matrix(n):
    spec = IfsSpec(n)
    field = connecting_unitary(build_indicator(spec), build_roots_of_unity(spec))
    got = np.array([[e.values[0] for e in row] for row in field.entries])
    assert np.max(np.abs(got - fourier_matrix(n))) < 1e-13


def test_connecting_unitary_requires_verified_banks(spec2):
    with pytest.raises(PreconditionError):
        connecting_unitary(broken_bank(spec2), build_indicator(spec2))


def test_loop_group_identity_and_hadamard(spec2):
    bank = build_indicator(spec2)
    assert all(
        sup_distance(a, b) < 1e-15
        for a, b in zip(
            apply_loop_group(bank, MatrixField.identity(spec2)).filters, bank.filters
        )
    )
    hadamard = MatrixField.from_matrix(spec2, fourier_matrix(2))
    acted = apply_loop_group(bank, hadamard)
    roots = build_roots_of_unity(spec2)
    for a, b in zip(acted.filters, roots.filters):
        assert sup_distance(a, b) < 1e-14


def test_loop_group_non_unitary_fails_verification(spec2):
    bank = build_indicator(spec2)
    bad = MatrixField.from_matrix(spec2, np.diag([2.0, 1.0]))
    acted = apply_loop_group(bank, bad)
    assert not verify_filter(acted, 3, 1e-12).passed


def _random_unitary_field(rng, spec, depth):
    """Pointwise unitary with genuinely word-dependent entries."""
    size = spec.N**depth
    entries = np.empty((spec.N, spec.N, size), dtype=complex)
    for w in range(size):
        a = rng.normal(size=(spec.N, spec.N)) + 1j * rng.normal(size=(spec.N, spec.N))
        q, r = np.linalg.qr(a)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        entries[:, :, w] = q
    return MatrixField(
        spec,
        tuple(
            tuple(CylinderFn(spec, depth, entries[j, k]) for k in range(spec.N))
            for j in range(spec.N)
        ),
    )


def test_loop_group_group_law(rng, spec2):
    bank = build_indicator(spec2)
    u = _random_unitary_field(rng, spec2, 1)
    v = _random_unitary_field(rng, spec2, 1)
    lhs = apply_loop_group(apply_loop_group(bank, u), v)
    rhs = apply_loop_group(bank, u.matmul(v))
    for a, b in zip(lhs.filters, rhs.filters):
        assert sup_distance(a, b) < 1e-12


def test_connect_recovers_applied_unitary(rng, spec2, spec3):
    for spec in (spec2, spec3):
        bank = build_roots_of_unity(spec)
        u = _random_unitary_field(rng, spec, 1)
        acted = apply_loop_group(bank, u)
        assert verify_filter(acted, 3, 1e-12).passed
        recovered = connecting_unitary(bank, acted)
        for j in range(spec.N):
            for k in range(spec.N):
                assert sup_distance(recovered.entries[j][k], u.entries[j][k]) < 1e-13


def test_module_inner_product_identity(rng, spec2):
    # <m (h o sigma), n (g o sigma)> = int conj(g o sigma) E(conj(n) m) (h o sigma)
    m = random_cylinder(rng, spec2, 1)
    n = random_cylinder(rng, spec2, 1)
    h = random_cylinder(rng, spec2, 1)
    g = random_cylinder(rng, spec2, 1)
    lhs = inner_product(
        multiply(m, compose_sigma(h)), multiply(n, compose_sigma(g))
    )
    weight = conditional_expectation(multiply(n.conj(), m))
    rhs = integrate(
        multiply(compose_sigma(g).conj(), multiply(weight, compose_sigma(h)))
    )
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_branch_orthogonality_implies_l2(rng, spec3):
    # E(conj(m1) m2) = 0 forces <m1, m2> = 0
    bank = build_roots_of_unity(spec3)
    m1, m2 = bank.filters[0], bank.filters[1]
    assert conditional_expectation(multiply(m1.conj(), m2)).sup_norm() < 1e-14
    assert abs(inner_product(m2, m1)) < 1e-14


# ---------------------------------------------------------------------------
# branch-sample matrix and endomorphism extension
# ---------------------------------------------------------------------------

def test_matrix_field_examples(spec2):
    ind = matrix_field(build_indicator(spec2))
    assert unitarity_report(ind) < 1e-14
    stacked = ind.stacked()
    assert np.allclose(stacked[:, :, 0], np.eye(2))
    roots = matrix_field(build_roots_of_unity(spec2))
    eps = -1.0
    expected = np.array([[eps, eps**2], [eps**2, eps**4]]) / np.sqrt(2)
    assert np.allclose(roots.stacked()[:, :, 0], expected)
    assert unitarity_report(roots) < 1e-14
    broken = matrix_field(broken_bank(spec2))
    assert unitarity_report(broken) > 0.99


def test_matrix_field_json_roundtrip(spec3):
    field = matrix_field(build_roots_of_unity(spec3))
    back = MatrixField.from_json(field.to_json())
    assert unitarity_report(back) < 1e-13


def test_endomorphism_check(rng, spec2):
    one = CylinderFn.ones(spec2)
    ind = build_indicator(spec2)
    assert endomorphism_check(ind, one, 2) < 1e-15
    f = random_cylinder(rng, spec2, 1)
    assert endomorphism_check(ind, f, 2) < 1e-14
    roots = build_roots_of_unity(spec2)
    assert endomorphism_check(roots, f, 3) < 1e-13
    assert endomorphism_check(broken_bank(spec2), f, 2) > 0.5


def test_bank_json_roundtrip(spec_weighted):
    bank = build_indicator(spec_weighted)
    back = FilterBank.from_json(bank.to_json())
    assert back.spec == bank.spec
    for a, b in zip(back.filters, bank.filters):
        assert sup_distance(a, b) == 0
