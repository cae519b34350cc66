import numpy as np
import pytest
from hypothesis import given, settings

from coeffalg import (Algebra, AlgebraMap, PositiveFunctional, RejectedInput, build_truncated_representation,
                      check_isometry_corollary, find_complete_transfer, gram_matrix, verify_coefficient_relations,
                      verify_lemma_adjointness)
from coeffalg import corpus
from coeffalg.witness import LevelSpace, unit_power
from coeffalg.algebra import DEFAULT_TOL
from coeffalg.errors import NumericalInstabilityError
from conftest import block_maps, make_block_map
from oracles import brute_gram


def _rep(name, **kw):
    inst = corpus.get(name)
    return inst, build_truncated_representation(inst.algebra, inst.delta, inst.delta_star, **kw)


def test_gram_scalar_algebra():
    alg = Algebra((1,))
    ident = AlgebraMap.identity(alg)
    G = gram_matrix(alg, ident, ident, PositiveFunctional.trace(alg), 0)
    assert G.tolist() == [[1]]


def test_gram_corner_examples():
    inst = corpus.corner()
    f = PositiveFunctional.trace(inst.algebra, normalized=False)
    for n in (1, -1):
        G = gram_matrix(inst.algebra, inst.delta, inst.delta_star, f, n)
        assert np.array_equal(G, np.diag([1, 0]))
    G0 = gram_matrix(inst.algebra, inst.delta, inst.delta_star, f, 0)
    assert np.array_equal(G0, np.eye(2))


@pytest.mark.parametrize("name", corpus.COMPLETE)
def test_gram_matches_oracle(name, rng):
    inst = corpus.get(name)
    dims = inst.algebra.block_dims
    dens = []
    for d in dims:
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        dens.append(z @ z.conj().T)
    f = PositiveFunctional(inst.algebra, tuple(dens))
    for n in range(-3, 4):
        G = gram_matrix(inst.algebra, inst.delta, inst.delta_star, f, n)
        ref = brute_gram(dims, inst.delta.matrix, inst.delta_star.matrix, dens, n)
        assert np.abs(G - ref).max() <= 1e-12 * max(1, np.abs(ref).max())


@pytest.mark.parametrize("name", corpus.COMPLETE)
def test_gram_formulas_agree_at_level_zero(name):
    inst = corpus.get(name)
    f = PositiveFunctional.trace(inst.algebra)
    G = gram_matrix(inst.algebra, inst.delta, inst.delta_star, f, 0)
    one = unit_power(inst.delta, 0)
    assert (one - inst.algebra.one).norm() == 0
    ref = brute_gram(inst.algebra.block_dims, inst.delta.matrix, inst.delta_star.matrix, f.densities, 0)
    assert np.abs(G - ref).max() <= 1e-14


def test_level_space_rejects_negative_gram():
    with pytest.raises(NumericalInstabilityError):
        LevelSpace.from_gram(0, np.diag([1.0, -1e-3]), DEFAULT_TOL)


def test_level_space_orthonormal(rng):
    z = rng.standard_normal((5, 3))
    G = z @ z.T
    ls = LevelSpace.from_gram(0, G, DEFAULT_TOL)
    assert ls.quotient_dim == 3
    W = ls.kept_basis
    assert np.abs(W.conj().T @ G @ W - np.eye(3)).max() <= 1e-10


def test_scalar_identity_is_bilateral_shift():
    alg = Algebra((1,))
    ident = AlgebraMap.identity(alg)
    rep = build_truncated_representation(alg, ident, ident, window=3)
    assert list(rep.level_dims.values()) == [1] * 7
    assert np.allclose(rep.U(), np.eye(7, k=-1), atol=1e-14)
    assert np.allclose(rep.Ustar(), np.eye(7, k=1), atol=1e-14)
    assert np.allclose(rep.pi(alg.element([2.5])), 2.5 * np.eye(7), atol=1e-14)
    rel = verify_coefficient_relations(rep)
    assert rel.verdict and rel.max_residual <= 1e-14


@pytest.mark.parametrize("name,dims", [
    ("identity", [5] * 9),
    ("corner", [1, 1, 1, 1, 2, 1, 1, 1, 1]),
    ("m2_shift", [0, 0, 0, 4, 8, 4, 0, 0, 0]),
    ("cyclic4", [4] * 9),
    ("m2c_corner", [0, 0, 0, 2, 5, 2, 0, 0, 0]),
])
def test_level_dims(name, dims):
    _, rep = _rep(name)
    assert list(rep.level_dims.values()) == dims
    assert rep.total_dim == sum(dims)


@pytest.mark.parametrize("name", corpus.COMPLETE)
def test_lemma_adjointness(name):
    _, rep = _rep(name)
    lem = verify_lemma_adjointness(rep)
    assert lem.verdict and lem.max_residual <= 1e-12


@pytest.mark.parametrize("name", corpus.COMPLETE)
def test_relations_hold(name):
    _, rep = _rep(name)
    rel = verify_coefficient_relations(rep)
    assert rel.verdict, rel.failed(1e-9)
    assert rel.max_residual <= 1e-10
    assert rel.info["pi_faithful"]


def test_corner_UstarU_is_first_block():
    inst, rep = _rep("corner")
    I = rep.interior_indices()
    UsU = rep.Ustar() @ rep.U()
    target = rep.pi(inst.algebra.element([1, 0]))
    assert np.abs((UsU - target)[np.ix_(I, I)]).max() <= 1e-12
    # the interior is not an isometry: defect reaches 1
    assert np.linalg.norm(UsU[np.ix_(I, I)] - np.eye(I.size), 2) >= 0.9


def test_m2_shift_UUstar_is_first_block():
    inst, rep = _rep("m2_shift")
    I = rep.interior_indices()
    target = rep.pi(inst.algebra.block_projection([0]))
    assert np.abs((rep.U() @ rep.Ustar() - target)[:, I]).max() <= 1e-12


def test_adjointness_random_vectors(rng):
    _, rep = _rep("m2c_corner")
    I = rep.interior_indices()
    U, Us = rep.U(), rep.Ustar()
    for _ in range(10):
        h = np.zeros(rep.total_dim, dtype=complex)
        g = np.zeros(rep.total_dim, dtype=complex)
        h[I] = rng.standard_normal(I.size) + 1j * rng.standard_normal(I.size)
        g[I] = rng.standard_normal(I.size) + 1j * rng.standard_normal(I.size)
        assert abs(np.vdot(g, U @ h) - np.vdot(Us @ g, h)) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(block_maps(injective=True, max_blocks=3))
def test_random_complete_instances(args):
    alg, delta = make_block_map(*args)
    cert = find_complete_transfer(delta)
    rep = build_truncated_representation(alg, delta, cert.delta_star, window=3)
    assert verify_lemma_adjointness(rep).max_residual <= 1e-10
    rel = verify_coefficient_relations(rep)
    assert rel.max_residual <= 1e-10, rel.failed(1e-10)
    assert rel.verdict


@pytest.mark.parametrize("name", corpus.COMPLETE)
def test_window_stability(name):
    inst = corpus.get(name)
    small = build_truncated_representation(inst.algebra, inst.delta, inst.delta_star, window=3)
    large = build_truncated_representation(inst.algebra, inst.delta, inst.delta_star, window=5)
    for n in small.interior_levels:
        assert small.levels[n].quotient_dim == large.levels[n].quotient_dim
        for blocks_s, blocks_l in ((small.U_blocks, large.U_blocks), (small.Ustar_blocks, large.Ustar_blocks)):
            if blocks_s[n].size:
                assert np.abs(blocks_s[n] - blocks_l[n]).max() <= 1e-12
        for k in range(inst.algebra.dim):
            a, b = small.pi_basis[k][n], large.pi_basis[k][n]
            if a.size:
                assert np.abs(a - b).max() <= 1e-12


@pytest.mark.parametrize("name", corpus.COMPLETE)
def test_pi_is_star_homomorphism(name, rng):
    inst, rep = _rep(name)
    alg = inst.algebra
    for _ in range(5):
        a, b = alg.random_element(rng), alg.random_element(rng)
        for n in rep.level_range:
            pa, pb = rep.pi_level(a, n), rep.pi_level(b, n)
            if pa.size:
                assert np.abs(rep.pi_level(a @ b, n) - pa @ pb).max() <= 1e-10
                assert np.abs(rep.pi_level(a.H, n) - pa.conj().T).max() <= 1e-10


@pytest.mark.parametrize("name,isometry", [
    ("identity", True), ("cyclic4", True), ("corner", False), ("m2_shift", False), ("m2c_corner", False),
])
def test_isometry_corollary(name, isometry):
    inst, rep = _rep(name)
    cert = find_complete_transfer(inst.delta)
    rep_iso = check_isometry_corollary(inst.delta, cert, rep)
    assert rep_iso.info["isometry"] is isometry
    assert rep_iso.info["monomorphism"] is isometry
    assert rep_iso.info["hereditary_range"]
    assert rep_iso.verdict
    if isometry:
        assert rep_iso.residuals["UstarU_identity"] <= 1e-12
    else:
        assert rep_iso.info["partial_isometry_defect"] >= 0.9


@pytest.mark.parametrize("name", corpus.INCOMPLETE)
def test_rejects_incomplete_pairs(name):
    inst = corpus.get(name)
    with pytest.raises(RejectedInput, match="not complete"):
        build_truncated_representation(inst.algebra, inst.delta, inst.delta_star)


def test_rejects_bad_window():
    inst = corpus.corner()
    with pytest.raises(ValueError):
        build_truncated_representation(inst.algebra, inst.delta, inst.delta_star, window=0)


def test_multiple_functionals():
    inst = corpus.m2c_corner()
    alg = inst.algebra
    tr = PositiveFunctional.trace(alg)
    vec = PositiveFunctional(alg, (np.diag([1.0, 0.0]), np.zeros((1, 1))))
    assert tr.faithful and not vec.faithful
    single = build_truncated_representation(alg, inst.delta, inst.delta_star, f=tr, window=3)
    other = build_truncated_representation(alg, inst.delta, inst.delta_star, f=vec, window=3)
    both = build_truncated_representation(alg, inst.delta, inst.delta_star, f=[tr, vec], window=3)
    for n in both.level_range:
        assert both.level_dims[n] == single.level_dims[n] + other.level_dims[n]
    assert verify_lemma_adjointness(both).verdict
    rel = verify_coefficient_relations(both)
    assert rel.verdict and rel.info["pi_faithful"]
    # a non-faithful functional alone gives a non-faithful pi but the relations still hold
    rel_other = verify_coefficient_relations(other)
    assert not rel_other.info["pi_faithful"]
    assert rel_other.max_residual <= 1e-10


def test_functional_validation():
    alg = Algebra((2,))
    with pytest.raises(RejectedInput):
        PositiveFunctional(alg, (np.diag([1.0, -1.0]),))
    with pytest.raises(RejectedInput):
        PositiveFunctional(alg, (np.array([[1.0, 1.0], [0.0, 1.0]]),))
    with pytest.raises(RejectedInput):
        PositiveFunctional(alg, ())
    f = PositiveFunctional.trace(alg)
    assert f(alg.one) == pytest.approx(1.0)
    assert PositiveFunctional.trace(alg, normalized=False)(alg.one) == pytest.approx(2.0)
