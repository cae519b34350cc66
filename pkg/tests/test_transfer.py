import numpy as np
import pytest
from hypothesis import given, settings

from coeffalg import (Algebra, AlgebraMap, NoCompleteTransfer, RejectedInput, check_complete, check_hereditary,
                      check_nondegenerate, check_partial_automorphism, compare_transfer_operators,
                      find_complete_transfer, kernel_image_decomposition, make_doubling_instance)
from coeffalg import corpus
from coeffalg.algebra import operator_norm
from conftest import block_maps, make_block_map
from oracles import averaging_transfer, brute_complete_transfer


@pytest.mark.parametrize("name", corpus.all_names() + ("zero",))
def test_nondegeneracy_conditions_agree(name):
    inst = corpus.get(name)
    rep = check_nondegenerate(inst.delta, inst.delta_star)
    assert rep.info["condition_i"] == rep.info["condition_ii"] == rep.info["condition_iii"] == rep.verdict


@pytest.mark.parametrize("name", corpus.all_names())
def test_corpus_pairs_are_nondegenerate(name):
    inst = corpus.get(name)
    assert check_nondegenerate(inst.delta, inst.delta_star).verdict


def test_three_block_nondegenerate_by_hand():
    inst = corpus.three_block()
    alg = inst.algebra
    unit = inst.delta_star(alg.one)
    assert [b[0, 0] for b in unit.blocks] == [1, 1, 0]
    assert [b[0, 0] for b in inst.delta(unit).blocks] == [1, 1, 1]


def test_degenerate_pair_detected_by_all_conditions():
    # delta_* = delta_*(delta(1) .) scaled down is still a transfer operator but degenerate
    inst = corpus.corner()
    half = AlgebraMap(inst.algebra, 0.5 * inst.delta_star.matrix)
    rep = check_nondegenerate(inst.delta, half)
    assert not rep.verdict
    assert not rep.info["condition_i"] and not rep.info["condition_ii"]
    assert rep.residuals["iii.delta_of_transfer_unit"] == pytest.approx(0.5)
    zero = AlgebraMap.zero(inst.algebra)
    assert not check_nondegenerate(inst.delta, zero).verdict


def test_nondegenerate_requires_transfer_pair():
    cc = Algebra((1, 1))
    d = AlgebraMap.from_block_assignment(cc, [0, None])
    with pytest.raises(RejectedInput):
        check_nondegenerate(d, AlgebraMap.from_block_assignment(cc, [1, None]))


def test_kernel_image_examples():
    ker, img = kernel_image_decomposition(*_pair("identity"))
    assert ker.block_support == () and img.block_support == (0, 1)
    ker, img = kernel_image_decomposition(*_pair("corner"))
    assert ker.block_support == (1,) and img.block_support == (0,)
    ker, img = kernel_image_decomposition(*_pair("three_block"))
    assert ker.block_support == (2,) and img.block_support == (0, 1)
    assert ker.dim + img.dim == 3


def test_kernel_image_rejects_degenerate():
    inst = corpus.corner()
    with pytest.raises(RejectedInput):
        kernel_image_decomposition(inst.delta, AlgebraMap.zero(inst.algebra))


@pytest.mark.parametrize("name", corpus.all_names())
def test_kernel_image_span_algebra(name):
    inst = corpus.get(name)
    ker, img = kernel_image_decomposition(inst.delta, inst.delta_star)
    assert ker.dim + img.dim == inst.algebra.dim
    assert operator_norm(ker.projection + img.projection - inst.algebra.one) == 0


def test_hereditary_examples():
    assert check_hereditary(corpus.identity().delta).verdict
    assert check_hereditary(corpus.corner().delta).verdict
    rep = check_hereditary(make_doubling_instance(8).delta)
    assert not rep.verdict
    assert (rep.info["rank_image"], rep.info["rank_corner"]) == (4, 8)
    rep = check_hereditary(corpus.three_block().delta)
    assert (rep.info["rank_image"], rep.info["rank_corner"]) == (2, 3)


def test_find_complete_examples():
    cert = find_complete_transfer(corpus.identity().delta)
    alg = corpus.identity().algebra
    assert operator_norm(cert.P - alg.one) == 0
    assert np.allclose(cert.delta_star.matrix, np.eye(alg.dim), atol=1e-12)

    cert = find_complete_transfer(corpus.corner().delta)
    assert cert.support == (0,)
    assert np.allclose(cert.delta_star.matrix, corpus.corner().delta_star.matrix, atol=1e-12)

    inst = corpus.m2_shift()
    cert = find_complete_transfer(inst.delta)
    assert cert.support == (1,)
    assert np.allclose(cert.delta_star.matrix, inst.delta_star.matrix, atol=1e-12)
    assert not cert.trivial


@pytest.mark.parametrize("name", corpus.INCOMPLETE)
def test_find_complete_fails_with_hereditary_reason(name):
    with pytest.raises(NoCompleteTransfer) as exc:
        find_complete_transfer(corpus.get(name).delta)
    assert exc.value.reason == NoCompleteTransfer.HEREDITARY_FAILURE


def test_find_complete_rejects_non_endomorphism():
    cc = Algebra((1, 1))
    with pytest.raises(RejectedInput):
        find_complete_transfer(AlgebraMap(cc, np.array([[1, 1], [0, 0]])))


def test_zero_map_is_trivial_certificate():
    alg = Algebra((2, 1))
    cert = find_complete_transfer(AlgebraMap.zero(alg))
    assert cert.trivial
    assert cert.support == ()
    assert np.abs(cert.delta_star.matrix).max() == 0
    assert operator_norm(cert.P) == 0


def test_check_complete_examples():
    assert check_complete(*_pair("identity")).verdict
    assert check_complete(*_pair("corner")).verdict
    rep = check_complete(*_pair("doubling8_constant_half"))
    assert not rep.verdict
    assert rep.residuals["complete"] > 0.1
    assert rep.info["nondegenerate"]


@pytest.mark.parametrize("name", corpus.COMPLETE)
def test_supplied_complete_pairs_match_certificate(name):
    inst = corpus.get(name)
    assert check_complete(inst.delta, inst.delta_star).verdict
    cert = find_complete_transfer(inst.delta)
    assert np.abs(cert.delta_star.matrix - inst.delta_star.matrix).max() <= 1e-10


def test_compare_identical():
    d, s = _pair("m2_shift")
    rep = compare_transfer_operators(d, s, s)
    assert rep.verdict and rep.info["globally_equal"]


def test_compare_doubling_rho_families():
    a = make_doubling_instance(16, "constant_half")
    b = make_doubling_instance(16, "raised_cosine")
    rep = compare_transfer_operators(a.delta, a.delta_star, b.delta_star)
    assert rep.verdict
    assert not rep.info["globally_equal"]
    assert rep.info["global_max_entry_difference"] >= 0.1
    # both units are the even-residue indicator
    ind = a.preimage_indicator
    assert operator_norm(a.delta_star(a.algebra.one) - ind) <= 1e-12
    assert operator_norm(b.delta_star(b.algebra.one) - ind) <= 1e-12


def test_compare_three_block_family():
    d = corpus.three_block().delta
    s1 = corpus.three_block((1.0, 0.0)).delta_star
    s2 = corpus.three_block((0.3, 0.7)).delta_star
    rep = compare_transfer_operators(d, s1, s2)
    assert rep.verdict
    assert rep.info["global_max_entry_difference"] == pytest.approx(0.7)


def test_compare_rejects_degenerate():
    inst = corpus.corner()
    with pytest.raises(RejectedInput):
        compare_transfer_operators(inst.delta, inst.delta_star, AlgebraMap.zero(inst.algebra))


def test_partial_automorphism_examples():
    for name in ("identity", "m2_shift", "corner", "cyclic4"):
        d = corpus.get(name).delta
        rep = check_partial_automorphism(d, find_complete_transfer(d))
        assert rep.applicable and rep.verdict, (name, rep.failed(1e-9))
    d = corpus.m2c_corner().delta
    rep = check_partial_automorphism(d, find_complete_transfer(d))
    assert not rep.applicable and not rep.verdict
    assert rep.info["commutator"] >= 0.5


@pytest.mark.parametrize("name", corpus.COMPLETE + ("zero",))
def test_certificate_matches_brute_force_oracle(name):
    inst = corpus.get(name)
    cert = find_complete_transfer(inst.delta)
    X, res = brute_complete_transfer(inst.algebra.block_dims, inst.delta.matrix)
    assert res <= 1e-10
    assert np.abs(cert.delta_star.matrix - X).max() <= 1e-10


@pytest.mark.parametrize("name", corpus.COMPLETE)
def test_transfer_delta_transfer_identity(name):
    inst = corpus.get(name)
    S, D = find_complete_transfer(inst.delta).delta_star.matrix, inst.delta.matrix
    assert inst.algebra.column_norms(S @ D @ S - S).max() <= 1e-9


def _block_permutation(alg, order):
    """Coordinate permutation q with new_vector = old_vector[q] for blocks reordered by ``order``."""
    return np.concatenate([alg.block_indices([b]) for b in order])


@pytest.mark.parametrize("name", corpus.COMPLETE)
def test_uniqueness_under_permuted_basis(name):
    inst = corpus.get(name)
    alg = inst.algebra
    order = list(range(alg.n_blocks))[::-1]
    q = _block_permutation(alg, order)
    palg = Algebra(tuple(alg.block_dims[b] for b in order))
    pdelta = AlgebraMap(palg, inst.delta.matrix[np.ix_(q, q)])
    s1 = find_complete_transfer(inst.delta).delta_star.matrix
    s2 = find_complete_transfer(pdelta).delta_star.matrix
    assert np.abs(s1[np.ix_(q, q)] - s2).max() <= 1e-10


@settings(max_examples=60, deadline=None)
@given(block_maps())
def test_completeness_theorem_equivalence(args):
    dims, assignment, seed = args
    alg, delta = make_block_map(dims, assignment, seed, twist=False)
    # a non-degenerate transfer operator always exists for block maps: averaging over preimages
    avg = AlgebraMap(alg, averaging_transfer(dims, assignment))
    assert check_nondegenerate(delta, avg).verdict
    hereditary = check_hereditary(delta).verdict
    targets = [s for s in assignment if s is not None]
    assert hereditary == (len(targets) == len(set(targets)))
    try:
        cert = find_complete_transfer(delta)
        found = True
    except NoCompleteTransfer as exc:
        assert exc.reason == NoCompleteTransfer.HEREDITARY_FAILURE
        found = False
    assert found == hereditary
    assert check_complete(delta, avg).verdict == hereditary
    if found:
        assert np.abs(cert.delta_star.matrix - avg.matrix).max() <= 1e-10


@settings(max_examples=40, deadline=None)
@given(block_maps(injective=True))
def test_twisted_injective_block_maps_are_complete(args):
    alg, delta = make_block_map(*args)
    cert = find_complete_transfer(delta)
    assert check_complete(delta, cert.delta_star).verdict
    X, res = brute_complete_transfer(alg.block_dims, delta.matrix)
    assert np.abs(cert.delta_star.matrix - X).max() <= 1e-10


def _pair(name):
    inst = corpus.get(name)
    return inst.delta, inst.delta_star
