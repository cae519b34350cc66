"""Non-degeneracy, completeness and construction of transfer operators.

For a *-endomorphism ``delta`` of a block algebra this module decides
whether a complete transfer operator exists and, if so, builds it as
``delta^{-1}(delta(1) a delta(1))`` where ``delta^{-1}`` inverts ``delta`` on
the ideal complementary to its kernel.  Candidate operators supplied by the
caller (which need not be complete) can be checked for non-degeneracy and
compared with each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (DEFAULT_TOL, Algebra, Element, Tolerance, central_projection_report,
                      operator_norm)
from .errors import (InternalConsistencyError, NoCompleteTransfer, NonDegeneracyViolation,
                     RejectedInput, ResidualOverflow)
from .maps import (DEFAULT_SAMPLES, AlgebraMap, _max_column, _same_algebra, left_matrices_of_columns,
                   right_matrices_of_columns, verify_positive_map, verify_star_endomorphism,
                   verify_transfer_pair)
from .report import VerificationReport


@dataclass(frozen=True)
class IdealDescription:
    """A closed two-sided ideal, i.e. the span of a set of blocks."""

    algebra: Algebra
    block_support: tuple[int, ...]

    @property
    def projection(self) -> Element:
        return self.algebra.block_projection(self.block_support)

    @property
    def indices(self) -> np.ndarray:
        return self.algebra.block_indices(self.block_support)

    @property
    def dim(self) -> int:
        return sum(self.algebra.block_dims[b] ** 2 for b in self.block_support)


@dataclass(frozen=True, eq=False)
class CompletenessCertificate:
    P: Element
    delta_star: AlgebraMap
    residuals: dict = field(default_factory=dict)
    trivial: bool = False

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(b for b, blk in enumerate(self.P.blocks) if np.abs(blk).max() > 0.5)


def subspace_report(a: np.ndarray, b: np.ndarray, tol: Tolerance) -> tuple[float, dict]:
    """Compare column spaces of ``a`` and ``b``.

    Returns the largest sine of a principal angle (1.0 when the ranks differ)
    together with the three ranks of the stacked-rank test.
    """
    qa, qb = tol.orth(a), tol.orth(b)
    stacked = tol.rank(np.hstack([a, b]))
    info = {"rank_a": qa.shape[1], "rank_b": qb.shape[1], "rank_stacked": stacked}
    if not (qa.shape[1] == qb.shape[1] == stacked):
        return 1.0, info
    if qa.shape[1] == 0:
        return 0.0, info
    dist = np.linalg.norm(qa - qb @ (qb.conj().T @ qa), ord=2)
    return float(min(dist, 1.0)), info


def _require(report: VerificationReport, what: str, tol: Tolerance) -> None:
    if not report.verdict:
        raise RejectedInput(f"precondition failed: {what}; failed checks: {report.failed(tol.eq_tol)}")


def _require_endomorphism(delta: AlgebraMap, tol: Tolerance) -> None:
    _require(verify_star_endomorphism(delta, tol), "delta is not a *-endomorphism", tol)


def _bimodule_residual(alg: Algebra, E: np.ndarray, D: np.ndarray) -> tuple[float, tuple]:
    """max ||E(delta(a) x delta(b)) - delta(a) E(x) delta(b)|| over basis a, b, x."""
    lefts = left_matrices_of_columns(alg, D)
    rights = right_matrices_of_columns(alg, D)
    worst, where = 0.0, (0, 0, 0)
    for a in range(alg.dim):
        for b in range(alg.dim):
            m = lefts[a] @ rights[b]
            r, x = _max_column(alg, E @ m - m @ E)
            if r > worst:
                worst, where = r, (a, x, b)
    return worst, where


def check_nondegenerate(delta: AlgebraMap, delta_star: AlgebraMap, tol: Tolerance = DEFAULT_TOL,
                        samples: int = DEFAULT_SAMPLES, seed: int = 0) -> VerificationReport:
    """Evaluate the three equivalent non-degeneracy conditions independently.

    (i) ``delta o delta_*`` is a conditional expectation onto ``delta(A)``;
    (ii) ``delta delta_* delta = delta``; (iii) ``delta(delta_*(1)) = delta(1)``.
    The verdict is (iii); disagreement raises InternalConsistencyError.
    """
    _require(verify_transfer_pair(delta, delta_star, tol, samples, seed), "transfer pair", tol)
    alg = delta.algebra
    D, S = delta.matrix, delta_star.matrix
    E = D @ S

    cond_i = {}
    cond_i["idempotent"], at_idem = _max_column(alg, E @ E - E)
    cond_i["onto_range"], ranks = subspace_report(E, D, tol)
    cond_i["bimodule"], at_bimod = _bimodule_residual(alg, E, D)
    pos = verify_positive_map(AlgebraMap(alg, E), tol, samples, seed)
    for k, v in pos.residuals.items():
        cond_i[f"positive.{k}"] = v
    cond_ii, at_ii = _max_column(alg, D @ S @ D - D)
    cond_iii = operator_norm(delta(delta_star(alg.one)) - delta(alg.one))

    verdict_i = all(v <= tol.eq_tol for v in cond_i.values())
    verdict_ii = cond_ii <= tol.eq_tol
    verdict_iii = cond_iii <= tol.eq_tol

    residuals = {f"i.{k}": v for k, v in cond_i.items()}
    residuals["ii.delta_transfer_delta"] = cond_ii
    residuals["iii.delta_of_transfer_unit"] = cond_iii
    report = VerificationReport.from_residuals(residuals, tol.eq_tol)
    report.verdict = verdict_iii
    report.witnesses.update({"i.idempotent": (at_idem,), "i.bimodule": at_bimod,
                             "ii.delta_transfer_delta": (at_ii,)})
    report.info.update(condition_i=verdict_i, condition_ii=verdict_ii, condition_iii=verdict_iii,
                       range_ranks=ranks, positive_min_eigenvalue=pos.info["min_eigenvalue"])
    if not verdict_i == verdict_ii == verdict_iii:
        raise InternalConsistencyError(
            f"non-degeneracy conditions disagree: (i)={verdict_i} (ii)={verdict_ii} (iii)={verdict_iii}"
        )
    return report


def kernel_blocks(delta: AlgebraMap, tol: Tolerance = DEFAULT_TOL) -> tuple[int, ...]:
    """Blocks annihilated by ``delta``; certified to exhaust the numerical nullspace."""
    alg = delta.algebra
    D = delta.matrix
    ker = tuple(b for b in range(alg.n_blocks)
                if alg.column_norms(D[:, alg.block_slice(b)]).max() <= tol.eq_tol)
    nullity = alg.dim - tol.rank(D)
    expected = sum(alg.block_dims[b] ** 2 for b in ker)
    if nullity != expected:
        raise RejectedInput(
            f"kernel of delta is not block-aligned (nullity {nullity}, block-supported part {expected}); "
            "the input is not a valid *-endomorphism"
        )
    return ker


def kernel_image_decomposition(delta: AlgebraMap, delta_star: AlgebraMap, tol: Tolerance = DEFAULT_TOL,
                               samples: int = DEFAULT_SAMPLES, seed: int = 0
                               ) -> tuple[IdealDescription, IdealDescription]:
    """Split the algebra as Ker(delta) + Im(delta_*), a direct sum of ideals."""
    nd = check_nondegenerate(delta, delta_star, tol, samples, seed)
    if not nd.verdict:
        raise RejectedInput("precondition failed: transfer operator is degenerate")
    alg = delta.algebra
    ker = kernel_blocks(delta, tol)

    unit = delta_star(alg.one)
    cp = central_projection_report(unit, tol)
    if not cp.verdict:
        raise NonDegeneracyViolation(f"delta_*(1) is not a central projection: {cp.failed(tol.eq_tol)}")
    img = tuple(b for b, v in enumerate(cp.info["block_pattern"]) if v == 1)

    basis_img = np.eye(alg.dim)[:, alg.block_indices(img)]
    dist, _ = subspace_report(delta_star.matrix, basis_img, tol)
    if dist > tol.eq_tol:
        raise NonDegeneracyViolation(f"Im delta_* differs from delta_*(1)A (principal-angle sine {dist:.3g})")
    if set(ker) & set(img):
        raise NonDegeneracyViolation(f"Ker delta and Im delta_* share blocks {sorted(set(ker) & set(img))}")
    if set(ker) | set(img) != set(range(alg.n_blocks)):
        missing = sorted(set(range(alg.n_blocks)) - set(ker) - set(img))
        raise NonDegeneracyViolation(f"Ker delta + Im delta_* misses blocks {missing}")
    return IdealDescription(alg, ker), IdealDescription(alg, img)


def check_hereditary(delta: AlgebraMap, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """Is ``delta(A) = delta(1) A delta(1)``?"""
    _require_endomorphism(delta, tol)
    alg = delta.algebra
    d1 = delta(alg.one)
    corner = alg.left_mult_matrix(d1) @ alg.right_mult_matrix(d1)
    dist, ranks = subspace_report(delta.matrix, corner, tol)
    report = VerificationReport.from_residuals({"span_mismatch": dist}, tol.eq_tol)
    report.info.update(rank_image=ranks["rank_a"], rank_corner=ranks["rank_b"],
                       rank_stacked=ranks["rank_stacked"])
    return report


def _transfer_residuals(delta: AlgebraMap, delta_star: AlgebraMap, P: Element) -> dict:
    alg = delta.algebra
    D, S = delta.matrix, delta_star.matrix
    d1 = delta(alg.one)
    corner = alg.left_mult_matrix(d1) @ alg.right_mult_matrix(d1)
    return {
        "complete": _max_column(alg, D @ S - corner)[0],
        "transfer_delta_transfer": _max_column(alg, S @ D @ S - S)[0],
        "P_equals_transfer_unit": operator_norm(P - delta_star(alg.one)),
    }


def find_complete_transfer(delta: AlgebraMap, tol: Tolerance = DEFAULT_TOL,
                           samples: int = DEFAULT_SAMPLES, seed: int = 0) -> CompletenessCertificate:
    """Construct the unique complete transfer operator or explain why none exists."""
    _require_endomorphism(delta, tol)
    alg = delta.algebra
    D = delta.matrix
    d1 = delta(alg.one)

    ker = kernel_blocks(delta, tol)
    support = tuple(b for b in range(alg.n_blocks) if b not in ker)
    P = alg.block_projection(support)

    mismatch = operator_norm(delta(P) - d1)
    if mismatch > tol.eq_tol:
        raise NoCompleteTransfer(NoCompleteTransfer.PROJECTION_MISMATCH, f"||delta(P) - delta(1)|| = {mismatch:.3g}")

    idx = alg.block_indices(support)
    D_P = D[:, idx]
    if tol.rank(D_P) != len(idx):
        raise NoCompleteTransfer(NoCompleteTransfer.NON_INJECTIVE,
                                 f"rank {tol.rank(D_P)} < dim PA = {len(idx)}")

    her = check_hereditary(delta, tol)
    if not her.verdict:
        raise NoCompleteTransfer(NoCompleteTransfer.HEREDITARY_FAILURE,
                                 f"rank delta(A) = {her.info['rank_image']}, "
                                 f"rank delta(1)A delta(1) = {her.info['rank_corner']}")

    corner = alg.left_mult_matrix(d1) @ alg.right_mult_matrix(d1)
    S = np.zeros((alg.dim, alg.dim), dtype=complex)
    if len(idx):
        X = np.linalg.lstsq(D_P, corner, rcond=None)[0]
        solve_res, k = _max_column(alg, D_P @ X - corner)
        if solve_res > tol.eq_tol:
            raise ResidualOverflow(f"delta(x) = delta(1) E_{k} delta(1) has no solution in PA "
                                   f"(residual {solve_res:.3g})")
        S[idx, :] = X
    delta_star = AlgebraMap(alg, S)

    residuals = _transfer_residuals(delta, delta_star, P)
    pair = verify_transfer_pair(delta, delta_star, tol, samples, seed)
    for k, v in pair.residuals.items():
        residuals[f"pair.{k}"] = v
    bad = [k for k, v in residuals.items() if v > tol.eq_tol]
    if bad:
        raise InternalConsistencyError(f"constructed transfer operator fails {bad}")
    trivial = float(np.abs(D).max()) <= tol.eq_tol if D.size else True
    return CompletenessCertificate(P=P, delta_star=delta_star, residuals=residuals, trivial=trivial)


def check_complete(delta: AlgebraMap, delta_star: AlgebraMap, tol: Tolerance = DEFAULT_TOL,
                   samples: int = DEFAULT_SAMPLES, seed: int = 0) -> VerificationReport:
    _require(verify_transfer_pair(delta, delta_star, tol, samples, seed), "transfer pair", tol)
    alg = delta.algebra
    d1 = delta(alg.one)
    corner = alg.left_mult_matrix(d1) @ alg.right_mult_matrix(d1)
    r, k = _max_column(alg, delta.matrix @ delta_star.matrix - corner)
    report = VerificationReport.from_residuals({"complete": r}, tol.eq_tol, witnesses={"complete": (k,)})
    nd = check_nondegenerate(delta, delta_star, tol, samples, seed)
    report.info["nondegenerate"] = nd.verdict
    if report.verdict and not nd.verdict:
        raise InternalConsistencyError("complete transfer operator reported degenerate")
    return report


def compare_transfer_operators(delta: AlgebraMap, ds1: AlgebraMap, ds2: AlgebraMap,
                               tol: Tolerance = DEFAULT_TOL, samples: int = DEFAULT_SAMPLES,
                               seed: int = 0) -> VerificationReport:
    """Two non-degenerate transfer operators share delta_*(1), their image, and
    their restriction to delta(A); globally they may differ."""
    _same_algebra(delta, ds1, ds2)
    for name, ds in (("first", ds1), ("second", ds2)):
        nd = check_nondegenerate(delta, ds, tol, samples, seed)
        if not nd.verdict:
            raise RejectedInput(f"precondition failed: {name} transfer operator is degenerate")
    alg = delta.algebra
    unit = operator_norm(ds1(alg.one) - ds2(alg.one))
    image, _ = subspace_report(ds1.matrix, ds2.matrix, tol)
    restricted, k = _max_column(alg, (ds1.matrix - ds2.matrix) @ delta.matrix)
    report = VerificationReport.from_residuals(
        {"transfer_unit": unit, "image": image, "restriction_to_range": restricted}, tol.eq_tol,
        witnesses={"restriction_to_range": (k,)},
    )
    global_diff = float(np.abs(ds1.matrix - ds2.matrix).max())
    report.info["global_max_entry_difference"] = global_diff
    report.info["globally_equal"] = global_diff <= tol.eq_tol
    return report


def check_partial_automorphism(delta: AlgebraMap, cert: CompletenessCertificate,
                               tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """When delta(1) is central, delta and delta_* are mutually inverse
    *-isomorphisms between delta_*(1)A and delta(1)A, and delta_* is an
    endomorphism of the whole algebra."""
    alg = delta.algebra
    d1 = delta(alg.one)
    cp = central_projection_report(d1, tol)
    if not cp.verdict:
        return VerificationReport(verdict=False, applicable=False,
                                  info={"reason": "delta(1) is not central",
                                        "commutator": cp.residuals["commutes"]})
    S, D = cert.delta_star.matrix, delta.matrix
    src = alg.block_indices(cert.support)
    tgt = alg.block_indices([b for b, v in enumerate(cp.info["block_pattern"]) if v == 1])
    outside_src = np.setdiff1d(np.arange(alg.dim), src)
    outside_tgt = np.setdiff1d(np.arange(alg.dim), tgt)

    def rows_norm(m, rows):
        sub = np.zeros_like(m)
        sub[rows] = m[rows]
        return _max_column(alg, sub)[0] if m.shape[1] else 0.0

    eye = np.eye(alg.dim)
    residuals = {
        "delta_into_target": rows_norm(D[:, src], outside_tgt),
        "transfer_into_source": rows_norm(S[:, tgt], outside_src),
        "transfer_delta_identity_on_source": _max_column(alg, S @ D[:, src] - eye[:, src])[0] if len(src) else 0.0,
        "delta_transfer_identity_on_target": _max_column(alg, D @ S[:, tgt] - eye[:, tgt])[0] if len(tgt) else 0.0,
    }
    # multiplicativity of delta_* on pairs from delta(1)A
    basis_left = left_matrices_of_columns(alg, eye)
    image_left = left_matrices_of_columns(alg, S)
    worst = 0.0
    for i in tgt:
        diff = S @ basis_left[i][:, tgt] - image_left[i] @ S[:, tgt]
        worst = max(worst, _max_column(alg, diff)[0])
    residuals["transfer_multiplicative_on_target"] = worst
    report = VerificationReport.from_residuals(residuals, tol.eq_tol)
    report.merge(verify_star_endomorphism(cert.delta_star, tol), "transfer_endomorphism")
    report.verdict = all(v <= tol.eq_tol for v in report.residuals.values())
    report.info["source_blocks"] = list(cert.support)
    report.info["target_blocks"] = [b for b, v in enumerate(cp.info["block_pattern"]) if v == 1]
    return report
