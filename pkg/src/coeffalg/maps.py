"""Linear maps on block algebras and their verification.

A map is stored as its matrix on coordinates in the canonical matrix-unit
basis.  All identities that are bilinear in their arguments are verified on
basis pairs, which is exact; positivity is not a linear condition and is
tested by seeded rank-one sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .algebra import DEFAULT_TOL, Algebra, Element, Tolerance
from .errors import RejectedInput, StructuralError
from .report import VerificationReport

DEFAULT_SAMPLES = 64


@dataclass(frozen=True, eq=False)
class AlgebraMap:
    algebra: Algebra
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        n = self.algebra.dim
        if m.shape != (n, n):
            raise StructuralError(f"map matrix must be {n}x{n}, got {m.shape}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, algebra: Algebra) -> "AlgebraMap":
        return cls(algebra, np.eye(algebra.dim))

    @classmethod
    def zero(cls, algebra: Algebra) -> "AlgebraMap":
        return cls(algebra, np.zeros((algebra.dim, algebra.dim)))

    @classmethod
    def from_function(cls, algebra: Algebra, fn: Callable[[Element], Element]) -> "AlgebraMap":
        cols = [algebra.to_vector(fn(e)) for e in algebra.basis()]
        return cls(algebra, np.stack(cols, axis=1))

    @classmethod
    def from_block_assignment(cls, algebra: Algebra, assignment: Sequence[Optional[int]],
                              unitaries=None) -> "AlgebraMap":
        """Output block ``i`` receives ``u_i x_{s(i)} u_i^*``, or 0 when ``s(i)`` is None."""
        dims = algebra.block_dims
        if len(assignment) != len(dims):
            raise StructuralError(f"assignment needs {len(dims)} entries, got {len(assignment)}")
        for i, s in enumerate(assignment):
            if s is None:
                continue
            if not 0 <= s < len(dims):
                raise StructuralError(f"block {i}: source index {s} out of range")
            if dims[s] != dims[i]:
                raise StructuralError(f"block {i} has size {dims[i]} but source block {s} has size {dims[s]}")

        def fn(x: Element) -> Element:
            out = []
            for i, s in enumerate(assignment):
                if s is None:
                    out.append(np.zeros((dims[i], dims[i])))
                elif unitaries is not None and unitaries[i] is not None:
                    u = np.asarray(unitaries[i])
                    out.append(u @ x.blocks[s] @ u.conj().T)
                else:
                    out.append(x.blocks[s])
            return algebra.element(out)

        return cls.from_function(algebra, fn)

    def apply(self, x: Element) -> Element:
        return apply(self, x)

    __call__ = apply

    def compose(self, other: "AlgebraMap") -> "AlgebraMap":
        """``self`` after ``other``."""
        _same_algebra(self, other)
        return AlgebraMap(self.algebra, self.matrix @ other.matrix)

    def power(self, n: int) -> "AlgebraMap":
        if n < 0:
            raise ValueError("negative power")
        return AlgebraMap(self.algebra, np.linalg.matrix_power(self.matrix, n))

    def image_of_one(self) -> Element:
        return self.apply(self.algebra.one)


def _same_algebra(*maps: AlgebraMap) -> None:
    dims = maps[0].algebra.block_dims
    for m in maps[1:]:
        if m.algebra.block_dims != dims:
            raise StructuralError("maps act on different algebras")


def apply(m: AlgebraMap, x: Element) -> Element:
    if x.algebra.block_dims != m.algebra.block_dims:
        raise StructuralError(f"element of {x.algebra.block_dims} passed to map on {m.algebra.block_dims}")
    return m.algebra.from_vector(m.matrix @ m.algebra.to_vector(x))


def _max_column(alg: Algebra, diff: np.ndarray) -> tuple[float, int]:
    norms = alg.column_norms(diff)
    if norms.size == 0:
        return 0.0, -1
    k = int(np.argmax(norms))
    return float(norms[k]), k


def left_matrices_of_columns(alg: Algebra, m: np.ndarray) -> list[np.ndarray]:
    """Left-multiplication matrices of the elements stored in the columns of ``m``."""
    return [alg.left_mult_matrix(alg.from_vector(m[:, k])) for k in range(m.shape[1])]


def right_matrices_of_columns(alg: Algebra, m: np.ndarray) -> list[np.ndarray]:
    return [alg.right_mult_matrix(alg.from_vector(m[:, k])) for k in range(m.shape[1])]


def multiplicativity_residual(m: AlgebraMap) -> tuple[float, tuple[int, int]]:
    """max over basis pairs of ||m(E_i E_j) - m(E_i) m(E_j)||."""
    alg = m.algebra
    basis_left = left_matrices_of_columns(alg, np.eye(alg.dim))
    image_left = left_matrices_of_columns(alg, m.matrix)
    worst, where = 0.0, (0, 0)
    for i in range(alg.dim):
        diff = m.matrix @ basis_left[i] - image_left[i] @ m.matrix
        r, j = _max_column(alg, diff)
        if r > worst:
            worst, where = r, (i, j)
    return worst, where


def verify_star_endomorphism(m: AlgebraMap, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    alg = m.algebra
    mult, mult_at = multiplicativity_residual(m)
    star_diff = m.matrix[:, alg.star_permutation] - alg.adjoint_vectors(m.matrix)
    star, star_at = _max_column(alg, star_diff)
    one = m.image_of_one()
    report = VerificationReport.from_residuals(
        {
            "multiplicative": mult,
            "star_preserving": star,
            "unit_image_idempotent": (one @ one - one).norm(),
            "unit_image_self_adjoint": (one - one.H).norm(),
        },
        tol.eq_tol,
    )
    report.witnesses["multiplicative"] = mult_at
    report.witnesses["star_preserving"] = (star_at,)
    report.info["unital_residual"] = (one - alg.one).norm()
    report.info["unital"] = report.info["unital_residual"] <= tol.eq_tol
    return report


def verify_positive_map(m: AlgebraMap, tol: Tolerance = DEFAULT_TOL,
                        samples: int = DEFAULT_SAMPLES, seed: int = 0) -> VerificationReport:
    """Randomized positivity test on single-block rank-one projections.

    Every positive element is a sum of elements ``v v^*`` supported in one
    block, so these are the natural probes.  A false verdict is conclusive;
    a true verdict is evidence.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    alg = m.algebra
    rng = np.random.default_rng(seed)
    # probes[s, b]: coordinates of m(v v^*) for sample s in block b
    outputs = np.zeros((samples, alg.n_blocks, alg.dim), dtype=complex)
    for b, d in enumerate(alg.block_dims):
        v = rng.standard_normal((samples, d)) + 1j * rng.standard_normal((samples, d))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        rank_one = (v[:, :, None] * v.conj()[:, None, :]).reshape(samples, d * d)
        outputs[:, b, :] = rank_one @ m.matrix[:, alg.block_slice(b)].T
    flat = outputs.reshape(-1, alg.dim).T
    sa = alg.column_norms(flat - alg.adjoint_vectors(flat))
    eig = alg.column_min_eigenvalues(flat)
    bad = np.flatnonzero((eig < -tol.eq_tol) | (sa > tol.eq_tol))
    # report as if probing stopped at the first failure
    tested = int(bad[0]) + 1 if bad.size else flat.shape[1]
    worst_eig = float(eig[:tested].min())
    worst_sa = float(sa[:tested].max())
    report = VerificationReport.from_residuals(
        {"negative_eigenvalue": max(0.0, -worst_eig), "self_adjoint_output": worst_sa},
        tol.eq_tol,
    )
    report.info.update(min_eigenvalue=worst_eig, probes=tested, samples=samples, seed=seed)
    return report


def verify_transfer_pair(delta: AlgebraMap, delta_star: AlgebraMap, tol: Tolerance = DEFAULT_TOL,
                         samples: int = DEFAULT_SAMPLES, seed: int = 0) -> VerificationReport:
    _same_algebra(delta, delta_star)
    endo = verify_star_endomorphism(delta, tol)
    if not endo.verdict:
        raise RejectedInput(f"delta is not a *-endomorphism; failed checks: {endo.failed(tol.eq_tol)}")
    alg = delta.algebra
    D, S = delta.matrix, delta_star.matrix
    basis_left = left_matrices_of_columns(alg, np.eye(alg.dim))
    basis_right = right_matrices_of_columns(alg, np.eye(alg.dim))
    delta_left = left_matrices_of_columns(alg, D)
    delta_right = right_matrices_of_columns(alg, D)

    residuals, witnesses = {}, {}
    worst_l = worst_r = 0.0
    at_l = at_r = (0, 0)
    for i in range(alg.dim):
        # delta_*(delta(E_i) E_j) - E_i delta_*(E_j), all j at once
        r, j = _max_column(alg, S @ delta_left[i] - basis_left[i] @ S)
        if r > worst_l:
            worst_l, at_l = r, (i, j)
        r, j = _max_column(alg, S @ delta_right[i] - basis_right[i] @ S)
        if r > worst_r:
            worst_r, at_r = r, (i, j)
    residuals["transfer_left"] = worst_l
    residuals["transfer_right"] = worst_r
    witnesses["transfer_left"] = at_l
    witnesses["transfer_right"] = at_r

    d1 = delta.image_of_one()
    r, k = _max_column(alg, S - S @ alg.left_mult_matrix(d1))
    residuals["absorbs_unit_image_left"] = r
    witnesses["absorbs_unit_image_left"] = (k,)
    r, k = _max_column(alg, S - S @ alg.right_mult_matrix(d1))
    residuals["absorbs_unit_image_right"] = r
    witnesses["absorbs_unit_image_right"] = (k,)

    c = delta_star.image_of_one()
    r, k = _max_column(alg, alg.left_mult_matrix(c) - alg.right_mult_matrix(c))
    residuals["transfer_of_unit_central"] = r
    witnesses["transfer_of_unit_central"] = (k,)

    report = VerificationReport.from_residuals(residuals, tol.eq_tol, witnesses=witnesses)
    report.merge(verify_positive_map(delta_star, tol, samples, seed), "positive")
    report.verdict = all(v <= tol.eq_tol for v in report.residuals.values())
    return report
