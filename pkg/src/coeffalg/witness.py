"""Truncated Hilbert-space witness (H, pi, U) for a complete transfer operator.

Each level ``n`` of the space is the algebra itself with the semi-inner product

    <v, u>_n = f(delta_*^n(u^* v))          n >= 0
    <v, u>_n = f(u^* delta^{|n|}(1) v)      n <= 0

divided by its null space.  U moves level n-1 to level n (by delta for
n > 0, by multiplication with delta^{|n|+1}(1) for n <= 0), U^* moves level
n+1 to level n (by delta_* for n >= 0, by multiplication with
delta^{|n|}(1) for n < 0), and pi(a) multiplies level n by a (n >= 0) or
by delta^{|n|}(a) (n <= 0).

Only the levels -N..N are built.  Operators are written in an orthonormal
basis of every quotient and their matrices are obtained from Gram data
alone: the entry for basis vectors w, w' is <T w, w'>_n.  Relations are
asserted on vectors supported in the interior levels -N+1..N-1, where
truncation does not interfere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .algebra import DEFAULT_TOL, Algebra, Element, Tolerance
from .errors import InternalConsistencyError, NumericalInstabilityError, RejectedInput
from .maps import DEFAULT_SAMPLES, AlgebraMap
from .report import VerificationReport
from .transfer import CompletenessCertificate, check_complete, check_hereditary, kernel_blocks

DEFAULT_WINDOW = 4


@dataclass(frozen=True, eq=False)
class PositiveFunctional:
    """f(a) = sum_b trace(density_b a_b) with positive semidefinite densities."""

    algebra: Algebra
    densities: tuple

    def __post_init__(self):
        dims = self.algebra.block_dims
        if len(self.densities) != len(dims):
            raise RejectedInput(f"{len(dims)} density matrices expected, got {len(self.densities)}")
        out = []
        for b, (rho, d) in enumerate(zip(self.densities, dims)):
            rho = np.array(rho, dtype=complex).reshape(d, d)
            if np.abs(rho - rho.conj().T).max() > 1e-12:
                raise RejectedInput(f"density of block {b} is not Hermitian")
            if np.linalg.eigvalsh(rho)[0] < -1e-12:
                raise RejectedInput(f"density of block {b} is not positive semidefinite")
            rho.flags.writeable = False
            out.append(rho)
        object.__setattr__(self, "densities", tuple(out))

    @classmethod
    def trace(cls, algebra: Algebra, normalized: bool = True) -> "PositiveFunctional":
        scale = 1.0 / sum(algebra.block_dims) if normalized else 1.0
        return cls(algebra, tuple(scale * np.eye(d) for d in algebra.block_dims))

    @property
    def faithful(self) -> bool:
        return all(np.linalg.eigvalsh(rho)[0] > 1e-12 for rho in self.densities)

    def __call__(self, x: Element) -> complex:
        return complex(sum(np.trace(rho @ blk) for rho, blk in zip(self.densities, x.blocks)))

    def coefficients(self) -> np.ndarray:
        """Row vector c with f(x) = c . coords(x)."""
        return np.concatenate([rho.T.reshape(-1) for rho in self.densities])


def _gram_from_functional(alg: Algebra, coeffs: np.ndarray, middle: Element) -> np.ndarray:
    # <E_rs, E_pq> = phi(E_qp X E_rs) = X[p, r] * phi(E_qs): one Kronecker product per block
    G = np.zeros((alg.dim, alg.dim), dtype=complex)
    for b, d in enumerate(alg.block_dims):
        s = alg.block_slice(b)
        G[s, s] = np.kron(middle.blocks[b], coeffs[s].reshape(d, d))
    return G


def unit_power(delta: AlgebraMap, k: int) -> Element:
    """delta^k(1)."""
    alg = delta.algebra
    v = alg.to_vector(alg.one)
    for _ in range(k):
        v = delta.matrix @ v
    return alg.from_vector(v)


def gram_matrix(algebra: Algebra, delta: AlgebraMap, delta_star: AlgebraMap,
                f: PositiveFunctional, n: int) -> np.ndarray:
    """G_n with (G_n)_{ij} = <E_j, E_i>_n, so <x, y>_n = y^H G_n x on coordinates."""
    c = f.coefficients()
    if n >= 0:
        for _ in range(n):
            c = c @ delta_star.matrix
        return _gram_from_functional(algebra, c, algebra.one)
    return _gram_from_functional(algebra, c, unit_power(delta, -n))


@dataclass(frozen=True, eq=False)
class LevelSpace:
    n: int
    gram: np.ndarray
    kept_basis: np.ndarray
    eigenvalues: np.ndarray

    @property
    def quotient_dim(self) -> int:
        return self.kept_basis.shape[1]

    @classmethod
    def from_gram(cls, n: int, gram: np.ndarray, tol: Tolerance) -> "LevelSpace":
        gram = (gram + gram.conj().T) / 2
        evals, evecs = np.linalg.eigh(gram)
        evals, evecs = evals[::-1], evecs[:, ::-1]
        top = max(float(evals[0]), 0.0) if evals.size else 0.0
        if evals.size and evals[-1] < -tol.eq_tol * max(1.0, top):
            raise NumericalInstabilityError(f"Gram matrix at level {n} has eigenvalue {evals[-1]:.3g}")
        keep = evals > tol.rank_tol * top if top > 0 else np.zeros(evals.shape, dtype=bool)
        vecs = evecs[:, keep]
        # fix the phase of each eigenvector: largest component real positive
        for k in range(vecs.shape[1]):
            j = int(np.argmax(np.abs(vecs[:, k])))
            vecs[:, k] *= abs(vecs[j, k]) / vecs[j, k]
        W = vecs / np.sqrt(evals[keep])
        return cls(n=n, gram=gram, kept_basis=W, eigenvalues=evals)

    def operator_from(self, source: "LevelSpace", coord_map: np.ndarray) -> np.ndarray:
        """Matrix of the operator induced by ``coord_map`` from ``source`` to this level."""
        return self.kept_basis.conj().T @ self.gram @ coord_map @ source.kept_basis


@dataclass(frozen=True, eq=False)
class TruncatedRepresentation:
    algebra: Algebra
    delta: AlgebraMap
    delta_star: AlgebraMap
    functionals: tuple
    window: int
    levels: dict
    U_blocks: dict       # n -> matrix from level n-1 to level n
    Ustar_blocks: dict   # n -> matrix from level n+1 to level n
    pi_basis: tuple      # k -> {n: matrix of pi(E_k) on level n}
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def level_range(self) -> range:
        return range(-self.window, self.window + 1)

    @property
    def interior_levels(self) -> range:
        return range(-self.window + 1, self.window)

    @property
    def level_dims(self) -> dict:
        return {n: self.levels[n].quotient_dim for n in self.level_range}

    @property
    def offsets(self) -> dict:
        out, pos = {}, 0
        for n in self.level_range:
            out[n] = pos
            pos += self.levels[n].quotient_dim
        return out

    @property
    def total_dim(self) -> int:
        return sum(self.level_dims.values())

    def level_indices(self, n: int) -> np.ndarray:
        off = self.offsets[n]
        return np.arange(off, off + self.levels[n].quotient_dim)

    def interior_indices(self) -> np.ndarray:
        parts = [self.level_indices(n) for n in self.interior_levels]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=int)

    def _assemble(self, blocks: dict, shift: int) -> np.ndarray:
        K = self.total_dim
        out = np.zeros((K, K), dtype=complex)
        for n, m in blocks.items():
            out[np.ix_(self.level_indices(n), self.level_indices(n + shift))] = m
        return out

    def U(self) -> np.ndarray:
        if "U" not in self._cache:
            self._cache["U"] = self._assemble(self.U_blocks, -1)
        return self._cache["U"]

    def Ustar(self) -> np.ndarray:
        if "Ustar" not in self._cache:
            self._cache["Ustar"] = self._assemble(self.Ustar_blocks, +1)
        return self._cache["Ustar"]

    def pi_level(self, a: Union[Element, np.ndarray], n: int) -> np.ndarray:
        v = self.algebra.to_vector(a) if isinstance(a, Element) else np.asarray(a)
        k = self.levels[n].quotient_dim
        out = np.zeros((k, k), dtype=complex)
        for idx in np.flatnonzero(v):
            out += v[idx] * self.pi_basis[idx][n]
        return out

    def pi(self, a: Union[Element, np.ndarray]) -> np.ndarray:
        return self._assemble({n: self.pi_level(a, n) for n in self.level_range}, 0)


def _as_functionals(algebra: Algebra, f) -> tuple:
    if f is None:
        return (PositiveFunctional.trace(algebra),)
    if isinstance(f, PositiveFunctional):
        return (f,)
    fs = tuple(f)
    if not fs:
        raise RejectedInput("at least one functional is required")
    return fs


def build_truncated_representation(algebra: Algebra, delta: AlgebraMap, delta_star: AlgebraMap,
                                   f: Union[PositiveFunctional, Sequence[PositiveFunctional], None] = None,
                                   window: int = DEFAULT_WINDOW, tol: Tolerance = DEFAULT_TOL,
                                   samples: int = DEFAULT_SAMPLES, seed: int = 0,
                                   check: bool = True) -> TruncatedRepresentation:
    """Build levels -window..window of the witness for a complete pair.

    Several functionals give the direct sum of the corresponding spaces:
    coordinates on a level are then tuples of algebra elements and every
    operator acts diagonally.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if check:
        comp = check_complete(delta, delta_star, tol, samples, seed)
        if not comp.verdict:
            raise RejectedInput(f"transfer operator is not complete (residual {comp.residuals['complete']:.3g})")
    fs = _as_functionals(algebra, f)
    m = len(fs)
    lift = (lambda M: M) if m == 1 else (lambda M: np.kron(np.eye(m), M))

    levels = {}
    for n in range(-window, window + 1):
        grams = [gram_matrix(algebra, delta, delta_star, fi, n) for fi in fs]
        G = grams[0] if m == 1 else _block_diag(grams)
        levels[n] = LevelSpace.from_gram(n, G, tol)

    D, S = delta.matrix, delta_star.matrix
    left = algebra.left_mult_matrix
    U_blocks, Ustar_blocks = {}, {}
    for n in range(-window + 1, window + 1):
        M = D if n > 0 else left(unit_power(delta, -n + 1))
        U_blocks[n] = levels[n].operator_from(levels[n - 1], lift(M))
    for n in range(-window, window):
        M = S if n >= 0 else left(unit_power(delta, -n))
        Ustar_blocks[n] = levels[n].operator_from(levels[n + 1], lift(M))

    D_powers = {0: np.eye(algebra.dim)}
    for k in range(1, window + 1):
        D_powers[k] = D @ D_powers[k - 1]
    pi_basis = []
    for k in range(algebra.dim):
        per_level = {}
        for n in range(-window, window + 1):
            a = algebra.from_vector(D_powers[max(-n, 0)][:, k])
            per_level[n] = levels[n].operator_from(levels[n], lift(left(a)))
        pi_basis.append(per_level)

    return TruncatedRepresentation(algebra=algebra, delta=delta, delta_star=delta_star, functionals=fs,
                                   window=window, levels=levels, U_blocks=U_blocks,
                                   Ustar_blocks=Ustar_blocks, pi_basis=tuple(pi_basis))


def _block_diag(mats) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    pos = 0
    for m in mats:
        k = m.shape[0]
        out[pos:pos + k, pos:pos + k] = m
        pos += k
    return out


def verify_lemma_adjointness(rep: TruncatedRepresentation, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """Shift identities of the level inner products and adjointness of U, U^*."""
    alg = rep.algebra
    m = len(rep.functionals)
    lift = (lambda M: M) if m == 1 else (lambda M: np.kron(np.eye(m), M))
    D, S = lift(rep.delta.matrix), lift(rep.delta_star.matrix)
    forward = backward = 0.0
    for n in range(0, rep.window):
        G0, G1 = rep.levels[n].gram, rep.levels[n + 1].gram
        # <delta(v), u>_{n+1} - <v, delta_*(u)>_n over all basis pairs
        forward = max(forward, float(np.abs(G1 @ D - S.conj().T @ G0).max()))
    for n in range(-rep.window, 0):
        G0, G1 = rep.levels[n].gram, rep.levels[n + 1].gram
        L = lift(alg.left_mult_matrix(unit_power(rep.delta, -n)))
        backward = max(backward, float(np.abs(G1 @ L - L.conj().T @ G0).max()))
    blocks = 0.0
    for n in range(-rep.window, rep.window):
        diff = rep.Ustar_blocks[n] - rep.U_blocks[n + 1].conj().T
        if diff.size:
            blocks = max(blocks, float(np.linalg.norm(diff, ord=2)))
    return VerificationReport.from_residuals(
        {"shift_nonnegative_levels": forward, "shift_negative_levels": backward, "U_Ustar_adjoint": blocks},
        tol.eq_tol,
    )


def _norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, ord=2)) if m.size else 0.0


def _span_residual(stack: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    if stack.shape[1] == 0:
        return float(np.linalg.norm(target)), np.zeros(0)
    coef = np.linalg.lstsq(stack, target, rcond=None)[0]
    return float(np.linalg.norm(stack @ coef - target)), coef


def verify_coefficient_relations(rep: TruncatedRepresentation, algebra: Algebra = None,
                                 delta: AlgebraMap = None, delta_star: AlgebraMap = None,
                                 tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """Check every coefficient-algebra relation on interior-supported vectors.

    Gating residuals are operator norms of (lhs - rhs) restricted to interior
    columns, maximized over basis elements.  The verdict additionally
    requires pi to be faithful on level 0 when every functional is faithful.
    """
    alg = algebra or rep.algebra
    delta = delta or rep.delta
    delta_star = delta_star or rep.delta_star
    I = rep.interior_indices()
    U, Us = rep.U(), rep.Ustar()
    UsU, UUs = Us @ U, U @ Us
    pis = [rep.pi(alg.basis_element(k)) for k in range(alg.dim)]
    pi_delta = [rep.pi(delta.matrix[:, k]) for k in range(alg.dim)]
    pi_dstar = [rep.pi(delta_star.matrix[:, k]) for k in range(alg.dim)]
    interior = np.ix_(I, I)
    span_stack = np.stack([p[interior].reshape(-1) for p in pis], axis=1)

    res = dict.fromkeys(["conjugation_by_U", "conjugation_by_Ustar", "covariance", "UstarU_is_pi_transfer_unit",
                         "UUstar_is_pi_delta_unit", "UstarU_central", "UstarU_absorbs_products", "range_in_pi_A_forward",
                         "range_in_pi_A_backward", "necessity_roundtrip", "UUstar_projection",
                         "pi_multiplicative", "pi_star"], 0.0)
    res["UstarU_is_pi_transfer_unit"] = _norm((UsU - rep.pi(delta_star(alg.one)))[:, I])
    res["UUstar_is_pi_delta_unit"] = _norm((UUs - rep.pi(delta(alg.one)))[:, I])
    P = UUs[interior]
    res["UUstar_projection"] = max(_norm(P @ P - P), _norm(P - P.conj().T))

    fwd = [U @ p @ Us for p in pis]
    bwd = [Us @ p @ U for p in pis]
    for k in range(alg.dim):
        p = pis[k]
        res["conjugation_by_U"] = max(res["conjugation_by_U"], _norm((fwd[k] - pi_delta[k])[:, I]))
        res["conjugation_by_Ustar"] = max(res["conjugation_by_Ustar"], _norm((bwd[k] - pi_dstar[k])[:, I]))
        res["covariance"] = max(res["covariance"], _norm((U @ p - pi_delta[k] @ U)[:, I]))
        res["UstarU_central"] = max(res["UstarU_central"], _norm((UsU @ p - p @ UsU)[:, I]))
        r, _ = _span_residual(span_stack, fwd[k][interior].reshape(-1))
        res["range_in_pi_A_forward"] = max(res["range_in_pi_A_forward"], r)
        r, coef = _span_residual(span_stack, bwd[k][interior].reshape(-1))
        res["range_in_pi_A_backward"] = max(res["range_in_pi_A_backward"], r)
        # recover delta_*(E_k) from U^* pi(E_k) U and compare coordinates
        if coef.size:
            res["necessity_roundtrip"] = max(res["necessity_roundtrip"],
                                             float(np.abs(coef - delta_star.matrix[:, k]).max()))
        res["pi_star"] = max(res["pi_star"],
                             _norm(pis[alg.star_permutation[k]][interior] - p[interior].conj().T))
    for a in range(alg.dim):
        for b in range(alg.dim):
            inner = bwd[b]
            lhs = UsU @ pis[a] @ inner
            rhs = pis[a] @ inner
            res["UstarU_absorbs_products"] = max(res["UstarU_absorbs_products"],
                                                 _norm((lhs - rhs)[:, I]))
            prod = alg.to_vector(alg.basis_element(a) @ alg.basis_element(b))
            res["pi_multiplicative"] = max(res["pi_multiplicative"],
                                           _norm((rep.pi(prod) - pis[a] @ pis[b])[interior]))

    report = VerificationReport.from_residuals(res, tol.eq_tol)
    faithful_f = all(fi.faithful for fi in rep.functionals)
    smin = faithful_min_singular_value(rep)
    report.info.update(faithful_functional=faithful_f, faithful_min_singular_value=smin,
                       pi_faithful=smin > tol.rank_tol, interior_dim=int(I.size))
    if faithful_f and not smin > tol.rank_tol:
        report.verdict = False
        report.errors.append(f"pi is not faithful on level 0 (min singular value {smin:.3g})")
    return report


def faithful_min_singular_value(rep: TruncatedRepresentation) -> float:
    """Smallest singular value of a -> pi(a) restricted to level 0."""
    alg = rep.algebra
    cols = [rep.pi_basis[k][0].reshape(-1) for k in range(alg.dim)]
    mat = np.stack(cols, axis=1)
    # fewer rows than columns means a nontrivial kernel
    if mat.size == 0 or mat.shape[0] < mat.shape[1]:
        return 0.0
    return float(np.linalg.svd(mat, compute_uv=False)[-1])


def check_isometry_corollary(delta: AlgebraMap, cert: CompletenessCertificate, rep: TruncatedRepresentation,
                             tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """delta comes from an isometry iff delta_*(1) = 1 iff delta is injective
    with hereditary range; in the isometric case U^*U = 1 on the interior."""
    alg = delta.algebra
    unit_gap = (cert.delta_star(alg.one) - alg.one).norm()
    isometry = unit_gap <= tol.eq_tol
    injective = len(kernel_blocks(delta, tol)) == 0
    hereditary = check_hereditary(delta, tol).verdict
    I = rep.interior_indices()
    UsU = (rep.Ustar() @ rep.U())[np.ix_(I, I)]
    defect = _norm(UsU - np.eye(I.size))
    residuals = {"UstarU_identity": defect} if isometry else {}
    report = VerificationReport.from_residuals(residuals, tol.eq_tol)
    report.info.update(isometry=isometry, transfer_unit_gap=unit_gap, monomorphism=injective,
                       hereditary_range=hereditary, partial_isometry_defect=defect)
    if isometry != (injective and hereditary):
        raise InternalConsistencyError(
            f"delta_*(1) = 1 is {isometry} but (injective and hereditary) is {injective and hereditary}"
        )
    return report
