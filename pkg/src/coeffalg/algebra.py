"""Finite-dimensional C*-algebras realized as direct sums of full matrix blocks.

An algebra ``M_{d_1} + ... + M_{d_k}`` is described by its block dimensions.
Its canonical basis consists of the matrix units ``E^{(b)}_{ij}`` enumerated
block by block, row-major inside each block; every element has a coordinate
vector in this basis and every linear map a ``dim x dim`` matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import StructuralError
from .report import VerificationReport


@dataclass(frozen=True)
class Tolerance:
    """Thresholds for residual comparisons and rank decisions.

    ``rank_tol`` is relative: a singular value counts as nonzero when it
    exceeds ``rank_tol`` times the largest singular value.
    """

    eq_tol: float = 1e-9
    rank_tol: float = 1e-9

    def __post_init__(self):
        if not (self.eq_tol >= 0 and self.rank_tol >= 0):
            raise ValueError("tolerances must be nonnegative")

    def rank(self, m: np.ndarray) -> int:
        m = np.asarray(m)
        if m.size == 0:
            return 0
        s = np.linalg.svd(m, compute_uv=False)
        if s[0] == 0:
            return 0
        return int(np.sum(s > self.rank_tol * s[0]))

    def orth(self, m: np.ndarray) -> np.ndarray:
        """Orthonormal basis (columns) of the column space of ``m``."""
        m = np.asarray(m, dtype=complex)
        if m.size == 0:
            return np.zeros((m.shape[0], 0), dtype=complex)
        u, s, _ = np.linalg.svd(m, full_matrices=False)
        if s[0] == 0:
            return u[:, :0]
        return u[:, s > self.rank_tol * s[0]]


DEFAULT_TOL = Tolerance()


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Algebra:
    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims or any(d < 1 for d in dims):
            raise StructuralError(f"block dimensions must be positive, got {self.block_dims!r}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def n_blocks(self) -> int:
        return len(self.block_dims)

    @cached_property
    def dim(self) -> int:
        return sum(d * d for d in self.block_dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, pos = [], 0
        for d in self.block_dims:
            out.append(pos)
            pos += d * d
        return tuple(out)

    def block_slice(self, b: int) -> slice:
        start = self.offsets[b]
        return slice(start, start + self.block_dims[b] ** 2)

    def block_indices(self, blocks: Sequence[int]) -> np.ndarray:
        """Coordinate indices of all matrix units lying in the given blocks."""
        idx = [np.arange(self.block_slice(b).start, self.block_slice(b).stop) for b in blocks]
        return np.concatenate(idx) if idx else np.zeros(0, dtype=int)

    @cached_property
    def basis_labels(self) -> tuple[tuple[int, int, int], ...]:
        return tuple((b, i, j) for b, d in enumerate(self.block_dims)
                     for i in range(d) for j in range(d))

    @cached_property
    def star_permutation(self) -> np.ndarray:
        """Index array J with E_k^* = E_{J[k]}."""
        perm = np.empty(self.dim, dtype=int)
        for b, d in enumerate(self.block_dims):
            off = self.offsets[b]
            for i in range(d):
                for j in range(d):
                    perm[off + i * d + j] = off + j * d + i
        return perm

    # -- elements ----------------------------------------------------------

    def element(self, blocks) -> "Element":
        return Element(self, tuple(blocks))

    def zero(self) -> "Element":
        return Element(self, tuple(np.zeros((d, d)) for d in self.block_dims))

    @cached_property
    def one(self) -> "Element":
        return Element(self, tuple(np.eye(d) for d in self.block_dims))

    def identity(self) -> "Element":
        return self.one

    def basis_element(self, k: int) -> "Element":
        v = np.zeros(self.dim)
        v[k] = 1.0
        return self.from_vector(v)

    def basis(self) -> list["Element"]:
        return [self.basis_element(k) for k in range(self.dim)]

    def block_projection(self, blocks) -> "Element":
        """Central projection equal to the identity on ``blocks`` and 0 elsewhere."""
        keep = set(blocks)
        return Element(self, tuple(np.eye(d) if b in keep else np.zeros((d, d))
                                   for b, d in enumerate(self.block_dims)))

    def to_vector(self, x: "Element") -> np.ndarray:
        self._check(x)
        return np.concatenate([blk.reshape(-1) for blk in x.blocks])

    def from_vector(self, v) -> "Element":
        v = np.asarray(v)
        if v.shape != (self.dim,):
            raise StructuralError(f"coordinate vector of length {self.dim} expected, got shape {v.shape}")
        return Element(self, tuple(v[self.block_slice(b)].reshape(d, d)
                                   for b, d in enumerate(self.block_dims)))

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> "Element":
        return Element(self, tuple(scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
                                   for d in self.block_dims))

    # -- coordinate-level operators ---------------------------------------

    def left_mult_matrix(self, x: "Element") -> np.ndarray:
        """Matrix of y -> x y in the canonical basis."""
        self._check(x)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for b, d in enumerate(self.block_dims):
            s = self.block_slice(b)
            out[s, s] = np.kron(x.blocks[b], np.eye(d))
        return out

    def right_mult_matrix(self, x: "Element") -> np.ndarray:
        """Matrix of y -> y x in the canonical basis."""
        self._check(x)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for b, d in enumerate(self.block_dims):
            s = self.block_slice(b)
            out[s, s] = np.kron(np.eye(d), x.blocks[b].T)
        return out

    def adjoint_vectors(self, m: np.ndarray) -> np.ndarray:
        """Apply the involution to each column of a coordinate matrix."""
        return np.conj(np.asarray(m)[self.star_permutation])

    def column_norms(self, m: np.ndarray) -> np.ndarray:
        """C*-norm of every column of ``m`` read as an element."""
        m = np.asarray(m)
        if m.ndim == 1:
            m = m[:, None]
        out = np.zeros(m.shape[1])
        for b, d in enumerate(self.block_dims):
            blk = m[self.block_slice(b)]
            if d == 1:
                out = np.maximum(out, np.abs(blk[0]))
            else:
                mats = blk.T.reshape(-1, d, d)
                out = np.maximum(out, np.linalg.norm(mats, ord=2, axis=(1, 2)))
        return out

    def column_min_eigenvalues(self, m: np.ndarray) -> np.ndarray:
        """Smallest eigenvalue of the self-adjoint part of every column of ``m``."""
        m = np.asarray(m)
        out = np.full(m.shape[1], np.inf)
        for b, d in enumerate(self.block_dims):
            mats = m[self.block_slice(b)].T.reshape(-1, d, d)
            herm = (mats + np.conj(np.swapaxes(mats, 1, 2))) / 2
            out = np.minimum(out, np.linalg.eigvalsh(herm)[:, 0])
        return out

    def _check(self, x: "Element") -> None:
        if x.algebra.block_dims != self.block_dims:
            raise StructuralError(f"element of {x.algebra.block_dims} used in algebra {self.block_dims}")


@dataclass(frozen=True, eq=False)
class Element:
    """An element of a block algebra: one square complex matrix per block."""

    algebra: Algebra
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        dims = self.algebra.block_dims
        if len(self.blocks) != len(dims):
            raise StructuralError(f"{len(dims)} blocks expected, got {len(self.blocks)}")
        blocks = []
        for b, (blk, d) in enumerate(zip(self.blocks, dims)):
            blk = np.asarray(blk)
            if blk.ndim == 0 and d == 1:
                blk = blk.reshape(1, 1)
            if blk.shape != (d, d):
                raise StructuralError(f"block {b} must be {d}x{d}, got shape {blk.shape}")
            blocks.append(_frozen(blk))
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def vector(self) -> np.ndarray:
        return self.algebra.to_vector(self)

    def __add__(self, other: "Element") -> "Element":
        self.algebra._check(other)
        return Element(self.algebra, tuple(x + y for x, y in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "Element") -> "Element":
        self.algebra._check(other)
        return Element(self.algebra, tuple(x - y for x, y in zip(self.blocks, other.blocks)))

    def __neg__(self) -> "Element":
        return Element(self.algebra, tuple(-x for x in self.blocks))

    def __mul__(self, c) -> "Element":
        if isinstance(c, Element):
            return mul(self, c)
        return Element(self.algebra, tuple(c * x for x in self.blocks))

    __rmul__ = __mul__

    def __matmul__(self, other: "Element") -> "Element":
        return mul(self, other)

    @property
    def H(self) -> "Element":
        return adjoint(self)

    def norm(self) -> float:
        return operator_norm(self)

    def allclose(self, other: "Element", atol: float = 1e-12) -> bool:
        return operator_norm(self - other) <= atol

    def __repr__(self):
        inner = ", ".join(np.array2string(b, precision=4) for b in self.blocks)
        return f"Element({inner})"


def mul(x: Element, y: Element) -> Element:
    x.algebra._check(y)
    return Element(x.algebra, tuple(a @ b for a, b in zip(x.blocks, y.blocks)))


def adjoint(x: Element) -> Element:
    return Element(x.algebra, tuple(a.conj().T for a in x.blocks))


def operator_norm(x: Element) -> float:
    return max(float(np.linalg.norm(a, ord=2)) for a in x.blocks)


def is_positive(x: Element, tol: Tolerance = DEFAULT_TOL) -> bool:
    if operator_norm(x - adjoint(x)) > tol.eq_tol:
        return False
    return min_eigenvalue(x) >= -tol.eq_tol


def min_eigenvalue(x: Element) -> float:
    """Smallest eigenvalue of the self-adjoint part of ``x``."""
    return min(float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0]) for a in x.blocks)


def central_projection_report(p: Element, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """Test ``p`` for being a central projection in two independent ways.

    The gating residuals are the algebraic ones (idempotent, self-adjoint,
    commutes with every matrix unit).  The block-canonical test (0 or
    identity on each block) is recorded in ``info`` and any disagreement
    between the two is listed in ``errors``.
    """
    alg = p.algebra
    commutator = alg.left_mult_matrix(p) - alg.right_mult_matrix(p)
    comm_norms = alg.column_norms(commutator)
    k = int(np.argmax(comm_norms))
    report = VerificationReport.from_residuals(
        {
            "idempotent": operator_norm(p @ p - p),
            "self_adjoint": operator_norm(p - adjoint(p)),
            "commutes": comm_norms[k],
        },
        tol.eq_tol,
    )
    report.witnesses["commutes"] = (k,)
    pattern = []
    for blk in p.blocks:
        d = blk.shape[0]
        if np.linalg.norm(blk, ord=2) <= tol.eq_tol:
            pattern.append(0)
        elif np.linalg.norm(blk - np.eye(d), ord=2) <= tol.eq_tol:
            pattern.append(1)
        else:
            pattern.append(None)
    canonical = all(v is not None for v in pattern)
    report.info["canonical_form"] = canonical
    report.info["block_pattern"] = pattern
    if canonical != report.verdict:
        report.errors.append(
            f"numerical-consistency: algebraic test says {report.verdict}, block-canonical test says {canonical}"
        )
    return report


def is_central_projection(p: Element, tol: Tolerance = DEFAULT_TOL) -> bool:
    return central_projection_report(p, tol).verdict


def support_blocks(p: Element, tol: Tolerance = DEFAULT_TOL) -> tuple[int, ...]:
    """Blocks on which ``p`` is not (numerically) zero."""
    return tuple(b for b, blk in enumerate(p.blocks) if np.linalg.norm(blk, ord=2) > tol.eq_tol)
