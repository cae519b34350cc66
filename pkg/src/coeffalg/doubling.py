"""Discrete doubling map on Z_N with a weighted transfer operator.

The circle is replaced by the grid ``x_j = j/N`` and the algebra of functions
on it by the diagonal algebra ``C^N``.  The endomorphism is composition with
``j -> 2j mod N``; the weighted transfer operator sums over preimages,

    (delta_* a)_i = sum_{j : 2j = i mod N} rho_j a_j,

which is zero at odd residues (no preimage).  The weight must satisfy
``0 <= rho_j <= 1`` and ``rho_{j + N/2} = 1 - rho_j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Algebra, Element
from .errors import InternalConsistencyError, RejectedInput
from .maps import AlgebraMap

RHO_KINDS = ("constant_half", "raised_cosine")
RHO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DoublingInstance:
    grid_size: int
    rho: np.ndarray
    algebra: Algebra
    delta: AlgebraMap
    delta_star: AlgebraMap

    @property
    def preimage_indicator(self) -> Element:
        """Indicator of residues hit by the doubling map; equals delta_*(1)."""
        hit = np.zeros(self.grid_size)
        hit[(2 * np.arange(self.grid_size)) % self.grid_size] = 1.0
        return self.algebra.from_vector(hit)


def make_rho(N: int, rho_kind: str) -> np.ndarray:
    half = N // 2
    if rho_kind == "constant_half":
        first = np.full(half, 0.5)
    elif rho_kind == "raised_cosine":
        first = (1 + np.cos(2 * np.pi * np.arange(half) / N)) / 2
    else:
        raise RejectedInput(f"unknown rho_kind {rho_kind!r}; expected one of {RHO_KINDS}")
    # second half written as 1 - first half so the constraint holds exactly
    return np.concatenate([first, 1 - first])


def check_rho(rho, N: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (N,):
        raise RejectedInput(f"rho must have length {N}, got shape {rho.shape}")
    for j, r in enumerate(rho):
        if not (-RHO_TOL <= r <= 1 + RHO_TOL):
            raise RejectedInput(f"rho[{j}] = {r} outside [0, 1]")
    half = N // 2
    for j in range(half):
        if abs(rho[j] + rho[j + half] - 1) > RHO_TOL:
            raise RejectedInput(f"rho[{j}] + rho[{j + half}] = {rho[j] + rho[j + half]} != 1 (index {j})")
    return rho


def doubling_matrices(N: int, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    D = np.zeros((N, N))
    S = np.zeros((N, N))
    for j in range(N):
        D[j, (2 * j) % N] = 1.0
        S[(2 * j) % N, j] += rho[j]
    return D, S


def make_doubling_instance(N: int, rho_kind: str = "constant_half", rho=None) -> DoublingInstance:
    """Build the doubling pair on ``C^N``.

    ``rho`` (a length-N vector) overrides ``rho_kind`` when given.
    """
    if int(N) != N or N < 4 or N % 2:
        raise RejectedInput(f"grid size must be an even integer >= 4, got {N}")
    N = int(N)
    rho = check_rho(make_rho(N, rho_kind) if rho is None else rho, N)
    alg = Algebra((1,) * N)
    D, S = doubling_matrices(N, rho)
    inst = DoublingInstance(grid_size=N, rho=rho, algebra=alg,
                            delta=AlgebraMap(alg, D), delta_star=AlgebraMap(alg, S))
    one = alg.one
    if (inst.delta(one) - one).norm() > RHO_TOL:
        raise InternalConsistencyError("doubling endomorphism is not unital")
    if (inst.delta_star(one) - inst.preimage_indicator).norm() > RHO_TOL:
        raise InternalConsistencyError("delta_*(1) differs from the preimage indicator")
    return inst
