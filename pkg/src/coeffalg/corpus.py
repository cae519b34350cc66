"""Named reference instances (endomorphism plus optional transfer operator)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import Algebra
from .doubling import make_doubling_instance
from .maps import AlgebraMap


@dataclass(frozen=True, eq=False)
class Instance:
    name: str
    algebra: Algebra
    delta: AlgebraMap
    delta_star: Optional[AlgebraMap] = None


def identity() -> Instance:
    alg = Algebra((2, 1))
    return Instance("identity", alg, AlgebraMap.identity(alg), AlgebraMap.identity(alg))


def corner() -> Instance:
    """C + C, delta(a, b) = (a, 0), delta_*(a, b) = (a, 0)."""
    alg = Algebra((1, 1))
    d = AlgebraMap.from_block_assignment(alg, [0, None])
    return Instance("corner", alg, d, d)


def m2_shift() -> Instance:
    """M2 + M2, delta(x, y) = (y, 0), delta_*(x, y) = (0, x)."""
    alg = Algebra((2, 2))
    return Instance("m2_shift", alg, AlgebraMap.from_block_assignment(alg, [1, None]),
                    AlgebraMap.from_block_assignment(alg, [None, 0]))


def three_block(weights=(0.5, 0.5)) -> Instance:
    """C^3, delta(a, b, c) = (a, a, b), delta_*(a, b, c) = (w1 a + w2 b, c, 0)."""
    alg = Algebra((1, 1, 1))
    w1, w2 = weights
    S = np.array([[w1, w2, 0], [0, 0, 1], [0, 0, 0]], dtype=float)
    return Instance("three_block", alg, AlgebraMap.from_block_assignment(alg, [0, 0, 1]), AlgebraMap(alg, S))


def cyclic4() -> Instance:
    """C^4, delta(a)_j = a_{j+1 mod 4}; delta_* is the inverse permutation."""
    alg = Algebra((1, 1, 1, 1))
    return Instance("cyclic4", alg, AlgebraMap.from_block_assignment(alg, [1, 2, 3, 0]),
                    AlgebraMap.from_block_assignment(alg, [3, 0, 1, 2]))


def m2c_corner() -> Instance:
    """M2 + C, delta(x, c) = (c E11, 0): delta(1) is a non-central projection."""
    alg = Algebra((2, 1))
    e11 = np.diag([1.0, 0.0])

    def fn(x):
        c = x.blocks[1][0, 0]
        return alg.element([c * e11, np.zeros((1, 1))])

    def fs(x):
        return alg.element([np.zeros((2, 2)), x.blocks[0][:1, :1]])

    return Instance("m2c_corner", alg, AlgebraMap.from_function(alg, fn), AlgebraMap.from_function(alg, fs))


def doubling(N: int, rho_kind: str) -> Instance:
    inst = make_doubling_instance(N, rho_kind)
    return Instance(f"doubling{N}_{rho_kind}", inst.algebra, inst.delta, inst.delta_star)


def zero_map() -> Instance:
    alg = Algebra((2, 1))
    return Instance("zero", alg, AlgebraMap.zero(alg), AlgebraMap.zero(alg))


COMPLETE = ("identity", "corner", "m2_shift", "cyclic4", "m2c_corner")
INCOMPLETE = ("three_block", "doubling8_constant_half", "doubling8_raised_cosine",
              "doubling16_constant_half", "doubling16_raised_cosine")


def get(name: str) -> Instance:
    simple = {"identity": identity, "corner": corner, "m2_shift": m2_shift, "three_block": three_block,
              "cyclic4": cyclic4, "m2c_corner": m2c_corner, "zero": zero_map}
    if name in simple:
        return simple[name]()
    if name.startswith("doubling"):
        n, kind = name[len("doubling"):].split("_", 1)
        return doubling(int(n), kind)
    raise KeyError(name)


def all_names() -> tuple[str, ...]:
    return COMPLETE + INCOMPLETE
