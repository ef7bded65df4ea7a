"""Scalar algebras that every kernel is generic over.

A semiring here is just a bag of callables plus the element that sparse
storage treats as "absent" (the additive identity). Kernels never inspect
the operations; they only call ``add``/``mul`` and compare against
``add_identity``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

__all__ = [
    "Semiring",
    "ARITH_F64",
    "ARITH_I64",
    "BOOLEAN",
    "MIN_PLUS",
    "MAX_MIN",
    "SELECT2ND_MIN",
    "MANHATTAN",
    "EQUIJOIN",
    "REGISTRY",
    "get_semiring",
]


@dataclass(frozen=True)
class Semiring:
    """An (add, mul) pair over one scalar domain.

    ``annihilating`` says whether ``add_identity`` absorbs under ``mul`` from
    both sides. Intersection-driven kernels (spgemm, masked_spgemm) require
    it; the union-driven spgemm does not.

    ``strict`` is False for distance "semirings" such as Manhattan whose
    ``mul`` is neither associative nor distributive. They are still usable
    with the union kernel but fail the textbook laws.
    """

    name: str
    domain: str
    add: Callable[[Any, Any], Any] = field(repr=False)
    mul: Callable[[Any, Any], Any] = field(repr=False)
    add_identity: Any
    mul_identity: Optional[Any] = None
    annihilating: bool = True
    strict: bool = True
    dtype: Any = field(default=np.float64, repr=False)

    def is_null(self, value: Any) -> bool:
        return value == self.add_identity

    def sum(self, values) -> Any:
        acc = self.add_identity
        for v in values:
            acc = self.add(acc, v)
        return acc

    def __str__(self) -> str:
        return self.name


def _select2nd(a, b):
    return b


def _manhattan(a, b):
    return abs(a - b)


def _bag_union(a: tuple, b: tuple) -> tuple:
    return tuple(sorted(a + b))


def _bag_product(a: tuple, b: tuple) -> tuple:
    return tuple(sorted(x + y for x in a for y in b))


ARITH_F64 = Semiring("arith-f64", "float", lambda a, b: a + b, lambda a, b: a * b, 0.0, 1.0)
ARITH_I64 = Semiring(
    "arith-i64", "integer", lambda a, b: a + b, lambda a, b: a * b, 0, 1, dtype=np.int64
)
BOOLEAN = Semiring(
    "boolean", "boolean", lambda a, b: a or b, lambda a, b: a and b, False, True, dtype=np.bool_
)
# Tropical: infinity is the null element and absorbs under +.
MIN_PLUS = Semiring("min-plus", "float", min, lambda a, b: a + b, math.inf, 0.0)
MAX_MIN = Semiring("max-min", "float", max, min, -math.inf, math.inf)
# mul(inf, b) = b, so infinity only annihilates from the right.
SELECT2ND_MIN = Semiring(
    "select2nd-min", "float", min, _select2nd, math.inf, None, annihilating=False
)
MANHATTAN = Semiring(
    "manhattan", "float", lambda a, b: a + b, _manhattan, 0.0, 0.0,
    annihilating=False, strict=False,
)
# Values are sorted tuples of joined records; add is bag union, mul is the
# cross product of payloads. Multiplying over the shared key is an equi-join.
EQUIJOIN = Semiring("equijoin", "multiset", _bag_union, _bag_product, (), ((),), dtype=object)

REGISTRY: dict[str, Semiring] = {
    sr.name: sr
    for sr in (ARITH_F64, ARITH_I64, BOOLEAN, MIN_PLUS, MAX_MIN, SELECT2ND_MIN, MANHATTAN)
}


def get_semiring(label: str) -> Semiring:
    try:
        return REGISTRY[label]
    except KeyError:
        raise ValueError(
            f"unknown semiring {label!r}; choose from {', '.join(REGISTRY)}"
        ) from None
