"""Computable invariants distinguishing DGAs up to equivalence.

Augmentations (unital algebra maps to Z/2 killing the differential and all
generators of nonzero degree) are found by exhaustive search over the
degree-zero generators.  Linearized homology conjugates the differential by
an augmentation, truncates to word length one and takes homology of the
resulting complex of Z/2 vector spaces.  Both survive stabilization and
graded tame changes of coordinates, so differing values distinguish
equivalence classes; equal values prove nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .algebra import (
    DGA,
    AlgebraError,
    Monomial,
    d_squared_check,
)

Augmentation = dict[str, int]


class InvariantError(AlgebraError):
    pass


def _eligible(dga: DGA) -> list[str]:
    """Generators an augmentation may send to 1: those of degree 0.

    With modulus 1 every degree is 0, so every generator is eligible.
    """
    return [g.gid for g in dga.generators
            if dga.reduce_degree(g.degree) == 0]


def _eval_poly(assignment: Mapping[str, int], p) -> int:
    val = 0
    for m in p:
        term = 1
        for gid in m:
            if not assignment.get(gid, 0):
                term = 0
                break
        val ^= term
    return val


def is_augmentation(dga: DGA, eps: Mapping[str, int]) -> bool:
    for g in dga.generators:
        if eps.get(g.gid, 0) and dga.reduce_degree(g.degree) != 0:
            return False
        if _eval_poly(eps, dga.d(g.gid)):
            return False
    return True


def find_augmentations(dga: DGA, limit: int = 16) -> list[Augmentation]:
    """All augmentations, in lexicographic assignment order.

    ``limit`` guards the exhaustive 2^k search over degree-zero generators;
    raise it explicitly for larger algebras.
    """
    frees = _eligible(dga)
    if len(frees) > limit:
        raise InvariantError(
            f"{len(frees)} degree-zero generators exceed the search limit "
            f"{limit}; pass a larger limit to search anyway")
    out = []
    for bits in range(1 << len(frees)):
        eps = {gid: (bits >> i) & 1 for i, gid in enumerate(frees)}
        ok = True
        for g in dga.generators:
            if _eval_poly(eps, dga.d(g.gid)):
                ok = False
                break
        if ok:
            out.append({g.gid: eps.get(g.gid, 0) for g in dga.generators})
    return out


def augmentation_count(dga: DGA, limit: int = 16) -> int:
    return len(find_augmentations(dga, limit))


# ---------------------------------------------------------------------------
# Linearized homology


def _rank_gf2(rows: list[int]) -> int:
    rank = 0
    basis: list[int] = []
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
            basis.sort(reverse=True)
            rank += 1
    return rank


def _linear_part(dga: DGA, eps: Mapping[str, int], gid: str) -> dict[str, int]:
    """Coefficients of the length-one truncation of the conjugated d.

    Substituting y -> y + eps(y) into each word of d(gid) and keeping the
    linear terms: position j of word w contributes w_j whenever every other
    letter is sent to 1 by eps.
    """
    coeffs: dict[str, int] = {}
    for m in dga.d(gid):
        for j, z in enumerate(m):
            rest = 1
            for i, y in enumerate(m):
                if i != j and not eps.get(y, 0):
                    rest = 0
                    break
            if rest:
                coeffs[z] = coeffs.get(z, 0) ^ 1
    return {k: v for k, v in coeffs.items() if v}


def linearized_poincare(dga: DGA, eps: Mapping[str, int]) -> dict[int, int]:
    """Dimensions of the linearized homology, per degree.

    The constant term of the conjugated differential vanishes exactly
    because eps is an augmentation; this is checked, as is d^2 = 0.
    """
    if not d_squared_check(dga):
        raise InvariantError("differential does not square to zero")
    if not is_augmentation(dga, eps):
        raise InvariantError("assignment is not an augmentation")

    degrees = sorted({dga.reduce_degree(g.degree) for g in dga.generators})
    by_degree: dict[int, list[str]] = {k: [] for k in degrees}
    for g in dga.generators:
        by_degree[dga.reduce_degree(g.degree)].append(g.gid)
    slot = {gid: i for k in degrees for i, gid in enumerate(by_degree[k])}

    def matrix(k: int) -> list[int]:
        # rows indexed by degree-k generators, bits by degree-(k-1) slots
        src = by_degree.get(k, [])
        dst_degree = dga.reduce_degree(k - 1)
        rows = []
        for gid in src:
            row = 0
            for z, c in _linear_part(dga, eps, gid).items():
                zg = dga.by_id(z)
                if dga.reduce_degree(zg.degree) == dst_degree and c:
                    row |= 1 << slot[z]
            rows.append(row)
        return rows

    dims: dict[int, int] = {}
    for k in degrees:
        dim = len(by_degree[k])
        out_rank = _rank_gf2(matrix(k))
        in_degree = dga.reduce_degree(k + 1)
        in_rank = _rank_gf2(matrix(in_degree)) if in_degree in by_degree \
            else 0
        dims[k] = dim - out_rank - in_rank
        if dims[k] < 0:
            raise InvariantError("linearized complex fails d^2 = 0")
    return {k: v for k, v in dims.items() if v}


# ---------------------------------------------------------------------------
# Comparison report


@dataclass(frozen=True)
class CompareReport:
    degrees_a: tuple[tuple[int, int], ...]
    degrees_b: tuple[tuple[int, int], ...]
    augmentations_a: int
    augmentations_b: int
    polynomials_a: tuple[tuple[tuple[int, int], ...], ...]
    polynomials_b: tuple[tuple[tuple[int, int], ...], ...]
    distinguished: bool

    @property
    def verdict(self) -> str:
        return ("distinguished" if self.distinguished
                else "indistinguishable by these invariants")

    def to_dict(self) -> dict:
        return {
            "generator_degrees": [dict(self.degrees_a),
                                  dict(self.degrees_b)],
            "augmentation_counts": [self.augmentations_a,
                                    self.augmentations_b],
            "linearized_polynomials": [
                [dict(p) for p in self.polynomials_a],
                [dict(p) for p in self.polynomials_b],
            ],
            "verdict": self.verdict,
        }


def _degree_histogram(dga: DGA) -> tuple[tuple[int, int], ...]:
    hist: dict[int, int] = {}
    for g in dga.generators:
        k = dga.reduce_degree(g.degree)
        hist[k] = hist.get(k, 0) + 1
    return tuple(sorted(hist.items()))


def _poly_multiset(dga: DGA, limit: int) -> tuple:
    polys = []
    for eps in find_augmentations(dga, limit):
        dims = linearized_poincare(dga, eps)
        polys.append(tuple(sorted(dims.items())))
    return tuple(sorted(polys))


def compare(a: DGA, b: DGA, limit: int = 16) -> CompareReport:
    """Invariant-by-invariant comparison; 'distinguished' is conclusive,
    its absence is not (no equivalence claim is made)."""
    da, db = _degree_histogram(a), _degree_histogram(b)
    na, nb = augmentation_count(a, limit), augmentation_count(b, limit)
    pa, pb = _poly_multiset(a, limit), _poly_multiset(b, limit)
    distinguished = (da != db) or (na != nb) or (pa != pb)
    return CompareReport(da, db, na, nb, pa, pb, distinguished)
