"""Free noncommutative tensor algebra over Z/2 on graded generators.

Everything downstream (differentials, cyclic symmetries, tame changes of
coordinates) is built on three value types:

  * a monomial is a tuple of generator ids (the empty tuple is the unit);
  * a polynomial is a frozenset of monomials -- coefficients live in Z/2,
    so a set with symmetric-difference addition makes cancellation automatic;
  * a DGA bundles generators, a cyclic grading modulus and a differential.

All values are immutable; every operation is a pure function.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping

Monomial = tuple[str, ...]
Poly = frozenset  # frozenset[Monomial]

ONE: Monomial = ()
ZERO: Poly = frozenset()
UNIT: Poly = frozenset({ONE})

KINDS = ("a", "b", "e1", "e2")


class AlgebraError(ValueError):
    """Raised for malformed algebra inputs (unknown ids, bad gradings...)."""


@dataclass(frozen=True, order=True)
class Generator:
    """A distinguished algebra generator.

    ``kind``/``crossing``/``copy`` record where the generator came from: the
    two chords of a crossing ("a"/"b"), or a stabilization pair ("e1"/"e2").
    ``copy`` is the position inside a cyclic-symmetry orbit (0 when there is
    no such structure).  ``length`` is an optional chord length in (0,1);
    nothing downstream consumes it, it is carried as a diagnostic.
    """

    gid: str
    kind: str
    crossing: int
    copy: int = 0
    degree: int = 0
    length: Fraction | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise AlgebraError(f"unknown generator kind {self.kind!r}")
        if self.length is not None and not (0 < self.length < 1):
            raise AlgebraError(f"chord length {self.length} outside (0,1)")


def poly(*monomials: Iterable[str]) -> Poly:
    """Build a polynomial from monomials, cancelling duplicate pairs mod 2."""
    out: set[Monomial] = set()
    for m in monomials:
        out ^= {tuple(m)}
    return frozenset(out)


def poly_add(*ps: Poly) -> Poly:
    out: frozenset = frozenset()
    for p in ps:
        out ^= p
    return out


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: set[Monomial] = set()
    for m in p:
        for n in q:
            out ^= {m + n}
    return frozenset(out)


def poly_involves(p: Poly, gid: str) -> bool:
    return any(gid in m for m in p)


def sort_key(m: Monomial) -> tuple:
    return (len(m), m)


def poly_to_lists(p: Poly) -> list[list[str]]:
    """Canonical (sorted) list-of-lists form, used by all serializers."""
    return [list(m) for m in sorted(p, key=sort_key)]


def poly_from_lists(lists: Iterable[Iterable[str]]) -> Poly:
    return poly(*lists)


def format_poly(p: Poly) -> str:
    if not p:
        return "0"
    terms = ["1" if m == ONE else "*".join(m) for m in sorted(p, key=sort_key)]
    return " + ".join(terms)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a structural check; ``witness`` names the offender."""

    ok: bool
    witness: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class DGA:
    """Semi-free differential graded algebra over Z/2.

    ``modulus`` is the order of the cyclic grading group; 0 means the grading
    is by the integers.  ``diff`` maps generator id -> polynomial.
    """

    generators: tuple[Generator, ...]
    modulus: int
    diff: Mapping[str, Poly]

    def __post_init__(self) -> None:
        if self.modulus < 0:
            raise AlgebraError("grading modulus must be >= 0")
        seen = set()
        for g in self.generators:
            if g.gid in seen:
                raise AlgebraError(f"duplicate generator id {g.gid}")
            seen.add(g.gid)
        for gid, p in self.diff.items():
            if gid not in seen:
                raise AlgebraError(f"differential given for unknown id {gid}")
            for m in p:
                for f in m:
                    if f not in seen:
                        raise AlgebraError(f"unknown id {f} in diff({gid})")

    def by_id(self, gid: str) -> Generator:
        for g in self.generators:
            if g.gid == gid:
                return g
        raise AlgebraError(f"unknown generator id {gid}")

    @property
    def index(self) -> dict[str, Generator]:
        return {g.gid: g for g in self.generators}

    def reduce_degree(self, d: int) -> int:
        return d % self.modulus if self.modulus else d

    def d(self, gid: str) -> Poly:
        if gid not in self.diff:
            raise AlgebraError(f"unknown generator id {gid}")
        return self.diff[gid]


def make_dga(generators: Iterable[Generator], modulus: int,
             diff: Mapping[str, Poly]) -> DGA:
    gens = tuple(generators)
    full = {g.gid: frozenset(diff.get(g.gid, ZERO)) for g in gens}
    return DGA(gens, modulus, full)


def word_degree(m: Monomial, dga: DGA) -> int:
    """Degree of a monomial: sum of factor degrees in the grading group."""
    idx = dga.index
    total = 0
    for gid in m:
        if gid not in idx:
            raise AlgebraError(f"unknown generator id {gid}")
        total += idx[gid].degree
    return dga.reduce_degree(total)


def leibniz_apply(dga: DGA, x: Poly) -> Poly:
    """Extend the generator differential to the whole algebra.

    Linear over Z/2 and Leibniz over products: d(uv) = (du)v + u(dv), so the
    unit maps to 0 and each monomial contributes one term per factor.
    """
    out: set[Monomial] = set()
    for m in x:
        for i, gid in enumerate(m):
            dg = dga.d(gid)
            for term in dg:
                out ^= {m[:i] + term + m[i + 1:]}
    return frozenset(out)


def d_squared_check(dga: DGA) -> CheckResult:
    """Verify d(d(x)) = 0 for every generator; report the first failure."""
    for g in dga.generators:
        residual = leibniz_apply(dga, dga.d(g.gid))
        if residual:
            return CheckResult(False, g.gid,
                               f"d^2({g.gid}) = {format_poly(residual)}")
    return CheckResult(True)


def grading_consistency_check(dga: DGA) -> CheckResult:
    """Verify the differential drops degree by exactly 1 (mod modulus)."""
    for g in dga.generators:
        want = dga.reduce_degree(g.degree - 1)
        for m in dga.d(g.gid):
            got = word_degree(m, dga)
            if got != want:
                return CheckResult(
                    False, g.gid,
                    f"term {format_poly(frozenset({m}))} of d({g.gid}) has "
                    f"degree {got}, expected {want}")
    return CheckResult(True)


# ---------------------------------------------------------------------------
# Stabilization


def _fresh_stab_index(dga: DGA) -> int:
    used = {g.crossing for g in dga.generators if g.kind in ("e1", "e2")}
    k = 1
    while k in used:
        k += 1
    return k


def stabilize(dga: DGA, degree_of_e1: int) -> DGA:
    """Adjoin a cancelling pair e1, e2 with d(e1) = e2, d(e2) = 0."""
    k = _fresh_stab_index(dga)
    d1 = dga.reduce_degree(degree_of_e1)
    d2 = dga.reduce_degree(degree_of_e1 - 1)
    e1 = Generator(f"e1_{k}", "e1", k, 0, d1)
    e2 = Generator(f"e2_{k}", "e2", k, 0, d2)
    diff = dict(dga.diff)
    diff[e1.gid] = poly((e2.gid,))
    diff[e2.gid] = ZERO
    return DGA(dga.generators + (e1, e2), dga.modulus, diff)


# ---------------------------------------------------------------------------
# Substitutions and tame maps


def apply_generator_map(mapping: Mapping[str, Poly], dga: DGA, x: Poly) -> Poly:
    """Apply an algebra endomorphism given by generator images to a poly."""
    out: set[Monomial] = set()
    for m in x:
        prod = UNIT
        for gid in m:
            img = mapping.get(gid)
            if img is None:
                img = poly((gid,))
            prod = poly_mul(prod, img)
        out ^= prod
    return frozenset(out)


@dataclass(frozen=True)
class TameMap:
    """Composition of elementary substitutions x -> x + v (v free of x).

    Each step is homogeneous of the target's degree, hence graded, and is
    its own inverse over Z/2.  Steps apply in list order.
    """

    steps: tuple[tuple[str, Poly], ...]

    @staticmethod
    def elementary(target: str, v: Poly) -> "TameMap":
        return TameMap(((target, frozenset(v)),))

    @staticmethod
    def identity() -> "TameMap":
        return TameMap(())

    def compose(self, later: "TameMap") -> "TameMap":
        return TameMap(self.steps + later.steps)

    def apply_to_poly(self, dga: DGA, x: Poly) -> Poly:
        out = x
        for target, v in self.steps:
            out = apply_generator_map({target: poly_add(poly((target,)), v)},
                                      dga, out)
        return out


def _validate_step(dga: DGA, target: str, v: Poly) -> None:
    g = dga.by_id(target)
    if poly_involves(v, target):
        raise AlgebraError(f"replacement for {target} involves itself")
    for m in v:
        if word_degree(m, dga) != dga.reduce_degree(g.degree):
            raise AlgebraError(
                f"replacement term {format_poly(frozenset({m}))} for {target} "
                f"is not homogeneous of degree {g.degree}")


def apply_tame_map(t: TameMap, dga: DGA) -> DGA:
    """Conjugate the differential by a graded tame automorphism.

    Returns the DGA with differential t o d o t^{-1} on the same generators;
    each elementary step is self-inverse, so conjugation folds step by step.
    """
    current = dga
    for target, v in t.steps:
        _validate_step(current, target, v)
        sub = {target: poly_add(poly((target,)), v)}
        new_diff = {}
        for g in current.generators:
            pre = apply_generator_map(sub, current, poly((g.gid,)))
            image = leibniz_apply(current, pre)
            new_diff[g.gid] = apply_generator_map(sub, current, image)
        current = DGA(current.generators, current.modulus, new_diff)
    return current


# ---------------------------------------------------------------------------
# Cyclic symmetry


@dataclass(frozen=True)
class CyclicAction:
    """Order-p permutation of the generators, advancing orbit positions."""

    p: int
    perm: Mapping[str, str]

    def __post_init__(self) -> None:
        if self.p < 1:
            raise AlgebraError("cyclic order must be >= 1")
        if set(self.perm.values()) != set(self.perm.keys()):
            raise AlgebraError("permutation is not a bijection on its domain")

    def apply(self, gid: str, power: int = 1) -> str:
        out = gid
        for _ in range(power % self.p):
            out = self.perm[out]
        return out

    def orbit(self, gid: str) -> tuple[str, ...]:
        out = [gid]
        cur = self.perm[gid]
        while cur != gid:
            out.append(cur)
            cur = self.perm[cur]
        return tuple(out)

    def orbits(self) -> list[tuple[str, ...]]:
        seen: set[str] = set()
        out = []
        for gid in self.perm:
            if gid not in seen:
                orb = self.orbit(gid)
                seen.update(orb)
                out.append(orb)
        return sorted(out)


def gamma_poly(action: CyclicAction, x: Poly, power: int = 1) -> Poly:
    out: set[Monomial] = set()
    for m in x:
        out ^= {tuple(action.apply(gid, power) for gid in m)}
    return frozenset(out)


@dataclass(frozen=True)
class EquivariantDGA:
    """A DGA together with a cyclic symmetry commuting with d."""

    dga: DGA
    action: CyclicAction

    def __post_init__(self) -> None:
        idx = self.dga.index
        if set(self.action.perm) != set(idx):
            raise AlgebraError("action domain differs from generator set")
        for gid, img in self.action.perm.items():
            g, h = idx[gid], idx[img]
            if g.degree != h.degree:
                raise AlgebraError(f"action changes degree of {gid}")
            if g.kind != h.kind or g.crossing != h.crossing:
                raise AlgebraError(f"action moves {gid} off its orbit family")
            if self.action.p > 1 and h.copy != (g.copy + 1) % self.action.p:
                raise AlgebraError(f"action does not advance copy of {gid}")
        for orb in self.action.orbits():
            if len(orb) != self.action.p:
                raise AlgebraError(
                    f"orbit of {orb[0]} has size {len(orb)}, expected "
                    f"{self.action.p}")


def gamma_commute_check(e: EquivariantDGA) -> CheckResult:
    """Verify the symmetry commutes with the differential, generator-wise."""
    for g in e.dga.generators:
        lhs = gamma_poly(e.action, e.dga.d(g.gid))
        rhs = e.dga.d(e.action.apply(g.gid))
        if lhs != rhs:
            return CheckResult(
                False, g.gid,
                f"gamma(d({g.gid})) = {format_poly(lhs)} but "
                f"d(gamma({g.gid})) = {format_poly(rhs)}")
    return CheckResult(True)


def zp_stabilize(e: EquivariantDGA, degree_of_e1: int) -> EquivariantDGA:
    """Adjoin two free orbits e1_*, e2_* with d(e1_i) = e2_i, symmetrically."""
    p = e.action.p
    k = _fresh_stab_index(e.dga)
    d1 = e.dga.reduce_degree(degree_of_e1)
    d2 = e.dga.reduce_degree(degree_of_e1 - 1)
    gens = list(e.dga.generators)
    diff = dict(e.dga.diff)
    perm = dict(e.action.perm)
    for i in range(p):
        g1 = Generator(f"e1_{k}.{i}", "e1", k, i, d1)
        g2 = Generator(f"e2_{k}.{i}", "e2", k, i, d2)
        gens.extend([g1, g2])
        diff[g1.gid] = poly((g2.gid,))
        diff[g2.gid] = ZERO
    for i in range(p):
        perm[f"e1_{k}.{i}"] = f"e1_{k}.{(i + 1) % p}"
        perm[f"e2_{k}.{i}"] = f"e2_{k}.{(i + 1) % p}"
    return EquivariantDGA(DGA(tuple(gens), e.dga.modulus, diff),
                          CyclicAction(p, perm))


def orbit_sum(e: EquivariantDGA, gid: str) -> Poly:
    """Sum of a generator over its symmetry orbit (a fixed element)."""
    if gid not in e.action.perm:
        raise AlgebraError(f"unknown generator id {gid}")
    return poly(*((g,) for g in e.action.orbit(gid)))


def orbit_sum_poly(e: EquivariantDGA, x: Poly) -> Poly:
    """Multiplicative extension of orbit summation to polynomials."""
    out: set[Monomial] = set()
    for m in x:
        prod = UNIT
        for gid in m:
            prod = poly_mul(prod, orbit_sum(e, gid))
        out ^= prod
    return frozenset(out)


class NonEquivariantError(AlgebraError):
    """The input DGA does not actually carry the claimed symmetry."""


def quotient_dga(e: EquivariantDGA, orbit_reps: Iterable[str],
                 rename: Mapping[str, str] | None = None) -> DGA:
    """Collapse each symmetry orbit to a single generator.

    The new differential of a collapsed generator is the image of the old
    differential with every factor replaced by its orbit representative.
    The construction only makes sense when the symmetry commutes with d;
    this is re-derived from scratch here (every orbit member must induce
    the same collapsed polynomial) and violations raise.
    """
    reps = list(orbit_reps)
    rep_of: dict[str, str] = {}
    for rep in reps:
        if rep not in e.action.perm:
            raise AlgebraError(f"unknown orbit representative {rep}")
        for gid in e.action.orbit(rep):
            if gid in rep_of:
                raise AlgebraError(f"{gid} covered by two representatives")
            rep_of[gid] = rep
    if set(rep_of) != set(e.action.perm):
        missing = sorted(set(e.action.perm) - set(rep_of))
        raise AlgebraError(f"representatives miss orbits of: {missing[:4]}")

    rename = dict(rename or {})
    names = {rep: rename.get(rep, rep) for rep in reps}

    def collapse(x: Poly) -> Poly:
        out: set[Monomial] = set()
        for m in x:
            out ^= {tuple(names[rep_of[gid]] for gid in m)}
        return frozenset(out)

    idx = e.dga.index
    new_gens = []
    new_diff: dict[str, Poly] = {}
    for rep in reps:
        g = idx[rep]
        images = {collapse(e.dga.d(gid)) for gid in e.action.orbit(rep)}
        if len(images) != 1:
            raise NonEquivariantError(
                f"orbit of {rep} has members with inequivalent differentials")
        new_gens.append(replace(g, gid=names[rep], copy=0))
        new_diff[names[rep]] = images.pop()
    return DGA(tuple(new_gens), e.dga.modulus, new_diff)


# ---------------------------------------------------------------------------
# Serialization (UTF-8 JSON, canonical field order, byte-stable)


def dga_to_dict(dga: DGA) -> dict:
    return {
        "modulus": dga.modulus,
        "generators": [
            {"id": g.gid, "kind": g.kind, "crossing": g.crossing,
             "copy": g.copy, "degree": g.degree}
            for g in dga.generators
        ],
        "diff": {g.gid: poly_to_lists(dga.d(g.gid)) for g in dga.generators},
    }


def dga_from_dict(doc: Mapping) -> DGA:
    try:
        gens = tuple(
            Generator(d["id"], d["kind"], int(d["crossing"]),
                      int(d["copy"]), int(d["degree"]))
            for d in doc["generators"])
        diff = {gid: poly_from_lists(terms)
                for gid, terms in doc["diff"].items()}
        return DGA(gens, int(doc["modulus"]), diff)
    except (KeyError, TypeError) as exc:
        raise AlgebraError(f"malformed DGA document: {exc}") from exc


def dga_to_json(dga: DGA) -> str:
    return json.dumps(dga_to_dict(dga), indent=2, sort_keys=False) + "\n"


def dga_from_json(text: str) -> DGA:
    return dga_from_dict(json.loads(text))
