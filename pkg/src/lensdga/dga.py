"""Assembling graded DGAs from labeled diagrams.

Gradings come from capping paths: the two knot arcs between the visits to a
crossing close up at opposite quadrants of one chord (the gradeable one).
Each closed-up arc bounds a winding-minimal disc; its rotation number is
computed combinatorially in a chart placed in a face the disc misses, via
the face-winding form of the Gauss-Bonnet count.  The raw grade of the
gradeable chord is 2r - 1/2 + 4n; the partner chord is graded 3 minus that.
The grading modulus is the gcd of the raw-grade discrepancies between the
two capping paths, accumulated over all crossings (0 = integer grading).

Boundary maps sum the boundary words of discs with vanishing corrected
defect.  Quotient (lens) differentials are canonically computed upstairs:
lift, compute, attach the deck symmetry, then collapse orbits.  A direct
enumeration in the quotient (requiring liftable pole windings) is provided
as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .algebra import (
    DGA,
    CheckResult,
    CyclicAction,
    EquivariantDGA,
    Generator,
    Poly,
    d_squared_check,
    gamma_commute_check,
    grading_consistency_check,
    make_dga,
    poly,
    poly_add,
    quotient_dga,
)
from .diagram import (
    Corner,
    DiagramError,
    LabeledDiagram,
    LiftedDiagram,
    Port,
    Topology,
    chord_lengths,
    lift,
    validate,
)
from .discs import AdmissibleDisc, Caps, boundary_discs


class DgaBuildError(DiagramError):
    """A structural check failed while assembling a DGA."""


# ---------------------------------------------------------------------------
# Capping paths and rotation numbers


@dataclass(frozen=True)
class CappingPath:
    """A knot arc closing up at a positive quadrant of the gradeable chord.

    ``edges`` traverses the arc leaving the crossing at port = quadrant and
    re-entering at port quadrant+1, which puts the winding-minimal disc on
    the left and makes the closure corner convex.  ``multiplicities`` is
    that disc; ``rotation`` the tangent turning of the arc in a chart
    through a face the disc misses; ``defect`` its weighted face sum.
    """

    cid: int
    chord: str
    quadrant: int
    edges: tuple[tuple[Port, Port], ...]
    multiplicities: tuple[int, ...]
    rotation: Fraction
    defect: Fraction

    @property
    def raw_grade(self) -> int:
        val = 2 * self.rotation - Fraction(1, 2) + 4 * self.defect
        if val.denominator != 1:
            raise DgaBuildError(f"non-integer raw grade {val} at {self.cid}")
        return int(val)


def _circuit_arcs(top: Topology, cid: int) -> list[list[tuple[Port, Port]]]:
    """Split the knot circuit at its two visits to the crossing."""
    circuit = top.circuit
    hits = [i for i, (_, arr) in enumerate(circuit) if arr[0] == cid]
    if len(hits) != 2:
        raise DiagramError(f"crossing {cid} visited {len(hits)} times")
    i, j = hits
    arc1 = circuit[i + 1:j + 1]
    arc2 = circuit[j + 1:] + circuit[:i + 1]
    return [arc1, arc2]


def _arc_quadrant(arc: list[tuple[Port, Port]], cid: int) -> int:
    """Quadrant capped by an arc: between its departure and arrival ports."""
    a = arc[0][0]
    b = arc[-1][1]
    assert a[0] == cid and b[0] == cid
    if b[1] == (a[1] + 1) % 4:
        return a[1]
    if b[1] == (a[1] + 3) % 4:
        return b[1]
    raise DiagramError(f"arc at crossing {cid} does not cap a quadrant")


def _orient_to_anchor(arc: list[tuple[Port, Port]], cid: int,
                      q: int) -> list[tuple[Port, Port]]:
    if arc[0][0] == (cid, q):
        return arc
    return [(v, u) for u, v in reversed(arc)]


def _arc_winding(top: Topology, arc: list[tuple[Port, Port]]) -> list[int]:
    usage: dict[tuple[Port, Port], int] = {}
    for u, v in arc:
        usage[(u, v)] = usage.get((u, v), 0) + 1
    # same solver as the disc search, inline to keep the arc's usage map
    from .discs import _winding
    return _winding(top, usage)


def _arc_rotation(top: Topology, arc: list[tuple[Port, Port]],
                  w: list[int], cid: int, q: int) -> Fraction:
    """Tangent turning of the closed-up arc in the chart at a w=0 face.

    Gauss-Bonnet over the arc's own arrangement: each arrangement face
    contributes its winding once; each transverse self-crossing subtracts a
    quarter of the four sector windings; the closure corner subtracts a
    quarter of (convex minus reflex) sector windings.
    """
    traversed: set[frozenset] = {frozenset((u, v)) for u, v in arc}
    parent = list(range(len(top.faces)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in top.edge_list:
        if frozenset((u, v)) not in traversed:
            a, b = find(top.left_face(u, v)), find(top.left_face(v, u))
            parent[a] = b
    components: dict[int, int] = {}
    for idx, val in enumerate(w):
        root = find(idx)
        if root in components and components[root] != val:
            raise DgaBuildError("chart winding inconsistent across a face")
        components[root] = val
    total = Fraction(sum(components.values()))

    arrivals: dict[int, int] = {}
    for _, v in arc:
        arrivals[v[0]] = arrivals.get(v[0], 0) + 1
    corner_sum = 0
    for c, count in arrivals.items():
        if c == cid:
            continue
        if count == 2:
            corner_sum += sum(w[top.face_of_quadrant[(c, k)]]
                              for k in range(4))
    convex = w[top.face_of_quadrant[(cid, q)]]
    reflex = w[top.face_of_quadrant[(cid, (q + 1) % 4)]]
    return total - Fraction(corner_sum, 4) - Fraction(convex - reflex, 4)


def capping_paths(d: LabeledDiagram, cid: int,
                  top: Topology | None = None) -> tuple[str, list[CappingPath]]:
    """The gradeable chord at a crossing and its two capping paths."""
    top = top or Topology(d)
    defects = top.defect_vector()
    arcs = _circuit_arcs(top, cid)
    quadrants = [_arc_quadrant(arc, cid) for arc in arcs]
    if (quadrants[0] - quadrants[1]) % 4 != 2:
        raise DiagramError(f"capping arcs at {cid} do not cap opposite "
                           "quadrants")
    chord = d.crossing(cid).positive_chord(quadrants[0])
    paths = []
    for arc, q in zip(arcs, quadrants):
        arc = _orient_to_anchor(arc, cid, q)
        w = _arc_winding(top, arc)
        r = _arc_rotation(top, arc, w, cid, q)
        if (r + Fraction(1, 4)).denominator != 1:
            raise DgaBuildError(f"rotation number {r} not in Z - 1/4")
        n = sum((Fraction(m) * defects[i] for i, m in enumerate(w)),
                start=Fraction(0))
        paths.append(CappingPath(cid, chord, q, tuple(arc), tuple(w), r, n))
    return chord, paths


def rotation_number(d: LabeledDiagram, path: CappingPath) -> Fraction:
    return path.rotation


# ---------------------------------------------------------------------------
# Gradings


@dataclass(frozen=True)
class GradingTable:
    modulus: int
    raw: dict[tuple[int, str], int]  # (cid, chord) -> raw integer grade

    def degree(self, cid: int, chord: str) -> int:
        r = self.raw[(cid, chord)]
        return r % self.modulus if self.modulus else r


def grading_table(d: LabeledDiagram,
                  top: Topology | None = None) -> GradingTable:
    """Raw grades for every chord and the empirical grading modulus."""
    top = top or Topology(d)
    modulus = 0
    raw: dict[tuple[int, str], int] = {}
    for c in d.crossings:
        chord, paths = capping_paths(d, c.cid, top)
        grades = [p.raw_grade for p in paths]
        modulus = gcd(modulus, abs(grades[0] - grades[1]))
        raw[(c.cid, chord)] = grades[0]
        other = "b" if chord == "a" else "a"
        raw[(c.cid, other)] = 3 - grades[0]
    return GradingTable(modulus, raw)


def grade(d: LabeledDiagram, cid: int, chord: str) -> tuple[int, int]:
    """(raw integer grade, residue) of one chord generator."""
    table = grading_table(d)
    return table.raw[(cid, chord)], table.degree(cid, chord)


# ---------------------------------------------------------------------------
# Boundary maps


@dataclass(frozen=True)
class BuildResult:
    dga: DGA
    warnings: tuple[str, ...]
    saturated: bool
    checks: tuple[CheckResult, CheckResult]  # d-squared, grading


def _gen_name(base: int, copy: int, chord: str, lifted: bool) -> str:
    return f"{chord}{base}.{copy}" if lifted else f"{chord}{base}"


def _word_poly(word: tuple[tuple[int, str], ...],
               name_of: dict[tuple[int, str], str]) -> Poly:
    return poly(tuple(name_of[(cid, chord)] for cid, chord in word))


def boundary_s3(d: LabeledDiagram, caps: Caps | None = None,
                lifted: LiftedDiagram | None = None) -> BuildResult:
    """DGA of a diagram in the sphere: one a/b generator pair per crossing.

    Each generator's differential sums the boundary words of its discs with
    vanishing corrected defect.  When ``lifted`` is given the generators are
    named  chord + base crossing + "." + copy  so the deck symmetry acts by
    shifting the copy index.
    """
    report = validate(d)
    if not report:
        raise DgaBuildError("invalid diagram: " +
                            "; ".join(x.message for x in report.diagnostics))
    if d.manifold.kind != "s3":
        raise DgaBuildError("boundary_s3 needs a diagram in the sphere")
    caps = caps or Caps.default(d)
    top = Topology(d)
    table = grading_table(d, top)
    lengths = chord_lengths(d, top)

    name_of: dict[tuple[int, str], str] = {}
    gens: list[Generator] = []
    for c in d.crossings:
        if lifted is not None:
            base, copy = lifted.base_cid(c.cid), lifted.copy_of(c.cid)
        else:
            base, copy = c.cid, 0
        for chord in ("a", "b"):
            gid = _gen_name(base, copy, chord, lifted is not None)
            name_of[(c.cid, chord)] = gid
            gens.append(Generator(gid, chord, base, copy,
                                  table.degree(c.cid, chord)))

    warnings: list[str] = []
    saturated = False
    diff: dict[str, Poly] = {}
    if lengths is None:
        warnings.append("no feasible chord lengths: disc searches fall back "
                        "to cap-bounded enumeration")
    for c in d.crossings:
        for chord in ("a", "b"):
            found = boundary_discs(d, c.cid, chord, caps, top, lengths)
            saturated |= found.saturated
            if found.saturated:
                warnings.append(
                    f"search for d({name_of[(c.cid, chord)]}) hit a cap; "
                    "terms beyond the caps are not counted")
            terms = [_word_poly(disc.word, name_of) for disc in found.discs]
            diff[name_of[(c.cid, chord)]] = poly_add(*terms)

    dga = make_dga(gens, table.modulus, diff)
    checks = (d_squared_check(dga), grading_consistency_check(dga))
    for check in checks:
        if not check:
            if saturated:
                warnings.append(f"conditional (capped) failure: "
                                f"{check.detail}")
            else:
                raise DgaBuildError(check.detail)
    return BuildResult(dga, tuple(warnings), saturated, checks)


@dataclass(frozen=True)
class EquivariantBuildResult:
    equivariant: EquivariantDGA
    lifted: LiftedDiagram
    warnings: tuple[str, ...]
    saturated: bool


def build_equivariant(d: LabeledDiagram,
                      caps: Caps | None = None) -> EquivariantBuildResult:
    """Lift a quotient diagram, build its DGA, attach the deck symmetry."""
    lifted = lift(d)
    caps = caps or Caps.default(lifted.total)
    result = boundary_s3(lifted.total, caps, lifted)
    perm: dict[str, str] = {}
    for g in result.dga.generators:
        perm[g.gid] = _gen_name(g.crossing, (g.copy + 1) % lifted.p,
                                g.kind, True)
    e = EquivariantDGA(result.dga, CyclicAction(lifted.p, perm))
    check = gamma_commute_check(e)
    if not check:
        if result.saturated:
            warnings = result.warnings + (
                f"conditional (capped) failure: {check.detail}",)
            return EquivariantBuildResult(e, lifted, warnings,
                                          result.saturated)
        raise DgaBuildError(check.detail)
    return EquivariantBuildResult(e, lifted, result.warnings,
                                  result.saturated)


def boundary_lens_via_lift(d: LabeledDiagram,
                           caps: Caps | None = None) -> BuildResult:
    """Canonical quotient DGA: compute upstairs, then collapse orbits."""
    built = build_equivariant(d, caps)
    e = built.equivariant
    reps = [g.gid for g in e.dga.generators if g.copy == 0]
    rename = {g.gid: f"{g.kind}{g.crossing}"
              for g in e.dga.generators if g.copy == 0}
    dga = quotient_dga(e, reps, rename)
    checks = (d_squared_check(dga), grading_consistency_check(dga))
    for check in checks:
        if not check and not built.saturated:
            raise DgaBuildError(check.detail)
    return BuildResult(dga, built.warnings, built.saturated, checks)


def boundary_lens_direct(d: LabeledDiagram,
                         caps: Caps | None = None) -> BuildResult:
    """Quotient DGA by direct disc enumeration downstairs (cross-check).

    Counts discs whose corrected defect vanishes and whose boundary lifts
    to the cover: both pole multiplicities divisible by p.  Gradings are
    taken from the lift, which is canonical.
    """
    report = validate(d)
    if not report:
        raise DgaBuildError("invalid diagram: " +
                            "; ".join(x.message for x in report.diagnostics))
    if d.manifold.kind != "lens":
        raise DgaBuildError("direct quotient build needs a lens diagram")
    caps = caps or Caps.default(d)
    lifted = lift(d)
    lift_table = grading_table(lifted.total)
    top = Topology(d)
    lengths = chord_lengths(d, top)

    name_of: dict[tuple[int, str], str] = {}
    gens: list[Generator] = []
    for c in d.crossings:
        for chord in ("a", "b"):
            gid = f"{chord}{c.cid}"
            name_of[(c.cid, chord)] = gid
            gens.append(Generator(
                gid, chord, c.cid, 0,
                lift_table.degree(lifted.total_cid(c.cid, 0), chord)))

    warnings: list[str] = []
    saturated = False
    diff: dict[str, Poly] = {}
    if lengths is None:
        warnings.append("no feasible chord lengths: disc searches fall back "
                        "to cap-bounded enumeration")
    for c in d.crossings:
        for chord in ("a", "b"):
            found = boundary_discs(d, c.cid, chord, caps, top, lengths)
            saturated |= found.saturated
            if found.saturated:
                warnings.append(
                    f"search for d({name_of[(c.cid, chord)]}) hit a cap; "
                    "terms beyond the caps are not counted")
            terms = [_word_poly(disc.word, name_of) for disc in found.discs]
            diff[name_of[(c.cid, chord)]] = poly_add(*terms)
    dga = make_dga(gens, lift_table.modulus, diff)
    checks = (d_squared_check(dga), grading_consistency_check(dga))
    for check in checks:
        if not check and not saturated:
            raise DgaBuildError(check.detail)
    return BuildResult(dga, tuple(warnings), saturated, checks)


def dga_equal(a: DGA, b: DGA) -> bool:
    """Label-for-label equality of generators, degrees and differentials."""
    ga = sorted((g.gid, g.kind, g.crossing, g.copy, g.degree)
                for g in a.generators)
    gb = sorted((g.gid, g.kind, g.crossing, g.copy, g.degree)
                for g in b.generators)
    if ga != gb or a.modulus != b.modulus:
        return False
    return all(a.d(g.gid) == b.d(g.gid) for g in a.generators)
