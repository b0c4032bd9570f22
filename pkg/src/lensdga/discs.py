"""Enumeration of immersed-disc certificates in a labeled diagram.

A disc is recorded by its boundary walk and a face multiplicity vector.
The boundary walk starts at a chosen positive quadrant of a generator (the
anchor corner), follows knot edges forward, passes straight through
crossings or makes a left turn (a convex corner, filling the quadrant on
the disc side), and closes when it re-enters the anchor crossing at the
port completing the anchor quadrant.

The walk determines face multiplicities up to one global constant (extra
full covers of the sphere); a disc fixes the constant.  Admissibility of a
pair (walk, multiplicities) means:

  * multiplicities are nonnegative and compatible with the walk's winding
    (crossing the boundary drops the count by one, left to right);
  * along every edge, the number of same-direction boundary strands is at
    most the multiplicity of the face on their left (each strand bounds a
    distinct sheet over that face).

Searches are capped (corner count, face multiplicity).  Within the caps the
enumeration is complete: a branch is only cut when every completion would
violate a cap.  ``saturated`` reports cuts that could hide discs a larger
cap would have admitted.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .diagram import Corner, DiagramError, LabeledDiagram, Port, Topology

sys.setrecursionlimit(100_000)


@dataclass(frozen=True)
class Caps:
    max_corners: int
    max_mult: int

    def __post_init__(self) -> None:
        if self.max_corners <= 0 or self.max_mult <= 0:
            raise DiagramError("search caps must be positive")

    @staticmethod
    def default(d: LabeledDiagram) -> "Caps":
        n = max(1, len(d.crossings))
        mult = 2 * d.manifold.p if d.manifold.kind == "lens" else 4
        return Caps(8 * n, mult)


@dataclass(frozen=True)
class AdmissibleDisc:
    """One disc: anchor corner, later corners, and face multiplicities.

    ``word`` lists (crossing id, chord) for the negatively-signed chord at
    each non-anchor corner, in boundary order.  ``multiplicities`` follows
    the face order of the diagram's Topology.  ``defect`` is the
    multiplicity-weighted sum of face weights; ``x_defect`` additionally
    applies the two decoration corrections for the anchor generator.
    """

    anchor: Corner
    corners: tuple[Corner, ...]
    word: tuple[tuple[int, str], ...]
    multiplicities: tuple[int, ...]
    defect: Fraction
    x_defect: Fraction

    def sort_token(self) -> tuple:
        return (self.anchor, len(self.corners), self.corners,
                self.multiplicities)


@dataclass(frozen=True)
class DiscSet:
    discs: tuple[AdmissibleDisc, ...]
    caps_binding: bool  # some cap influenced the search at all
    saturated: bool     # a cut may have hidden a disc a larger cap admits


class _Walk:
    """Mutable DFS state for one anchor; results collected on closure.

    With a length table the search also keeps a running total of the corner
    letters' chord lengths and abandons a branch once it reaches the anchor
    chord's length: a disc contributing to the differential spends the
    anchor length on its word letters plus a positive covered area, so such
    branches cannot close into counted discs.  That cut-off is exact, not a
    cap, and is only applied when a valid length assignment exists.
    """

    def __init__(self, top: Topology, anchor: Corner, caps: Caps,
                 letter_lengths: dict[Corner, Fraction] | None = None,
                 length_budget: Fraction | None = None):
        self.top = top
        self.caps = caps
        self.anchor = anchor
        cid, q = anchor
        self.start_depart: Port = (cid, q)
        self.close_arrival: Port = (cid, (q + 1) % 4)
        self.usage: dict[tuple[Port, Port], int] = {}
        self.corners: list[Corner] = []
        self.closed: list[tuple[tuple[Corner, ...], dict]] = []
        self.budget_cut = False  # a branch died on the multiplicity budget
        self.corner_cut = False  # a branch died on the corner budget
        self.letter_lengths = letter_lengths
        self.length_budget = length_budget

    def run(self) -> None:
        self._step(self.start_depart, Fraction(0))

    def _step(self, depart: Port, spent: Fraction) -> None:
        u = depart
        v = self.top.mate[u]
        d = (u, v)
        if self.usage.get(d, 0) >= self.caps.max_mult:
            # any completion uses this direction more often than the face on
            # its left may be covered, so nothing within caps is lost
            self.budget_cut = True
            return
        self.usage[d] = self.usage.get(d, 0) + 1
        c, k = v
        if v == self.close_arrival:
            self.closed.append((tuple(self.corners), dict(self.usage)))
        self._step((c, (k + 2) % 4), spent)  # straight through
        corner = (c, (k + 3) % 4)            # left turn, filling the quadrant
        if len(self.corners) + 2 > self.caps.max_corners:
            self.corner_cut = True
        else:
            next_spent = spent
            feasible = True
            if self.length_budget is not None:
                assert self.letter_lengths is not None
                next_spent = spent + self.letter_lengths[corner]
                feasible = next_spent < self.length_budget
            if feasible:
                self.corners.append(corner)
                self._step((c, (k + 3) % 4), next_spent)
                self.corners.pop()
        self.usage[d] -= 1
        if not self.usage[d]:
            del self.usage[d]


def _winding(top: Topology, usage: dict[tuple[Port, Port], int]) -> list[int]:
    """Solve the face winding numbers of a closed walk, up to a constant.

    Crossing the walk from the left side of a traversal to its right drops
    the winding by the net traversal count.  Returned vector is shifted so
    its minimum is 0.
    """
    return _winding_nets(top, _edge_nets(top, usage))


def _edge_nets(top: Topology,
               usage: dict[tuple[Port, Port], int]) -> list[int]:
    return [usage.get((u, v), 0) - usage.get((v, u), 0)
            for u, v in top.edge_list]


def _winding_nets(top: Topology, nets: list[int]) -> list[int]:
    jumps = []
    for (u, v), net in zip(top.edge_list, nets):
        jumps.append((top.left_face(u, v), top.left_face(v, u), net))
    w: list[int | None] = [None] * len(top.faces)
    w[0] = 0
    pending = True
    while pending:
        pending = False
        for left, right, net in jumps:
            if w[left] is None and w[right] is not None:
                w[left] = w[right] + net
                pending = True
            elif w[right] is None and w[left] is not None:
                w[right] = w[left] - net
                pending = True
    for left, right, net in jumps:
        if w[left] is None or w[left] - w[right] != net:
            raise DiagramError("walk winding is inconsistent")
    lo = min(w)  # type: ignore[type-var]
    return [x - lo for x in w]  # type: ignore[operator]


def _immersion_turning_ok(top: Topology, nets: list[int], w0: list[int],
                          k: int, branch_excess: Fraction) -> bool:
    """Gauss-Bonnet filter for the closed-up boundary walk.

    An immersed disc with k right-angle convex corners, mapped to a chart
    through a face of zero multiplicity, has smooth boundary turning
    exactly 1 - k/4; each branch point over a pole (for quotient discs)
    reduces the total by its excess.  The turning in the minimal-winding
    chart is the face-0 chart value shifted by twice the relative winding.
    """
    t = top.walk_turning(nets) + 2 * w0[0]
    return t == 1 - Fraction(k, 4) - branch_excess


def _branch_excess(d: LabeledDiagram, top: Topology,
                   mult: list[int]) -> Fraction | None:
    """Branching excess over the poles, or None when the disc cannot be
    a branched cover there (pole multiplicities not divisible by p).

    A quotient disc covering a pole with multiplicity m is branched there:
    it is the image of a cover disc whose m/p sheets each wrap p times, so
    it contributes m(p-1)/p of excess to the Gauss-Bonnet count.
    """
    if d.manifold.kind != "lens" or d.poles is None:
        return Fraction(0)
    p = d.manifold.p
    total = 0
    for key in d.poles:
        m = mult[top.face_index(key)]
        if m % p:
            return None
        total += m
    return Fraction(total * (p - 1), p)


def _usage_floor(top: Topology, usage: dict, w0: list[int]) -> int:
    """Least extra cover count making every strand bound a distinct sheet."""
    floor = 0
    for d, count in usage.items():
        floor = max(floor, count - w0[top.left_face(*d)])
    return floor


def _word_for(d: LabeledDiagram, corners: tuple[Corner, ...]
              ) -> tuple[tuple[int, str], ...]:
    out = []
    for cid, q in corners:
        c = d.crossing(cid)
        positive = c.positive_chord(q)
        out.append((cid, "b" if positive == "a" else "a"))
    return tuple(out)


def _corrections(d: LabeledDiagram, anchor: Corner,
                 corners: tuple[Corner, ...]) -> int:
    c = d.crossing(anchor[0])
    corr = 0 if c.decorated(anchor[1]) else 1
    for cid, q in corners:
        if d.crossing(cid).decorated(q):
            corr -= 1
    return corr


def plus_quadrants(d: LabeledDiagram, cid: int, chord: str) -> tuple[int, int]:
    """The two opposite quadrants where the chord is labelled +."""
    c = d.crossing(cid)
    qs = tuple(q for q in range(4) if c.chord_sign(chord, q) > 0)
    assert len(qs) == 2
    return qs  # type: ignore[return-value]


def _make_disc(d: LabeledDiagram, top: Topology, anchor: Corner,
               corners: tuple[Corner, ...], mult: list[int],
               defects: list[Fraction]) -> AdmissibleDisc:
    n = sum(Fraction(m) * w for m, w in zip(mult, defects))
    corr = _corrections(d, anchor, corners)
    return AdmissibleDisc(anchor, corners, _word_for(d, corners),
                          tuple(mult), n, n + corr)


def enumerate_admissible(d: LabeledDiagram, cid: int, chord: str,
                         caps: Caps | None = None,
                         top: Topology | None = None) -> DiscSet:
    """All admissible discs anchored at a + quadrant of the generator.

    Discs related by sliding the anchor around the boundary are identified;
    the anchor fixes the starting corner.  One boundary walk yields one disc
    per admissible global cover count within the multiplicity cap.
    """
    if chord not in ("a", "b"):
        raise DiagramError(f"unknown chord {chord!r}")
    d.crossing(cid)
    caps = caps or Caps.default(d)
    top = top or Topology(d)
    defects = top.defect_vector()
    discs = []
    binding = False
    saturated = False
    for q in plus_quadrants(d, cid, chord):
        walk = _Walk(top, (cid, q), caps)
        walk.run()
        binding |= walk.budget_cut or walk.corner_cut
        saturated |= walk.corner_cut
        for corners, usage in walk.closed:
            nets = _edge_nets(top, usage)
            w0 = _winding_nets(top, nets)
            k = len(corners) + 1
            plain = _immersion_turning_ok(top, nets, w0, k, Fraction(0))
            c_min = _usage_floor(top, usage, w0)
            c_max = caps.max_mult - max(w0)
            binding = True  # the cover-count family is always cap-truncated
            if c_min > c_max:
                saturated = True
                continue
            for c in range(c_min, c_max + 1):
                mult = [x + c for x in w0]
                ok = plain
                if not ok and d.manifold.kind == "lens":
                    excess = _branch_excess(d, top, mult)
                    ok = (excess is not None and excess != 0 and
                          _immersion_turning_ok(top, nets, w0, k, excess))
                if ok:
                    discs.append(_make_disc(d, top, (cid, q), corners, mult,
                                            defects))
    discs.sort(key=AdmissibleDisc.sort_token)
    return DiscSet(tuple(discs), binding, saturated)


def _letter_length_table(d: LabeledDiagram,
                         lengths: dict[int, Fraction]
                         ) -> dict[Corner, Fraction]:
    """Length of the negatively-signed chord at each quadrant."""
    table: dict[Corner, Fraction] = {}
    for c in d.crossings:
        for q in range(4):
            minus = "b" if c.positive_chord(q) == "a" else "a"
            val = lengths[c.cid] if minus == "a" else 1 - lengths[c.cid]
            table[(c.cid, q)] = val
    return table


def boundary_discs(d: LabeledDiagram, cid: int, chord: str,
                   caps: Caps | None = None,
                   top: Topology | None = None,
                   lengths: dict[int, Fraction] | None = None) -> DiscSet:
    """Discs with vanishing corrected defect: the differential's terms.

    A counted disc covers a strictly positive area, which the corrected
    defect balances against the anchor chord's length; covering the whole
    sphere costs more area than any chord affords, so counted discs leave
    some face uncovered and the winding-minimal multiplicities are the
    multiplicities.  Quotient boundary terms must also lift: their pole
    multiplicities vanish mod p and the turning count carries the branching
    correction.
    """
    if chord not in ("a", "b"):
        raise DiagramError(f"unknown chord {chord!r}")
    d.crossing(cid)
    caps = caps or Caps.default(d)
    top = top or Topology(d)
    defects = top.defect_vector()
    letter_table = _letter_length_table(d, lengths) if lengths else None
    discs = []
    binding = False
    saturated = False
    for q in plus_quadrants(d, cid, chord):
        budget = None
        if lengths is not None:
            budget = (lengths[cid] if chord == "a" else 1 - lengths[cid])
        walk = _Walk(top, (cid, q), caps, letter_table, budget)
        walk.run()
        binding |= walk.budget_cut or walk.corner_cut
        for corners, usage in walk.closed:
            nets = _edge_nets(top, usage)
            w0 = _winding_nets(top, nets)
            base = sum(Fraction(m) * w for m, w in zip(w0, defects))
            corr = _corrections(d, (cid, q), corners)
            if base + corr != 0:
                continue
            if _usage_floor(top, usage, w0) > 0:
                continue
            excess = _branch_excess(d, top, w0)
            if excess is None:
                continue  # not liftable: pole multiplicities not p-fold
            k = len(corners) + 1
            if not _immersion_turning_ok(top, nets, w0, k, excess):
                continue
            if max(w0) > caps.max_mult:
                binding = True
                saturated = True  # genuine candidate beyond the cap
                continue
            discs.append(_make_disc(d, top, (cid, q), corners,
                                    w0, defects))
    discs.sort(key=AdmissibleDisc.sort_token)
    return DiscSet(tuple(discs), binding, saturated)


def disc_defect(disc: AdmissibleDisc, d: LabeledDiagram) -> Fraction:
    """Recompute the weighted face sum from scratch (cross-check)."""
    top = Topology(d)
    defects = top.defect_vector()
    return sum((Fraction(m) * w
                for m, w in zip(disc.multiplicities, defects)),
               start=Fraction(0))


def x_defect(disc: AdmissibleDisc, d: LabeledDiagram) -> Fraction:
    """Recompute the corrected defect for the anchor generator."""
    return disc_defect(disc, d) + _corrections(d, disc.anchor, disc.corners)


def pole_winding(disc: AdmissibleDisc, d: LabeledDiagram) -> tuple[int, int]:
    """Multiplicities of the two pole faces (boundary winding about them)."""
    if d.poles is None:
        raise DiagramError("diagram has no pole faces")
    top = Topology(d)
    i = top.face_index(d.poles[0])
    j = top.face_index(d.poles[1])
    return disc.multiplicities[i], disc.multiplicities[j]


# ---------------------------------------------------------------------------
# Independent brute-force enumeration (test oracle)


def brute_force_admissible(d: LabeledDiagram, cid: int, chord: str,
                           caps: Caps) -> tuple[AdmissibleDisc, ...]:
    """Multiplicity-vector-first disc enumeration, for small diagrams.

    For every face multiplicity vector within the cap, search exhaustively
    for boundary walks realizing exactly that vector: traversal counts per
    edge direction are bounded by the vector itself, so each inner search
    is finite without any of the main enumerator's bookkeeping.  Intended
    as an oracle: independent of the winding-first search path.
    """
    top = Topology(d)
    defects = top.defect_vector()
    nfaces = len(top.faces)
    results: set[AdmissibleDisc] = set()

    vectors: Iterator[tuple[int, ...]] = _vectors(nfaces, caps.max_mult)
    for mult in vectors:
        for q in plus_quadrants(d, cid, chord):
            anchor = (cid, q)
            for corners in _walks_matching(top, anchor, list(mult), caps):
                nets = [mult[top.left_face(u, v)] - mult[top.left_face(v, u)]
                        for u, v in top.edge_list]
                w0 = _winding_nets(top, nets)
                k = len(corners) + 1
                ok = _immersion_turning_ok(top, nets, w0, k, Fraction(0))
                if not ok and d.manifold.kind == "lens":
                    excess = _branch_excess(d, top, list(mult))
                    ok = (excess is not None and excess != 0 and
                          _immersion_turning_ok(top, nets, w0, k, excess))
                if ok:
                    results.add(_make_disc(d, top, anchor, corners,
                                           list(mult), defects))
    return tuple(sorted(results, key=AdmissibleDisc.sort_token))


def _vectors(n: int, cap: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for head in range(cap + 1):
        for tail in _vectors(n - 1, cap):
            yield (head,) + tail


def _walks_matching(top: Topology, anchor: Corner, mult: list[int],
                    caps: Caps) -> list[tuple[Corner, ...]]:
    """All anchored walks whose winding plus some cover equals ``mult``."""
    cid, q = anchor
    close_arrival = (cid, (q + 1) % 4)
    out: list[tuple[Corner, ...]] = []
    usage: dict[tuple[Port, Port], int] = {}
    corners: list[Corner] = []

    def jump_ok() -> bool:
        for u, v in top.edge_list:
            net = usage.get((u, v), 0) - usage.get((v, u), 0)
            if mult[top.left_face(u, v)] - mult[top.left_face(v, u)] != net:
                return False
            if usage.get((u, v), 0) > mult[top.left_face(u, v)]:
                return False
            if usage.get((v, u), 0) > mult[top.left_face(v, u)]:
                return False
        return True

    def step(depart: Port) -> None:
        u = depart
        v = top.mate[u]
        dkey = (u, v)
        if usage.get(dkey, 0) >= mult[top.left_face(u, v)]:
            return  # this direction is exhausted for the target vector
        usage[dkey] = usage.get(dkey, 0) + 1
        c, k = v
        if v == close_arrival and jump_ok():
            out.append(tuple(corners))
        step((c, (k + 2) % 4))
        if len(corners) + 2 <= caps.max_corners:
            corners.append((c, (k + 3) % 4))
            step((c, (k + 3) % 4))
            corners.pop()
        usage[dkey] -= 1
        if not usage[dkey]:
            del usage[dkey]

    step((cid, q))
    return out
