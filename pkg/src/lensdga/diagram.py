"""Combinatorial knot diagrams on the two-sphere.

A diagram is a rotation system: 4-valent crossings with ports numbered
0..3 counterclockwise, and edges pairing ports.  The knot runs straight
through each crossing (port k continues at port k+2).  Faces are traced
from the rotation system; quadrant k of a crossing is the sector between
ports k and k+1 and is a corner of exactly one face.

Each crossing carries two chord labels: ``a_plus_axis`` says which pair of
opposite quadrants is signed a+/b- ("even" = quadrants 0 and 2), and
``preferred`` marks one of the two chords, whose positive quadrants are the
"decorated" ones.  Faces carry rational numbers (face weights, "defects")
that encode the fiberwise geometry the projection forgets; two faces are
distinguished as poles.  Lens-space diagrams are quotients: their covers are
built by cutting along a dual path between the poles and gluing p copies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping

Port = tuple[int, int]  # (crossing id, port index 0..3)
Corner = tuple[int, int]  # (crossing id, quadrant index 0..3)

EMPTY_FACE_KEYS = ("side0", "side1")  # the crossingless round unknot


class DiagramError(ValueError):
    """Raised for structurally unusable diagram data."""


@dataclass(frozen=True, order=True)
class Crossing:
    cid: int
    a_plus_axis: str = "even"  # which opposite quadrant pair carries a+/b-
    preferred: str = "a"       # chord whose + quadrants are decorated

    def __post_init__(self) -> None:
        if self.a_plus_axis not in ("even", "odd"):
            raise DiagramError(f"bad a_plus_axis {self.a_plus_axis!r}")
        if self.preferred not in ("a", "b"):
            raise DiagramError(f"bad preferred chord {self.preferred!r}")

    def chord_sign(self, chord: str, quadrant: int) -> int:
        """Sign (+1/-1) of the given chord's label in the given quadrant."""
        even = quadrant % 2 == 0
        a_plus = even == (self.a_plus_axis == "even")
        if chord == "a":
            return 1 if a_plus else -1
        return -1 if a_plus else 1

    def positive_chord(self, quadrant: int) -> str:
        """The chord labelled + in this quadrant (the other is labelled -)."""
        return "a" if self.chord_sign("a", quadrant) > 0 else "b"

    def decorated(self, quadrant: int) -> bool:
        """True when the preferred chord is positive here (a '+' quadrant)."""
        return self.chord_sign(self.preferred, quadrant) > 0


@dataclass(frozen=True)
class Manifold:
    kind: str  # "s3" | "lens"
    p: int = 0
    q: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("s3", "lens"):
            raise DiagramError(f"unknown manifold kind {self.kind!r}")

    @staticmethod
    def s3() -> "Manifold":
        return Manifold("s3")

    @staticmethod
    def lens(p: int, q: int) -> "Manifold":
        return Manifold("lens", p, q)

    @property
    def cover_order(self) -> int:
        return self.p if self.kind == "lens" else 1


@dataclass(frozen=True)
class Face:
    """A complementary region, as its cyclic corner sequence.

    ``corners`` is rotated to the lexicographically least cyclic rotation so
    the derived ``key`` is reproducible across runs and relabelings agree
    corner-for-corner.
    """

    corners: tuple[Corner, ...]

    @staticmethod
    def canonical(corners: Iterable[Corner]) -> "Face":
        cs = tuple(corners)
        if not cs:
            raise DiagramError("faces of a crossingless diagram are implicit")
        best = min(cs[i:] + cs[:i] for i in range(len(cs)))
        return Face(best)

    @property
    def key(self) -> str:
        return "+".join(f"{c}.{q}" for c, q in self.corners)


def face_key_of(corners: Iterable[Corner]) -> str:
    return Face.canonical(corners).key


@dataclass(frozen=True)
class LabeledDiagram:
    manifold: Manifold
    crossings: tuple[Crossing, ...]
    edges: tuple[tuple[Port, Port], ...]
    poles: tuple[str, str] | None
    defects: Mapping[str, Fraction]

    def crossing(self, cid: int) -> Crossing:
        for c in self.crossings:
            if c.cid == cid:
                return c
        raise DiagramError(f"unknown crossing {cid}")


def make_diagram(manifold: Manifold,
                 crossings: Iterable[Crossing],
                 edges: Iterable[tuple[Port, Port]],
                 poles: tuple[str, str] | None,
                 defects: Mapping[str, Fraction | int | str]) -> LabeledDiagram:
    cs = tuple(sorted(crossings))
    es = tuple(sorted(tuple(sorted((tuple(u), tuple(v)))) for u, v in edges))
    ds = {k: _as_fraction(v) for k, v in defects.items()}
    return LabeledDiagram(manifold, cs, es, poles, ds)


def _as_fraction(v) -> Fraction:
    if isinstance(v, str):
        if "/" in v:
            num, den = v.split("/")
            return Fraction(int(num), int(den))
        return Fraction(int(v))
    return Fraction(v)


# ---------------------------------------------------------------------------
# Derived combinatorics


class Topology:
    """Precomputed incidence data: edge mates, faces, and the knot circuit.

    Construction only needs the rotation system; it does not assume the
    diagram validates (the validator itself uses a Topology).
    """

    def __init__(self, d: LabeledDiagram):
        self.diagram = d
        self.n = len(d.crossings)
        self.mate: dict[Port, Port] = {}
        for u, v in d.edges:
            if u in self.mate or v in self.mate or u == v:
                raise DiagramError(f"port reused by edge {(u, v)}")
            self.mate[u] = v
            self.mate[v] = u
        expected = {(c.cid, k) for c in d.crossings for k in range(4)}
        if set(self.mate) != expected:
            missing = sorted(expected - set(self.mate))
            extra = sorted(set(self.mate) - expected)
            raise DiagramError(
                f"edge endpoints do not exactly cover the ports; "
                f"missing={missing[:4]} extra={extra[:4]}")
        self.edge_ids: dict[frozenset, int] = {}
        self.edge_list: list[tuple[Port, Port]] = []
        for u, v in d.edges:
            self.edge_ids[frozenset((u, v))] = len(self.edge_list)
            self.edge_list.append((u, v))
        self.faces = self._trace_faces()
        self.face_keys = [f.key for f in self.faces]
        self.face_of_quadrant: dict[Corner, int] = {}
        for i, f in enumerate(self.faces):
            for corner in f.corners:
                self.face_of_quadrant[corner] = i
        self.circuit = self._trace_circuit()

    # -- faces ---------------------------------------------------------
    def _trace_faces(self) -> list[Face]:
        if self.n == 0:
            return []
        unused: set[Port] = set(self.mate)  # arrival ports
        faces = []
        for start in sorted(self.mate):
            if start not in unused:
                continue
            corners: list[Corner] = []
            arrive = start
            while True:
                unused.discard(arrive)
                c, k = arrive
                corner = (c, (k + 3) % 4)
                corners.append(corner)
                depart = (c, (k + 3) % 4)
                arrive = self.mate[depart]
                if arrive == start:
                    break
            faces.append(Face.canonical(corners))
        return sorted(faces, key=lambda f: f.key)

    # -- knot circuit ----------------------------------------------------
    def _trace_circuit(self) -> list[tuple[Port, Port]]:
        """The knot as directed edges; straight through every crossing."""
        if self.n == 0:
            return []
        start = min(self.mate)  # a departure port
        circuit = []
        depart = start
        while True:
            arrive = self.mate[depart]
            circuit.append((depart, arrive))
            c, k = arrive
            depart = (c, (k + 2) % 4)
            if depart == start:
                break
            if len(circuit) > 2 * len(self.edge_list):
                raise DiagramError("straight-through traversal fails to close")
        return circuit

    def single_component(self) -> bool:
        return self.n == 0 or len(self.circuit) == len(self.edge_list)

    # -- oriented edge helpers -------------------------------------------
    def left_face(self, u: Port, v: Port) -> int:
        """Face on the left when traversing the edge u -> v."""
        if self.mate.get(u) != v:
            raise DiagramError(f"no edge {u} -> {v}")
        c, j = u
        return self.face_of_quadrant[(c, j)]

    def face_index(self, key: str) -> int:
        try:
            return self.face_keys.index(key)
        except ValueError:
            raise DiagramError(f"unknown face key {key!r}") from None

    def defect_vector(self) -> list[Fraction]:
        d = self.diagram
        return [d.defects.get(k, Fraction(0)) for k in self.face_keys]

    # -- edge turning form -------------------------------------------------
    @property
    def edge_turnings(self) -> list[Fraction]:
        """Tangent turning along each edge, in a chart through face 0.

        Solved from per-face Gauss-Bonnet: traversing a face boundary
        counterclockwise turns through 1 full turn minus 1/4 per corner
        (orthogonal crossings), except the face holding the chart point,
        which closes up around infinity and turns through 2 less.  The
        solution is unique up to a vertex potential, which cancels on
        closed walks, so any particular solution serves.
        """
        if not hasattr(self, "_edge_turnings"):
            self._edge_turnings = self._solve_turnings()
        return self._edge_turnings

    def _solve_turnings(self) -> list[Fraction]:
        ne = len(self.edge_list)
        rows: list[list[Fraction]] = []
        rhs: list[Fraction] = []
        by_face: dict[int, list[tuple[int, int]]] = {}
        for idx, (u, v) in enumerate(self.edge_list):
            by_face.setdefault(self.left_face(u, v), []).append((idx, 1))
            by_face.setdefault(self.left_face(v, u), []).append((idx, -1))
        for fi, face in enumerate(self.faces):
            row = [Fraction(0)] * ne
            for idx, sign in by_face.get(fi, ()):
                row[idx] += sign
            rows.append(row)
            val = 1 - Fraction(len(face.corners), 4)
            if fi == 0:
                val -= 2
            rhs.append(val)
        # Gaussian elimination; the system is consistent with one redundancy
        sol = [Fraction(0)] * ne
        pivots: list[tuple[int, int]] = []
        r = 0
        for col in range(ne):
            pivot = next((i for i in range(r, len(rows)) if rows[i][col]),
                         None)
            if pivot is None:
                continue
            rows[r], rows[pivot] = rows[pivot], rows[r]
            rhs[r], rhs[pivot] = rhs[pivot], rhs[r]
            inv = 1 / rows[r][col]
            rows[r] = [x * inv for x in rows[r]]
            rhs[r] = rhs[r] * inv
            for i in range(len(rows)):
                if i != r and rows[i][col]:
                    f = rows[i][col]
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
                    rhs[i] = rhs[i] - f * rhs[r]
            pivots.append((r, col))
            r += 1
        for i in range(r, len(rows)):
            if rhs[i]:
                raise DiagramError("face turning equations are inconsistent")
        for row_i, col in pivots:
            sol[col] = rhs[row_i]
        return sol

    def walk_turning(self, nets: list[int]) -> Fraction:
        """Smooth tangent turning of a closed walk with given edge nets,
        in the chart through face 0 (corner angles not included)."""
        return sum((t * n for t, n in zip(self.edge_turnings, nets)
                    if n), start=Fraction(0))


def faces(d: LabeledDiagram) -> list[Face]:
    """Complementary regions in canonical order (0-crossing case implicit)."""
    if not d.crossings:
        return []
    return Topology(d).faces


def all_face_keys(d: LabeledDiagram) -> list[str]:
    if not d.crossings:
        return list(EMPTY_FACE_KEYS)
    return [f.key for f in faces(d)]


def region_word(d: LabeledDiagram, face_key: str) -> list[tuple[str, int]]:
    """Signed preferred-chord labels around a face, counterclockwise.

    Returns pairs (label, sign) like ("a1", -1); the cyclic word starts at
    the face's canonical corner.
    """
    if not d.crossings:
        return []
    top = Topology(d)
    face = top.faces[top.face_index(face_key)]
    word = []
    for cid, q in face.corners:
        c = d.crossing(cid)
        word.append((f"{c.preferred}{cid}", c.chord_sign(c.preferred, q)))
    return word


def format_region_word(word: list[tuple[str, int]]) -> str:
    return " ".join(f"{label}{'+' if s > 0 else '-'}" for label, s in word)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Diagnostic:
    code: str
    location: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    diagnostics: tuple[Diagnostic, ...]

    def __bool__(self) -> bool:
        return self.ok


def _manifold_problems(m: Manifold) -> list[Diagnostic]:
    out = []
    if m.kind == "lens":
        if m.p < 2:
            out.append(Diagnostic("manifold", "p", f"need p >= 2, got {m.p}"))
        if m.q == 1:
            out.append(Diagnostic("manifold", "q", "q = 1 is excluded"))
        if not (0 < m.q < m.p):
            out.append(Diagnostic("manifold", "q",
                                  f"need 0 < q < p, got q={m.q}"))
        elif gcd(m.p, m.q) != 1:
            out.append(Diagnostic("manifold", "q",
                                  f"gcd({m.p},{m.q}) != 1"))
    return out


def validate(d: LabeledDiagram) -> ValidationReport:
    """Check every structural invariant; report all violations found.

    Beyond incidence checks (4-valent crossings, one closed component,
    spherical Euler count), the face weights must be integers off the poles,
    have denominator dividing p at the poles, and total 1 (or 1/p for a
    quotient diagram).  The total is what makes gradings and disc counts
    independent of normalization choices, so it is enforced here rather
    than discovered downstream.
    """
    diags: list[Diagnostic] = list(_manifold_problems(d.manifold))
    p = d.manifold.cover_order

    if not d.crossings:
        keys = list(EMPTY_FACE_KEYS)
        if d.edges:
            diags.append(Diagnostic("edges", "-", "edges without crossings"))
    else:
        try:
            top = Topology(d)
        except DiagramError as exc:
            diags.append(Diagnostic("edges", "-", str(exc)))
            return ValidationReport(False, tuple(diags))
        if not top.single_component():
            diags.append(Diagnostic(
                "knot", "-",
                f"straight-through circuit covers {len(top.circuit)} of "
                f"{len(top.edge_list)} edges: knot not connected"))
        n, e, f = top.n, len(top.edge_list), len(top.faces)
        if n - e + f != 2:
            diags.append(Diagnostic(
                "euler", "-", f"V-E+F = {n}-{e}+{f} != 2: not a sphere"))
        keys = top.face_keys

    key_set = set(keys)
    if d.manifold.kind == "lens":
        if d.poles is None:
            diags.append(Diagnostic("poles", "-", "quotient diagram needs "
                                    "two pole faces"))
        elif d.poles[0] == d.poles[1]:
            diags.append(Diagnostic("poles", d.poles[0],
                                    "pole faces must be distinct"))
    if d.poles is not None:
        for key in d.poles:
            if key not in key_set:
                diags.append(Diagnostic("poles", key, "not a face"))

    pole_set = set(d.poles or ())
    total = Fraction(0)
    for key in keys:
        if key not in d.defects:
            diags.append(Diagnostic("defects", key, "face weight missing"))
            continue
        val = d.defects[key]
        total += val
        if key in pole_set:
            if p > 1 and val.denominator not in _divisors(p):
                diags.append(Diagnostic(
                    "defects", key,
                    f"pole weight {val} has denominator not dividing {p}"))
            if p == 1 and val.denominator != 1:
                diags.append(Diagnostic("defects", key,
                                        f"pole weight {val} not an integer"))
        elif val.denominator != 1:
            diags.append(Diagnostic("defects", key,
                                    f"weight {val} not an integer"))
    for key in d.defects:
        if key not in key_set:
            diags.append(Diagnostic("defects", key, "weight on unknown face"))

    # the fiberwise geometry fixes the total: chord contributions cancel in
    # pairs around each crossing and the curvature term integrates to the
    # bundle Euler number, -1 for the sphere and -1/p for a quotient
    want = Fraction(-1, p)
    if not any(dg.code == "defects" for dg in diags) and total != want:
        diags.append(Diagnostic(
            "defects", "-",
            f"face weights total {total}, expected {want}"))

    return ValidationReport(not diags, tuple(diags))


def _divisors(p: int) -> set[int]:
    return {k for k in range(1, p + 1) if p % k == 0}


# ---------------------------------------------------------------------------
# Chord lengths


def chord_lengths(d: LabeledDiagram,
                  top: Topology | None = None) -> dict[int, Fraction] | None:
    """A feasible chord-length assignment, or None.

    Seeks l(a_i) in (0,1) per crossing, with l(b_i) = 1 - l(a_i), such that
    every face weight splits as  n(F) = l'(w(F)) - area(F)  with a strictly
    positive area: l' sums the signed preferred-chord lengths around the
    face.  Any diagram of an actual knot admits such lengths; they are used
    to cut off disc searches (a disc's word letters total less than the
    anchor's length) and are otherwise diagnostic.
    """
    if not d.crossings:
        return {}
    top = top or Topology(d)
    try:
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover
        return None
    cids = [c.cid for c in d.crossings]
    col = {cid: i for i, cid in enumerate(cids)}
    n = len(cids)
    eps_col = n
    a_ub: list[list[float]] = []
    b_ub: list[float] = []

    def add(coeffs: dict[int, Fraction], const: Fraction) -> None:
        # coeffs . u + const >= eps
        row = [0.0] * (n + 1)
        for j, v in coeffs.items():
            row[j] -= float(v)
        row[eps_col] = 1.0
        a_ub.append(row)
        b_ub.append(float(const))

    for f in top.faces:
        coeffs: dict[int, Fraction] = {}
        const = -d.defects[f.key]
        for cid, q in f.corners:
            c = d.crossing(cid)
            s = c.chord_sign(c.preferred, q)
            if c.preferred == "a":
                coeffs[col[cid]] = coeffs.get(col[cid], Fraction(0)) + s
            else:
                coeffs[col[cid]] = coeffs.get(col[cid], Fraction(0)) - s
                const += s
        add(coeffs, const)
    for j in range(n):  # eps <= u_j <= 1 - eps
        add({j: Fraction(1)}, Fraction(0))
        add({j: Fraction(-1)}, Fraction(1))

    cost = [0.0] * (n + 1)
    cost[eps_col] = -1.0
    res = linprog(cost, A_ub=[[*r] for r in a_ub], b_ub=b_ub,
                  bounds=[(0.0, 1.0)] * n + [(0.0, 0.5)],
                  method="highs")
    if not res.success or res.x[eps_col] <= 1e-9:
        return None
    for denom in (64, 4096, 10 ** 6):
        lengths = {cid: Fraction(res.x[col[cid]]).limit_denominator(denom)
                   for cid in cids}
        if _lengths_valid(d, top, lengths):
            return lengths
    return None


def _lengths_valid(d: LabeledDiagram, top: Topology,
                   lengths: dict[int, Fraction]) -> bool:
    if any(not (0 < v < 1) for v in lengths.values()):
        return False
    for f in top.faces:
        total = Fraction(0)
        for cid, q in f.corners:
            c = d.crossing(cid)
            l_pref = (lengths[cid] if c.preferred == "a"
                      else 1 - lengths[cid])
            total += c.chord_sign(c.preferred, q) * l_pref
        if total - d.defects[f.key] <= 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Branched-cover lift


@dataclass(frozen=True)
class LiftedDiagram:
    """A quotient diagram together with its cyclic branched cover.

    ``total`` lives in the sphere upstairs; crossing ids encode (base, copy)
    as base + copy * stride.  ``deck`` advances the copy index by one; the
    two pole faces are the only faces it fixes.
    """

    base: LabeledDiagram
    total: LabeledDiagram
    p: int
    stride: int
    cut_edges: tuple[frozenset, ...]

    def base_cid(self, total_cid: int) -> int:
        return total_cid % self.stride

    def copy_of(self, total_cid: int) -> int:
        return total_cid // self.stride

    def total_cid(self, base_cid: int, copy: int) -> int:
        return base_cid + (copy % self.p) * self.stride

    def deck_crossing(self, total_cid: int, power: int = 1) -> int:
        return self.total_cid(self.base_cid(total_cid),
                              self.copy_of(total_cid) + power)

    def deck_port(self, port: Port, power: int = 1) -> Port:
        return (self.deck_crossing(port[0], power), port[1])


def _dual_cut_path(top: Topology, poles: tuple[str, str]) -> list[frozenset]:
    """Shortest dual-graph path of edges from pole face 0 to pole face 1.

    Deterministic: breadth-first with edges explored in sorted order.  The
    resulting cover is independent of this choice up to isomorphism; tests
    assert that rather than assume it.
    """
    src = top.face_index(poles[0])
    dst = top.face_index(poles[1])
    adj: dict[int, list[tuple[int, frozenset]]] = {}
    for u, v in top.edge_list:
        a = top.left_face(u, v)
        b = top.left_face(v, u)
        e = frozenset((u, v))
        adj.setdefault(a, []).append((b, e))
        adj.setdefault(b, []).append((a, e))
    for k in adj:
        adj[k].sort(key=lambda t: (t[0], sorted(t[1])))
    prev: dict[int, tuple[int, frozenset]] = {src: (src, frozenset())}
    queue = [src]
    while queue:
        cur = queue.pop(0)
        if cur == dst:
            break
        for nxt, e in adj.get(cur, ()):
            if nxt not in prev and nxt != cur:
                prev[nxt] = (cur, e)
                queue.append(nxt)
    if dst not in prev:
        raise DiagramError("pole faces not connected in the dual graph")
    path = []
    cur = dst
    while cur != src:
        parent, e = prev[cur]
        path.append(e)
        cur = parent
    return list(reversed(path))


def _cut_shifts(top: Topology, path: list[frozenset],
                poles: tuple[str, str]) -> dict[tuple[Port, Port], int]:
    """Copy-index shift for each directed edge crossing of the cut path."""
    shifts: dict[tuple[Port, Port], int] = {}
    face_seq = [top.face_index(poles[0])]
    for e in path:
        u, v = sorted(e)
        a, b = top.left_face(u, v), top.left_face(v, u)
        nxt = b if face_seq[-1] == a else a
        if face_seq[-1] not in (a, b):
            raise DiagramError("cut path is not a dual path")
        # crossing from the earlier face toward the later: +1
        if top.left_face(u, v) == face_seq[-1]:
            shifts[(u, v)] = 1
            shifts[(v, u)] = -1
        else:
            shifts[(u, v)] = -1
            shifts[(v, u)] = 1
        face_seq.append(nxt)
    return shifts


def lift(d: LabeledDiagram, cut: list[frozenset] | None = None) -> LiftedDiagram:
    """Build the p-fold cyclic cover branched over the two pole faces.

    The sphere is cut along a dual path between the poles; p copies are
    glued with the copy index advancing each time the cut is crossed.  Off
    the poles every face lifts to p copies with the same weight; each pole
    face lifts to a single face whose weight is multiplied by p.
    """
    report = validate(d)
    if not report:
        raise DiagramError("cannot lift an invalid diagram: "
                           + "; ".join(x.message for x in report.diagnostics))
    if d.manifold.kind != "lens":
        raise DiagramError("only quotient (lens) diagrams lift")
    return _lift_core(d, d.manifold.p, cut)


def _lift_core(d: LabeledDiagram, p: int,
               cut: list[frozenset] | None = None) -> LiftedDiagram:
    top = Topology(d)
    assert d.poles is not None
    path = _dual_cut_path(top, d.poles) if cut is None else cut
    shifts = _cut_shifts(top, path, d.poles)

    stride = 1
    max_cid = max((c.cid for c in d.crossings), default=0)
    while stride <= max_cid:
        stride *= 10

    crossings = []
    for c in d.crossings:
        for i in range(p):
            crossings.append(replace(c, cid=c.cid + i * stride))
    edges = []
    for u, v in d.edges:
        s = shifts.get((u, v), 0)
        for i in range(p):
            uu = (u[0] + i * stride, u[1])
            vv = (v[0] + ((i + s) % p) * stride, v[1])
            edges.append(tuple(sorted((uu, vv))))

    total_defects: dict[str, Fraction] = {}
    raw = LabeledDiagram(Manifold.s3(), tuple(sorted(crossings)),
                         tuple(sorted(edges)), None, {})
    total_top = Topology(raw)
    pole_keys: list[str] = []
    base_pole = set(d.poles)
    for f in total_top.faces:
        base_corners = {(c % stride, q) for c, q in f.corners}
        base_faces = {top.face_of_quadrant[c] for c in base_corners}
        if len(base_faces) != 1:
            raise DiagramError("lifted face projects onto several faces")
        bkey = top.face_keys[base_faces.pop()]
        weight = d.defects[bkey]
        if bkey in base_pole:
            total_defects[f.key] = weight * p
            pole_keys.append((bkey, f.key))
        else:
            total_defects[f.key] = weight
    pole_keys.sort(key=lambda t: d.poles.index(t[0]))
    if len(pole_keys) != 2:
        raise DiagramError(f"branching produced {len(pole_keys)} pole faces")
    total = LabeledDiagram(Manifold.s3(), raw.crossings, raw.edges,
                           (pole_keys[0][1], pole_keys[1][1]), total_defects)
    lifted = LiftedDiagram(d, total, p, stride,
                           tuple(frozenset(e) for e in path))
    rep = validate(total)
    if not rep:
        raise DiagramError("lifted diagram invalid: "
                           + "; ".join(x.message for x in rep.diagnostics))
    return lifted


def deck_check(l: LiftedDiagram) -> ValidationReport:
    """Verify the deck symmetry: free on crossings, label-preserving,
    fixing exactly the pole faces, of order exactly p."""
    diags: list[Diagnostic] = []
    d = l.total
    edge_set = set(d.edges)
    for c in d.crossings:
        image = l.deck_crossing(c.cid)
        try:
            ci = d.crossing(image)
        except DiagramError:
            diags.append(Diagnostic("deck", str(c.cid), "image missing"))
            continue
        if (ci.a_plus_axis, ci.preferred) != (c.a_plus_axis, c.preferred):
            diags.append(Diagnostic("deck", str(c.cid),
                                    "labels not deck-invariant"))
        orbit = {c.cid}
        cur = l.deck_crossing(c.cid)
        while cur not in orbit:
            orbit.add(cur)
            cur = l.deck_crossing(cur)
        if len(orbit) != l.p:
            diags.append(Diagnostic("deck", str(c.cid),
                                    f"crossing orbit has size {len(orbit)}"))
    for u, v in d.edges:
        im = tuple(sorted((l.deck_port(u), l.deck_port(v))))
        if im not in edge_set:
            diags.append(Diagnostic("deck", str((u, v)),
                                    "edge image missing"))
    top = Topology(d)
    fixed = []
    for f in top.faces:
        image = Face.canonical([(l.deck_crossing(c), q)
                                for c, q in f.corners])
        if image.key == f.key:
            fixed.append(f.key)
        if d.defects.get(image.key) != d.defects.get(f.key):
            diags.append(Diagnostic("deck", f.key,
                                    "face weight not deck-invariant"))
    if sorted(fixed) != sorted(d.poles or ()):
        diags.append(Diagnostic(
            "deck", "-", f"deck-fixed faces {sorted(fixed)} are not exactly "
            f"the poles {sorted(d.poles or ())}"))
    return ValidationReport(not diags, tuple(diags))


# ---------------------------------------------------------------------------
# Isomorphism codes

def canonical_code(d: LabeledDiagram) -> str:
    """Relabeling-invariant encoding of a diagram.

    Two diagrams get the same code exactly when some renaming of crossings
    combined with per-crossing port rotations (orientation preserved)
    matches crossings, edges, labels, poles and weights.  Rotating ports by
    an odd amount swaps the quadrant parity, so ``a_plus_axis`` flips.
    """
    if not d.crossings:
        payload = {
            "manifold": _manifold_doc(d.manifold),
            "crossings": 0,
            "poles": sorted(d.poles or ()),
            "defects": sorted((k, str(v)) for k, v in d.defects.items()),
        }
        return json.dumps(payload, sort_keys=True)

    top = Topology(d)
    best: str | None = None
    for start in sorted(top.mate):
        code = _code_from(d, top, start)
        if best is None or code < best:
            best = code
    assert best is not None
    return best


def _code_from(d: LabeledDiagram, top: Topology, start: Port) -> str:
    order: dict[int, int] = {}
    rot: dict[int, int] = {}
    queue: list[Port] = [start]
    seen_ports: set[Port] = set()
    while queue:
        port = queue.pop(0)
        if port in seen_ports:
            continue
        seen_ports.add(port)
        cid, k = port
        if cid not in order:
            order[cid] = len(order)
            rot[cid] = k
        base = rot[cid]
        for off in range(4):
            depart = (cid, (base + off) % 4)
            mate = top.mate[depart]
            if mate not in seen_ports:
                queue.append(mate)

    def rename(port: Port) -> tuple[int, int]:
        cid, k = port
        return (order[cid], (k - rot[cid]) % 4)

    edges = sorted(tuple(sorted((rename(u), rename(v))))
                   for u, v in d.edges)
    crossings = []
    for c in d.crossings:
        axis = c.a_plus_axis
        if rot[c.cid] % 2 == 1:
            axis = "odd" if axis == "even" else "even"
        crossings.append((order[c.cid], axis, c.preferred))
    crossings.sort()

    def face_rename(key: str) -> str:
        face = top.faces[top.face_index(key)]
        return Face.canonical(
            [(order[c], (q - rot[c]) % 4) for c, q in face.corners]).key

    defects = sorted((face_rename(k), str(v)) for k, v in d.defects.items())
    poles = [face_rename(k) for k in d.poles] if d.poles else None
    payload = {
        "manifold": _manifold_doc(d.manifold),
        "crossings": crossings,
        "edges": edges,
        "poles": poles,
        "defects": defects,
    }
    return json.dumps(payload, sort_keys=True)


def isomorphic(a: LabeledDiagram, b: LabeledDiagram) -> bool:
    return canonical_code(a) == canonical_code(b)


# ---------------------------------------------------------------------------
# Serialization


def _manifold_doc(m: Manifold) -> dict:
    if m.kind == "s3":
        return {"type": "s3"}
    return {"type": "lens", "p": m.p, "q": m.q}


def _fraction_str(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def diagram_to_dict(d: LabeledDiagram) -> dict:
    doc = {
        "manifold": _manifold_doc(d.manifold),
        "crossings": [
            {"id": c.cid, "a_plus_axis": c.a_plus_axis,
             "preferred": c.preferred}
            for c in d.crossings
        ],
        "edges": [[list(u), list(v)] for u, v in d.edges],
        "poles": list(d.poles) if d.poles else None,
        "defects": {k: _fraction_str(v)
                    for k, v in sorted(d.defects.items())},
    }
    return doc


def diagram_from_dict(doc: Mapping) -> LabeledDiagram:
    try:
        m = doc["manifold"]
        manifold = (Manifold.s3() if m["type"] == "s3"
                    else Manifold.lens(int(m["p"]), int(m["q"])))
        crossings = [Crossing(int(c["id"]), c["a_plus_axis"], c["preferred"])
                     for c in doc["crossings"]]
        edges = [(tuple(u), tuple(v)) for u, v in doc["edges"]]
        poles = tuple(doc["poles"]) if doc.get("poles") else None
        defects = {k: _as_fraction(v) for k, v in doc["defects"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise DiagramError(f"malformed diagram document: {exc}") from exc
    return make_diagram(manifold, crossings, edges, poles, defects)


def diagram_to_json(d: LabeledDiagram) -> str:
    return json.dumps(diagram_to_dict(d), indent=2, sort_keys=False) + "\n"


def diagram_from_json(text: str) -> LabeledDiagram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramError(f"not valid JSON: {exc}") from exc
    return diagram_from_dict(doc)
