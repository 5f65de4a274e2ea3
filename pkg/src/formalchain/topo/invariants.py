"""Classification keys, homology, and canonical forms for triangulations.

Closed manifolds are collected into classes:

* dimension 0 -- counts of (+) and (-) points,
* dimension 1 -- number of circles (topological) or the multiset of circle
  length profiles (isometry),
* dimension 2 -- sorted multiset of component genera (topological) or a
  canonical combinatorial-map code (isometry / combinatorial).

Homology Betti numbers and torsion come from integer Smith normal form of the
boundary matrices and serve as an approximate fingerprint where full
classification is unavailable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from ..errors import StructureError, UnsupportedError
from .complexes import Triangulation


@dataclass(frozen=True, order=True)
class Closed0Class:
    """Closed oriented 0-manifold: (+)-point and (-)-point counts."""

    plus_points: int
    minus_points: int

    def __post_init__(self):
        if self.plus_points < 0 or self.minus_points < 0:
            raise StructureError("point counts must be nonnegative")

    def __str__(self):
        return f"points(+{self.plus_points},-{self.minus_points})"


@dataclass(frozen=True, order=True)
class Closed1Class:
    """Closed 1-manifold: a number of circles."""

    circles: int

    def __post_init__(self):
        if self.circles < 0:
            raise StructureError("circle count must be nonnegative")

    def __str__(self):
        return f"circles({self.circles})"


@dataclass(frozen=True, order=True)
class ClosedSurfaceClass:
    """Closed orientable surface: sorted multiset of component genera."""

    genera: Tuple[int, ...]
    orientable: bool = True

    def __post_init__(self):
        if list(self.genera) != sorted(self.genera):
            object.__setattr__(self, "genera", tuple(sorted(self.genera)))
        if any(g < 0 for g in self.genera):
            raise StructureError("genus must be nonnegative")
        if not self.orientable:
            raise UnsupportedError("non-orientable surfaces are not supported")

    @property
    def components(self) -> int:
        return len(self.genera)

    def euler_characteristic(self) -> int:
        return sum(2 - 2 * g for g in self.genera)

    def union(self, other: "ClosedSurfaceClass") -> "ClosedSurfaceClass":
        return ClosedSurfaceClass(tuple(sorted(self.genera + other.genera)))

    def __str__(self):
        return "surface(" + ",".join(f"g{g}" for g in self.genera) + ")"


def euler_characteristic(t: Triangulation) -> int:
    """Alternating simplex count sum((-1)^k #k-simplices)."""
    return t.euler_characteristic()


def classify_0d(t: Triangulation) -> Closed0Class:
    if t.dim != 0:
        raise StructureError("expected a 0-manifold")
    plus = sum(1 for s in t.vertex_sign.values() if s > 0)
    return Closed0Class(plus, len(t.vertex_sign) - plus)


def classify_curves(t: Triangulation) -> Closed1Class:
    if t.dim != 1:
        raise StructureError("expected a 1-manifold")
    if not t.is_closed():
        raise StructureError("expected a closed 1-manifold")
    return Closed1Class(t.component_count())


def classify_surface(t: Triangulation) -> ClosedSurfaceClass:
    """Collect a closed oriented surface by genus per connected component.

    Components are found by union-find over faces sharing an edge; the genus
    of each comes from its Euler characteristic.
    """
    if t.dim != 2:
        raise StructureError("expected a 2-manifold")
    if not t.is_closed():
        raise StructureError("surface classification requires a closed surface")
    if not t.is_pure():
        raise StructureError("complex has simplices outside every face; singular")
    _require_manifold_links(t)
    genera = []
    for comp in _face_components(t):
        vset, eset = set(), set()
        for f in comp:
            fv, fe = t.faces[f]
            vset.update(fv)
            eset.update(fe)
        chi = len(vset) - len(eset) + len(comp)
        if chi % 2 != 0 or chi > 2:
            raise StructureError(f"component has impossible Euler characteristic {chi}")
        genera.append((2 - chi) // 2)
    return ClosedSurfaceClass(tuple(sorted(genera)))


def _face_components(t: Triangulation) -> List[List[int]]:
    parent = {f: f for f in t.faces}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    by_edge: Dict[int, List[int]] = {}
    for f, (_, fe) in t.faces.items():
        for e in fe:
            by_edge.setdefault(e, []).append(f)
    for fs in by_edge.values():
        for g in fs[1:]:
            ra, rb = find(fs[0]), find(g)
            if ra != rb:
                parent[ra] = rb
    comps: Dict[int, List[int]] = {}
    for f in t.faces:
        comps.setdefault(find(f), []).append(f)
    return [sorted(c) for c in comps.values()]


def _require_manifold_links(t: Triangulation) -> None:
    """Every vertex link must be a single cycle (closed surface assumed)."""
    corners: Dict[int, List[Tuple[int, int]]] = {}
    for f, (fv, _) in t.faces.items():
        for i, v in enumerate(fv):
            corners.setdefault(v, []).append((f, i))
    # neighbor across the outgoing side of the corner
    side_faces: Dict[int, List[int]] = {}
    for f, (_, fe) in t.faces.items():
        for e in fe:
            side_faces.setdefault(e, []).append(f)
    for v, cs in corners.items():
        if not cs:
            continue
        start = cs[0]
        seen = {start}
        cur = start
        for _ in range(len(cs) * 2):
            f, i = cur
            fv, fe = t.faces[f]
            out_edge = fe[i]  # side v -> next corner vertex
            nbrs = [g for g in side_faces[out_edge] if g != f]
            if not nbrs:
                break
            g = nbrs[0]
            gv, _ = t.faces[g]
            cur = (g, gv.index(v))
            if cur == start:
                break
            seen.add(cur)
        if len(seen) != len(cs):
            raise StructureError(f"vertex {v} has a disconnected link; pinched point")


# -- homology -------------------------------------------------------------------


@dataclass(frozen=True)
class HomologyFingerprint:
    betti: Tuple[int, ...]
    torsion: Tuple[int, ...]

    def __str__(self):
        tor = ",".join(map(str, self.torsion)) if self.torsion else "-"
        return "H(" + ",".join(map(str, self.betti)) + f";{tor})"


def homology_ranks(t: Triangulation) -> HomologyFingerprint:
    """Betti numbers b_0..b_dim and H_* torsion via integer Smith normal form."""
    v_index = {v: i for i, v in enumerate(sorted(t.vertex_sign))}
    e_index = {e: i for i, e in enumerate(sorted(t.edges))}
    f_index = {f: i for i, f in enumerate(sorted(t.faces))}
    nv, ne, nf = len(v_index), len(e_index), len(f_index)

    d1 = [[0] * ne for _ in range(nv)]
    for e, (a, b) in t.edges.items():
        d1[v_index[b]][e_index[e]] += 1
        d1[v_index[a]][e_index[e]] -= 1
    d2 = [[0] * nf for _ in range(ne)]
    for f, (fv, fe) in t.faces.items():
        for i in range(3):
            a, b = fv[i], fv[(i + 1) % 3]
            sign = 1 if (a, b) == t.edges[fe[i]] else -1
            d2[e_index[fe[i]]][f_index[f]] += sign

    diag1 = smith_normal_form(d1) if ne else []
    diag2 = smith_normal_form(d2) if nf else []
    rank1 = sum(1 for x in diag1 if x != 0)
    rank2 = sum(1 for x in diag2 if x != 0)

    b0 = nv - rank1
    if t.dim == 0:
        return HomologyFingerprint((b0,), ())
    b1 = ne - rank1 - rank2
    if t.dim == 1:
        return HomologyFingerprint((b0, b1), ())
    b2 = nf - rank2
    torsion = tuple(x for x in diag2 if x not in (0, 1))
    return HomologyFingerprint((b0, b1, b2), torsion)


def smith_normal_form(matrix: List[List[int]]) -> List[int]:
    """Diagonal of the Smith normal form of an integer matrix.

    Returns the invariant factors (nonnegative, each dividing the next),
    padded with zeros up to min(rows, cols).
    """
    m = [row[:] for row in matrix]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    diag: List[int] = []
    r = 0
    while r < min(rows, cols):
        pr, pc, best = -1, -1, None
        for i in range(r, rows):
            for j in range(r, cols):
                x = abs(m[i][j])
                if x and (best is None or x < best):
                    pr, pc, best = i, j, x
        if best is None:
            break
        m[r], m[pr] = m[pr], m[r]
        for row in m:
            row[r], row[pc] = row[pc], row[r]
        changed = True
        while changed:
            changed = False
            for i in range(r + 1, rows):
                if m[i][r]:
                    q = m[i][r] // m[r][r]
                    for j in range(r, cols):
                        m[i][j] -= q * m[r][j]
                    if m[i][r]:
                        m[r], m[i] = m[i], m[r]
                        changed = True
            for j in range(r + 1, cols):
                if m[r][j]:
                    q = m[r][j] // m[r][r]
                    for i in range(r, rows):
                        m[i][j] -= q * m[i][r]
                    if m[r][j]:
                        for i in range(rows):
                            m[i][r], m[i][j] = m[i][j], m[i][r]
                        changed = True
        # entry must divide the rest of the submatrix for true invariant factors
        pivot = abs(m[r][r])
        for i in range(r + 1, rows):
            for j in range(r + 1, cols):
                if m[i][j] % pivot:
                    for jj in range(r, cols):
                        m[r][jj] += m[i][jj]
                    changed = True
                    break
            if changed:
                break
        if changed:
            continue
        diag.append(pivot)
        r += 1
    diag += [0] * (min(rows, cols) - len(diag))
    return diag


# -- canonical isometry / combinatorial keys -----------------------------------


def iso_key(t: Triangulation, metric: bool = True):
    """Canonical hashable key for the isometry (or combinatorial) class."""
    if t.dim == 0:
        return classify_0d(t)
    if t.dim == 1:
        return ("curves",) + curve_profile(t, metric=metric)
    if t.is_pure():
        return ("surface", surface_code(t, metric=metric))
    pure_faces = t.faces
    used_e = {e for _, fe in pure_faces.values() for e in fe}
    dangling = [e for e in t.edges if e not in used_e]
    surf = Triangulation(
        2,
        {v: s for v, s in t.vertex_sign.items()
         if any(v in fv for fv, _ in t.faces.values())},
        {e: d for e, d in t.edges.items() if e in used_e},
        {e: t.edge_len2[e] for e in used_e},
        t.faces,
        {e: m for e, m in t.boundary_mark.items() if e in used_e},
        validate=False,
        reorient=False,
    )
    curve_part = tuple(sorted(_token(t.edge_len2[e], metric) for e in dangling))
    return ("mixed", surface_code(surf, metric=metric), curve_part)


def curve_profile(t: Triangulation, metric: bool = True) -> Tuple:
    """Sorted tuple of canonical per-component profiles of a 1-manifold."""
    succ: Dict[int, Tuple[int, int]] = {}
    pred: Dict[int, int] = {}
    for e, (a, b) in t.edges.items():
        succ[a] = (b, e)
        pred[b] = a
    profiles = []
    seen_edges = set()

    def walk(start: int) -> Tuple[Tuple, bool]:
        lens = []
        v = start
        while v in succ:
            nxt, e = succ[v]
            if e in seen_edges:
                break
            seen_edges.add(e)
            lens.append(_token(t.edge_len2[e], metric))
            v = nxt
            if v == start:
                return tuple(lens), True
        return tuple(lens), False

    # open components start at vertices with an outgoing but no incoming edge
    for v in sorted(set(succ) - set(pred)):
        lens, _ = walk(v)
        profiles.append(("path",) + lens)
    # what remains are cycles
    for e in sorted(t.edges):
        if e in seen_edges:
            continue
        lens, closed = walk(t.edges[e][0])
        if not closed:
            raise StructureError("1-complex walk did not close; invalid structure")
        profiles.append(("circle",) + _min_rotation(lens))
    return tuple(sorted(profiles))


def _min_rotation(seq: Tuple) -> Tuple:
    if not seq:
        return seq
    best = None
    for s in (seq, tuple(reversed(seq))):
        for i in range(len(s)):
            rot = s[i:] + s[:i]
            if best is None or rot < best:
                best = rot
    return best


def _token(l2, metric: bool):
    if not metric:
        return "*"
    if isinstance(l2, Fraction):
        return str(l2)
    return repr(float(l2))


def surface_code(t: Triangulation, metric: bool = True) -> Tuple:
    """Canonical code of an oriented surface Delta-complex.

    Darts are face sides; the code records, per dart in a deterministic
    traversal order, the indices of its in-face successor and its twin plus
    the metric token of its edge.  Per connected component, the minimum over
    all starting darts is a complete invariant of the combinatorial map (with
    lengths if metric); the full code is the sorted tuple of component codes.
    """
    darts = [(f, i) for f in sorted(t.faces) for i in range(3)]
    if not darts:
        return ()
    twin: Dict[Tuple[int, int], Tuple[int, int]] = {}
    by_edge: Dict[int, List[Tuple[int, int]]] = {}
    for f, i in darts:
        e = t.faces[f][1][i]
        by_edge.setdefault(e, []).append((f, i))
    for ds in by_edge.values():
        if len(ds) == 2:
            twin[ds[0]] = ds[1]
            twin[ds[1]] = ds[0]

    def traverse(start):
        index = {start: 0}
        order = [start]
        qi = 0
        while qi < len(order):
            f, i = order[qi]
            qi += 1
            for nb in ((f, (i + 1) % 3), twin.get((f, i))):
                if nb is not None and nb not in index:
                    index[nb] = len(order)
                    order.append(nb)
        rec = []
        for f, i in order:
            nxt = index[(f, (i + 1) % 3)]
            tw = index.get(twin.get((f, i)), -1)
            tok = _token(t.edge_len2[t.faces[f][1][i]], metric)
            rec.append((nxt, tw, tok))
        return tuple(rec), order

    remaining = set(darts)
    codes = []
    while remaining:
        seed = min(remaining)
        _, members = traverse(seed)
        comp = set(members)
        best = min(traverse(d)[0] for d in sorted(comp))
        codes.append(best)
        remaining -= comp
    return tuple(sorted(codes))
