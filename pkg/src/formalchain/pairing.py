"""Universal pairings of bounded kets, light-like search, and order checks.

The pairing is sesquilinear: ``<sum a_i M_i, sum b_j N_j>`` equals the
collected superposition of ``a_i * conj(b_j)`` on the closed space obtained by
gluing ``M_i`` to the mirror image of ``N_j`` along their common boundary.
Kets come in several flavours behind one ``Gluer`` interface:

* labeled-point matchings (dimension-1 kets: arcs plus free circles),
* labeled-circle surfaces (dimension-2 kets: genus pieces bounding circles),
* fixed triangulations glued along shared boundary ids,
* opaque ids under a user-supplied equivalence with a gluing table (the
  stand-in for dimensions where real gluing is out of reach).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .errors import BoundaryError, StructureError
from .superpose import Superposition, abs2, conj, is_exact, rc
from .topo import (
    Bounded1Ket,
    BoundedSurfaceKet,
    Closed1Class,
    ClosedSurfaceClass,
    Triangulation,
    disk_with_handles,
    glue_along_boundary,
    iso_key,
)


@dataclass(frozen=True)
class BoundarySpec:
    """Common boundary of a ket family: labeled points (d=1) or circles (d=2)."""

    dimension: int
    points: Tuple[int, ...] = ()
    circles: Tuple[str, ...] = ()

    def __post_init__(self):
        if len(set(self.points)) != len(self.points):
            raise StructureError("boundary point labels must be unique")
        if len(set(self.circles)) != len(self.circles):
            raise StructureError("boundary circle labels must be unique")


# -- gluers ------------------------------------------------------------------------


class Gluer:
    """Strategy gluing one ket to the mirror of another into a closed class key."""

    def check(self, kets: Sequence) -> None:
        raise NotImplementedError

    def glue(self, a, b):
        """Closed class of ``a`` glued to ``mirror(b)``."""
        raise NotImplementedError


class MatchingGluer(Gluer):
    """Dimension-1 gluer: arcs over labeled points, counted into circles."""

    def __init__(self, spec: BoundarySpec):
        if spec.dimension != 0:
            raise BoundaryError("matching kets need a 0-dimensional boundary")
        self.spec = spec
        self._labels = frozenset(spec.points)

    def check(self, kets: Sequence[Bounded1Ket]) -> None:
        for k in kets:
            if k.labels != self._labels:
                raise BoundaryError(f"ket {k} does not match boundary {sorted(self._labels)}")

    def glue(self, a: Bounded1Ket, b: Bounded1Ket) -> Closed1Class:
        return glue_1d(a, b)


def glue_1d(a: Bounded1Ket, b: Bounded1Ket) -> Closed1Class:
    """Circles of the union of two matchings on the same labels, plus free ones.

    Mirroring a matching of unoriented labeled arcs is the identity, so the
    cycle structure of ``matching(a) union matching(b)`` is what counts.
    """
    if a.labels != b.labels:
        raise BoundaryError("kets do not share boundary labels")
    nxt_a = {x: y for x, y in a.matching} | {y: x for x, y in a.matching}
    nxt_b = {x: y for x, y in b.matching} | {y: x for x, y in b.matching}
    todo = set(a.labels)
    cycles = 0
    while todo:
        start = min(todo)
        cycles += 1
        x = start
        while True:
            todo.discard(x)
            y = nxt_a[x]
            todo.discard(y)
            x = nxt_b[y]
            if x == start:
                break
    return Closed1Class(cycles + a.free_circles + b.free_circles)


class SurfaceGluer(Gluer):
    """Dimension-2 gluer: surfaces over labeled circles, collected by genus."""

    def __init__(self, spec: BoundarySpec):
        if spec.dimension != 1:
            raise BoundaryError("surface kets need a 1-dimensional boundary")
        self.spec = spec
        self._labels = frozenset(spec.circles)

    def check(self, kets: Sequence[BoundedSurfaceKet]) -> None:
        for k in kets:
            if k.labels != self._labels:
                raise BoundaryError(f"ket {k} does not cover circles {sorted(self._labels)}")

    def glue(self, a: BoundedSurfaceKet, b: BoundedSurfaceKet) -> ClosedSurfaceClass:
        return glue_2d(a, b)


def glue_2d(a: BoundedSurfaceKet, b: BoundedSurfaceKet) -> ClosedSurfaceClass:
    """Glue two bounded surfaces along every shared boundary circle.

    Components are merged by union-find over the labels; the genus of each
    closed result comes from Euler characteristic additivity (circle
    boundaries contribute nothing).
    """
    if a.labels != b.labels:
        raise BoundaryError("kets do not share boundary circles")
    nodes = [("a", i) for i in range(len(a.components))] + [
        ("b", j) for j in range(len(b.components))
    ]
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    by_label: Dict[object, List] = {}
    for i, (_, ls) in enumerate(a.components):
        for l in ls:
            by_label.setdefault(l, []).append(("a", i))
    for j, (_, ls) in enumerate(b.components):
        for l in ls:
            by_label.setdefault(l, []).append(("b", j))
    for members in by_label.values():
        for m in members[1:]:
            ra, rb = find(members[0]), find(m)
            if ra != rb:
                parent[ra] = rb
    chi: Dict[object, int] = {}
    for n in nodes:
        side, idx = n
        g, ls = (a.components if side == "a" else b.components)[idx]
        c = 2 - 2 * g - len(ls)
        r = find(n)
        chi[r] = chi.get(r, 0) + c
    genera = []
    for total in chi.values():
        if total % 2 != 0 or total > 2:
            raise StructureError(f"glued component has impossible characteristic {total}")
        genera.append((2 - total) // 2)
    genera += list(a.closed_genera) + list(b.closed_genera)
    return ClosedSurfaceClass(tuple(sorted(genera)))


class TriangulationGluer(Gluer):
    """Glue cobordism triangulations along shared boundary ids; keys are isometry classes."""

    def __init__(self, metric: bool = True):
        self.metric = metric

    def check(self, kets: Sequence[Triangulation]) -> None:
        if not kets:
            return
        marks = kets[0].boundary_mark
        for k in kets[1:]:
            if k.boundary_mark != marks:
                raise BoundaryError("triangulation kets carry different boundary marks")

    def glue(self, a: Triangulation, b: Triangulation):
        glued = glue_along_boundary(a, b.mirrored())
        return iso_key(glued, metric=self.metric)


class DisjointUnionGluer(Gluer):
    """Pairing over the empty boundary: gluing is disjoint union with the mirror."""

    def __init__(self, metric: bool = True):
        self.metric = metric

    def check(self, kets: Sequence[Triangulation]) -> None:
        for k in kets:
            if not k.is_closed():
                raise BoundaryError("empty-boundary pairing needs closed kets")

    def glue(self, a: Triangulation, b: Triangulation):
        return iso_key(a.disjoint_union(b.mirrored()), metric=self.metric)


class MockEquivalence(Gluer):
    """Opaque kets with a user-supplied symmetric gluing table.

    Models gluing in dimensions where recognizing the closed result is out of
    reach: the table simply names the class of ``A glued to mirror(B)``.
    """

    def __init__(self, kets: Sequence[str], table: Dict[Tuple[str, str], str]):
        self.kets = tuple(kets)
        self.table = dict(table)
        for a, b in itertools.product(self.kets, repeat=2):
            if (a, b) not in self.table:
                raise StructureError(f"gluing table misses pair ({a}, {b})")
            if self.table[(a, b)] != self.table[(b, a)]:
                raise StructureError(f"gluing table not symmetric at ({a}, {b})")

    def check(self, kets: Sequence[str]) -> None:
        for k in kets:
            if k not in self.table_kets():
                raise BoundaryError(f"unknown mock ket {k!r}")

    def table_kets(self) -> Tuple[str, ...]:
        return self.kets

    def glue(self, a: str, b: str) -> str:
        return self.table[(a, b)]

    @staticmethod
    def from_json(text: str) -> "MockEquivalence":
        """Load {"kets": [...], "glue": {"A|B": "class", ...}}."""
        data = json.loads(text)
        kets = data["kets"]
        table = {}
        for pair, cls in data["glue"].items():
            a, _, b = pair.partition("|")
            table[(a, b)] = cls
        for a, b in itertools.product(kets, repeat=2):
            if (a, b) not in table and (b, a) in table:
                table[(a, b)] = table[(b, a)]
        return MockEquivalence(kets, table)

    @staticmethod
    def all_equal(kets: Sequence[str], closed_class: str = "all-glued") -> "MockEquivalence":
        """Table where every gluing lands in one class (the cancellation scenario)."""
        table = {(a, b): closed_class for a in kets for b in kets}
        return MockEquivalence(kets, table)


# -- the pairing --------------------------------------------------------------------


def pair(v: Superposition, w: Superposition, gluer: Gluer) -> Superposition:
    """Sesquilinear pairing ``sum_ij a_i conj(b_j) [glue(M_i, mirror N_j)]``."""
    kets = list(v.keys()) + list(w.keys())
    gluer.check(kets)
    raw = []
    for m, a in v.items():
        for n, b in w.items():
            raw.append((a * conj(b), gluer.glue(m, n)))
    return Superposition.collect(raw)


def pairing_norm2(v: Superposition, gluer: Gluer):
    return pair(v, v, gluer).norm2()


# -- light-like search ----------------------------------------------------------------


@dataclass
class SearchResult:
    min_residual: float
    argmin: Superposition
    restarts: int
    steps: int

    def as_dict(self) -> dict:
        return {
            "min_residual": self.min_residual,
            "restarts": self.restarts,
            "steps": self.steps,
            "argmin": [
                {"key": str(k), "re": complex(a).real, "im": complex(a).imag}
                for k, a in self.argmin.items()
            ],
        }


def lightlike_search(
    kets: Sequence,
    gluer: Gluer,
    trials: int = 200,
    steps: int = 500,
    seed: int = 0,
    step_size: float = 0.1,
) -> SearchResult:
    """Minimize ``norm2(pair(v, v))`` over unit vectors by projected descent.

    The residual is a smooth quartic in the amplitudes; each restart follows
    the analytic gradient from a random complex start and the best result
    (ties broken by restart index) is returned.  Deterministic given the seed.
    """
    if not kets:
        raise StructureError("need at least one ket")
    gluer.check(list(kets))
    n = len(kets)
    key_of: Dict[Tuple[int, int], object] = {}
    keys: List[object] = []
    key_index: Dict[object, int] = {}
    for i, j in itertools.product(range(n), repeat=2):
        k = gluer.glue(kets[i], kets[j])
        key_of[(i, j)] = k
        if k not in key_index:
            key_index[k] = len(keys)
            keys.append(k)
    mats = np.zeros((len(keys), n, n))
    for (i, j), k in key_of.items():
        mats[key_index[k], i, j] = 1.0

    def residual_and_grad(v: np.ndarray):
        q = np.einsum("i,kij,j->k", v.conj(), mats, v).real
        r = float(np.sum(q * q))
        grad = 2.0 * np.einsum("k,kij,j->i", q, mats, v)
        return r, grad

    def polish(v: np.ndarray, iters: int = 40) -> np.ndarray:
        # Gauss-Newton on the residual system q_k(v) = 0, |v|^2 = 1.  The
        # quartic objective is flat near a null vector, where plain descent
        # crawls; solving the quadratic system converges quadratically.
        for _ in range(iters):
            av = np.einsum("kij,j->ki", mats, v)
            q = np.einsum("i,ki->k", v.conj(), av).real
            res = np.concatenate([q, [np.vdot(v, v).real - 1.0]])
            jac = np.concatenate(
                [2.0 * av.real, 2.0 * av.imag], axis=1
            )
            norm_row = np.concatenate([2.0 * v.real, 2.0 * v.imag])[None, :]
            jac = np.concatenate([jac, norm_row], axis=0)
            delta, *_ = np.linalg.lstsq(jac, -res, rcond=None)
            v = v + delta[:n] + 1j * delta[n:]
            nv = np.linalg.norm(v)
            if nv == 0.0:
                break
            v = v / nv
        return v

    seq = np.random.SeedSequence(seed)
    children = seq.spawn(max(trials, 1))
    best_r = None
    best_v = None
    for ti in range(max(trials, 1)):
        rng = np.random.default_rng(children[ti])
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        v /= np.linalg.norm(v)
        for _ in range(steps):
            r, grad = residual_and_grad(v)
            v = v - step_size * grad
            nv = np.linalg.norm(v)
            if nv == 0.0:
                v = rng.normal(size=n) + 1j * rng.normal(size=n)
                nv = np.linalg.norm(v)
            v /= nv
        polished = polish(v)
        r, _ = residual_and_grad(polished)
        r_raw, _ = residual_and_grad(v)
        if r_raw < r:
            r, polished = r_raw, v
        if best_r is None or r < best_r:
            best_r, best_v = r, polished.copy()
    argmin = Superposition([(complex(best_v[i]), kets[i]) for i in range(n)])
    return SearchResult(float(best_r), argmin, max(trials, 1), steps)


# -- topological Cauchy-Schwarz order check ---------------------------------------------


@dataclass(frozen=True)
class OrderViolation:
    ket_a: object
    ket_b: object
    off_diag: object
    diag_a: object
    diag_b: object


def cauchy_schwarz_check(
    kets: Sequence, gluer: Gluer, order: Callable[[object], object]
) -> List[OrderViolation]:
    """All pairs violating ``o(A glued mirror B) < max(o(A A~), o(B B~))``.

    An empty list certifies that the order is maximized only on the diagonal
    for this family, which forces diagonal dominance of the pairing.
    """
    gluer.check(list(kets))
    diag = [order(gluer.glue(k, k)) for k in kets]
    out = []
    for i, j in itertools.combinations(range(len(kets)), 2):
        o_off = order(gluer.glue(kets[i], kets[j]))
        if not (o_off < max(diag[i], diag[j])):
            out.append(OrderViolation(kets[i], kets[j], o_off, diag[i], diag[j]))
    return out


def order_circle_count(c: Closed1Class) -> int:
    return c.circles


def order_neg_components(c) -> Tuple:
    """Component count negated, as needed for the ascending chain condition."""
    if isinstance(c, Closed1Class):
        return (-c.circles,)
    if isinstance(c, ClosedSurfaceClass):
        return (-c.components, c.euler_characteristic())
    raise TypeError(f"no component order for {type(c).__name__}")


# -- handle series -----------------------------------------------------------------------


def l2_handle_series(coefficients: Callable[[int], object], g_max: int) -> List[Tuple[int, object]]:
    """Collected coefficients of the self-pairing of ``sum_n c_n (disk with n handles)``.

    The glued class of handle pieces i and j is the genus ``i + j`` surface, so
    the collected coefficient at genus ``g`` is the convolution
    ``sum_{i+j=g} c_i conj(c_j)``.  Exact amplitudes convolve exactly;
    float amplitudes use a fast vectorized path.
    """
    if g_max < 0:
        raise ValueError("g_max must be nonnegative")
    cs = [coefficients(n) for n in range(g_max + 1)]
    if all(is_exact(c) for c in cs):
        out = []
        for g in range(g_max + 1):
            total = None
            for i in range(g + 1):
                term = cs[i] * conj(cs[g - i])
                total = term if total is None else total + term
            out.append((g, total))
        return out
    arr = np.asarray([complex(c) for c in cs])
    conv = np.convolve(arr, arr.conj())[: g_max + 1]
    if np.allclose(conv.imag, 0.0):
        return [(g, float(conv[g].real)) for g in range(g_max + 1)]
    return [(g, complex(conv[g])) for g in range(g_max + 1)]


def square_partial_sums(series: Iterable[Tuple[int, object]]) -> List[Tuple[int, object, object]]:
    """Rows (g, coefficient, sum of squared coefficients up to g)."""
    out = []
    total = None
    for g, c in series:
        q = abs2(c)
        total = q if total is None else total + q
        out.append((g, c, total))
    return out


# -- built-in example families -------------------------------------------------------------


def example_superposed_arcs() -> Tuple[Superposition, MatchingGluer]:
    """The four-ket superposition over two boundary points whose self-pairing
    collects to coefficients (1/4, -1/2, -1/4, 1, -1/4, -1/2, 1/4) on 1..7
    circles, of squared norm 7/4.

    One arc matches the two points; the four kets differ by 0..3 free circles
    and carry amplitudes (+1/2, -1/2, -1/2, +1/2).
    """
    spec = BoundarySpec(dimension=0, points=(0, 1))
    signs = (1, -1, -1, 1)
    kets = [(rc(s, 0) * rc(Fraction(1, 2)), Bounded1Ket(((0, 1),), c)) for c, s in enumerate(signs)]
    v = Superposition([(a, k) for a, k in kets])
    return v, MatchingGluer(spec)


def example_superposed_arcs_profile() -> Dict[Closed1Class, Fraction]:
    """The collected coefficient profile of the example, keyed by circle count."""
    vals = [
        Fraction(1, 4), Fraction(-1, 2), Fraction(-1, 4), Fraction(1),
        Fraction(-1, 4), Fraction(-1, 2), Fraction(1, 4),
    ]
    return {Closed1Class(n + 1): vals[n] for n in range(7)}


def example_mock_null_family() -> Tuple[List[str], MockEquivalence]:
    """Two opaque kets whose four gluings are all the same closed class.

    ``A - B`` is then an exact null vector of the pairing, the mechanism that
    terminates growth in the dimension the mock stage stands in for.
    """
    kets = ["A", "B"]
    return kets, MockEquivalence.all_equal(kets, closed_class="S4-like")
