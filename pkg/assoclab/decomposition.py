"""Point, ring and dispersed ring decompositions of cycles, and partially fixed discs.

All enumeration happens in the label frame: a cycle of another kind is
first moved there with :func:`assoclab.counting.frame`. A cycle
x1 y1 ... xr yr has x_i = (k_i, p_i) and y_i = (k_{i+1}, p_i) where k are
columns and p rows.
"""

import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .counting import Cycle, frame, is_cycle, rectangle_label_histogram, signature_histogram
from .exceptions import InputError, ResourceExhausted
from .pls import PartialLatinSquare, Triple

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10 ** 8

Cell = Tuple[int, int]
Rect = Tuple[int, int, int, int]


class _Budget:
    """Visited-state counter shared by one enumeration."""

    def __init__(self, limit: Optional[int], what: str):
        self.limit = DEFAULT_BUDGET if limit is None else int(limit)
        self.used = 0
        self.what = what

    def tick(self, amount: int = 1) -> None:
        self.used += amount
        if self.used > self.limit:
            raise ResourceExhausted(f"{self.what} exceeded the budget of {self.limit} states", self.limit)


@dataclass(frozen=True)
class _Framed:
    pls: PartialLatinSquare
    cols: Tuple[int, ...]  # k_1..k_r
    rows: Tuple[int, ...]  # p_1..p_r

    @property
    def r(self) -> int:
        return len(self.rows)


def _framed_cycle(pls: PartialLatinSquare, cycle: Cycle) -> _Framed:
    if not is_cycle(pls, cycle):
        raise InputError("cycle does not lie in the partial Latin square")
    framed = frame(pls, cycle.kind)
    cells = cycle.framed()
    cols = tuple(cells[2 * i][0] for i in range(cycle.r))
    rows = tuple(cells[2 * i][1] for i in range(cycle.r))
    return _Framed(framed, cols, rows)


def _quad(pls: PartialLatinSquare, rect: Rect) -> Optional[Tuple[int, int, int, int]]:
    x1, x2, y1, y2 = rect
    label = pls.label_index
    cells = ((x1, y1), (x2, y1), (x1, y2), (x2, y2))
    if any(c not in label for c in cells):
        return None
    return tuple(label[c] for c in cells)


class _Popularity:
    """Rectangle popularity against a threshold, via the label histogram."""

    def __init__(self, pls: PartialLatinSquare, threshold: float):
        self.pls = pls
        self.threshold = threshold
        self.histogram = rectangle_label_histogram(pls) if threshold > 0 else None
        self.signatures: Dict[int, Counter] = {}

    def rect(self, rect: Rect) -> bool:
        q = _quad(self.pls, rect)
        if q is None:
            return False
        return self.histogram is None or self.histogram[q] >= self.threshold

    def cycle(self, signature: Sequence[int]) -> bool:
        if self.threshold <= 0:
            return True
        r = len(signature) // 2
        if r not in self.signatures:
            self.signatures[r] = signature_histogram(self.pls, "label", r)
        return self.signatures[r][tuple(signature)] >= self.threshold


# Point decompositions


@dataclass(frozen=True)
class PointDecomposition:
    cycle: Cycle
    centre: Cell
    rectangles: Tuple[Rect, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {"centre": list(self.centre), "rectangles": [list(r) for r in self.rectangles]}


def _cycle_cells(fc: _Framed) -> List[Cell]:
    cells = []
    for i in range(fc.r):
        cells.append((fc.cols[i], fc.rows[i]))
        cells.append((fc.cols[(i + 1) % fc.r], fc.rows[i]))
    return cells


def iter_point_decompositions(pls: PartialLatinSquare, cycle: Cycle, eps: float = 0.0) -> Iterator[PointDecomposition]:
    """Centres u whose 2r rectangles towards the cycle cells are present and eps-popular."""
    fc = _framed_cycle(pls, cycle)
    popular = _Popularity(fc.pls, eps * pls.n)
    targets = _cycle_cells(fc)
    for ux, uy, _ in fc.pls.triples:
        rects = tuple((ux, px, uy, py) for px, py in targets)
        if all(popular.rect(rect) for rect in rects):
            yield PointDecomposition(cycle, (ux, uy), rects)


def count_point_decompositions(pls: PartialLatinSquare, cycle: Cycle, eps: float = 0.0) -> int:
    return sum(1 for _ in iter_point_decompositions(pls, cycle, eps))


def validate_point_decomposition(pls: PartialLatinSquare, record: PointDecomposition) -> bool:
    fc = _framed_cycle(pls, record.cycle)
    ux, uy = record.centre
    if (ux, uy) not in fc.pls.label_index:
        return False
    expected = tuple((ux, px, uy, py) for px, py in _cycle_cells(fc))
    return record.rectangles == expected and all(_quad(fc.pls, r) is not None for r in expected)


# Ring decompositions


@dataclass(frozen=True)
class RingDecomposition:
    """Partner cycle x_i' = (c_i, d_{i-1}), y_i' = (c_i, d_i) and the bridging rectangles."""

    cycle: Cycle
    partner_cols: Tuple[int, ...]
    partner_rows: Tuple[int, ...]
    rectangles: Tuple[Rect, ...]

    def partner_cells(self) -> List[Cell]:
        r = len(self.partner_cols)
        # listed y1' x2' y2' ... yr' x1' so that the first two cells share a row
        cells = []
        for i in range(r):
            cells.append((self.partner_cols[i], self.partner_rows[i]))
            cells.append((self.partner_cols[(i + 1) % r], self.partner_rows[i]))
        return cells

    def to_dict(self) -> Dict[str, Any]:
        return {
            "partner": [list(c) for c in self.partner_cells()],
            "rectangles": [list(r) for r in self.rectangles],
        }


def _ring_rects(fc: _Framed, cols: Sequence[int], rows: Sequence[int]) -> Tuple[Rect, ...]:
    r = fc.r
    rects = []
    for i in range(r):
        rects.append((fc.cols[i], cols[i], fc.rows[i], rows[i - 1]))  # x_i with x_i'
        rects.append((fc.cols[(i + 1) % r], cols[i], fc.rows[i], rows[i]))  # y_i with y_i'
    return tuple(rects)


def iter_ring_decompositions(
    pls: PartialLatinSquare, cycle: Cycle, theta: float = 0.0, budget: Optional[int] = None
) -> Iterator[RingDecomposition]:
    """Partner cycles whose rectangles and own signature are theta-popular."""
    fc = _framed_cycle(pls, cycle)
    label = fc.pls.label_index
    popular = _Popularity(fc.pls, theta * pls.n)
    guard = _Budget(budget, "ring decomposition enumeration")
    r = fc.r
    nx_, ny_ = fc.pls.dims[0], fc.pls.dims[1]
    # c_i must meet row p_i, d_i must meet column k_{i+1}
    col_options = [[c for c in range(nx_) if (c, fc.rows[i]) in label] for i in range(r)]
    row_options = [[d for d in range(ny_) if (fc.cols[(i + 1) % r], d) in label] for i in range(r)]

    def search(i: int, cols: List[int], rows: List[int]) -> Iterator[RingDecomposition]:
        if i == r:
            # close: x_1' = (c_1, d_r)
            if (cols[0], rows[-1]) not in label:
                return
            rects = _ring_rects(fc, cols, rows)
            if not popular.rect(rects[0]):
                return
            partner = RingDecomposition(cycle, tuple(cols), tuple(rows), rects)
            signature = [label[c] for c in partner.partner_cells()]
            if popular.cycle(signature):
                yield partner
            return
        for c in col_options[i]:
            if i > 0 and (c, rows[i - 1]) not in label:
                continue
            for d in row_options[i]:
                guard.tick()
                if (c, d) not in label:
                    continue
                cols.append(c)
                rows.append(d)
                rect_y = (fc.cols[(i + 1) % r], c, fc.rows[i], d)
                rect_x_ok = i == 0 or popular.rect((fc.cols[i], c, fc.rows[i], rows[i - 1]))
                if rect_x_ok and popular.rect(rect_y):
                    yield from search(i + 1, cols, rows)
                cols.pop()
                rows.pop()

    yield from search(0, [], [])


def count_ring_decompositions(
    pls: PartialLatinSquare, cycle: Cycle, theta: float = 0.0, budget: Optional[int] = None
) -> int:
    return sum(1 for _ in iter_ring_decompositions(pls, cycle, theta, budget))


def validate_ring_decomposition(pls: PartialLatinSquare, record: RingDecomposition) -> bool:
    fc = _framed_cycle(pls, record.cycle)
    label = fc.pls.label_index
    if any(c not in label for c in record.partner_cells()):
        return False
    partner = Cycle.from_framed("label", [(x, y, label[(x, y)]) for x, y in record.partner_cells()])
    if not is_cycle(fc.pls, partner):
        return False
    expected = _ring_rects(fc, record.partner_cols, record.partner_rows)
    return record.rectangles == expected and all(_quad(fc.pls, rect) is not None for rect in expected)


def is_full_decomposition(
    pls: PartialLatinSquare,
    ring: RingDecomposition,
    partner_centre: Cell,
    rectangle_centres: Sequence[Cell],
    eps: float = 0.0,
) -> bool:
    """A ring decomposition plus point decompositions of its partner cycle and of every rectangle."""
    if not validate_ring_decomposition(pls, ring):
        return False
    fc = _framed_cycle(pls, ring.cycle)
    label = fc.pls.label_index
    popular = _Popularity(fc.pls, eps * pls.n)
    if len(rectangle_centres) != len(ring.rectangles):
        return False
    pieces: List[Tuple[Cell, List[Cell]]] = [(partner_centre, ring.partner_cells())]
    for (x1, x2, y1, y2), centre in zip(ring.rectangles, rectangle_centres):
        pieces.append((centre, [(x1, y1), (x2, y1), (x2, y2), (x1, y2)]))
    for (ux, uy), corners in pieces:
        if (ux, uy) not in label:
            return False
        if not all(popular.rect((ux, px, uy, py)) for px, py in corners):
            return False
    return True


# Dispersed ring decompositions


@dataclass(frozen=True)
class DispersedRingDecomposition:
    """Partner cycle plus rectangles R_i = x'' u x''' v and S_i = y'' w y''' z as cell quadruples."""

    cycle: Cycle
    partner_cols: Tuple[int, ...]
    partner_rows: Tuple[int, ...]
    r_rects: Tuple[Tuple[Cell, Cell, Cell, Cell], ...]
    s_rects: Tuple[Tuple[Cell, Cell, Cell, Cell], ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "partner_cols": list(self.partner_cols),
            "partner_rows": list(self.partner_rows),
            "R": [[list(c) for c in rect] for rect in self.r_rects],
            "S": [[list(c) for c in rect] for rect in self.s_rects],
        }


def _cycle_labels(fc: _Framed) -> Tuple[List[int], List[int]]:
    label = fc.pls.label_index
    cells = _cycle_cells(fc)
    return [label[cells[2 * i]] for i in range(fc.r)], [label[cells[2 * i + 1]] for i in range(fc.r)]


def _r_shapes(pls: PartialLatinSquare, alpha: int, alpha2: int) -> Iterator[Tuple[Cell, Cell, Cell, Cell]]:
    """Rectangles x'' u x''' v with labels L(x'')=alpha and L(x''')=alpha2; u shares the row of x''."""
    label, row_of = pls.label_index, pls.row_index
    by_row: Dict[int, List[int]] = {}
    for x, y, _ in pls.triples:
        by_row.setdefault(y, []).append(x)
    for (a, b), z in label.items():
        if z != alpha:
            continue
        for c in by_row.get(b, []):
            e = row_of.get((c, alpha2))
            if e is None or (a, e) not in label:
                continue
            yield (a, b), (c, b), (c, e), (a, e)


def _s_shapes(pls: PartialLatinSquare, beta: int, beta2: int) -> Iterator[Tuple[Cell, Cell, Cell, Cell]]:
    """Rectangles y'' w y''' z with L(y'')=beta and L(y''')=beta2; w shares the column of y''."""
    label, col_of = pls.label_index, pls.col_index
    by_col: Dict[int, List[int]] = {}
    for x, y, _ in pls.triples:
        by_col.setdefault(x, []).append(y)
    for (a, b), z in label.items():
        if z != beta:
            continue
        for e in by_col.get(a, []):
            c = col_of.get((e, beta2))
            if c is None or (c, b) not in label:
                continue
            yield (a, b), (a, e), (c, e), (c, b)


def _iter_partners(fc: _Framed, guard: _Budget) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Column/row tuples of 2r-cycles x_i' = (c_i, d_{i-1}), y_i' = (c_i, d_i)."""
    label = fc.pls.label_index
    r = fc.r
    by_col: Dict[int, List[int]] = {}
    for x, y, _ in fc.pls.triples:
        by_col.setdefault(x, []).append(y)

    def search(cols: List[int], rows: List[int]) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        i = len(cols)
        if i == r:
            if (cols[0], rows[-1]) in label:
                yield tuple(cols), tuple(rows)
            return
        col_choices = sorted(by_col) if i == 0 else [c for c in sorted(by_col) if (c, rows[-1]) in label]
        for c in col_choices:
            for d in by_col[c]:
                guard.tick()
                cols.append(c)
                rows.append(d)
                yield from search(cols, rows)
                cols.pop()
                rows.pop()

    yield from search([], [])


def _partner_labels(fc: _Framed, cols: Sequence[int], rows: Sequence[int]) -> Tuple[List[int], List[int]]:
    label = fc.pls.label_index
    r = len(cols)
    return [label[(cols[i], rows[i - 1])] for i in range(r)], [label[(cols[i], rows[i])] for i in range(r)]


def count_dispersed_ring_decompositions(
    pls: PartialLatinSquare, cycle: Cycle, budget: Optional[int] = None
) -> int:
    """Exact count via label transfer matrices, summed over partner cycles.

    For a fixed partner cycle, M_i[L(u), L(v)] counts the R_i rectangles and
    N_i[L(w), L(z)] the S_i rectangles; the constraints L(u_i)=L(z_i) and
    L(w_i)=L(v_{i+1}) make the count trace(N_r M_r ... N_1 M_1).
    """
    fc = _framed_cycle(pls, cycle)
    guard = _Budget(budget, "dispersed ring decomposition count")
    nz = fc.pls.dims[2]
    r = fc.r
    dtype = np.int64 if max(nz, 2) ** (4 * r + 3) < 2 ** 62 else object
    alphas, betas = _cycle_labels(fc)
    m_cache: Dict[Tuple[int, int], np.ndarray] = {}
    n_cache: Dict[Tuple[int, int], np.ndarray] = {}

    def m_matrix(alpha: int, alpha2: int) -> np.ndarray:
        key = (alpha, alpha2)
        if key not in m_cache:
            mat = np.zeros((nz, nz), dtype=dtype)
            label = fc.pls.label_index
            for _, u, _, v in _r_shapes(fc.pls, alpha, alpha2):
                guard.tick()
                mat[label[u], label[v]] += 1
            m_cache[key] = mat
        return m_cache[key]

    def n_matrix(beta: int, beta2: int) -> np.ndarray:
        key = (beta, beta2)
        if key not in n_cache:
            mat = np.zeros((nz, nz), dtype=dtype)
            label = fc.pls.label_index
            for _, w, _, z in _s_shapes(fc.pls, beta, beta2):
                guard.tick()
                mat[label[w], label[z]] += 1
            n_cache[key] = mat
        return n_cache[key]

    total = 0
    for cols, rows in _iter_partners(fc, guard):
        a2, b2 = _partner_labels(fc, cols, rows)
        product = None
        for i in range(r):
            step = n_matrix(betas[i], b2[i]) @ m_matrix(alphas[i], a2[i])
            product = step if product is None else step @ product
            guard.tick(nz)
        total += int(sum(int(product[j, j]) for j in range(nz)))
    logger.debug("dispersed ring decompositions: %d (visited %d states)", total, guard.used)
    return total


def iter_dispersed_ring_decompositions(
    pls: PartialLatinSquare, cycle: Cycle, budget: Optional[int] = None
) -> Iterator[DispersedRingDecomposition]:
    """Exhaustive enumeration, the oracle for the transfer-matrix count."""
    fc = _framed_cycle(pls, cycle)
    guard = _Budget(budget, "dispersed ring decomposition enumeration")
    label = fc.pls.label_index
    alphas, betas = _cycle_labels(fc)
    r = fc.r
    for cols, rows in _iter_partners(fc, guard):
        a2, b2 = _partner_labels(fc, cols, rows)
        r_options = [list(_r_shapes(fc.pls, alphas[i], a2[i])) for i in range(r)]
        s_options = [list(_s_shapes(fc.pls, betas[i], b2[i])) for i in range(r)]
        for r_rects in itertools.product(*r_options):
            for s_rects in itertools.product(*s_options):
                guard.tick()
                if all(
                    label[r_rects[i][1]] == label[s_rects[i][3]]
                    and label[s_rects[i][1]] == label[r_rects[(i + 1) % r][3]]
                    for i in range(r)
                ):
                    yield DispersedRingDecomposition(cycle, cols, rows, tuple(r_rects), tuple(s_rects))


def validate_dispersed_ring_decomposition(pls: PartialLatinSquare, record: DispersedRingDecomposition) -> bool:
    """Shapes of all rectangles and the six label-equality families."""
    fc = _framed_cycle(pls, record.cycle)
    label = fc.pls.label_index
    r = fc.r
    cols, rows = record.partner_cols, record.partner_rows
    if len(cols) != r or len(record.r_rects) != r or len(record.s_rects) != r:
        return False
    partner = [(cols[i], rows[i - 1]) for i in range(r)] + [(cols[i], rows[i]) for i in range(r)]
    cells = list(partner)
    for rect in record.r_rects + record.s_rects:
        cells.extend(rect)
    if any(c not in label for c in cells):
        return False
    alphas, betas = _cycle_labels(fc)
    a2, b2 = _partner_labels(fc, cols, rows)
    for i in range(r):
        x2, u, x3, v = record.r_rects[i]
        y2, w, y3, z = record.s_rects[i]
        shape_ok = (
            x2[1] == u[1] and u[0] == x3[0] and x3[1] == v[1] and v[0] == x2[0]
            and y2[0] == w[0] and w[1] == y3[1] and y3[0] == z[0] and z[1] == y2[1]
        )
        labels_ok = (
            label[x2] == alphas[i] and label[x3] == a2[i]
            and label[y2] == betas[i] and label[y3] == b2[i]
            and label[u] == label[z]
            and label[w] == label[record.r_rects[(i + 1) % r][3]]
        )
        if not (shape_ok and labels_ok):
            return False
    return True


def dispersed_lower_bound_check(pls: PartialLatinSquare, cycle: Cycle, theta: float, budget: Optional[int] = None) -> Dict[str, Any]:
    """Dispersed count against (number of theta-popular ring decompositions) * (theta n)^(2r+1)."""
    rings = count_ring_decompositions(pls, cycle, theta, budget)
    dispersed = count_dispersed_ring_decompositions(pls, cycle, budget)
    bound = rings * (Fraction(theta) * pls.n) ** (2 * cycle.r + 1)
    return {"ring_popular": rings, "dispersed": dispersed, "bound": bound, "ok": dispersed >= bound}


# Partially fixed discs


@dataclass(frozen=True)
class DiscEdge:
    tail: int
    head: int
    cls: int  # 0: x (U to V), 1: y (V to W), 2: z (U to W)
    name: str = ""


@dataclass
class AbstractDisc:
    """Triangulated disc over the three edge classes with a set of fixed edges."""

    edges: List[DiscEdge]
    faces: List[Tuple[int, int, int]]  # (x edge, y edge, z edge)
    fixed: frozenset = field(default_factory=frozenset)

    @property
    def vertices(self) -> List[int]:
        return sorted({e.tail for e in self.edges} | {e.head for e in self.edges})

    def face_counts(self) -> Counter:
        return Counter(e for face in self.faces for e in face)

    def boundary_edges(self) -> List[int]:
        counts = self.face_counts()
        return [i for i in range(len(self.edges)) if counts[i] == 1]

    def boundary_vertices(self) -> List[int]:
        return sorted({v for i in self.boundary_edges() for v in (self.edges[i].tail, self.edges[i].head)})

    def internal_vertices(self) -> List[int]:
        boundary = set(self.boundary_vertices())
        return [v for v in self.vertices if v not in boundary]

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def check(self) -> List[str]:
        """Problems with the disc invariants; empty when it is a valid disc."""
        problems = []
        counts = self.face_counts()
        for i in range(len(self.edges)):
            if counts[i] > 2:
                problems.append(f"edge {self.edges[i].name or i} lies in {counts[i]} faces")
            if counts[i] == 0:
                problems.append(f"edge {self.edges[i].name or i} lies in no face")
        if self.euler_characteristic() != 1:
            problems.append(f"Euler characteristic is {self.euler_characteristic()}, not 1")
        boundary = nx.MultiGraph()
        for i in self.boundary_edges():
            boundary.add_edge(self.edges[i].tail, self.edges[i].head)
        if boundary.number_of_edges() == 0:
            problems.append("disc has no boundary")
        elif not nx.is_connected(boundary) or any(d != 2 for _, d in boundary.degree()):
            problems.append("boundary is not a single cycle")
        return problems

    def is_disc(self) -> bool:
        return not self.check()

    def with_fixed(self, edges: Sequence[int]) -> "AbstractDisc":
        return AbstractDisc(self.edges, self.faces, frozenset(edges))

    def with_fixed_boundary(self) -> "AbstractDisc":
        return self.with_fixed(self.boundary_edges())

    def edge_id(self, name: str) -> int:
        for i, e in enumerate(self.edges):
            if e.name == name:
                return i
        raise KeyError(name)


def disc_from_faces(faces: Sequence[Tuple[str, str, str]]) -> AbstractDisc:
    """Glue triangles given as (x name, y name, z name); equal names are the same edge.

    Vertices come from identifying endpoints: in every face the head of x is
    the tail of y, the tails of x and z agree and the heads of y and z agree.
    """
    names: Dict[str, Tuple[int, int]] = {}
    order: List[str] = []
    for face in faces:
        for cls, name in enumerate(face):
            if name in names:
                if names[name][1] != cls:
                    raise InputError(f"edge {name} used in two classes")
                continue
            names[name] = (len(order), cls)
            order.append(name)
    parent = list(range(2 * len(order)))  # 2i = tail of edge i, 2i+1 = head

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    face_ids = []
    for fx, fy, fz in faces:
        ex, ey, ez = names[fx][0], names[fy][0], names[fz][0]
        union(2 * ex + 1, 2 * ey)
        union(2 * ex, 2 * ez)
        union(2 * ey + 1, 2 * ez + 1)
        face_ids.append((ex, ey, ez))
    roots = sorted({find(a) for a in range(2 * len(order))})
    renumber = {root: i for i, root in enumerate(roots)}
    edges = [
        DiscEdge(renumber[find(2 * i)], renumber[find(2 * i + 1)], names[name][1], name)
        for i, name in enumerate(order)
    ]
    return AbstractDisc(edges, face_ids)


def polygon_disc(r: int) -> AbstractDisc:
    """2r triangles around a central vertex, boundary the labels of a 2r-cycle."""
    faces = []
    for i in range(r):
        faces.append((f"k{i}", f"p{i}", f"z{2 * i}"))
        faces.append((f"k{(i + 1) % r}", f"p{i}", f"z{2 * i + 1}"))
    return disc_from_faces(faces)


def dispersed_ring_disc(r: int) -> AbstractDisc:
    """A 2r-gon surrounded by 2r four-gons; boundary a_i, b_i are the labels of the outer cycle."""
    faces = []
    for i in range(r):
        prev = (i - 1) % r
        faces.append((f"c{i}", f"d{prev}", f"a'{i}"))
        faces.append((f"c{i}", f"d{i}", f"b'{i}"))
        # R_i = x'' u x''' v
        faces.append((f"A{i}", f"B{i}", f"a{i}"))
        faces.append((f"E{i}", f"B{i}", f"p{i}"))
        faces.append((f"E{i}", f"F{i}", f"a'{i}"))
        faces.append((f"A{i}", f"F{i}", f"q{prev}"))
        # S_i = y'' w y''' z
        faces.append((f"G{i}", f"H{i}", f"b{i}"))
        faces.append((f"G{i}", f"K{i}", f"q{i}"))
        faces.append((f"M{i}", f"K{i}", f"b'{i}"))
        faces.append((f"M{i}", f"H{i}", f"p{i}"))
    return disc_from_faces(faces)


def single_face_disc() -> AbstractDisc:
    return disc_from_faces([("x", "y", "z")])


def slit_octahedron_disc() -> AbstractDisc:
    """Two rectangles sharing labels a, b, c; boundary is the pair d, d2."""
    return disc_from_faces(
        [
            ("x1", "y1", "a"), ("x2", "y1", "b"), ("x1", "y2", "c"), ("x2", "y2", "d"),
            ("x3", "y3", "a"), ("x4", "y3", "b"), ("x3", "y4", "c"), ("x4", "y4", "d2"),
        ]
    )


def octahedron_sphere() -> AbstractDisc:
    """The slit octahedron with its two boundary labels glued; a sphere, so not a disc."""
    return disc_from_faces(
        [
            ("x1", "y1", "a"), ("x2", "y1", "b"), ("x1", "y2", "c"), ("x2", "y2", "d"),
            ("x3", "y3", "a"), ("x4", "y3", "b"), ("x3", "y4", "c"), ("x4", "y4", "d"),
        ]
    )


def trivial_max(disc: AbstractDisc, n: int) -> Tuple[int, int]:
    """(n^V_I, V_I) for a disc whose boundary edges are all fixed."""
    problems = disc.check()
    if problems:
        raise InputError("not a disc: " + "; ".join(problems))
    loose = [i for i in disc.boundary_edges() if i not in disc.fixed]
    if loose:
        raise InputError(f"{len(loose)} boundary edges are not fixed; attach faces to fix them first")
    internal = len(disc.internal_vertices())
    return n ** internal, internal


def iter_copies(
    disc: AbstractDisc,
    pls: PartialLatinSquare,
    fixed: Optional[Dict[int, int]] = None,
    budget: Optional[int] = None,
) -> Iterator[Dict[int, int]]:
    """Homomorphisms of the disc into the complex of ``pls`` as edge -> generator maps.

    Faces are processed most-constrained first: a face with two known edges
    is completed by a lookup, a face with one known edge branches over at
    most n triples.
    """
    guard = _Budget(budget, "copy enumeration")
    values: Dict[int, int] = dict(fixed or {})
    by_coord: List[Dict[int, List[Triple]]] = [{}, {}, {}]
    for t in pls.triples:
        for cls in range(3):
            by_coord[cls].setdefault(t[cls], []).append(t)
    lookups = (pls.col_index, pls.row_index, pls.label_index)  # missing x, y, z

    for e, v in values.items():
        if not 0 <= v < pls.dims[disc.edges[e].cls]:
            return

    def candidates(face: Tuple[int, int, int]) -> List[Triple]:
        known = [values.get(e) for e in face]
        missing = [i for i in range(3) if known[i] is None]
        if not missing:
            return [tuple(known)] if tuple(known) in pls else []
        if len(missing) == 1:
            i = missing[0]
            others = tuple(known[j] for j in range(3) if j != i)
            value = lookups[i].get(others)
            if value is None:
                return []
            triple = list(known)
            triple[i] = value
            return [tuple(triple)]
        if len(missing) == 2:
            i = next(j for j in range(3) if known[j] is not None)
            return by_coord[i].get(known[i], [])
        return list(pls.triples)

    def search(remaining: List[Tuple[int, int, int]]) -> Iterator[Dict[int, int]]:
        if not remaining:
            yield dict(values)
            return
        best = max(range(len(remaining)), key=lambda k: sum(e in values for e in remaining[k]))
        face = remaining[best]
        rest = remaining[:best] + remaining[best + 1:]
        for triple in candidates(face):
            guard.tick()
            added = []
            for e, v in zip(face, triple):
                if e in values:
                    continue
                values[e] = v
                added.append(e)
            yield from search(rest)
            for e in added:
                del values[e]

    yield from search(list(disc.faces))


def count_copies(disc: AbstractDisc, pls: PartialLatinSquare, fixed: Optional[Dict[int, int]] = None, budget: Optional[int] = None) -> int:
    return sum(1 for _ in iter_copies(disc, pls, fixed, budget))
