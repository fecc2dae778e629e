"""Exact counting of rectangles, octahedra, cycles and associative triples.

Every fast kernel has a slow oracle next to it (``method="naive"`` or
``method="walk"``) so the two can be compared on small instances.
"""

import itertools
import logging
import time
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from .exceptions import InputError
from .pls import PartialBinaryOp, PartialLatinSquare, Triple, from_binary_op, permute_coords

logger = logging.getLogger(__name__)

Quad = Tuple[int, int, int, int]
Rectangle = Tuple[int, int, int, int]

CYCLE_KINDS = ("label", "row", "column")

# Coordinate order (even-shared, odd-shared, signature) for each cycle kind.
FRAMES: Dict[str, Tuple[int, int, int]] = {
    "label": (0, 1, 2),
    "row": (0, 2, 1),
    "column": (2, 1, 0),
}

_INT64_LIMIT = 2 ** 62


@dataclass(frozen=True)
class CountReport:
    metric: str
    value: int
    method: str
    elapsed: float

    @property
    def elapsed_ms(self) -> float:
        return self.elapsed * 1000.0

    def csv_line(self) -> str:
        return f"{self.metric},{self.value},{self.method},{self.elapsed_ms:.3f}"


def measure(metric: str, fn: Callable[..., int], *args: Any, method: str = "hash-grouped", **kwargs: Any) -> CountReport:
    """Run a counter and wrap its value with timing."""
    start = time.perf_counter()
    value = fn(*args, method=method, **kwargs)
    return CountReport(metric, int(value), method, time.perf_counter() - start)


# Rectangles and octahedra


def iter_rectangles(pls: PartialLatinSquare) -> Iterator[Tuple[Rectangle, Quad]]:
    """Ordered tuples (x1, x2, y1, y2) with all four cells present, degenerate ones included."""
    rows: Dict[int, List[int]] = {}
    for x, y, _ in pls.triples:
        rows.setdefault(y, []).append(x)
    label = pls.label_index
    for y1, y2 in itertools.product(sorted(rows), repeat=2):
        common = sorted(set(rows[y1]) & set(rows[y2]))
        for x1, x2 in itertools.product(common, repeat=2):
            yield (x1, x2, y1, y2), (label[(x1, y1)], label[(x2, y1)], label[(x1, y2)], label[(x2, y2)])


def _row_pair_codes(pls: PartialLatinSquare) -> Iterator[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Per ordered row pair: column indices and the labels of the two rows there."""
    table = pls.label_matrix()
    filled = table >= 0
    for y1 in range(pls.dims[1]):
        for y2 in range(pls.dims[1]):
            cols = np.nonzero(filled[:, y1] & filled[:, y2])[0]
            if cols.size:
                yield cols, table[cols, y1], table[cols, y2]


def rectangle_label_histogram(pls: PartialLatinSquare) -> Counter:
    """m(q): number of ordered rectangles carrying each label quadruple q."""
    nz = max(pls.dims[2], 1)
    if nz ** 4 >= _INT64_LIMIT:
        return Counter(q for _, q in iter_rectangles(pls))
    codes = []
    for _, a, c in _row_pair_codes(pls):
        # (a_i, a_j, c_i, c_j) for every ordered column pair (i, j)
        code = ((a[:, None] * nz + a[None, :]) * nz + c[:, None]) * nz + c[None, :]
        codes.append(code.ravel())
    if not codes:
        return Counter()
    values, counts = np.unique(np.concatenate(codes), return_counts=True)
    histogram = Counter()
    for value, count in zip(values.tolist(), counts.tolist()):
        d = value % nz
        value //= nz
        c = value % nz
        value //= nz
        b = value % nz
        a = value // nz
        histogram[(a, b, c, d)] = count
    return histogram


def count_rectangles(pls: PartialLatinSquare) -> int:
    return sum(int(len(cols)) ** 2 for cols, _, _ in _row_pair_codes(pls))


def count_octahedra(pls: PartialLatinSquare, method: str = "hash-grouped") -> int:
    """Ordered pairs of ordered rectangles with equal label quadruples."""
    if method == "naive":
        rects = [q for _, q in iter_rectangles(pls)]
        return sum(1 for q1 in rects for q2 in rects if q1 == q2)
    if method != "hash-grouped":
        raise InputError(f"unknown octahedron counting method: {method}")
    return sum(int(m) * int(m) for m in rectangle_label_histogram(pls).values())


def octahedron_density(pls: PartialLatinSquare) -> Fraction:
    n = pls.n
    return Fraction(count_octahedra(pls), n ** 5) if n else Fraction(0)


# Cycles


@dataclass(frozen=True)
class Cycle:
    """A closed alternating walk of 2r cells, stored in original coordinates."""

    kind: str
    cells: Tuple[Triple, ...]

    @property
    def r(self) -> int:
        return len(self.cells) // 2

    @property
    def signature(self) -> Tuple[int, ...]:
        s = FRAMES[self.kind][2]
        return tuple(t[s] for t in self.cells)

    def framed(self) -> Tuple[Triple, ...]:
        frame = FRAMES[self.kind]
        return tuple(tuple(t[p] for p in frame) for t in self.cells)

    @classmethod
    def from_framed(cls, kind: str, cells: Sequence[Sequence[int]]) -> "Cycle":
        frame = FRAMES[kind]
        out = []
        for t in cells:
            original = [0, 0, 0]
            for i, p in enumerate(frame):
                original[p] = int(t[i])
            out.append(tuple(original))
        return cls(kind, tuple(out))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "cells": [list(c) for c in self.cells]}


def _check_kind(kind: str, r: int) -> None:
    if kind not in FRAMES:
        raise InputError(f"unknown cycle kind: {kind!r}")
    if r < 2:
        raise InputError(f"cycle half-length must be at least 2, got {r}")


def frame(pls: PartialLatinSquare, kind: str) -> PartialLatinSquare:
    """Permute coordinates so that the cycle kind becomes the label kind."""
    return permute_coords(pls, FRAMES[kind])


def is_cycle(pls: PartialLatinSquare, cycle: Cycle) -> bool:
    """Cells present and consecutive cells alternately sharing the odd and even coordinate."""
    cells = cycle.framed()
    if len(cells) < 4 or len(cells) % 2:
        return False
    framed_pls = frame(pls, cycle.kind)
    if any(c not in framed_pls for c in cells):
        return False
    m = len(cells)
    for i in range(m):
        a, b = cells[i], cells[(i + 1) % m]
        # 1-based position i+1: odd positions share coordinate 1, even ones coordinate 0
        shared = 1 if (i + 1) % 2 else 0
        if a[shared] != b[shared]:
            return False
    return True


def iter_cycles(pls: PartialLatinSquare, kind: str, r: int) -> Iterator[Cycle]:
    """Enumerate every 2r-cycle of the given kind by depth-first search."""
    _check_kind(kind, r)
    framed = frame(pls, kind)
    by_first: Dict[int, List[Triple]] = {}
    by_second: Dict[int, List[Triple]] = {}
    for t in framed.triples:
        by_first.setdefault(t[0], []).append(t)
        by_second.setdefault(t[1], []).append(t)

    def extend(path: List[Triple]) -> Iterator[List[Triple]]:
        if len(path) == 2 * r:
            first, last = path[0], path[-1]
            if first[0] == last[0]:
                yield path
            return
        shared = 1 if len(path) % 2 else 0
        pool = by_second if shared == 1 else by_first
        for nxt in pool.get(path[-1][shared], []):
            path.append(nxt)
            yield from extend(path)
            path.pop()

    for start in framed.triples:
        for path in extend([start]):
            yield Cycle.from_framed(kind, path)


def _power_dtype(n0: int, n1: int, r: int):
    return np.int64 if max(n0, n1, 1) ** (2 * r + 1) < _INT64_LIMIT else object


def count_cycles(pls: PartialLatinSquare, kind: str = "label", r: int = 2, method: str = "matrix") -> int:
    """Number of 2r-cycles (closed walks), i.e. trace((A A^T)^r)."""
    _check_kind(kind, r)
    if method == "walk":
        return sum(1 for _ in iter_cycles(pls, kind, r))
    if method == "spectral":
        return int(round(spectral_cycle_sum(pls, kind, r)))
    if method not in ("matrix", "hash-grouped"):
        raise InputError(f"unknown cycle counting method: {method}")
    adjacency = frame(pls, kind).adjacency()
    n0, n1 = adjacency.shape
    dtype = _power_dtype(n0, n1, r)
    gram = adjacency.astype(dtype) @ adjacency.T.astype(dtype)
    power = np.identity(n0, dtype=np.int64).astype(dtype)
    for _ in range(r):
        power = power @ gram
    return int(sum(int(power[i, i]) for i in range(n0)))


def spectral_cycle_sum(pls: PartialLatinSquare, kind: str, r: int) -> float:
    """Sum of the singular values of the cell matrix raised to the power 2r."""
    adjacency = frame(pls, kind).adjacency().astype(float)
    if adjacency.size == 0:
        return 0.0
    sigma = np.linalg.svd(adjacency, compute_uv=False)
    return float(np.sum(sigma ** (2 * r)))


def cycle_bounds(pls: PartialLatinSquare, kind: str, r: int) -> Dict[str, Any]:
    """Lower and upper cycle-count bounds from the cell density, as exact fractions."""
    adjacency = frame(pls, kind).adjacency()
    n0, n1 = adjacency.shape
    cells = int(adjacency.sum())
    area = n0 * n1
    alpha = Fraction(cells, area) if area else Fraction(0)
    count = count_cycles(pls, kind, r)
    lower = alpha ** (2 * r) * area ** r
    upper = alpha ** r * area ** r
    return {
        "alpha": alpha,
        "count": count,
        "lower": lower,
        "upper": upper,
        "ok": lower <= count <= upper,
    }


def _walk_key_base(nz: int, length: int) -> bool:
    return max(nz, 1) ** length < _INT64_LIMIT


def closed_walk_signatures(pls: PartialLatinSquare, kind: str, r: int, first_label: int) -> Tuple[np.ndarray, np.ndarray]:
    """All 2r-cycles whose first signature value is ``first_label``.

    Returns ``(prefix_keys, last_labels)`` where ``prefix_keys`` encodes the
    signature values 2..2r-1 in base n_s. Walks that fail to close are dropped.
    """
    framed = frame(pls, kind)
    table = framed.label_matrix()
    n0, n1 = table.shape
    ns = max(framed.dims[2], 1)
    starts = np.argwhere(table == first_label)
    if starts.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    x0 = starts[:, 0]
    cur_x = starts[:, 0].copy()
    cur_y = starts[:, 1].copy()
    keys = np.zeros(len(x0), dtype=np.int64)
    # positions 2..2r-1; position p moves along coordinate 1 when p is even
    for position in range(2, 2 * r):
        if position % 2 == 0:
            rows = table[:, cur_y].T  # walks x candidate columns
            walk_idx, new_x = np.nonzero(rows >= 0)
            labels = rows[walk_idx, new_x]
            x0, cur_y, keys = x0[walk_idx], cur_y[walk_idx], keys[walk_idx]
            cur_x = new_x
        else:
            cols = table[cur_x, :]
            walk_idx, new_y = np.nonzero(cols >= 0)
            labels = cols[walk_idx, new_y]
            x0, cur_x, keys = x0[walk_idx], cur_x[walk_idx], keys[walk_idx]
            cur_y = new_y
        keys = keys * ns + labels
    last = table[x0, cur_y]
    closed = last >= 0
    return keys[closed], last[closed]


def signature_histogram(pls: PartialLatinSquare, kind: str, r: int) -> Counter:
    """Occurrence count of every realized 2r-cycle signature."""
    _check_kind(kind, r)
    ns = max(frame(pls, kind).dims[2], 1)
    histogram: Counter = Counter()
    if not _walk_key_base(ns, 2 * r):
        for cycle in iter_cycles(pls, kind, r):
            histogram[cycle.signature] += 1
        return histogram
    for z1 in range(frame(pls, kind).dims[2]):
        keys, last = closed_walk_signatures(pls, kind, r, z1)
        if keys.size == 0:
            continue
        full = keys * ns + last
        values, counts = np.unique(full, return_counts=True)
        for value, count in zip(values.tolist(), counts.tolist()):
            digits = []
            for _ in range(2 * r - 1):
                digits.append(value % ns)
                value //= ns
            histogram[(z1,) + tuple(reversed(digits))] = count
    return histogram


def signature_occurrences(pls: PartialLatinSquare, kind: str, signature: Sequence[int]) -> int:
    """Number of cycles carrying ``signature``, found by following lookups from each start cell."""
    r = len(signature) // 2
    _check_kind(kind, r)
    if len(signature) != 2 * r:
        raise InputError("a cycle signature has even length")
    framed = frame(pls, kind)
    label, row_of, col_of = framed.label_index, framed.row_index, framed.col_index
    occurrences = 0
    for x0, y, z in framed.triples:
        if z != signature[0]:
            continue
        x = x0
        ok = True
        for position in range(2, 2 * r):
            if position % 2 == 0:
                nxt = col_of.get((y, signature[position - 1]))
                if nxt is None:
                    ok = False
                    break
                x = nxt
            else:
                nxt = row_of.get((x, signature[position - 1]))
                if nxt is None:
                    ok = False
                    break
                y = nxt
        if ok and label.get((x0, y)) == signature[-1]:
            occurrences += 1
    return occurrences


def popular_cycles(pls: PartialLatinSquare, kind: str, r: int, theta: float) -> Set[Tuple[int, ...]]:
    """Signatures occurring at least ``theta * n`` times, n the ambient size."""
    framed = frame(pls, kind)
    cap = min(framed.dims[0], framed.dims[1])
    threshold = theta * pls.n
    popular = set()
    for signature, occurrences in signature_histogram(pls, kind, r).items():
        if occurrences > cap:
            raise InputError(f"signature {signature} occurs {occurrences} > {cap} times; not a partial Latin square")
        if occurrences >= threshold:
            popular.add(signature)
    return popular


# Associative triples


def count_associative_triples(op: PartialBinaryOp, method: str = "vectorized") -> int:
    """Triples (x, y, z) with both bracketings defined and equal."""
    n = op.n
    if n == 0 or not op.table:
        return 0
    if method == "naive":
        total = 0
        for x, y, z in itertools.product(range(n), repeat=3):
            yz, xy = op(y, z), op(x, y)
            if yz is None or xy is None:
                continue
            left, right = op(x, yz), op(xy, z)
            if left is not None and left == right:
                total += 1
        return total
    if method not in ("vectorized", "hash-grouped"):
        raise InputError(f"unknown associativity counting method: {method}")
    # index n stands for "undefined" and maps to itself
    ext = np.full((n + 1, n + 1), n, dtype=np.int64)
    arr = op.as_array()
    ext[:n, :n] = np.where(arr >= 0, arr, n)
    products = ext[:n, :n]
    total = 0
    zs = np.arange(n)
    for x in range(n):
        left = ext[x, products]  # x(yz) over (y, z)
        right = ext[products[x][:, None], zs[None, :]]  # (xy)z over (y, z)
        total += int(np.count_nonzero((left == right) & (left != n)))
    return total


def associativity_lemma_check(op: PartialBinaryOp) -> Dict[str, Any]:
    """Octahedra of the table against eps^4 n^5, eps the associative-triple density."""
    n = op.n
    assoc = count_associative_triples(op)
    octahedra = count_octahedra(from_binary_op(op))
    # octahedra >= (assoc / n^3)^4 n^5  <=>  octahedra n^7 >= assoc^4
    ok = n == 0 or octahedra * n ** 7 >= assoc ** 4
    bound = Fraction(assoc ** 4, n ** 7) if n else Fraction(0)
    return {"n": n, "associative_triples": assoc, "octahedra": octahedra, "bound": bound, "ok": ok}
