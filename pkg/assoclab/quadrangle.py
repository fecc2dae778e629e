"""Quadrangle-condition checks, completion defects and group reconstruction."""

import itertools
import logging
from collections import Counter, deque
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .counting import _walk_key_base, closed_walk_signatures, frame, iter_cycles, iter_rectangles
from .exceptions import InputError, QuadrangleFailure, VerificationFailure
from .pls import PartialLatinSquare, Triple, permute_coords

logger = logging.getLogger(__name__)

QC_KINDS = ("column", "row", "label")

# A column (row) violation is a label violation after exchanging columns (rows) with labels.
QC_FRAMES: Dict[str, Tuple[int, int, int]] = {
    "label": (0, 1, 2),
    "column": (2, 1, 0),
    "row": (0, 2, 1),
}


@dataclass(frozen=True)
class QCViolation:
    """Two rectangles agreeing in three corners and differing in one coordinate of the fourth.

    ``cells`` lists the corners (x1,y1), (x2,y1), (x1,y2), (x2,y2) of the first
    rectangle and then of the second, in original coordinates. ``values`` is the
    mismatched pair in the coordinate named by ``kind``.
    """

    kind: str
    cells: Tuple[Triple, ...]
    values: Tuple[int, int]

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "cells": [list(c) for c in self.cells], "values": list(self.values)}


def _qc_frame(pls: PartialLatinSquare, kind: str) -> PartialLatinSquare:
    if kind not in QC_FRAMES:
        raise InputError(f"unknown quadrangle kind: {kind!r}")
    return permute_coords(pls, QC_FRAMES[kind])


def _unframe(kind: str, framed: Triple) -> Triple:
    # every frame here is an involution
    perm = QC_FRAMES[kind]
    return tuple(framed[p] for p in perm)


def _rect_cells(pls: PartialLatinSquare, rect: Tuple[int, int, int, int]) -> List[Triple]:
    x1, x2, y1, y2 = rect
    label = pls.label_index
    return [(x, y, label[(x, y)]) for x, y in ((x1, y1), (x2, y1), (x1, y2), (x2, y2))]


def _violation(pls_framed: PartialLatinSquare, kind: str, r1, r2) -> QCViolation:
    cells = _rect_cells(pls_framed, r1) + _rect_cells(pls_framed, r2)
    return QCViolation(kind, tuple(_unframe(kind, c) for c in cells), (cells[3][2], cells[7][2]))


def check_quadrangle(pls: PartialLatinSquare, kind: str = "label") -> List[QCViolation]:
    """Every violation of the given quadrangle condition, in lexicographic order.

    Rectangles are grouped by their first three labels; two rectangles in one
    group with different fourth labels form a violation.
    """
    framed = _qc_frame(pls, kind)
    groups: Dict[Tuple[int, int, int], List[Tuple[Tuple[int, int, int, int], int]]] = {}
    for rect, (a, b, c, d) in iter_rectangles(framed):
        groups.setdefault((a, b, c), []).append((rect, d))
    pairs = []
    for members in groups.values():
        if len({d for _, d in members}) < 2:
            continue
        for (r1, d1), (r2, d2) in itertools.combinations(sorted(members), 2):
            if d1 != d2:
                pairs.append((r1, r2))
    pairs.sort()
    logger.debug("%s quadrangle check: %d violations", kind, len(pairs))
    return [_violation(framed, kind, r1, r2) for r1, r2 in pairs]


def check_quadrangle_brute(pls: PartialLatinSquare, kind: str = "label") -> List[QCViolation]:
    """Oracle: for each rectangle and each candidate first column, follow the lookups."""
    framed = _qc_frame(pls, kind)
    label, row_of, col_of = framed.label_index, framed.row_index, framed.col_index
    found = set()
    for rect, (a, b, c, d) in iter_rectangles(framed):
        for x1 in range(framed.dims[0]):
            y1 = row_of.get((x1, a))
            y2 = row_of.get((x1, c))
            if y1 is None or y2 is None:
                continue
            x2 = col_of.get((y1, b))
            if x2 is None:
                continue
            d2 = label.get((x2, y2))
            if d2 is not None and d2 != d:
                found.add(tuple(sorted((rect, (x1, x2, y1, y2)))))
    return [_violation(framed, kind, r1, r2) for r1, r2 in sorted(found)]


def verify_violation(pls: PartialLatinSquare, violation: QCViolation) -> bool:
    """Re-check a violation from its eight cells alone."""
    if len(violation.cells) != 8:
        return False
    perm = QC_FRAMES[violation.kind]
    cells = [tuple(c[p] for p in perm) for c in violation.cells]
    framed = _qc_frame(pls, violation.kind)
    if any(c not in framed for c in cells):
        return False
    for rect in (cells[:4], cells[4:]):
        c11, c21, c12, c22 = rect
        if not (c11[1] == c21[1] and c12[1] == c22[1] and c11[0] == c12[0] and c21[0] == c22[0]):
            return False
    first, second = cells[:4], cells[4:]
    if any(first[i][2] != second[i][2] for i in range(3)):
        return False
    return first[3][2] != second[3][2] and (first[3][2], second[3][2]) == tuple(violation.values)


def satisfies_quadrangle(pls: PartialLatinSquare) -> bool:
    return all(not check_quadrangle(pls, kind) for kind in QC_KINDS)


# Completion defect


def defect_histogram(pls: PartialLatinSquare, kind: str, r: int) -> Counter:
    """Number of (2r-1)-prefixes with each count of distinct completions."""
    framed = frame(pls, kind)
    ns = max(framed.dims[2], 1)
    histogram: Counter = Counter()
    if not _walk_key_base(ns, 2 * r):
        completions: Dict[Tuple[int, ...], set] = {}
        for cycle in iter_cycles(pls, kind, r):
            completions.setdefault(cycle.signature[:-1], set()).add(cycle.signature[-1])
        histogram.update(len(v) for v in completions.values())
        return histogram
    for z1 in range(framed.dims[2]):
        keys, last = closed_walk_signatures(pls, kind, r, z1)
        if keys.size == 0:
            continue
        pairs = np.unique(keys * ns + last)
        _, per_prefix = np.unique(pairs // ns, return_counts=True)
        histogram.update(per_prefix.tolist())
    return histogram


def completion_defect(pls: PartialLatinSquare, kind: str = "label", r: int = 2, verbose: bool = False):
    """Largest number of distinct last values completing a (2r-1)-prefix; 0 without cycles.

    With ``verbose`` the full histogram is returned alongside the maximum.
    """
    histogram = defect_histogram(pls, kind, r)
    value = max(histogram) if histogram else 0
    if verbose:
        return value, dict(sorted(histogram.items()))
    return value


# Groups


@dataclass(frozen=True)
class GroupTable:
    n: int
    table: Tuple[Tuple[int, ...], ...]
    identity: int

    def op(self, a: int, b: int) -> int:
        return self.table[a][b]

    def check(self) -> Dict[str, bool]:
        return check_group_table(self.table, self.identity)

    def is_group(self) -> bool:
        return all(self.check().values())

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "identity": self.identity, "table": [list(row) for row in self.table]}

    @classmethod
    def from_pls(cls, pls: PartialLatinSquare, identity: int) -> "GroupTable":
        arr = pls.label_matrix()
        return cls(pls.dims[0], tuple(tuple(int(v) for v in row) for row in arr), identity)


def check_group_table(table: Sequence[Sequence[int]], identity: Optional[int] = None) -> Dict[str, bool]:
    """Totality, associativity, identity law and inverses, each checked by brute force."""
    arr = np.asarray(table, dtype=np.int64)
    n = arr.shape[0] if arr.ndim == 2 else 0
    total = arr.ndim == 2 and arr.shape == (n, n) and bool(np.all((arr >= 0) & (arr < n)))
    if not total:
        return {"total": False, "associative": False, "identity": False, "inverses": False}
    left = arr[arr, :]  # left[x, y, z] = (xy)z
    right = arr[:, arr]  # right[x, y, z] = x(yz)
    associative = bool(np.array_equal(left, right))
    if identity is None:
        candidates = [e for e in range(n) if np.array_equal(arr[e], np.arange(n))]
        identity = candidates[0] if candidates else -1
    has_identity = 0 <= identity < n and bool(
        np.array_equal(arr[identity], np.arange(n)) and np.array_equal(arr[:, identity], np.arange(n))
    )
    inverses = has_identity and all(
        any(arr[a, b] == identity and arr[b, a] == identity for b in range(n)) for a in range(n)
    )
    return {"total": True, "associative": associative, "identity": has_identity, "inverses": bool(inverses)}


def brandt_reconstruct(pls: PartialLatinSquare, row: int = 0, column: int = 0) -> GroupTable:
    """Group on the labels of a full Latin square satisfying the quadrangle condition.

    With x_a the column where ``row`` carries a and y_b the row where
    ``column`` carries b, the product a*b is the label at (x_a, y_b) and the
    label at (column, row) is the identity.
    """
    if not pls.is_full():
        raise InputError("group reconstruction needs a full Latin square")
    n = pls.dims[0]
    if not (0 <= row < n and 0 <= column < n):
        raise InputError(f"row {row} / column {column} out of range for order {n}")
    violations = check_quadrangle(pls, "label")
    if violations:
        raise QuadrangleFailure("Latin square fails the label quadrangle condition", violations[0])
    label, row_of, col_of = pls.label_index, pls.row_index, pls.col_index
    x_of = [col_of[(row, a)] for a in range(n)]
    y_of = [row_of[(column, b)] for b in range(n)]
    table = tuple(tuple(label[(x_of[a], y_of[b])] for b in range(n)) for a in range(n))
    group = GroupTable(n, table, label[(column, row)])
    checks = group.check()
    if not all(checks.values()):
        raise VerificationFailure(f"reconstructed table is not a group: {checks}")
    return group


def element_order(group: GroupTable, a: int) -> int:
    k, x = 1, a
    while x != group.identity:
        x = group.op(x, a)
        k += 1
    return k


def _generators(group: GroupTable) -> List[int]:
    gens: List[int] = []
    span = {group.identity}
    for a in range(group.n):
        if a in span:
            continue
        gens.append(a)
        frontier = deque(span)
        seen = set(span)
        frontier.append(a)
        seen.add(a)
        while frontier:
            u = frontier.popleft()
            for g in gens:
                v = group.op(u, g)
                if v not in seen:
                    seen.add(v)
                    frontier.append(v)
        span = seen
    return gens


def are_isomorphic(g: GroupTable, h: GroupTable) -> bool:
    """Brute-force isomorphism test by trying images of a generating set."""
    if g.n != h.n:
        return False
    if g.n > 8:
        raise InputError("isomorphism search is limited to order 8")
    if sorted(element_order(g, a) for a in range(g.n)) != sorted(element_order(h, a) for a in range(h.n)):
        return False
    gens = _generators(g)
    options = [[b for b in range(h.n) if element_order(h, b) == element_order(g, a)] for a in gens]
    for images in itertools.product(*options):
        phi = {g.identity: h.identity}
        queue = deque([g.identity])
        consistent = True
        while queue and consistent:
            u = queue.popleft()
            for s, t in zip(gens, images):
                v, w = g.op(u, s), h.op(phi[u], t)
                if v in phi:
                    if phi[v] != w:
                        consistent = False
                        break
                else:
                    phi[v] = w
                    queue.append(v)
        if not consistent or len(phi) != g.n or len(set(phi.values())) != h.n:
            continue
        if all(phi[g.op(a, b)] == h.op(phi[a], phi[b]) for a in range(g.n) for b in range(g.n)):
            return True
    return False
