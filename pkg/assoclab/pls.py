"""Partial Latin squares, partial binary operations and instance generators.

A partial Latin square is stored as a set of (x, y, z) triples: x is the
column, y the row and z the label of a filled cell. Coordinates are dense
0-based integers; display names live in an optional sidecar.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import InputError

logger = logging.getLogger(__name__)

Triple = Tuple[int, int, int]
Dims = Tuple[int, int, int]

COLUMN, ROW, LABEL = 0, 1, 2
COORD_NAMES = {"column": COLUMN, "row": ROW, "label": LABEL, "x": COLUMN, "y": ROW, "z": LABEL}
CLASS_LETTERS = ("x", "y", "z")

# Pairs of coordinates that must determine the third.
_LINEARITY_KINDS = (
    ("same-xy", (0, 1)),
    ("same-xz", (0, 2)),
    ("same-yz", (1, 2)),
)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a linearity check."""

    violations: Tuple[Tuple[str, Triple, Triple], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "violations": [
                {"kind": kind, "witness": [list(a), list(b)]} for kind, a, b in self.violations
            ],
        }


def _check_ranges(triples: Iterable[Sequence[int]], dims: Sequence[int]) -> List[Triple]:
    if len(dims) != 3 or any(int(d) < 0 for d in dims):
        raise InputError(f"dims must be three natural numbers, got {list(dims)}")
    checked = []
    for t in triples:
        if len(t) != 3:
            raise InputError(f"triple {list(t)} does not have three coordinates")
        triple = (int(t[0]), int(t[1]), int(t[2]))
        for coord, bound in zip(triple, dims):
            if not 0 <= coord < bound:
                raise InputError(f"triple {list(triple)} is out of range for dims {list(dims)}")
        checked.append(triple)
    return checked


def validate(candidate_triples: Iterable[Sequence[int]], dims: Sequence[int]) -> ValidationReport:
    """List every pair of distinct triples that agree in two coordinates."""
    triples = sorted(set(_check_ranges(candidate_triples, dims)))
    violations = []
    for kind, (i, j) in _LINEARITY_KINDS:
        groups: Dict[Tuple[int, int], List[Triple]] = {}
        for t in triples:
            groups.setdefault((t[i], t[j]), []).append(t)
        for members in groups.values():
            for a, b in itertools.combinations(members, 2):
                violations.append((kind, a, b))
    violations.sort(key=lambda v: (v[1], v[2], v[0]))
    return ValidationReport(tuple(violations))


def validate_pairwise(candidate_triples: Iterable[Sequence[int]], dims: Sequence[int]) -> ValidationReport:
    """All-pairs version of :func:`validate`, kept as an oracle."""
    triples = sorted(set(_check_ranges(candidate_triples, dims)))
    violations = []
    for a, b in itertools.combinations(triples, 2):
        for kind, (i, j) in _LINEARITY_KINDS:
            if a[i] == b[i] and a[j] == b[j]:
                violations.append((kind, a, b))
    violations.sort(key=lambda v: (v[1], v[2], v[0]))
    return ValidationReport(tuple(violations))


@dataclass(frozen=True)
class PartialLatinSquare:
    """An immutable linear tripartite triple system."""

    dims: Dims
    triples: Tuple[Triple, ...]
    names: Optional[Dict[str, List[str]]] = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        triples = tuple(sorted(set(_check_ranges(self.triples, dims))))
        report = validate(triples, dims)
        if not report.ok:
            kind, a, b = report.violations[0]
            raise InputError(f"not a partial Latin square: {list(a)} and {list(b)} ({kind})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "triples", triples)

    @classmethod
    def from_triples(
        cls,
        triples: Iterable[Sequence[int]],
        dims: Optional[Sequence[int]] = None,
        names: Optional[Dict[str, List[str]]] = None,
    ) -> "PartialLatinSquare":
        triples = [tuple(int(c) for c in t) for t in triples]
        if dims is None:
            dims = tuple(max((t[i] for t in triples), default=-1) + 1 for i in range(3))
        return cls(tuple(dims), tuple(triples), names)

    def __len__(self) -> int:
        return len(self.triples)

    def __contains__(self, triple: object) -> bool:
        if not isinstance(triple, tuple) or len(triple) != 3:
            return False
        return self.label_index.get((triple[0], triple[1])) == triple[2]

    @property
    def n(self) -> int:
        """Ambient size used for popularity thresholds."""
        return max(self.dims) if self.dims else 0

    @cached_property
    def label_index(self) -> Dict[Tuple[int, int], int]:
        """(x, y) -> z."""
        return {(x, y): z for x, y, z in self.triples}

    @cached_property
    def row_index(self) -> Dict[Tuple[int, int], int]:
        """(x, z) -> y."""
        return {(x, z): y for x, y, z in self.triples}

    @cached_property
    def col_index(self) -> Dict[Tuple[int, int], int]:
        """(y, z) -> x."""
        return {(y, z): x for x, y, z in self.triples}

    def label(self, x: int, y: int) -> Optional[int]:
        return self.label_index.get((x, y))

    def cells(self) -> List[Tuple[int, int]]:
        return [(x, y) for x, y, _ in self.triples]

    def label_matrix(self) -> np.ndarray:
        """n_x by n_y array of labels with -1 for empty cells."""
        table = np.full((self.dims[0], self.dims[1]), -1, dtype=np.int64)
        for x, y, z in self.triples:
            table[x, y] = z
        return table

    def adjacency(self) -> np.ndarray:
        """0/1 cell matrix between columns and rows."""
        return (self.label_matrix() >= 0).astype(np.int64)

    def density(self) -> float:
        area = self.dims[0] * self.dims[1]
        return len(self.triples) / area if area else 0.0

    def is_full(self) -> bool:
        """True when every cell is filled, i.e. the table of a quasigroup."""
        nx_, ny_, nz_ = self.dims
        return nx_ == ny_ == nz_ and len(self.triples) == nx_ * ny_

    def restrict(self, cells: Iterable[Tuple[int, int]]) -> "PartialLatinSquare":
        """Sub-square keeping only the given (x, y) cells."""
        keep = set(cells)
        kept = [t for t in self.triples if (t[0], t[1]) in keep]
        return PartialLatinSquare(self.dims, tuple(kept), self.names)

    def without(self, triples: Iterable[Triple]) -> "PartialLatinSquare":
        drop = set(triples)
        return PartialLatinSquare(self.dims, tuple(t for t in self.triples if t not in drop), self.names)

    def name_of(self, cls: int, idx: int) -> str:
        letter = CLASS_LETTERS[cls]
        if self.names and letter in self.names and idx < len(self.names[letter]):
            return self.names[letter][idx]
        return f"{letter}{idx}"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "dims": list(self.dims),
            "triples": [list(t) for t in self.triples],
        }
        if self.names:
            data["names"] = {k: list(v) for k, v in sorted(self.names.items())}
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PartialLatinSquare":
        if "triples" not in data:
            raise InputError("instance has no 'triples' entry")
        names = data.get("names")
        if names is not None:
            names = {k: [str(s) for s in v] for k, v in names.items()}
        return cls.from_triples(data["triples"], data.get("dims"), names)


@dataclass(frozen=True)
class PartialBinaryOp:
    """A partially defined operation on [n], injective in each variable."""

    n: int
    table: Dict[Tuple[int, int], int] = field(hash=False)

    def __post_init__(self):
        report = self.validate()
        if not report.ok:
            kind, a, b = report.violations[0]
            raise InputError(f"operation is not injective: {list(a)} and {list(b)} ({kind})")

    @property
    def defined_set(self) -> frozenset:
        return frozenset(self.table)

    def __call__(self, x: int, y: int) -> Optional[int]:
        return self.table.get((x, y))

    def triples(self) -> List[Triple]:
        return sorted((x, y, z) for (x, y), z in self.table.items())

    def validate(self) -> ValidationReport:
        return validate(self.triples(), (self.n, self.n, self.n))

    def as_array(self) -> np.ndarray:
        """n by n table with -1 where undefined."""
        out = np.full((self.n, self.n), -1, dtype=np.int64)
        for (x, y), z in self.table.items():
            out[x, y] = z
        return out

    @classmethod
    def from_array(cls, table: Sequence[Sequence[int]]) -> "PartialBinaryOp":
        arr = np.asarray(table, dtype=np.int64)
        n = arr.shape[0]
        entries = {(int(x), int(y)): int(arr[x, y]) for x in range(n) for y in range(n) if arr[x, y] >= 0}
        return cls(n, entries)


def from_binary_op(op: PartialBinaryOp) -> PartialLatinSquare:
    """Multiplication table of ``op`` as a partial Latin square."""
    return PartialLatinSquare((op.n, op.n, op.n), tuple(op.triples()))


def to_binary_op(pls: PartialLatinSquare) -> PartialBinaryOp:
    """Read a partial Latin square back as an operation on [max(dims)]."""
    return PartialBinaryOp(pls.n, dict(pls.label_index))


def permute_coords(pls: PartialLatinSquare, perm: Sequence[int]) -> PartialLatinSquare:
    """Reorder the (column, row, label) coordinates: new coordinate i is old ``perm[i]``."""
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != [0, 1, 2]:
        raise InputError(f"{list(perm)} is not a permutation of the three coordinates")
    dims = tuple(pls.dims[p] for p in perm)
    triples = tuple(tuple(t[p] for p in perm) for t in pls.triples)
    names = None
    if pls.names:
        names = {}
        for i, p in enumerate(perm):
            if CLASS_LETTERS[p] in pls.names:
                names[CLASS_LETTERS[i]] = pls.names[CLASS_LETTERS[p]]
    return PartialLatinSquare(dims, triples, names)


def swap(a: str, b: str) -> Tuple[int, int, int]:
    """Permutation exchanging two named coordinates, e.g. ``swap("row", "label")``."""
    perm = [0, 1, 2]
    i, j = COORD_NAMES[a], COORD_NAMES[b]
    perm[i], perm[j] = perm[j], perm[i]
    return tuple(perm)


ALL_PERMUTATIONS = tuple(itertools.permutations(range(3)))


# Generators


def cyclic(n: int) -> PartialLatinSquare:
    if n < 1:
        raise InputError(f"cyclic group order must be positive, got {n}")
    return PartialLatinSquare((n, n, n), tuple((x, y, (x + y) % n) for x in range(n) for y in range(n)))


def direct_product(orders: Sequence[int]) -> PartialLatinSquare:
    """Table of Z/n1 x Z/n2 x ... with mixed-radix element indices."""
    orders = [int(o) for o in orders]
    if not orders or any(o < 1 for o in orders):
        raise InputError(f"product orders must be positive, got {orders}")
    elements = list(itertools.product(*(range(o) for o in orders)))
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    triples = []
    for a, ea in enumerate(elements):
        for b, eb in enumerate(elements):
            c = tuple((u + v) % o for u, v, o in zip(ea, eb, orders))
            triples.append((a, b, index[c]))
    return PartialLatinSquare((n, n, n), tuple(triples))


def relabel(pls: PartialLatinSquare, perms: Dict[str, Sequence[int]]) -> PartialLatinSquare:
    """Apply permutations to the column ("x"), row ("y") and label ("z") classes."""
    maps = []
    for cls, letter in enumerate(CLASS_LETTERS):
        perm = list(perms.get(letter, range(pls.dims[cls])))
        if sorted(perm) != list(range(pls.dims[cls])):
            raise InputError(f"relabelling for class {letter} is not a permutation of {pls.dims[cls]} items")
        maps.append(perm)
    triples = tuple((maps[0][x], maps[1][y], maps[2][z]) for x, y, z in pls.triples)
    return PartialLatinSquare(pls.dims, triples)


def scramble(pls: PartialLatinSquare, seed: int) -> PartialLatinSquare:
    """Relabel all three classes by seeded random permutations."""
    rng = np.random.default_rng(seed)
    perms = {letter: rng.permutation(pls.dims[i]).tolist() for i, letter in enumerate(CLASS_LETTERS)}
    return relabel(pls, perms)


def restrict_random(pls: PartialLatinSquare, p: float, seed: int) -> PartialLatinSquare:
    """Keep each triple independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise InputError(f"restriction probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    keep = rng.random(len(pls.triples)) < p
    return PartialLatinSquare(pls.dims, tuple(t for t, k in zip(pls.triples, keep) if k), pls.names)


def random_quasigroup(n: int, seed: int) -> PartialLatinSquare:
    """Seeded random Latin square of order ``n`` (not uniform over quasigroups).

    Rows are completed one at a time; inside a row the cells are filled by
    backtracking over shuffled candidate labels. A Latin rectangle always
    extends, so a row never needs to be undone once complete.
    """
    if n < 1:
        raise InputError(f"quasigroup order must be positive, got {n}")
    rng = np.random.default_rng(seed)
    column_used = [set() for _ in range(n)]
    triples: List[Triple] = []
    for y in range(n):
        row = [-1] * n
        used: set = set()
        candidates = [rng.permutation(n).tolist() for _ in range(n)]

        def fill(x: int) -> bool:
            if x == n:
                return True
            for z in candidates[x]:
                if z in used or z in column_used[x]:
                    continue
                row[x] = z
                used.add(z)
                if fill(x + 1):
                    return True
                used.discard(z)
            row[x] = -1
            return False

        if not fill(0):
            raise RuntimeError(f"row {y} of a Latin rectangle could not be completed")
        for x, z in enumerate(row):
            column_used[x].add(z)
            triples.append((x, y, z))
    return PartialLatinSquare((n, n, n), tuple(triples))


GENERATOR_KINDS = ("cyclic", "product", "relabel", "restrict", "quasigroup", "scramble")


def generate(spec: Dict[str, Any]) -> PartialLatinSquare:
    """Build an instance from a generator spec dictionary."""
    kind = spec.get("kind")
    logger.debug("generating instance from %s", spec)
    if kind == "cyclic":
        return cyclic(int(spec["n"]))
    if kind == "product":
        return direct_product(spec["orders"])
    if kind == "quasigroup":
        return random_quasigroup(int(spec["n"]), int(spec.get("seed", 0)))
    if kind == "relabel":
        return relabel(generate(spec["base"]), spec.get("perms", {}))
    if kind == "scramble":
        return scramble(generate(spec["base"]), int(spec.get("seed", 0)))
    if kind == "restrict":
        return restrict_random(generate(spec["base"]), float(spec["p"]), int(spec.get("seed", 0)))
    raise InputError(f"unknown generator kind: {kind!r} (expected one of {', '.join(GENERATOR_KINDS)})")


def parse_generator_spec(text: str) -> Dict[str, Any]:
    """Parse the CLI form of a generator spec.

    Accepted forms: ``cyclic:N``, ``product:N1,N2``, ``quasigroup:N:SEED``,
    ``scramble:SEED:<inner>`` and ``restrict:P:SEED:<inner>``.
    """
    head, _, rest = text.strip().partition(":")
    try:
        if head == "cyclic":
            return {"kind": "cyclic", "n": int(rest)}
        if head == "product":
            return {"kind": "product", "orders": [int(o) for o in rest.split(",")]}
        if head == "quasigroup":
            n, _, seed = rest.partition(":")
            return {"kind": "quasigroup", "n": int(n), "seed": int(seed or 0)}
        if head == "scramble":
            seed, _, inner = rest.partition(":")
            return {"kind": "scramble", "seed": int(seed), "base": parse_generator_spec(inner)}
        if head == "restrict":
            p, _, rest2 = rest.partition(":")
            seed, _, inner = rest2.partition(":")
            return {"kind": "restrict", "p": float(p), "seed": int(seed), "base": parse_generator_spec(inner)}
    except ValueError as e:
        raise InputError(f"malformed generator spec {text!r}: {e}")
    raise InputError(f"unknown generator kind in {text!r}")


def fig1_instance() -> PartialLatinSquare:
    """Two rectangles sharing labels a, b, c with different fourth labels d and d2."""
    a, b, c, d, d2 = range(5)
    triples = (
        (0, 0, a), (1, 0, b), (0, 1, c), (1, 1, d),
        (2, 2, a), (3, 2, b), (2, 3, c), (3, 3, d2),
    )
    names = {
        "x": ["x1", "x2", "x3", "x4"],
        "y": ["y1", "y2", "y3", "y4"],
        "z": ["a", "b", "c", "d", "d2"],
    }
    return PartialLatinSquare((4, 4, 5), triples, names)
