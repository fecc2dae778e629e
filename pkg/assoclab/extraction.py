"""Dense-subset extraction: dependent random selection, pruning and the quadrangle-clean pipeline.

Each stage takes a partial Latin square, returns a sub-square and appends a
:class:`StageRecord` to an :class:`ExtractionTrace`. Densities are reported,
never asserted; the quadrangle condition of the final output is.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from .counting import count_octahedra, iter_cycles, octahedron_density, rectangle_label_histogram
from .decomposition import count_ring_decompositions
from .exceptions import InputError, ResourceExhausted, VerificationFailure
from .pls import CLASS_LETTERS, PartialLatinSquare, permute_coords
from .quadrangle import QC_FRAMES, QC_KINDS, check_quadrangle, completion_defect
from .vankampen import PROVEN, build_presentation, slit_scan, vk_distance

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

# class index -> quadrangle kind whose frame moves that class into the label slot
_CLASS_KIND = {2: "label", 0: "column", 1: "row"}


@dataclass
class StageRecord:
    name: str
    cells: List[Cell]
    density: float
    octahedron_density: float
    theta: Optional[float] = None
    gamma: Optional[float] = None
    defect: Optional[int] = None
    seed: Optional[int] = None
    notes: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "cells": [list(c) for c in self.cells],
            "density": self.density,
            "octahedron_density": self.octahedron_density,
            "theta": self.theta,
            "gamma": self.gamma,
            "defect": self.defect,
            "seed": self.seed,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StageRecord":
        return cls(
            name=data["name"],
            cells=[tuple(c) for c in data.get("cells", [])],
            density=float(data.get("density", 0.0)),
            octahedron_density=float(data.get("octahedron_density", 0.0)),
            theta=data.get("theta"),
            gamma=data.get("gamma"),
            defect=data.get("defect"),
            seed=data.get("seed"),
            notes=dict(data.get("notes", {})),
        )


@dataclass
class ExtractionTrace:
    stages: List[StageRecord] = field(default_factory=list)
    verified: bool = False

    def add(self, record: StageRecord) -> None:
        self.stages.append(record)

    def extend(self, other: "ExtractionTrace") -> None:
        self.stages.extend(other.stages)

    def is_nested(self) -> bool:
        return all(set(b.cells) <= set(a.cells) for a, b in zip(self.stages, self.stages[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {"stages": [s.to_dict() for s in self.stages], "verified": self.verified}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExtractionTrace":
        return cls([StageRecord.from_dict(s) for s in data.get("stages", [])], bool(data.get("verified", False)))


def stage_record(name: str, pls: PartialLatinSquare, seed: Optional[int] = None, **kwargs: Any) -> StageRecord:
    """Measure a stage output: density, octahedron density and the 4-cycle defect."""
    return StageRecord(
        name=name,
        cells=pls.cells(),
        density=pls.density(),
        octahedron_density=float(octahedron_density(pls)),
        defect=completion_defect(pls, "label", 2) if len(pls) else 0,
        seed=seed,
        **kwargs,
    )


def _order(count: int, seed: int, randomize: bool) -> List[int]:
    """Candidate order for greedy choices: index order, or a seeded shuffle."""
    if not randomize:
        return list(range(count))
    return np.random.default_rng(seed).permutation(count).tolist()


def _argmax(scores: Sequence[float], seed: int, randomize: bool) -> int:
    best = None
    for i in _order(len(scores), seed, randomize):
        if best is None or scores[i] > scores[best]:
            best = i
    return best


# Dependent random selection on cells


def cell_graph(pls: PartialLatinSquare, eps: float) -> Tuple[List[Cell], List[int]]:
    """Cells and their neighbourhood bitsets in the popular-rectangle graph.

    Two cells are adjacent when the rectangle with them as opposite corners
    lies in ``pls`` and its labelling occurs at least (eps/2) n times.
    """
    cells = pls.cells()
    label = pls.label_index
    histogram = rectangle_label_histogram(pls)
    threshold = eps / 2 * pls.n
    masks = [0] * len(cells)
    for i, (x1, y1) in enumerate(cells):
        for j, (x2, y2) in enumerate(cells):
            b, c = label.get((x2, y1)), label.get((x1, y2))
            if b is None or c is None:
                continue
            if histogram[(label[(x1, y1)], b, c, label[(x2, y2)])] >= threshold:
                masks[i] |= 1 << j
    return cells, masks


def _bits(mask: int) -> List[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def drs_cell_neighborhood(
    pls: PartialLatinSquare,
    eps: float,
    delta: float,
    k: int = 2,
    seed: int = 0,
    randomize: bool = False,
) -> Tuple[PartialLatinSquare, ExtractionTrace]:
    """Pick the neighbourhood N(v) maximizing |N(v)|/n^2 - eps/2 - eps Z / (2 k eta).

    Z sums, over 2 <= r <= k, the bad 2r-cycles inside N(v) scaled by n^-2r; a
    cycle is bad when its corners have fewer than eta n^2 common neighbours,
    with eta = delta eps^(4k). When every objective value is negative the best
    one is still returned and the trace says so.
    """
    if not (0 < eps < 1 and 0 < delta < 1):
        raise InputError(f"eps and delta must lie in (0, 1), got {eps}, {delta}")
    if k < 2:
        raise InputError(f"k must be at least 2, got {k}")
    trace = ExtractionTrace()
    n = pls.n
    if count_octahedra(pls) == 0:
        empty = PartialLatinSquare(pls.dims, ())
        trace.add(stage_record("drs-cells", empty, seed, notes={"reason": "no octahedra"}))
        return empty, trace

    eta = delta * eps ** (4 * k)
    cells, masks = cell_graph(pls, eps)
    index = {c: i for i, c in enumerate(cells)}
    bad_cache: Dict[Tuple[int, ...], bool] = {}

    def is_bad(corners: Tuple[int, ...]) -> bool:
        key = tuple(sorted(set(corners)))
        if key not in bad_cache:
            common = -1
            for i in key:
                common &= masks[i]
            bad_cache[key] = bin(common).count("1") < eta * n * n
        return bad_cache[key]

    scores, stats = [], []
    for v in range(len(cells)):
        neighbourhood = pls.restrict(cells[i] for i in _bits(masks[v]))
        z, per_r = 0.0, {}
        for r in range(2, k + 1):
            total = bad = 0
            for cycle in iter_cycles(neighbourhood, "label", r):
                total += 1
                if is_bad(tuple(index[(t[0], t[1])] for t in cycle.cells)):
                    bad += 1
            z += bad / n ** (2 * r)
            per_r[r] = (bad, total)
        size = len(neighbourhood)
        scores.append(size / n ** 2 - eps / 2 - eps * z / (2 * k * eta))
        stats.append(per_r)

    best = _argmax(scores, seed, randomize)
    subset = pls.restrict(cells[i] for i in _bits(masks[best]))
    notes = {
        "centre": list(cells[best]),
        "objective": scores[best],
        "objective_negative": scores[best] < 0,
        "eta": eta,
        "bad_cycles": {str(r): {"bad": b, "total": t, "proportion": (b / t if t else 0.0)} for r, (b, t) in stats[best].items()},
    }
    logger.info("cell selection kept %d of %d cells (objective %.4g)", len(subset), len(pls), scores[best])
    trace.add(stage_record("drs-cells", subset, seed, theta=eps / 2, notes=notes))
    return subset, trace


# Dependent random selection on bipartite graphs


@dataclass
class BipartiteSelection:
    left: List[Any]
    right: List[Any]
    stats: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {"left": list(self.left), "right": list(self.right), "stats": self.stats}


def bipartite_from_pls(pls: PartialLatinSquare) -> nx.Graph:
    """Columns against rows, one edge per filled cell."""
    graph = nx.Graph()
    graph.add_nodes_from((("x", i) for i in range(pls.dims[0])), bipartite=0)
    graph.add_nodes_from((("y", j) for j in range(pls.dims[1])), bipartite=1)
    graph.add_edges_from((("x", x), ("y", y)) for x, y in pls.cells())
    return graph


def _sides(graph: nx.Graph) -> Tuple[List[Any], List[Any]]:
    left = sorted(v for v, side in graph.nodes(data="bipartite") if side == 0)
    right = sorted(v for v, side in graph.nodes(data="bipartite") if side == 1)
    return left, right


def connector_count(graph: nx.Graph, xs: Sequence[Any], ys: Sequence[Any]) -> int:
    """Tuples (u_1..u_r, v_1..v_r) with u_i v_j, x_i u_i and y_i v_i all edges."""
    options = [list(graph[x]) for x in xs]
    total = 0
    for us in itertools.product(*options):
        shared = set(graph[us[0]])
        for u in us[1:]:
            shared &= set(graph[u])
        product = 1
        for y in ys:
            product *= len(shared & set(graph[y]))
            if not product:
                break
        total += product
    return total


def drs_bipartite(graph: nx.Graph, k: int = 2, seed: int = 0, samples: int = 16, randomize: bool = False) -> BipartiteSelection:
    """Min-degree discard, neighbourhood selection, bad-tuple filter and degree filter.

    Nodes carry the networkx ``bipartite`` attribute (0 for X, 1 for Y).
    """
    if k < 1:
        raise InputError(f"k must be positive, got {k}")
    left, right = _sides(graph)
    n = max(len(left), len(right), 1)
    edges = sum(1 for x in left for _ in graph[x])
    delta = edges / (len(left) * len(right)) if left and right else 0.0
    stats: Dict[str, Any] = {"delta": delta, "n": n}
    if edges == 0:
        stats["reason"] = "no edges"
        return BipartiteSelection([], [], stats)

    x1 = [x for x in left if graph.degree(x) >= delta * len(right) / 2]
    stats["X1"] = len(x1)
    if not x1:
        stats["reason"] = "no vertex survives the minimum-degree discard"
        return BipartiteSelection([], [], stats)

    c1, c2 = delta ** (2 * k), delta ** (5 * k)
    neighbours = {v: set(graph[v]) for v in graph.nodes}

    def common(tup: Sequence[Any]) -> int:
        shared = set(neighbours[tup[0]])
        for v in tup[1:]:
            shared &= neighbours[v]
        return len(shared)

    x1_set = set(x1)
    scores = []
    for y in right:
        gamma = sorted(x for x in neighbours[y] if x in x1_set)
        bad = sum(1 for tup in itertools.product(gamma, repeat=k + 1) if common(tup) < c2 * n)
        scores.append(c1 * len(gamma) ** (k + 1) - c1 * (delta ** 2 / 8) ** (k + 1) * n ** (k + 1) - bad)
    y = right[_argmax(scores, seed, randomize)]
    x2 = sorted(x for x in neighbours[y] if x in x1_set)
    stats.update({"pivot": repr(y), "X2": len(x2)})

    x3 = []
    for x in x2:
        tuples = list(itertools.product(x2, repeat=k))
        good = sum(1 for rest in tuples if common((x,) + rest) >= c2 * n)
        if tuples and good >= (1 - 2 * c1) * len(tuples):
            x3.append(x)
    x3_set = set(x3)
    y1 = [v for v in right if len(neighbours[v] & x3_set) >= delta * len(x3) / 4]
    stats.update({"X3": len(x3), "Y1": len(y1)})
    if x3 and y1:
        kept = sum(1 for x in x3 for v in y1 if v in neighbours[x])
        stats["density"] = kept / (len(x3) * len(y1))
    else:
        stats["density"] = 0.0

    rng = np.random.default_rng(seed)
    minimum = None
    checked = []
    if x3 and y1:
        for _ in range(samples):
            r = int(rng.integers(2, k + 1)) if k >= 2 else 1
            xs = [x3[i] for i in rng.integers(0, len(x3), r)]
            ys = [y1[i] for i in rng.integers(0, len(y1), r)]
            count = connector_count(graph, xs, ys)
            checked.append({"xs": [repr(x) for x in xs], "ys": [repr(v) for v in ys], "connectors": count})
            minimum = count if minimum is None else min(minimum, count)
    stats["min_connectors"] = minimum
    stats["samples"] = checked
    logger.info("bipartite selection: |X'|=%d, |Y'|=%d", len(x3), len(y1))
    return BipartiteSelection(x3, y1, stats)


# Indecomposable cycles


def prune_indecomposable(
    pls: PartialLatinSquare,
    k: int = 2,
    gamma: float = 0.0,
    theta: float = 0.0,
    budget: Optional[int] = None,
    seed: int = 0,
    randomize: bool = False,
) -> Tuple[PartialLatinSquare, ExtractionTrace]:
    """Remove maximal disjoint families of cycles with fewer than gamma n^2r good ring decompositions.

    Repeats until a full scan finds no indecomposable cycle; the final scan
    is the postcondition check. A budget overrun stops early with the
    current subset and ``verified`` false.
    """
    if k < 2:
        raise InputError(f"k must be at least 2, got {k}")
    trace = ExtractionTrace()
    current = pls
    n = pls.n
    rounds, removed = 0, 0
    verified = True
    try:
        while True:
            found: List[Tuple[Cell, ...]] = []
            for r in range(2, k + 1):
                floor = gamma * n ** (2 * r)
                if floor <= 0:
                    continue
                used: Set[Cell] = set()
                cycles = list(iter_cycles(current, "label", r))
                for i in _order(len(cycles), seed + rounds, randomize):
                    cycle = cycles[i]
                    cells = {(t[0], t[1]) for t in cycle.cells}
                    if cells & used:
                        continue
                    if count_ring_decompositions(current, cycle, theta, budget) < floor:
                        used |= cells
                        found.append(tuple(sorted(cells)))
            if not found:
                break
            drop = {c for cells in found for c in cells}
            removed += len(drop)
            current = current.restrict(c for c in current.cells() if c not in drop)
            rounds += 1
            logger.debug("pruning round %d removed %d cycles", rounds, len(found))
    except ResourceExhausted as e:
        logger.warning("pruning stopped early: %s", e)
        verified = False
    trace.add(
        stage_record(
            "prune-indecomposable", current, seed, theta=theta, gamma=gamma,
            notes={"rounds": rounds, "removed_cells": removed, "verified": verified},
        )
    )
    trace.verified = verified
    return current, trace


# Auxiliary graphs and independent sets


def auxiliary_graph(
    pls: PartialLatinSquare,
    cls: int,
    b: int,
    max_states: int = 2000,
) -> nx.Graph:
    """Generators of one class, joined when a boundary-length-2 disc of area < b bounds them.

    Slit octahedra (area 8) come from the exact scan when b > 8. Every other
    pair also goes through the bounded word search with area budget b - 1,
    so discs that are not slits are caught at any b. A search stopped by
    ``max_states`` adds no edge.
    """
    framed = permute_coords(pls, QC_FRAMES[_CLASS_KIND[cls]])
    graph = nx.Graph()
    present = sorted({t[cls] for t in pls.triples})
    graph.add_nodes_from(present)
    if b > 8:
        for witness in slit_scan(framed):
            graph.add_edge(*witness.labels, area=8, witness=[list(t) for t in witness.triples])
    pres = build_presentation(pls)
    for i, j in itertools.combinations(present, 2):
        if graph.has_edge(i, j):
            continue
        result = vk_distance(pres, ((cls, i, 1),), ((cls, j, 1),), b - 1, max_states=max_states)
        if result.status == PROVEN:
            graph.add_edge(i, j, area=result.area, witness=[list(map(list, w)) for w in result.certificate])
    return graph


def greedy_independent_set(graph: nx.Graph, weight: Dict[Any, int], seed: int = 0, randomize: bool = False) -> Set[Any]:
    """Maximal independent set, taking vertices in the most faces first."""
    nodes = sorted(graph.nodes)
    tiebreak = {v: i for i, v in zip(_order(len(nodes), seed, randomize), nodes)}
    chosen: Set[Any] = set()
    blocked: Set[Any] = set()
    for v in sorted(nodes, key=lambda v: (-weight.get(v, 0), tiebreak[v])):
        if v in blocked:
            continue
        chosen.add(v)
        blocked.add(v)
        blocked.update(graph.neighbors(v))
    return chosen


def independent_prune(
    pls: PartialLatinSquare,
    b: int = 9,
    seed: int = 0,
    randomize: bool = False,
    max_states: int = 2000,
) -> Tuple[PartialLatinSquare, ExtractionTrace]:
    """Keep an independent set of each class of the auxiliary graph, labels first."""
    if b < 2:
        raise InputError(f"area bound must be at least 2, got {b}")
    trace = ExtractionTrace()
    current = pls
    notes: Dict[str, Any] = {}
    for cls in (2, 0, 1):
        graph = auxiliary_graph(current, cls, b, max_states)
        weight: Dict[int, int] = {}
        for t in current.triples:
            weight[t[cls]] = weight.get(t[cls], 0) + 1
        keep = greedy_independent_set(graph, weight, seed, randomize)
        dropped = sorted(set(graph.nodes) - keep)
        notes[CLASS_LETTERS[cls]] = {"edges": graph.number_of_edges(), "dropped": dropped}
        if dropped:
            current = current.restrict((t[0], t[1]) for t in current.triples if t[cls] in keep)
    logger.info("independent pruning kept %d of %d cells", len(current), len(pls))
    trace.add(stage_record("independent-prune", current, seed, notes=dict(notes, area_bound=b)))
    return current, trace


# Pipeline


def qc_extract(
    pls: PartialLatinSquare,
    seed: int = 0,
    k: int = 2,
    eps: Optional[float] = None,
    delta: float = 0.01,
    gamma: float = 0.0,
    theta: float = 0.0,
    b: int = 9,
    stages: Sequence[str] = ("drs", "prune", "independent"),
    budget: Optional[int] = None,
    randomize: bool = False,
) -> Tuple[PartialLatinSquare, ExtractionTrace]:
    """Compose the stages into a subset satisfying all three quadrangle conditions.

    ``eps`` defaults to the measured octahedron density, clipped into (0, 1).
    The independent-set stage always runs last, with an area bound of at
    least 9, since it is what removes slit octahedra. The output is
    re-checked for every quadrangle kind before it is returned.
    """
    unknown = set(stages) - {"drs", "prune", "independent"}
    if unknown:
        raise InputError(f"unknown extraction stages: {sorted(unknown)}")
    trace = ExtractionTrace()
    trace.add(stage_record("input", pls, seed))
    current = pls
    if "drs" in stages and len(current):
        measured = float(octahedron_density(current))
        e = eps if eps is not None else min(max(measured, 1e-9), 0.999)
        current, part = drs_cell_neighborhood(current, e, delta, k, seed, randomize)
        trace.extend(part)
    if "prune" in stages and len(current):
        current, part = prune_indecomposable(current, k, gamma, theta, budget, seed, randomize)
        trace.extend(part)
    current, part = independent_prune(current, max(b, 9), seed, randomize)
    trace.extend(part)

    failing = [kind for kind in QC_KINDS if check_quadrangle(current, kind)]
    if failing:
        raise VerificationFailure(f"extracted subset fails the {', '.join(failing)} quadrangle condition")
    trace.verified = True
    if not len(current) and len(pls):
        trace.stages[-1].notes["empty"] = True
    return current, trace
