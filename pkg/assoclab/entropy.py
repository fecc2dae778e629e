"""Separated sets, nets and the entropy lemmas on finite metric spaces and metric groups.

A set is eps-separated when all pairwise distances are at least eps. An
eps-net of X is a set whose open eps-balls cover X; the closed variant
(``strict=False``) uses closed balls. sigma_eps(X) is the largest
separated subset, nu_eps(X) the smallest net.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .exceptions import InputError, ResourceExhausted, VerificationFailure

logger = logging.getLogger(__name__)

EXACT_SEPARATED_LIMIT = 24
EXACT_NET_LIMIT = 20
FULL_TRIANGLE_LIMIT = 300
TOLERANCE = 1e-12


@dataclass(frozen=True)
class GroupStructure:
    """Multiplication table, inverses and identity on the point indices of a space."""

    mul: np.ndarray
    inv: np.ndarray
    identity: int


class FiniteMetricSpace:
    """Points with a distance matrix, optionally carrying a group structure.

    Distances may be infinite. Sets of points are handled as sorted lists of
    indices.
    """

    def __init__(
        self,
        points: Sequence[Any],
        dist,
        group: Optional[GroupStructure] = None,
        bi_invariant: bool = False,
        name: str = "",
        check: bool = True,
    ):
        self.points = list(points)
        self.dist = np.asarray(dist, dtype=float)
        self.group = group
        self.bi_invariant = bi_invariant
        self.name = name
        if self.dist.shape != (len(self.points), len(self.points)):
            raise InputError(f"distance matrix shape {self.dist.shape} does not match {len(self.points)} points")
        if check:
            problems = self.check_metric()
            if problems:
                raise InputError(f"not a metric: {problems[0]}")

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"FiniteMetricSpace({self.name or 'anonymous'}, {len(self)} points)"

    @property
    def all(self) -> List[int]:
        return list(range(len(self)))

    def index(self, point: Any) -> int:
        try:
            return self.points.index(point)
        except ValueError:
            raise InputError(f"{point!r} is not a point of {self!r}") from None

    def check_metric(self, seed: int = 0) -> List[str]:
        """Metric axioms; the triangle inequality is exhaustive up to a few hundred points, pivot-sampled above."""
        d = self.dist
        problems = []
        if np.any(np.isnan(d)):
            problems.append("distance matrix contains NaN")
            return problems
        if np.any(np.diag(d) != 0):
            problems.append("non-zero self distance")
        if not np.array_equal(d, d.T):
            problems.append("distance matrix is not symmetric")
        off = d + np.eye(len(d))
        if np.any(d < 0) or np.any(off <= 0):
            problems.append("distinct points must have positive distance")
        pivots: Iterable[int] = range(len(d))
        if len(d) > FULL_TRIANGLE_LIMIT:
            pivots = np.random.default_rng(seed).choice(len(d), FULL_TRIANGLE_LIMIT, replace=False)
        for k in pivots:
            with np.errstate(invalid="ignore"):
                if np.any(d > d[:, k:k + 1] + d[k:k + 1, :] + TOLERANCE):
                    problems.append(f"triangle inequality fails through point {self.points[k]!r}")
                    break
        return problems

    def check_bi_invariance(self) -> bool:
        """Exhaustive check of d(gx, gy) = d(x, y) = d(xg, yg)."""
        if self.group is None:
            return False
        mul, d = self.group.mul, self.dist
        for g in range(len(self)):
            left = mul[g]
            right = mul[:, g]
            if not (np.allclose(d[np.ix_(left, left)], d) and np.allclose(d[np.ix_(right, right)], d)):
                return False
        return True

    def require_group(self) -> GroupStructure:
        if self.group is None:
            raise InputError(f"{self!r} has no group structure")
        return self.group

    def set_distance(self, xs: Sequence[int], ys: Sequence[int]) -> float:
        if not len(xs) or not len(ys):
            return math.inf
        return float(self.dist[np.ix_(list(xs), list(ys))].min())


# Constructors


def _cyclic_group(n: int) -> GroupStructure:
    idx = np.arange(n)
    return GroupStructure((idx[:, None] + idx[None, :]) % n, (-idx) % n, 0)


def cyclic_space(n: int) -> FiniteMetricSpace:
    """Z/n with the word metric min(|i - j|, n - |i - j|)."""
    if n < 1:
        raise InputError("cyclic space needs at least one point")
    idx = np.arange(n)
    diff = np.abs(idx[:, None] - idx[None, :])
    return FiniteMetricSpace(list(range(n)), np.minimum(diff, n - diff), _cyclic_group(n), True, f"Z/{n}")


def discrete_space(n: int) -> FiniteMetricSpace:
    """Z/n with every pair of distinct points at distance 1."""
    if n < 1:
        raise InputError("discrete space needs at least one point")
    return FiniteMetricSpace(list(range(n)), 1 - np.eye(n), _cyclic_group(n), True, f"discrete Z/{n}")


def euclidean_space(points) -> FiniteMetricSpace:
    arr = np.atleast_2d(np.asarray(points, dtype=float))
    dist = np.linalg.norm(arr[:, None, :] - arr[None, :, :], axis=-1)
    return FiniteMetricSpace([tuple(p) for p in arr.tolist()], dist, name="euclidean")


def so3_space(rotations) -> FiniteMetricSpace:
    """Rotation-angle metric on a list of unit quaternions; no group structure."""
    from .so3 import normalize, pairwise_distances

    rots = normalize(np.atleast_2d(rotations))
    dist = pairwise_distances(rots)
    np.fill_diagonal(dist, 0.0)
    return FiniteMetricSpace([tuple(q) for q in rots.tolist()], dist, name="SO(3)", check=False)


def product_space(first: FiniteMetricSpace, second: FiniteMetricSpace) -> FiniteMetricSpace:
    """Cartesian product with the max metric; point (i, j) has index i * |second| + j."""
    m = len(second)
    dist = np.maximum(np.repeat(np.repeat(first.dist, m, axis=0), m, axis=1), np.tile(second.dist, (len(first), len(first))))
    points = [(a, b) for a in first.points for b in second.points]
    return FiniteMetricSpace(points, dist, name=f"{first.name} x {second.name}", check=False)


def matrix_space(data: Dict[str, Any]) -> FiniteMetricSpace:
    """Space from ``{"points": [...], "distances": [[...]], "group": {...}}``; null distances are infinite."""
    if "distances" not in data:
        raise InputError("a metric space needs a 'distances' matrix")
    rows = [[math.inf if v is None else float(v) for v in row] for row in data["distances"]]
    points = data.get("points") or list(range(len(rows)))
    group = None
    if data.get("group"):
        g = data["group"]
        try:
            group = GroupStructure(np.asarray(g["mul"], dtype=np.int64), np.asarray(g["inv"], dtype=np.int64), int(g["identity"]))
        except KeyError as e:
            raise InputError(f"group needs 'mul', 'inv' and 'identity': missing {e}") from None
    space = FiniteMetricSpace(points, rows, group, bool(data.get("bi_invariant", False)), data.get("name", ""))
    if group is not None and not space.bi_invariant:
        space.bi_invariant = space.check_bi_invariance()
    return space


def space_to_dict(space: FiniteMetricSpace) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "name": space.name,
        "points": space.points,
        "distances": [[None if math.isinf(v) else v for v in row] for row in space.dist.tolist()],
        "bi_invariant": space.bi_invariant,
    }
    if space.group is not None:
        data["group"] = {
            "mul": space.group.mul.tolist(),
            "inv": space.group.inv.tolist(),
            "identity": space.group.identity,
        }
    return data


# Set algebra


def product_set(space: FiniteMetricSpace, xs: Sequence[int], ys: Sequence[int]) -> List[int]:
    mul = space.require_group().mul
    if not len(xs) or not len(ys):
        return []
    return sorted(set(np.unique(mul[np.ix_(list(xs), list(ys))]).tolist()))


def inverse_set(space: FiniteMetricSpace, xs: Sequence[int]) -> List[int]:
    inv = space.require_group().inv
    return sorted({int(inv[x]) for x in xs})


def expansion(space: FiniteMetricSpace, xs: Sequence[int], delta: float) -> List[int]:
    """All points within distance ``delta`` (inclusive) of the set."""
    if not len(xs):
        return []
    near = space.dist[:, list(xs)].min(axis=1) <= delta
    return np.nonzero(near)[0].tolist()


# Separated sets and nets


def is_separated(space: FiniteMetricSpace, xs: Sequence[int], eps: float) -> bool:
    xs = list(xs)
    if len(xs) < 2:
        return True
    sub = space.dist[np.ix_(xs, xs)].copy()
    np.fill_diagonal(sub, math.inf)
    return bool(np.all(sub >= eps))


def is_net(space: FiniteMetricSpace, net_pts: Sequence[int], xs: Sequence[int], eps: float, strict: bool = True) -> bool:
    if not len(xs):
        return True
    if not len(net_pts):
        return False
    nearest = space.dist[np.ix_(list(xs), list(net_pts))].min(axis=1)
    return bool(np.all(nearest < eps if strict else nearest <= eps))


def separated_set(space: FiniteMetricSpace, xs: Sequence[int], eps: float, mode: str = "greedy") -> List[int]:
    """An eps-separated subset of ``xs``: greedy in index order, or a maximum one by clique search."""
    xs = sorted(set(xs))
    if mode == "greedy":
        chosen: List[int] = []
        for x in xs:
            if all(space.dist[x, c] >= eps for c in chosen):
                chosen.append(x)
        return chosen
    if mode != "exact":
        raise InputError(f"unknown mode {mode!r}; expected 'greedy' or 'exact'")
    if len(xs) > EXACT_SEPARATED_LIMIT:
        raise ResourceExhausted(f"exact separated set is limited to {EXACT_SEPARATED_LIMIT} points, got {len(xs)}", EXACT_SEPARATED_LIMIT)
    if not xs:
        return []
    graph = nx.Graph()
    graph.add_nodes_from(xs)
    graph.add_edges_from((a, b) for a, b in itertools.combinations(xs, 2) if space.dist[a, b] >= eps)
    clique, _ = nx.max_weight_clique(graph, weight=None)
    return sorted(clique)


def _min_cover(masks: List[int], universe: int) -> List[int]:
    """Smallest family of masks covering ``universe``, by branching on the lowest uncovered bit."""
    best: List[Optional[List[int]]] = [None]

    def search(covered: int, chosen: List[int]) -> None:
        if best[0] is not None and len(chosen) >= len(best[0]):
            return
        missing = universe & ~covered
        if not missing:
            best[0] = list(chosen)
            return
        bit = missing & -missing
        for i, mask in enumerate(masks):
            if mask & bit:
                chosen.append(i)
                search(covered | mask, chosen)
                chosen.pop()

    search(0, [])
    return best[0] or []


def net(
    space: FiniteMetricSpace,
    xs: Sequence[int],
    eps: float,
    mode: str = "greedy",
    strict: bool = True,
    candidates: Optional[Sequence[int]] = None,
    limit: int = EXACT_NET_LIMIT,
) -> List[int]:
    """An eps-net of ``xs`` drawn from ``candidates`` (default ``xs``).

    Greedy mode returns a maximal separated subset, which is a net.
    Exact mode solves minimum set cover over the candidates.
    """
    xs = sorted(set(xs))
    if mode == "greedy":
        return separated_set(space, xs, eps, "greedy")
    if mode != "exact":
        raise InputError(f"unknown mode {mode!r}; expected 'greedy' or 'exact'")
    pool = sorted(set(xs if candidates is None else candidates))
    if len(xs) > limit or len(pool) > limit:
        raise ResourceExhausted(f"exact net is limited to {limit} points, got {max(len(xs), len(pool))}", limit)
    if not xs:
        return []
    d = space.dist[np.ix_(pool, xs)]
    hits = d < eps if strict else d <= eps
    masks = [sum(1 << j for j in np.nonzero(row)[0].tolist()) for row in hits]
    chosen = _min_cover(masks, (1 << len(xs)) - 1)
    if not chosen:
        raise InputError("candidates cannot cover the set at this radius")
    return sorted(pool[i] for i in chosen)


def sigma(space: FiniteMetricSpace, xs: Sequence[int], eps: float, mode: str = "exact") -> int:
    return len(separated_set(space, xs, eps, mode))


def nu(space: FiniteMetricSpace, xs: Sequence[int], eps: float, mode: str = "exact", strict: bool = True, **kw) -> int:
    return len(net(space, xs, eps, mode, strict, **kw))


@dataclass
class EntropyReport:
    eps: float
    size: int
    sigma_greedy: int
    nu_greedy: int
    sigma_exact: Optional[int] = None
    nu_exact: Optional[int] = None
    nu_closed_exact: Optional[int] = None
    witnesses: Dict[str, List[Any]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "size": self.size,
            "sigma_greedy": self.sigma_greedy,
            "nu_greedy": self.nu_greedy,
            "sigma_exact": self.sigma_exact,
            "nu_exact": self.nu_exact,
            "nu_closed_exact": self.nu_closed_exact,
            "witnesses": self.witnesses,
        }


def entropy_report(space: FiniteMetricSpace, xs: Sequence[int], eps: float, exact: Optional[bool] = None) -> EntropyReport:
    """Greedy values always; exact values when the set is small enough (or ``exact`` asks for them)."""
    xs = sorted(set(xs))
    if exact is None:
        exact = len(xs) <= EXACT_NET_LIMIT
    sep = separated_set(space, xs, eps)
    report = EntropyReport(eps, len(xs), len(sep), len(sep))
    report.witnesses["separated_greedy"] = [space.points[i] for i in sep]
    if exact:
        sep_exact = separated_set(space, xs, eps, "exact")
        net_exact = net(space, xs, eps, "exact")
        report.sigma_exact = len(sep_exact)
        report.nu_exact = len(net_exact)
        report.nu_closed_exact = nu(space, xs, eps, "exact", strict=False)
        report.witnesses["separated_exact"] = [space.points[i] for i in sep_exact]
        report.witnesses["net_exact"] = [space.points[i] for i in net_exact]
    return report


# Group-flavoured constructions


def ruzsa_cover(space: FiniteMetricSpace, a: Sequence[int], b: Sequence[int], eps: float) -> List[int]:
    """A maximal K in A with the translates xB pairwise at least 2 eps apart.

    On a bi-invariant group every point of A is then within 2 eps of K B B^-1.
    """
    space.require_group()
    if not space.bi_invariant:
        logger.warning("covering guarantee assumes a bi-invariant metric")
    a, b = sorted(set(a)), sorted(set(b))
    if not b:
        raise InputError("the translated set must be non-empty")
    k: List[int] = []
    translates: List[List[int]] = []
    for x in a:
        xb = product_set(space, [x], b)
        if all(space.set_distance(xb, other) >= 2 * eps for other in translates):
            k.append(x)
            translates.append(xb)
    if a:
        cover = product_set(space, product_set(space, k, b), inverse_set(space, b))
        if not is_net(space, cover, a, 2 * eps):
            raise VerificationFailure("K B B^-1 does not 2eps-cover A")
    return k


@dataclass
class RoughApproxResult:
    verified: bool
    translates: List[int]
    k: int
    delta: float
    uncovered: List[Tuple[int, int]] = field(default_factory=list)

    def to_dict(self, space: FiniteMetricSpace) -> Dict[str, Any]:
        return {
            "verified": self.verified,
            "k": self.k,
            "delta": self.delta,
            "translates": [space.points[g] for g in self.translates],
            "uncovered": [[space.points[h1], space.points[h2]] for h1, h2 in self.uncovered],
        }


def rough_approx_check(
    space: FiniteMetricSpace,
    h: Sequence[int],
    k: int,
    delta: float,
    samples: int = 0,
    seed: int = 0,
) -> RoughApproxResult:
    """Greedy search for at most k translates g with HH inside the delta-expansion of KH.

    Candidates are HH plus either every point (``samples=0``) or a seeded
    sample of points. A failure only means this search found no cover.
    """
    group = space.require_group()
    h = sorted(set(h))
    if not h:
        return RoughApproxResult(True, [], k, delta)
    hh = product_set(space, h, h)
    if samples and samples < len(space):
        extra = np.random.default_rng(seed).choice(len(space), samples, replace=False).tolist()
    else:
        extra = space.all
    pool = sorted(set(hh) | set(extra))
    reach: Dict[int, int] = {}
    for g in pool:
        near = space.dist[np.ix_(hh, product_set(space, [g], h))].min(axis=1) <= delta
        reach[g] = sum(1 << i for i in np.nonzero(near)[0].tolist())
    uncovered = (1 << len(hh)) - 1
    chosen: List[int] = []
    while uncovered and len(chosen) < k:
        g = max(pool, key=lambda c: (bin(reach[c] & uncovered).count("1"), -c))
        if not reach[g] & uncovered:
            break
        chosen.append(g)
        uncovered &= ~reach[g]
    kh = product_set(space, chosen, h)
    missing = [p for p in hh if space.set_distance([p], kh) > delta]
    witnesses = [next((x, y) for x in h for y in h if int(group.mul[x, y]) == p) for p in missing]
    return RoughApproxResult(not missing, sorted(chosen), k, delta, witnesses)


def _pair_witnesses(
    space: FiniteMetricSpace,
    a: Sequence[int],
    d: int,
    eps: float,
    delta: float,
    m: int,
    exhaustive: bool,
) -> Optional[List[Tuple[int, int]]]:
    """m pairs (x, y) from A with y^-1 x within eps of d and both coordinate sets delta-separated."""
    group = space.require_group()
    pairs = [(x, y) for x in a for y in a if space.dist[group.mul[group.inv[y], x], d] < eps]
    if len(pairs) < m:
        return None
    chosen: List[Tuple[int, int]] = []

    def fits(x: int, y: int) -> bool:
        return all(space.dist[x, cx] >= delta and space.dist[y, cy] >= delta for cx, cy in chosen) and all(
            (x, y) != c for c in chosen
        )

    if not exhaustive:
        for x, y in pairs:
            if fits(x, y):
                chosen.append((x, y))
                if len(chosen) == m:
                    return chosen
        return None

    def search(start: int) -> bool:
        if len(chosen) == m:
            return True
        for i in range(start, len(pairs)):
            if len(pairs) - i < m - len(chosen):
                return False
            if fits(*pairs[i]):
                chosen.append(pairs[i])
                if search(i + 1):
                    return True
                chosen.pop()
        return False

    return list(chosen) if search(0) else None


def popular_elements(
    space: FiniteMetricSpace,
    a: Sequence[int],
    eps: float,
    delta: float,
    m: int,
    symmetric: bool = False,
    exhaustive: bool = False,
) -> List[int]:
    """Group elements d with m delta-separated witness pairs (x, y), d(y^-1 x, d) < eps.

    Candidates are the points within eps of A^-1 A; no other point can have a
    witness.

    The greedy witness search can miss popular elements; ``exhaustive``
    backtracks over all witness pairs instead.
    """
    a = sorted(set(a))
    if m > len(a) and delta > 0:
        return []
    m = max(m, 1)
    candidates = expansion(space, product_set(space, inverse_set(space, a), a), eps)
    found = [d for d in candidates if _pair_witnesses(space, a, d, eps, delta, m, exhaustive)]
    if symmetric:
        found = sorted(set(found) | set(inverse_set(space, found)))
    return found


def getrag_check(space: FiniteMetricSpace, s: Sequence[int], eps: float, delta: float) -> Dict[str, Any]:
    """For symmetric S, compare S^2 against the rough approximate group given by nu(S^3) / sigma(S)."""
    s = sorted(set(s))
    if inverse_set(space, s) != s:
        raise InputError("the set must be closed under inverses")
    s3 = product_set(space, product_set(space, s, s), s)
    constant = Fraction(nu(space, s3, eps, "greedy"), max(sigma(space, s, delta, "greedy"), 1))
    k = max(int(math.floor(constant)), 1)
    result = rough_approx_check(space, product_set(space, s, s), k, 2 * eps)
    return {"constant": str(constant), "k": k, "verified": result.verified, "translates": result.translates}


# Lemma checks


def _check(name: str, lhs, rhs) -> Dict[str, Any]:
    return {"lemma": name, "lhs": float(lhs), "rhs": float(rhs), "ok": bool(lhs <= rhs)}


def lemma_checks(
    space: FiniteMetricSpace,
    u: Sequence[int],
    eps: float,
    v: Optional[Sequence[int]] = None,
    w: Optional[Sequence[int]] = None,
    limit: int = EXACT_SEPARATED_LIMIT,
) -> List[Dict[str, Any]]:
    """One-sided numeric checks of the entropy inequalities with exact values.

    Nets here may use any point of the space, which keeps them monotone
    under inclusion.
    """
    everywhere = space.all if len(space) <= limit else None
    u = sorted(set(u))

    def nu_(xs, radius):
        return nu(space, xs, radius, "exact", candidates=everywhere, limit=limit)

    def sigma_(xs, radius):
        return sigma(space, xs, radius, "exact")

    rows = [
        _check("net_below_separated", nu_(u, eps), sigma_(u, eps)),
        _check("separated_below_half_net", sigma_(u, eps), nu_(u, eps / 2)),
        _check("closed_net_below_net", nu(space, u, eps, "exact", strict=False, candidates=everywhere, limit=limit), nu_(u, eps)),
    ]
    if len(u) ** 2 <= EXACT_NET_LIMIT:
        square = product_space(space, space)
        pairs = [i * len(space) + j for i in u for j in u]
        value = nu(square, pairs, eps, "exact")
        rows.append(_check("product_net", value, sigma_(u, eps / 2) ** 2))
    if space.group is None or not space.bi_invariant:
        return rows
    inv = inverse_set(space, u)
    rows.append(_check("inverse_separated", abs(sigma_(inv, eps) - sigma_(u, eps)), 0))
    rows.append(_check("inverse_net", abs(nu_(inv, eps) - nu_(u, eps)), 0))
    if v is not None and w is not None:
        v, w = sorted(set(v)), sorted(set(w))
        uv = product_set(space, u, inverse_set(space, v))
        uw = product_set(space, u, inverse_set(space, w))
        vw = product_set(space, v, inverse_set(space, w))
        rows.append(_check("ruzsa_triangle", nu_(u, eps) * nu_(vw, eps), sigma_(uv, eps / 4) * sigma_(uw, eps / 4)))
    return rows


def plunnecke_check(space: FiniteMetricSpace, a: Sequence[int], eps: float, delta: float, limit: int = EXACT_SEPARATED_LIMIT) -> Dict[str, Any]:
    """Popular differences and the growth bound on A S^3 A^-1, for delta >= 4 eps."""
    if delta < 4 * eps:
        raise InputError("the growth bound needs delta >= 4 eps")
    a = sorted(set(a))
    everywhere = space.all if len(space) <= limit else None
    s_a = sigma(space, a, delta, "exact")
    aa = product_set(space, a, inverse_set(space, a))
    constant = Fraction(nu(space, aa, eps, "exact", candidates=everywhere, limit=limit), s_a)
    m = math.ceil(Fraction(s_a) / (2 * constant))
    popular = popular_elements(space, a, 2 * eps, delta, m, exhaustive=True)
    popular_sigma = sigma(space, popular, delta, "exact") if popular else 0
    s3 = product_set(space, product_set(space, popular, popular), popular) if popular else []
    grown = product_set(space, product_set(space, a, s3), inverse_set(space, a)) if s3 else []
    grown_nu = nu(space, grown, 16 * eps, "exact", candidates=everywhere, limit=limit) if grown else 0
    bound = 8 * constant ** 7 * s_a
    return {
        "constant": str(constant),
        "popular": popular,
        "checks": [
            _check("popular_differences", Fraction(s_a) / (2 * constant), popular_sigma),
            _check("growth_bound", grown_nu, bound),
        ],
    }
