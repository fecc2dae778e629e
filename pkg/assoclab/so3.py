"""Rotations as unit quaternions, separated nets of SO(3) and the fuzzy product on a net.

Distances are rotation angles, d(p, q) = 2 arccos |<p, q>|, which is
bi-invariant and lies in [0, pi]. Quaternions are stored as (w, x, y, z)
rows of float arrays; q and -q are the same rotation.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .exceptions import InputError, ResourceExhausted
from .pls import PartialBinaryOp

logger = logging.getLogger(__name__)

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])
UNIT_TOLERANCE = 1e-9
DEFAULT_REJECTION_BUDGET = 10_000
DEFAULT_MAX_POINTS = 20_000
DEFAULT_MAX_TRIPLES = 2_000_000
_CHUNK = 64


def normalize(q: np.ndarray) -> np.ndarray:
    """Renormalize, warning when the input was noticeably off the unit sphere."""
    q = np.asarray(q, dtype=float)
    norms = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise InputError("the zero quaternion is not a rotation")
    if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
        logger.warning("renormalizing non-unit quaternion input")
    return q / norms


def quat_multiply(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    out = np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def quat_inverse(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0:
        raise InputError("rotation axis must be non-zero")
    return np.concatenate([[math.cos(angle / 2)], math.sin(angle / 2) * axis / norm])


def rotation_distance(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Rotation angle of p q^-1."""
    p, q = normalize(p), normalize(q)
    dots = np.abs(np.sum(p * q, axis=-1))
    return 2.0 * np.arccos(np.clip(dots, 0.0, 1.0))


def pairwise_distances(p: np.ndarray, q: Optional[np.ndarray] = None) -> np.ndarray:
    q = p if q is None else q
    dots = np.abs(np.asarray(p, dtype=float) @ np.asarray(q, dtype=float).T)
    return 2.0 * np.arccos(np.clip(dots, 0.0, 1.0))


def random_rotations(count: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform rotations from normalized 4-dimensional Gaussians."""
    g = rng.standard_normal((count, 4))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def ball_volume(radius: float) -> float:
    """Haar measure of the set of rotations with angle at most ``radius``."""
    radius = min(max(radius, 0.0), math.pi)
    return (radius - math.sin(radius)) / math.pi


def ball_volume_mc(radius: float, samples: int = 200_000, seed: int = 0) -> float:
    """Monte Carlo estimate of :func:`ball_volume`."""
    rotations = random_rotations(samples, np.random.default_rng(seed))
    angles = 2.0 * np.arccos(np.clip(np.abs(rotations[:, 0]), 0.0, 1.0))
    return float(np.mean(angles <= radius))


@dataclass
class RotationNet:
    points: np.ndarray
    delta: float
    evidence: int = 0
    budget: int = 0
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.points)

    def min_separation(self) -> float:
        if len(self.points) < 2:
            return math.pi
        d = pairwise_distances(self.points)
        np.fill_diagonal(d, np.inf)
        return float(d.min())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta": self.delta,
            "evidence": self.evidence,
            "budget": self.budget,
            "seed": self.seed,
            "points": self.points.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RotationNet":
        if "points" not in data or "delta" not in data:
            raise InputError("a rotation net needs 'points' and 'delta'")
        points = normalize(np.asarray(data["points"], dtype=float).reshape(-1, 4))
        return cls(points, float(data["delta"]), int(data.get("evidence", 0)), int(data.get("budget", 0)), data.get("seed"))


def build_net(
    delta: float,
    seed: int = 0,
    budget: int = DEFAULT_REJECTION_BUDGET,
    max_points: int = DEFAULT_MAX_POINTS,
    batch: int = 1024,
) -> RotationNet:
    """Greedy delta-separated set from Haar samples, frozen after ``budget`` consecutive rejections."""
    if not 0 < delta <= math.pi:
        raise InputError(f"delta must lie in (0, pi], got {delta}")
    if budget < DEFAULT_REJECTION_BUDGET:
        logger.warning("rejection budget %d is below %d; maximality evidence is weak", budget, DEFAULT_REJECTION_BUDGET)
    rng = np.random.default_rng(seed)
    limit = math.cos(delta / 2)
    points = np.zeros((0, 4))
    rejections = 0
    while rejections < budget:
        samples = random_rotations(batch, rng)
        clear = np.ones(batch, dtype=bool)
        if len(points):
            clear = np.max(np.abs(samples @ points.T), axis=1) <= limit
        fresh: List[np.ndarray] = []
        for i in range(batch):
            ok = clear[i] and all(abs(float(samples[i] @ f)) <= limit for f in fresh)
            if ok:
                fresh.append(samples[i])
                rejections = 0
                if len(points) + len(fresh) > max_points:
                    raise ResourceExhausted(f"net exceeded {max_points} points at delta={delta}", max_points)
            else:
                rejections += 1
                if rejections >= budget:
                    break
        if fresh:
            points = np.vstack([points, np.array(fresh)])
    logger.info("net at delta=%.4g has %d points", delta, len(points))
    return RotationNet(points, delta, rejections, budget, seed)


def nearest_in_net(net: RotationNet, queries: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Index of and distance to the nearest net point, for each query row."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    index = np.empty(len(queries), dtype=np.int64)
    dist = np.empty(len(queries))
    step = _CHUNK * 64
    for start in range(0, len(queries), step):
        dots = np.abs(queries[start:start + step] @ net.points.T)
        best = np.argmax(dots, axis=1)
        index[start:start + step] = best
        dist[start:start + step] = 2.0 * np.arccos(np.clip(dots[np.arange(len(best)), best], 0.0, 1.0))
    return index, dist


@dataclass
class ProductTable:
    """For every pair (x, y): the net point nearest to xy, its distance, and per-z pair counts."""

    nearest: np.ndarray
    distance: np.ndarray
    close_counts: np.ndarray
    tolerance: float


def product_table(net: RotationNet, tolerance: float) -> ProductTable:
    """Nearest points of all products, plus #{(x, y): d(xy, z) <= tolerance} for each z."""
    m = len(net)
    nearest = np.empty((m, m), dtype=np.int64)
    distance = np.empty((m, m))
    counts = np.zeros(m, dtype=np.int64)
    threshold = math.cos(min(tolerance, math.pi) / 2)
    for start in range(0, m, _CHUNK):
        xs = net.points[start:start + _CHUNK]
        products = quat_multiply(xs[:, None, :], net.points[None, :, :]).reshape(-1, 4)
        dots = np.abs(products @ net.points.T)
        best = np.argmax(dots, axis=1)
        rows = slice(start, start + len(xs))
        nearest[rows] = best.reshape(len(xs), m)
        distance[rows] = (2.0 * np.arccos(np.clip(dots[np.arange(len(best)), best], 0.0, 1.0))).reshape(len(xs), m)
        counts += np.count_nonzero(dots >= threshold, axis=0)
    return ProductTable(nearest, distance, counts, tolerance)


def fuzzy_op(net: RotationNet, theta: float) -> PartialBinaryOp:
    """x o y = z exactly when d(xy, z) <= theta delta; undefined if no such z."""
    if not 0 < theta < 0.5:
        raise InputError(f"theta must lie in (0, 1/2) for the product to be well defined, got {theta}")
    table = product_table(net, theta * net.delta)
    defined = table.distance <= theta * net.delta
    entries = {(int(x), int(y)): int(table.nearest[x, y]) for x, y in zip(*np.nonzero(defined))}
    logger.info("fuzzy product defined on %d of %d pairs", len(entries), len(net) ** 2)
    return PartialBinaryOp(len(net), entries)


def _row(metric: str, measured: float, bound: float, passed: bool, **extra: Any) -> Dict[str, Any]:
    return dict({"metric": metric, "measured": measured, "bound": bound, "pass": bool(passed)}, **extra)


def verify_density(net: RotationNet, theta: float) -> Dict[str, Any]:
    """Proportion of pairs with d(xy, net) <= theta delta against (theta/3)^9 / 16."""
    table = product_table(net, theta * net.delta)
    measured = float(np.mean(table.distance <= theta * net.delta)) if len(net) else 0.0
    bound = (theta / 3) ** 9 / 16
    return _row("defined_proportion", measured, bound, measured >= bound)


def popular_products(net: RotationNet, theta: float, table: Optional[ProductTable] = None) -> Dict[str, Any]:
    """Per z, the pairs with d(xy, z) <= theta delta, against (theta/3)^6 |net| / 8."""
    tolerance = theta * net.delta
    if table is None or table.tolerance != tolerance:
        table = product_table(net, tolerance)
    threshold = (theta / 3) ** 6 * len(net) / 8
    popular = table.close_counts >= threshold
    return {
        "threshold": threshold,
        "counts": table.close_counts.tolist(),
        "popular_fraction": float(np.mean(popular)) if len(net) else 0.0,
    }


def verify_corollaries(
    net: RotationNet,
    theta: float,
    eps: float,
    max_triples: int = DEFAULT_MAX_TRIPLES,
    seed: int = 0,
) -> List[Dict[str, Any]]:
    """Measure the partner, associative-triple and popular-product corollaries against their bounds."""
    if not 0 < eps < 1:
        raise InputError(f"eps must lie in (0, 1), got {eps}")
    m = len(net)
    delta = net.delta
    rows = []

    wide = product_table(net, 6 * theta * delta)
    partners = 3 * theta * delta
    near = wide.distance <= partners
    left = near.sum(axis=0)  # x with d(xy, net) small, per y
    right = near.sum(axis=1)  # z with d(yz, net) small, per y
    need = theta ** 3 * delta ** -3 / 128
    fraction = float(np.mean((left >= need) & (right >= need))) if m else 0.0
    rows.append(_row("partners_fraction", fraction, 0.5, fraction >= 0.5, threshold=need))

    defined = wide.distance <= 6 * theta * delta
    nearest = wide.nearest
    estimated = m ** 3 > max_triples
    if estimated:
        rng = np.random.default_rng(seed)
        xs, ys, zs = (rng.integers(0, m, max_triples) for _ in range(3))
        yz, xy = nearest[ys, zs], nearest[xs, ys]
        ok = defined[ys, zs] & defined[xs, yz] & defined[xs, ys] & defined[xy, zs]
        triples = float(np.mean(ok)) * m ** 3
    else:
        triples = 0.0
        for x in range(m):
            ok = defined & defined[x, nearest] & defined[x][:, None] & defined[nearest[x]]
            triples += float(np.count_nonzero(ok))
    bound = theta ** 9 * delta ** -9 / 2 ** 22
    rows.append(_row("associative_triples", triples, bound, triples >= bound, estimated=estimated))

    popular = popular_products(net, theta)
    rows.append(_row("popular_products_fraction", popular["popular_fraction"], 1 - eps, popular["popular_fraction"] >= 1 - eps))
    return rows
