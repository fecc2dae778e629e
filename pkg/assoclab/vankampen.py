"""Van Kampen complexes, bounded proof search between words, slit scans and embeddings.

A letter is ``(cls, idx, sign)`` with cls 0, 1, 2 for the x, y and z
generators. Every triple (x, y, z) contributes the relator x y z^-1, and one
relator application replaces a subword s by t whenever s t^-1 is a cyclic
rotation of a relator or of its inverse.
"""

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterator, List, Optional, Sequence, Set, Tuple

from .decomposition import DEFAULT_BUDGET, iter_copies, slit_octahedron_disc
from .exceptions import AssocLabError, InputError, VerificationFailure
from .pls import CLASS_LETTERS, PartialLatinSquare, Triple
from .quadrangle import GroupTable, brandt_reconstruct

logger = logging.getLogger(__name__)

Letter = Tuple[int, int, int]
Word = Tuple[Letter, ...]

DEFAULT_MAX_STATES = DEFAULT_BUDGET
SLIT_AREA = 8

EXACT_ZERO = "exact-zero"
PROVEN = "proven"
NOT_FOUND = "not-found-within-budget"
STATE_LIMIT = "state-limit"
CLASS_SEPARATED = "class-separated-infinite"

_TOKEN = re.compile(r"^(?P<name>[^\s^]+?)(?:\^\{?(?P<exp>-?1)\}?)?$")


def inverse_letter(letter: Letter) -> Letter:
    return (letter[0], letter[1], -letter[2])


def inverse_word(word: Sequence[Letter]) -> Word:
    return tuple(inverse_letter(a) for a in reversed(word))


def reduce_word(word: Sequence[Letter]) -> Word:
    """Free reduction."""
    stack: List[Letter] = []
    for letter in word:
        if stack and stack[-1] == inverse_letter(letter):
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def class_signature(word: Sequence[Letter]) -> Tuple[int, int]:
    """Image in Z^2 under x -> e1, y -> e2, z -> e1 + e2; every relator maps to 0."""
    a = sum(s for cls, _, s in word if cls in (0, 2))
    b = sum(s for cls, _, s in word if cls in (1, 2))
    return a, b


@dataclass(frozen=True)
class VKPresentation:
    """Generators of the three classes and one relator x y z^-1 per triple."""

    pls: PartialLatinSquare

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.pls.dims

    @property
    def relators(self) -> List[Word]:
        return [((0, x, 1), (1, y, 1), (2, z, -1)) for x, y, z in self.pls.triples]

    def __len__(self) -> int:
        return len(self.pls.triples)

    @cached_property
    def _rotations(self) -> List[Tuple[int, Word]]:
        out = []
        for i, rel in enumerate(self.relators):
            for base in (rel, inverse_word(rel)):
                for k in range(3):
                    out.append((i, base[k:] + base[:k]))
        return out

    @cached_property
    def moves(self) -> Dict[Word, List[Tuple[Word, int]]]:
        """s -> [(t, relator index)] for the length-preserving-ish moves (|s| in 1, 2)."""
        table: Dict[Word, List[Tuple[Word, int]]] = {}
        for i, rot in self._rotations:
            for k in (1, 2):
                table.setdefault(rot[:k], []).append((inverse_word(rot[k:]), i))
        return table

    @cached_property
    def deletions(self) -> Set[Word]:
        return {rot for _, rot in self._rotations}

    def name(self, letter: Letter) -> str:
        cls, idx, sign = letter
        base = self.pls.name_of(cls, idx)
        return base if sign > 0 else f"{base}^-1"

    @cached_property
    def _by_name(self) -> Dict[str, Tuple[int, int]]:
        names: Dict[str, Tuple[int, int]] = {}
        for cls, letter in enumerate(CLASS_LETTERS):
            for idx in range(self.dims[cls]):
                names[f"{letter}{idx}"] = (cls, idx)
        for cls in range(3):
            for idx in range(self.dims[cls]):
                names[self.pls.name_of(cls, idx)] = (cls, idx)
        return names

    def generator(self, name: str) -> Tuple[int, int]:
        if name not in self._by_name:
            raise InputError(f"unknown generator {name!r}")
        return self._by_name[name]

    @cached_property
    def group_images(self) -> Optional[Tuple[GroupTable, Tuple[Tuple[int, ...], ...], Dict[int, int]]]:
        """Homomorphism onto the group of a full table satisfying the quadrangle condition.

        With the group read off row 0 and column 0, x maps to the label at
        (x, 0), y to the label at (0, y) and z to itself, so every relator
        x y z^-1 maps to the identity. None for any other instance.
        """
        if not self.pls.is_full():
            return None
        try:
            group = brandt_reconstruct(self.pls, 0, 0)
        except AssocLabError:
            return None
        label = self.pls.label_index
        n = group.n
        images = (
            tuple(label[(x, 0)] for x in range(n)),
            tuple(label[(0, y)] for y in range(n)),
            tuple(range(n)),
        )
        inverse = {a: b for a in range(n) for b in range(n) if group.op(a, b) == group.identity}
        return group, images, inverse

    def evaluate(self, word: Sequence[Letter]) -> Optional[int]:
        """Image of ``word`` under :attr:`group_images`, or None when there is none."""
        shadow = self.group_images
        if shadow is None:
            return None
        group, images, inverse = shadow
        value = group.identity
        for cls, idx, sign in word:
            g = images[cls][idx]
            value = group.op(value, g if sign > 0 else inverse[g])
        return value

    def separates(self, w1: Sequence[Letter], w2: Sequence[Letter]) -> bool:
        """True when the group images of the two words differ, so no diagram of any area exists."""
        a, b = self.evaluate(w1), self.evaluate(w2)
        return a is not None and a != b


def build_presentation(pls: PartialLatinSquare) -> VKPresentation:
    return VKPresentation(pls)


def parse_word(pres: VKPresentation, text: str) -> Word:
    """Read ``x0 y1 z2^-1`` (or sidecar names, ``*`` also separates) into a reduced word."""
    letters = []
    for token in text.replace("*", " ").split():
        match = _TOKEN.match(token)
        if not match:
            raise InputError(f"cannot read word token {token!r}")
        cls, idx = pres.generator(match.group("name"))
        sign = -1 if match.group("exp") == "-1" else 1
        letters.append((cls, idx, sign))
    return reduce_word(letters)


def format_word(pres: VKPresentation, word: Sequence[Letter]) -> str:
    return " ".join(pres.name(a) for a in word) if word else "1"


def neighbours(pres: VKPresentation, word: Word, insertions: bool = False) -> Iterator[Word]:
    """Words one relator application away from ``word``, freely reduced."""
    moves = pres.moves
    m = len(word)
    for i in range(m):
        for k in (1, 2):
            if i + k > m:
                break
            for t, _ in moves.get(word[i:i + k], ()):
                yield reduce_word(word[:i] + t + word[i + k:])
        if insertions and i + 3 <= m and word[i:i + 3] in pres.deletions:
            yield reduce_word(word[:i] + word[i + 3:])
    if insertions:
        for i in range(m + 1):
            for rot in pres.deletions:
                yield reduce_word(word[:i] + rot + word[i:])


@dataclass(frozen=True)
class DistanceResult:
    status: str
    area: Optional[int]
    certificate: Tuple[Word, ...] = ()
    budget: int = 0
    cap: int = 0
    states: int = 0
    insertions: bool = False

    @property
    def proven(self) -> bool:
        return self.status in (PROVEN, EXACT_ZERO)

    def to_dict(self, pres: Optional[VKPresentation] = None) -> Dict[str, Any]:
        if pres is None:
            certificate = [[list(a) for a in w] for w in self.certificate]
        else:
            certificate = [format_word(pres, w) for w in self.certificate]
        return {
            "status": self.status,
            "area": self.area,
            "certificate": certificate,
            "budget": self.budget,
            "cap": self.cap,
            "states": self.states,
            "insertions": self.insertions,
        }


def _path(parents: Dict[Word, Optional[Word]], end: Word) -> List[Word]:
    path = [end]
    while parents[path[-1]] is not None:
        path.append(parents[path[-1]])
    return path


def vk_distance(
    pres: VKPresentation,
    w1: Sequence[Letter],
    w2: Sequence[Letter],
    budget: int = 8,
    cap: Optional[int] = None,
    max_states: Optional[int] = None,
    insertions: bool = False,
) -> DistanceResult:
    """Bounded search for a van Kampen diagram with boundary w1 w2^-1.

    Runs a breadth-first search from both words in lockstep; the area of the
    first meeting is the fewest relator applications within the word length
    ``cap``. Moves replace a subword of length 1 or 2; with ``insertions``
    (off by default) whole relators may also be inserted or deleted.

    ``not-found-within-budget`` certifies that no proof of area at most
    ``budget`` stays within ``cap``. When the presentation maps onto a group
    (:attr:`VKPresentation.group_images`) and the images of the two words
    differ, it is returned without searching: no diagram of any area exists.
    ``state-limit`` means ``max_states`` (the state budget, 10^8 by default)
    ran out first and certifies nothing.
    """
    if max_states is None:
        max_states = DEFAULT_MAX_STATES
    a, b = reduce_word(w1), reduce_word(w2)
    if budget < 0:
        raise InputError(f"area budget must be non-negative, got {budget}")
    if cap is None:
        cap = len(a) + len(b) + 3 * budget
    if cap < len(a) + len(b):
        raise InputError(f"length cap {cap} is below the combined word length {len(a) + len(b)}")
    settings = dict(budget=budget, cap=cap, insertions=insertions)
    if a == b:
        return DistanceResult(EXACT_ZERO, 0, (a,), **settings)
    if class_signature(a) != class_signature(b):
        return DistanceResult(CLASS_SEPARATED, None, **settings)
    if pres.separates(a, b):
        logger.debug("words have different group images; no diagram exists")
        return DistanceResult(NOT_FOUND, None, **settings)

    sides = [{a: None}, {b: None}]  # parent maps
    frontiers = [[a], [b]]
    depths = [0, 0]
    states = 2
    while depths[0] + depths[1] < budget and frontiers[0] and frontiers[1]:
        side = 0 if len(frontiers[0]) <= len(frontiers[1]) else 1
        own, other = sides[side], sides[1 - side]
        nxt = []
        for word in frontiers[side]:
            for nb in neighbours(pres, word, insertions):
                if len(nb) > cap or nb in own:
                    continue
                own[nb] = word
                if nb in other:
                    forward = _path(sides[0], nb)[::-1]
                    backward = _path(sides[1], nb)[1:]
                    certificate = tuple(forward + backward)
                    area = len(certificate) - 1
                    logger.debug("proof of area %d found after %d states", area, states)
                    return DistanceResult(PROVEN, area, certificate, states=states, **settings)
                nxt.append(nb)
                states += 1
                if states > max_states:
                    return DistanceResult(STATE_LIMIT, None, states=states, **settings)
        frontiers[side] = nxt
        depths[side] += 1
    return DistanceResult(NOT_FOUND, None, states=states, **settings)


def replay_certificate(pres: VKPresentation, w1: Sequence[Letter], w2: Sequence[Letter], result: DistanceResult) -> bool:
    """Check that consecutive certificate words are one relator application apart."""
    if result.status == EXACT_ZERO:
        return reduce_word(w1) == reduce_word(w2)
    if result.status != PROVEN:
        return False
    words = result.certificate
    if not words or words[0] != reduce_word(w1) or words[-1] != reduce_word(w2):
        return False
    if len(words) - 1 != result.area:
        return False
    return all(words[k + 1] in set(neighbours(pres, words[k], insertions=True)) for k in range(len(words) - 1))


# Slit octahedra


@dataclass(frozen=True)
class SlitWitness:
    """Two rectangles sharing labels a, b, c whose fourth labels differ."""

    labels: Tuple[int, int]
    triples: Tuple[Triple, ...]  # (x1,y1,a) (x2,y1,b) (x1,y2,c) (x2,y2,d) then the second rectangle

    def to_dict(self) -> Dict[str, Any]:
        return {"labels": list(self.labels), "triples": [list(t) for t in self.triples]}


def slit_scan(pls: PartialLatinSquare) -> List[SlitWitness]:
    """One witness per unordered label pair bounding a slit octahedron."""
    disc = slit_octahedron_disc()
    edge = {e.name: i for i, e in enumerate(disc.edges)}
    layout = [
        ("x1", "y1", "a"), ("x2", "y1", "b"), ("x1", "y2", "c"), ("x2", "y2", "d"),
        ("x3", "y3", "a"), ("x4", "y3", "b"), ("x3", "y4", "c"), ("x4", "y4", "d2"),
    ]
    found: Dict[Tuple[int, int], SlitWitness] = {}
    for copy in iter_copies(disc, pls):
        d, d2 = copy[edge["d"]], copy[edge["d2"]]
        if d == d2:
            continue
        pair = (min(d, d2), max(d, d2))
        triples = tuple(tuple(copy[edge[n]] for n in face) for face in layout)
        if d > d2:
            triples = triples[4:] + triples[:4]
        witness = SlitWitness(pair, triples)
        if pair not in found or witness.triples < found[pair].triples:
            found[pair] = witness
    logger.debug("slit scan: %d label pairs", len(found))
    return [found[p] for p in sorted(found)]


def slit_certificate(witness: SlitWitness) -> Tuple[Word, ...]:
    """The area-8 chain of words from d to d2 read off a slit octahedron."""
    (x1, y1, a), (x2, _, b), (_, y2, c), (_, _, d), (x3, y3, _), (x4, _, _), (_, y4, _), (_, _, d2) = witness.triples

    def X(i, s=1):
        return (0, i, s)

    def Y(i, s=1):
        return (1, i, s)

    def Z(i, s=1):
        return (2, i, s)

    words = [
        (Z(d),),
        (X(x2), Y(y2)),
        (Z(b), Y(y1, -1), Y(y2)),
        (Z(b), Y(y1, -1), X(x1, -1), Z(c)),
        (Z(b), Z(a, -1), Z(c)),
        (X(x4), Y(y3), Z(a, -1), Z(c)),
        (X(x4), Y(y3), Y(y3, -1), X(x3, -1), Z(c)),
        (X(x4), X(x3, -1), X(x3), Y(y4)),
        (Z(d2),),
    ]
    return tuple(reduce_word(w) for w in words)


# Embedding


@dataclass
class EmbeddingReport:
    budget: int
    cap: int
    maps: Dict[str, Dict[str, str]]
    triple_certificates: List[Dict[str, Any]]
    separation: List[Dict[str, Any]]
    offending: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        """No offending pair and no search cut short by the state limit."""
        return not self.offending and self.complete

    @property
    def complete(self) -> bool:
        return all(entry["status"] != STATE_LIMIT for entry in self.separation)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "resolution": {"budget": self.budget, "cap": self.cap},
            "distance_scale": f"area / {self.budget}",
            "certified_1_separated": self.certified,
            "complete": self.complete,
            "maps": self.maps,
            "triple_certificates": self.triple_certificates,
            "separation": self.separation,
            "offending": self.offending,
        }


def emit_embedding(
    pls: PartialLatinSquare,
    budget: int,
    cap: Optional[int] = None,
    max_states: Optional[int] = None,
    threads: int = 1,
) -> EmbeddingReport:
    """Generator inclusions into the presentation group scaled by 1/budget.

    Each triple gives an area-1 diagram, so d(phi(x)psi(y), omega(z)) <= 1/budget.
    Distinct same-class generators are 1-separated at this resolution unless
    some pair has a diagram of area below ``budget``.
    """
    if budget < 1:
        raise InputError(f"embedding budget must be positive, got {budget}")
    pres = build_presentation(pls)
    search_budget = budget - 1
    search_cap = cap if cap is not None else 2 + 3 * search_budget
    maps = {
        name: {pls.name_of(cls, i): pls.name_of(cls, i) for i in range(pls.dims[cls])}
        for cls, name in enumerate(("phi", "psi", "omega"))
    }

    certificates = []
    for x, y, z in pls.triples:
        w1, w2 = ((0, x, 1), (1, y, 1)), ((2, z, 1),)
        result = DistanceResult(PROVEN, 1, (w1, w2), budget=1, cap=3)
        if not replay_certificate(pres, w1, w2, result):
            raise VerificationFailure(f"relator certificate for {(x, y, z)} does not replay")
        certificates.append({"triple": [x, y, z], "area": 1, "distance": f"1/{budget}"})

    slits = {w.labels: w for w in slit_scan(pls)} if budget > SLIT_AREA else {}
    pairs = [
        (cls, i, j) for cls in range(3) for i in range(pls.dims[cls]) for j in range(i + 1, pls.dims[cls])
    ]

    def separate(pair: Tuple[int, int, int]) -> DistanceResult:
        cls, i, j = pair
        w1, w2 = ((cls, i, 1),), ((cls, j, 1),)
        if cls == 2 and (i, j) in slits:
            result = DistanceResult(PROVEN, SLIT_AREA, slit_certificate(slits[(i, j)]), search_budget, search_cap)
            if replay_certificate(pres, w1, w2, result):
                return result
            logger.warning("slit certificate for labels %d, %d did not replay; searching instead", i, j)
        return vk_distance(pres, w1, w2, search_budget, search_cap, max_states)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(separate, pairs))

    separation, offending = [], []
    for (cls, i, j), result in zip(pairs, results):
        entry = {
            "class": CLASS_LETTERS[cls],
            "pair": [pls.name_of(cls, i), pls.name_of(cls, j)],
            "status": result.status,
            "area": result.area,
        }
        separation.append(entry)
        if result.status == PROVEN and result.area is not None and result.area < budget:
            offending.append(dict(entry, certificate=[format_word(pres, w) for w in result.certificate]))
    logger.info("embedding at budget %d: %d pairs checked, %d offending", budget, len(pairs), len(offending))
    return EmbeddingReport(budget, search_cap, maps, certificates, separation, offending)
