"""
Finitely generated groups of Moebius transformations.

Words are tuples of (generator index, exponent +-1) letters, always freely reduced.
"""

import logging
import math
import re
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import BallTooLarge, EllipticFound, EmptySample, InputError, UnknownGenerator
from .moebius import (
    TWO_PI,
    BoundaryPoint,
    ElementClass,
    MoebiusTransform,
    classify,
    sink,
)

Letter = Tuple[int, int]
Word = Tuple[Letter, ...]

DEFAULT_DEPTH_CAP = 12
DEFAULT_BALL_BUDGET = 5_000_000
DEFAULT_DEDUP_TOLERANCE = 1e-8
DEFAULT_MERGE_TOLERANCE = 1e-10
DEFAULT_SAMPLE_TOLERANCE = 1e-7
INVERSE_MARKERS = ("'", "⁻¹", "^-1")

logger = logging.getLogger(__name__)


# Word Methods
def reduce_word(letters: Iterable[Letter]) -> Word:
    """Free reduction"""
    stack: List[Letter] = []
    for generator, exponent in letters:
        if stack and stack[-1][0] == generator and stack[-1][1] == -exponent:
            stack.pop()
        else:
            stack.append((generator, exponent))
    return tuple(stack)


def invert_word(word: Word) -> Word:
    return tuple((generator, -exponent) for generator, exponent in reversed(word))


def concat(*words: Word) -> Word:
    return reduce_word(letter for word in words for letter in word)


def cyclically_reduce(word: Word) -> Word:
    word = reduce_word(word)
    while len(word) >= 2 and word[0][0] == word[-1][0] and word[0][1] == -word[-1][1]:
        word = word[1:-1]
    return word


def substitute(word: Word, generator: int, replacement: Word) -> Word:
    """Replace every occurrence of a generator by a word"""
    letters: List[Letter] = []
    for g, exponent in word:
        if g == generator:
            letters.extend(replacement if exponent > 0 else invert_word(replacement))
        else:
            letters.append((g, exponent))
    return reduce_word(letters)


def relabel(word: Word, mapping: Dict[int, int]) -> Word:
    return tuple((mapping[g], exponent) for g, exponent in word)


def commutator(u: Word, v: Word) -> Word:
    """u v u^-1 v^-1"""
    return concat(u, v, invert_word(u), invert_word(v))


def letter_rank(letter: Letter) -> int:
    generator, exponent = letter
    return 2 * generator + (0 if exponent > 0 else 1)


def shortlex_key(word: Word) -> Tuple[int, Tuple[int, ...]]:
    return len(word), tuple(letter_rank(letter) for letter in word)


def alphabet(rank: int) -> List[Letter]:
    """Letters in shortlex order: A, A', B, B', ..."""
    return [(generator, exponent) for generator in range(rank) for exponent in (1, -1)]


def parse_word(text: str, names: Sequence[str]) -> Word:
    """
    Parse a word such as "A B A' B'" or "AB" over the given generator names.

    Args:
        text: Whitespace separated or concatenated generator names, each optionally
              followed by an inverse marker (', the superscript -1, or ^-1)
        names: Generator names

    Returns:
        Word: Freely reduced word
    """
    if not names:
        raise InputError("Cannot parse words over an empty generating set")
    index = {name: i for i, name in enumerate(names)}
    name_pattern = "|".join(re.escape(name) for name in sorted(names, key=len, reverse=True))
    marker_pattern = "|".join(re.escape(marker) for marker in INVERSE_MARKERS)
    token = re.compile(rf"({name_pattern})({marker_pattern})?")

    letters: List[Letter] = []
    for chunk in text.split():
        if chunk in ("1", "e"):
            continue
        position = 0
        while position < len(chunk):
            match = token.match(chunk, position)
            if match is None:
                raise UnknownGenerator(f"Cannot read generator at '{chunk[position:]}' in word '{text}'")
            letters.append((index[match.group(1)], -1 if match.group(2) else 1))
            position = match.end()
    return reduce_word(letters)


def format_word(word: Word, names: Sequence[str]) -> str:
    if not word:
        return "1"
    return " ".join(names[generator] + ("'" if exponent < 0 else "") for generator, exponent in word)


@dataclass(frozen=True)
class CuffData:
    """Twist metadata for one glued cuff, written by the pants builder"""

    name: str
    word: Word
    partner_word: Word
    length: float
    twist: float
    # generator index -> "conjugate" | "left" | "right"
    actions: Tuple[Tuple[int, str], ...] = ()

    def action_map(self) -> Dict[int, str]:
        return dict(self.actions)


@dataclass(frozen=True)
class GroupRepresentation:
    """Generator images in PSL(2,R) with optional relators, peripheral words and cuff metadata"""

    generator_names: Tuple[str, ...]
    images: Tuple[MoebiusTransform, ...]
    relators: Tuple[Word, ...] = ()
    peripheral_words: Tuple[Word, ...] = ()
    cuffs: Tuple[CuffData, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "generator_names", tuple(self.generator_names))
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "relators", tuple(reduce_word(w) for w in self.relators))
        object.__setattr__(self, "peripheral_words", tuple(reduce_word(w) for w in self.peripheral_words))
        object.__setattr__(self, "cuffs", tuple(self.cuffs))
        if len(self.generator_names) != len(self.images):
            raise InputError(
                f"{len(self.generator_names)} generator names but {len(self.images)} images"
            )
        if len(set(self.generator_names)) != len(self.generator_names):
            raise InputError(f"Duplicate generator names: {self.generator_names}")
        for word in self.relators + self.peripheral_words:
            self._check_word(word)

    @property
    def rank(self) -> int:
        return len(self.generator_names)

    def _check_word(self, word: Word):
        for generator, exponent in word:
            if not 0 <= generator < self.rank or exponent not in (1, -1):
                raise UnknownGenerator(f"Letter {(generator, exponent)} is not valid for rank {self.rank}")

    def word(self, text: str) -> Word:
        return parse_word(text, self.generator_names)

    def format(self, word: Word) -> str:
        return format_word(word, self.generator_names)

    def evaluate(self, word: Word) -> MoebiusTransform:
        return evaluate_word(self, word)

    def with_images(self, images: Sequence[MoebiusTransform]) -> "GroupRepresentation":
        return replace(self, images=tuple(images))

    def conjugate(self, sigma: MoebiusTransform) -> "GroupRepresentation":
        """sigma rho sigma^-1"""
        return self.with_images([image.conjugate_by(sigma) for image in self.images])

    def same_generators(self, other: "GroupRepresentation") -> bool:
        return self.generator_names == other.generator_names

    # Invariant diagnostics
    def relator_defects(self) -> List[float]:
        identity = MoebiusTransform.identity()
        return [self.evaluate(word).distance(identity) for word in self.relators]

    def peripheral_defects(self) -> List[float]:
        return [abs(abs(self.evaluate(word).trace) - 2.0) for word in self.peripheral_words]

    def validate(self, tol: float = 1e-6):
        """Relators evaluate to the identity and peripheral words are parabolic"""
        for word, defect in zip(self.relators, self.relator_defects()):
            if defect > tol:
                raise InputError(f"Relator {self.format(word)} is {defect:.3e} from the identity")
        for word in self.peripheral_words:
            kind = classify(self.evaluate(word), tol)
            if kind is not ElementClass.PARABOLIC:
                raise InputError(f"Peripheral word {self.format(word)} is {kind.value}")
        return True


def evaluate_word(rep: GroupRepresentation, word: Word) -> MoebiusTransform:
    """Left-to-right product of generator images, renormalized after each step"""
    result = MoebiusTransform.identity()
    for generator, exponent in word:
        if not 0 <= generator < rep.rank:
            raise UnknownGenerator(f"Generator index {generator} is not in {rep.generator_names}")
        image = rep.images[generator]
        result = result @ (image if exponent > 0 else image.inverse())
    return result


def raw_product(rep: GroupRepresentation, word: Word) -> np.ndarray:
    """Product as an SL(2,R) matrix, keeping the signs of the stored representatives"""
    result = np.eye(2)
    for generator, exponent in word:
        matrix = rep.images[generator].matrix
        if exponent < 0:
            matrix = np.array([[matrix[1, 1], -matrix[0, 1]], [-matrix[1, 0], matrix[0, 0]]])
        result = result @ matrix
    return result


# Ball Enumeration
def projected_ball_size(rank: int, length: int) -> int:
    """Number of freely reduced words of length <= length"""
    if rank == 0:
        return 1
    letters = 2 * rank
    if letters == 2:
        return 1 + 2 * length
    return 1 + letters * ((letters - 1) ** length - 1) // (letters - 2)


class _MatrixIndex:
    """Near-duplicate lookup for PSL-normalized matrices on a coarse grid"""

    def __init__(self, tolerance: float):
        self.tolerance = tolerance
        self.cell = 10.0 * tolerance
        self.buckets: Dict[Tuple[int, ...], List[MoebiusTransform]] = {}

    def _candidate_keys(self, entries: Sequence[float]) -> List[Tuple[int, ...]]:
        options = []
        for value in entries:
            scaled = value / self.cell
            base = math.floor(scaled)
            neighbour = base + 1 if scaled - base >= 0.5 else base - 1
            options.append((base, neighbour))
        keys = [()]
        for pair in options:
            keys = [key + (choice,) for key in keys for choice in pair]
        return keys

    def _home_key(self, entries: Sequence[float]) -> Tuple[int, ...]:
        return tuple(math.floor(value / self.cell) for value in entries)

    def contains(self, m: MoebiusTransform) -> bool:
        variants = [m.to_list()]
        if abs(m.trace) < 1e-6:
            variants.append([-value for value in m.to_list()])
        for entries in variants:
            for key in self._candidate_keys(entries):
                for other in self.buckets.get(key, ()):
                    if m.distance(other) < self.tolerance:
                        return True
        return False

    def add(self, m: MoebiusTransform):
        self.buckets.setdefault(self._home_key(m.to_list()), []).append(m)


def enumerate_ball(
    rep: GroupRepresentation,
    length: int,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    budget: int = DEFAULT_BALL_BUDGET,
    dedup_tolerance: float = DEFAULT_DEDUP_TOLERANCE,
) -> List[Tuple[Word, MoebiusTransform]]:
    """
    All freely reduced words of length <= length with their images, in shortlex order.

    For groups with relators, elements agreeing within dedup_tolerance are kept once,
    represented by their shortlex-least word.
    """
    if length < 0:
        raise InputError(f"Ball radius must be nonnegative, got {length}")
    if length > depth_cap:
        raise BallTooLarge(f"Depth {length} exceeds the configured cap {depth_cap}")
    projected = projected_ball_size(rep.rank, length)
    if projected > budget:
        logger.error(f"Ball of radius {length} in rank {rep.rank} projects to {projected} elements")
        raise BallTooLarge(f"Projected ball size {projected} exceeds budget {budget}")

    letters = alphabet(rep.rank)
    letter_images = {
        (g, e): rep.images[g] if e > 0 else rep.images[g].inverse() for g, e in letters
    }
    dedup = _MatrixIndex(dedup_tolerance) if rep.relators else None

    identity = MoebiusTransform.identity()
    ball: List[Tuple[Word, MoebiusTransform]] = [((), identity)]
    if dedup is not None:
        dedup.add(identity)
    frontier = [((), identity)]
    duplicates = 0

    for _ in range(length):
        next_frontier = []
        for word, matrix in frontier:
            last = word[-1] if word else None
            for letter in letters:
                if last is not None and letter[0] == last[0] and letter[1] == -last[1]:
                    continue
                product = matrix @ letter_images[letter]
                if dedup is not None:
                    if dedup.contains(product):
                        duplicates += 1
                        continue
                    dedup.add(product)
                next_frontier.append((word + (letter,), product))
        ball.extend(next_frontier)
        frontier = next_frontier

    logger.info(f"Enumerated ball of radius {length}: {len(ball)} elements ({duplicates} duplicates merged)")
    return ball


def hyperbolic_words(rep: GroupRepresentation, length: int, tol: float = DEFAULT_SAMPLE_TOLERANCE, **ball_options) -> List[Word]:
    """Words of the ball whose images are hyperbolic, in shortlex order"""
    return [
        word
        for word, matrix in enumerate_ball(rep, length, **ball_options)
        if classify(matrix, tol) is ElementClass.HYPERBOLIC
    ]


# Sink Sampling
@dataclass(frozen=True)
class SinkSample:
    """Circularly sorted sinks of hyperbolic ball elements"""

    entries: Tuple[Tuple[Word, BoundaryPoint], ...]
    depth: int

    def __len__(self):
        return len(self.entries)

    @property
    def angles(self) -> np.ndarray:
        return np.array([point.theta for _, point in self.entries])

    @property
    def words(self) -> List[Word]:
        return [word for word, _ in self.entries]


def _merge_sorted(
    entries: List[Tuple[Word, BoundaryPoint]], merge_tolerance: float
) -> List[Tuple[Word, BoundaryPoint]]:
    merged: List[Tuple[Word, BoundaryPoint]] = []
    for word, point in entries:
        if merged and point.theta - merged[-1][1].theta < merge_tolerance:
            if shortlex_key(word) < shortlex_key(merged[-1][0]):
                merged[-1] = (word, merged[-1][1])
            continue
        merged.append((word, point))
    if len(merged) > 1 and merged[0][1].theta + TWO_PI - merged[-1][1].theta < merge_tolerance:
        last_word, _ = merged.pop()
        if shortlex_key(last_word) < shortlex_key(merged[0][0]):
            merged[0] = (last_word, merged[0][1])
    return merged


def sink_sample(
    rep: GroupRepresentation,
    length: int,
    tol: float = DEFAULT_SAMPLE_TOLERANCE,
    merge_tolerance: float = DEFAULT_MERGE_TOLERANCE,
    **ball_options,
) -> SinkSample:
    """
    Sinks of all hyperbolic elements in the ball of the given radius.

    Raises:
        EllipticFound: an element classifies elliptic, so the group is not torsion-free discrete
    """
    entries = []
    for word, matrix in enumerate_ball(rep, length, **ball_options):
        kind = classify(matrix, tol)
        if kind is ElementClass.ELLIPTIC:
            logger.error(f"Elliptic element {rep.format(word)} with trace {matrix.trace:.12g}")
            raise EllipticFound(f"Word {rep.format(word)} is elliptic (trace {matrix.trace:.12g})", word=word)
        if kind is ElementClass.HYPERBOLIC:
            entries.append((word, sink(matrix, tol)))

    entries.sort(key=lambda item: (item[1].theta, shortlex_key(item[0])))
    merged = _merge_sorted(entries, merge_tolerance)
    logger.info(f"Sink sample at depth {length}: {len(merged)} sinks from {len(entries)} hyperbolic words")
    return SinkSample(entries=tuple(merged), depth=length)


def circular_gaps(angles: np.ndarray) -> np.ndarray:
    """Counterclockwise gaps between circularly consecutive sorted angles"""
    ordered = np.sort(np.asarray(angles, dtype=float))
    return np.diff(np.append(ordered, ordered[0] + TWO_PI))


def max_gap(sample: SinkSample) -> float:
    """Largest angular gap between consecutive sinks"""
    if len(sample) == 0:
        raise EmptySample("Sink sample is empty")
    return float(circular_gaps(sample.angles).max())


# Discreteness diagnostics
def jorgensen_defects(rep: GroupRepresentation, words: Optional[Sequence[Word]] = None) -> List[Tuple[Word, Word, float]]:
    """
    Joergensen quantity |tr^2 A - 4| + |tr[A,B] - 2| over pairs of the given words.

    Values below 1 for a non-elementary pair witness non-discreteness; this is a diagnostic,
    never a certificate.
    """
    if words is None:
        words = [((g, 1),) for g in range(rep.rank)]
    results = []
    for i, first in enumerate(words):
        for second in words[i + 1:]:
            trace_first = np.trace(raw_product(rep, first))
            trace_commutator = np.trace(raw_product(rep, commutator(first, second)))
            value = abs(trace_first ** 2 - 4.0) + abs(trace_commutator - 2.0)
            results.append((first, second, float(value)))
            if value < 1.0:
                logger.warning(
                    f"Joergensen quantity {value:.4f} < 1 for ({rep.format(first)}, {rep.format(second)})"
                )
    return results
