"""
Marked hyperbolic structures and their two coordinate systems.

A marked structure is a pair (reference, target) of representations on the same generators.
phi_p records it by its normalized boundary map, phi_at by the target's character pinned
so that three anchor sinks sit at 0, 1 and infinity.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .boundary_map import (
    SampledCircleMap,
    compose,
    from_representations,
    invert,
    mobius_graph,
    sigma1_normalize,
    sup_distance,
)
from .exceptions import (
    AnchorMismatch,
    AnchorNotHyperbolic,
    AnchorOrientationNegative,
    AnchorSinksDegenerate,
    InputError,
    TypeMismatch,
)
from .fuchsian import (
    DEFAULT_SAMPLE_TOLERANCE,
    GroupRepresentation,
    Word,
    concat,
    enumerate_ball,
    hyperbolic_words,
    invert_word,
)
from .moebius import (
    ElementClass,
    MoebiusTransform,
    Orientation,
    angle_distances,
    circular_order,
    classify,
    moebius_from_triple,
    sink,
    visual_distance,
)

TYPE_CHECK_DEPTH = 4
DEFAULT_ANCHOR_SEPARATION = 0.1
ANCHOR_SEARCH_DEPTHS = (2, 3, 4)

Anchors = Tuple[Word, Word, Word]

logger = logging.getLogger(__name__)


def ball_words(rep: GroupRepresentation, length: int, **ball_options) -> List[Word]:
    """All words of the ball (any type), shortlex ordered"""
    return [word for word, _ in enumerate_ball(rep, length, **ball_options)]


def check_type_agreement(
    reference: GroupRepresentation,
    target: GroupRepresentation,
    length: int = TYPE_CHECK_DEPTH,
    tol: float = DEFAULT_SAMPLE_TOLERANCE,
    **ball_options,
) -> int:
    """
    Raise TypeMismatch on the first ball word classified differently in the two representations.

    Returns:
        Number of words checked
    """
    words = enumerate_ball(reference, length, **ball_options)
    for word, matrix in words:
        expected = classify(matrix, tol)
        actual = classify(target.evaluate(word), tol)
        if expected is not actual:
            label = reference.format(word)
            logger.error(f"Type mismatch on {label}: {expected.value} vs {actual.value}")
            raise TypeMismatch(
                f"Word {label} is {expected.value} in the reference but {actual.value} in the target", word=label
            )
    return len(words)


@dataclass(frozen=True)
class MarkedStructure:
    """A target representation read through a fixed reference representation"""

    reference: GroupRepresentation
    target: GroupRepresentation
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.reference.same_generators(self.target):
            raise InputError(
                f"Reference generators {self.reference.generator_names} differ from target "
                f"generators {self.target.generator_names}"
            )

    def validate(self, length: int = TYPE_CHECK_DEPTH, tol: float = DEFAULT_SAMPLE_TOLERANCE, **ball_options):
        checked = check_type_agreement(self.reference, self.target, length, tol, **ball_options)
        logger.debug(f"Marked structure {self.name or '<unnamed>'}: types agree on {checked} words")
        return self

    def with_target(self, target: GroupRepresentation, name: str = "") -> "MarkedStructure":
        return MarkedStructure(self.reference, target, name or self.name)


def conjugate_structure(ms: MarkedStructure, sigma: MoebiusTransform) -> MarkedStructure:
    """Same marked structure with the target conjugated by sigma"""
    return ms.with_target(ms.target.conjugate(sigma))


# Boundary-map coordinates
def rep_to_homeo(
    ms: MarkedStructure,
    length: int,
    tol: float = DEFAULT_SAMPLE_TOLERANCE,
    interpolation: str = "linear",
    **ball_options,
) -> SampledCircleMap:
    """Un-normalized boundary map pairing reference sinks with target sinks over the ball"""
    words = ball_words(ms.reference, length, **ball_options)
    return from_representations(ms.reference, ms.target, words, tol=tol, interpolation=interpolation)


def phi_p(
    ms: MarkedStructure,
    length: int,
    tol: float = DEFAULT_SAMPLE_TOLERANCE,
    interpolation: str = "linear",
    **ball_options,
) -> SampledCircleMap:
    """Canonical representative of the boundary map coset, fixing 0, 1 and infinity"""
    return sigma1_normalize(rep_to_homeo(ms, length, tol, interpolation, **ball_options))


@dataclass(frozen=True)
class ConsistencyRow:
    word: str
    deviation: float
    interpolated_deviation: float
    resolved: int


@dataclass(frozen=True)
class ConsistencyReport:
    """
    Deviation of F o reference(g) o F^-1 from target(g) on F's grid.

    deviation is measured at the samples w for which g w g^-1 is also a sample of F, so F is
    only read at its own pairs; interpolated_deviation covers the whole grid.
    """

    rows: Tuple[ConsistencyRow, ...]

    @property
    def max_deviation(self) -> float:
        return max((row.deviation for row in self.rows), default=0.0)

    @property
    def max_interpolated_deviation(self) -> float:
        return max((row.interpolated_deviation for row in self.rows), default=0.0)


def homeo_to_rep(
    bmap: SampledCircleMap,
    reference: GroupRepresentation,
    target: GroupRepresentation,
    words: Sequence[Word],
) -> ConsistencyReport:
    """Rebuild each target(g) as the boundary action F o reference(g) o F^-1 and measure the error"""
    inverse = invert(bmap)
    samples = {label: k for k, label in enumerate(bmap.labels or ()) if label is not None}
    rows = []
    for word in words:
        graph = mobius_graph(reference.evaluate(word), bmap.xs, bmap.interpolation)
        rebuilt = compose(bmap, compose(graph, inverse))
        expected = target.evaluate(word).apply_angles(rebuilt.xs)
        errors = angle_distances(rebuilt.ys, expected)

        conjugated = [
            (k, samples.get(concat(word, label, invert_word(word)))) for k, label in enumerate(rebuilt.labels or ())
        ]
        resolved = [(k, j) for k, j in conjugated if j is not None]
        if resolved:
            rows_k, rows_j = map(np.array, zip(*resolved))
            deviation = float(angle_distances(bmap.ys[rows_j], expected[rows_k]).max())
        else:
            deviation = 0.0
        rows.append(ConsistencyRow(reference.format(word), deviation, float(errors.max()), len(resolved)))
    report = ConsistencyReport(tuple(rows))
    logger.info(
        f"Boundary map reproduces {len(rows)} target elements within {report.max_deviation:.3e} "
        f"({report.max_interpolated_deviation:.3e} interpolated)"
    )
    return report


# Character coordinates
@dataclass(frozen=True)
class Character:
    """Representation conjugated so the anchor sinks are 0, 1 and infinity"""

    representation: GroupRepresentation
    anchor_words: Anchors

    @property
    def generator_names(self) -> Tuple[str, ...]:
        return self.representation.generator_names

    @property
    def matrices(self) -> Tuple[MoebiusTransform, ...]:
        return self.representation.images

    def to_dict(self) -> dict:
        rep = self.representation
        return {
            "anchors": [rep.format(word) for word in self.anchor_words],
            "generators": {name: image.to_list() for name, image in zip(rep.generator_names, rep.images)},
        }


def anchor_sinks(target: GroupRepresentation, anchors: Anchors, tol: float = DEFAULT_SAMPLE_TOLERANCE):
    points = []
    for word in anchors:
        element = target.evaluate(word)
        kind = classify(element, tol)
        if kind is not ElementClass.HYPERBOLIC:
            logger.error(f"Anchor {target.format(word)} is {kind.value}")
            raise AnchorNotHyperbolic(f"Anchor word {target.format(word)} is {kind.value} in the target")
        points.append(sink(element, tol))
    return tuple(points)


def phi_at(ms: MarkedStructure, anchors: Anchors, tol: float = DEFAULT_SAMPLE_TOLERANCE) -> Character:
    """
    Conjugate the target by M(s1, s2, s3)^-1 where s_i are the anchor sinks.

    Raises:
        AnchorNotHyperbolic: an anchor word is not hyperbolic in the target
        AnchorSinksDegenerate: two anchor sinks coincide
        AnchorOrientationNegative: the anchor sinks run clockwise
    """
    anchors = tuple(tuple(word) for word in anchors)
    if len(anchors) != 3:
        raise InputError(f"Expected three anchor words, got {len(anchors)}")
    first, second, third = anchor_sinks(ms.target, anchors, tol)
    orientation = circular_order(first, second, third)
    labels = ", ".join(ms.target.format(word) for word in anchors)
    if orientation is Orientation.DEGENERATE:
        raise AnchorSinksDegenerate(f"Anchor sinks of ({labels}) are not distinct")
    if orientation is Orientation.NEGATIVE:
        raise AnchorOrientationNegative(f"Anchor sinks of ({labels}) are negatively oriented")
    normalizer = moebius_from_triple(first, second, third).inverse()
    return Character(ms.target.conjugate(normalizer), anchors)


def char_distance(first: Character, second: Character) -> float:
    """Max over generators of the sign-minimized entrywise distance"""
    if first.generator_names != second.generator_names:
        raise AnchorMismatch(f"Generators differ: {first.generator_names} vs {second.generator_names}")
    if first.anchor_words != second.anchor_words:
        raise AnchorMismatch("Characters were normalized with different anchor words")
    return max(a.distance(b) for a, b in zip(first.matrices, second.matrices))


def default_anchors(
    rep: GroupRepresentation,
    separation: float = DEFAULT_ANCHOR_SEPARATION,
    tol: float = DEFAULT_SAMPLE_TOLERANCE,
) -> Anchors:
    """
    First three shortlex hyperbolic words whose sinks are pairwise further apart than separation,
    reordered to be positively oriented.
    """
    for depth in ANCHOR_SEARCH_DEPTHS:
        chosen: List[Tuple[Word, object]] = []
        for word in hyperbolic_words(rep, depth, tol):
            point = sink(rep.evaluate(word), tol)
            if all(visual_distance(point, other) > separation for _, other in chosen):
                chosen.append((word, point))
            if len(chosen) == 3:
                (a, pa), (b, pb), (c, pc) = chosen
                if circular_order(pa, pb, pc) is Orientation.NEGATIVE:
                    b, c = c, b
                logger.debug(f"Default anchors {[rep.format(w) for w in (a, b, c)]}")
                return a, b, c
    raise AnchorSinksDegenerate(
        f"No three hyperbolic words up to length {ANCHOR_SEARCH_DEPTHS[-1]} have sinks {separation} apart"
    )


def parse_anchors(
    rep: GroupRepresentation, text: Optional[str], separation: float = DEFAULT_ANCHOR_SEPARATION
) -> Anchors:
    """Comma separated anchor words, or the default anchors when text is empty"""
    if not text:
        return default_anchors(rep, separation)
    words = tuple(rep.word(part.strip()) for part in text.split(","))
    if len(words) != 3:
        raise InputError(f"Expected three comma separated anchor words, got {text!r}")
    return words


# Convergence
@dataclass(frozen=True)
class ConvergenceRow:
    index: int
    char_distance: float
    bmap_distance: float

    def to_dict(self) -> dict:
        return {"index": self.index, "char_dist": self.char_distance, "bmap_dist": self.bmap_distance}


def converge_report(
    sequence: Sequence[MarkedStructure],
    limit: MarkedStructure,
    length: int,
    anchors: Optional[Anchors] = None,
    tol: float = DEFAULT_SAMPLE_TOLERANCE,
    interpolation: str = "linear",
    **ball_options,
) -> List[ConvergenceRow]:
    """Distances of each structure to the limit in both coordinate systems"""
    for index, ms in enumerate(sequence):
        if ms.reference != limit.reference:
            raise InputError(f"Structure {index} does not share the limit's reference representation")
    if anchors is None:
        anchors = default_anchors(limit.target)

    limit_character = phi_at(limit, anchors, tol)
    limit_map = phi_p(limit, length, tol, interpolation, **ball_options)
    rows = []
    for index, ms in enumerate(sequence):
        character = phi_at(ms, anchors, tol)
        bmap = phi_p(ms, length, tol, interpolation, **ball_options)
        row = ConvergenceRow(index, char_distance(character, limit_character), sup_distance(bmap, limit_map))
        logger.info(f"Row {index}: char {row.char_distance:.3e}, bmap {row.bmap_distance:.3e}")
        rows.append(row)
    return rows


def report_columns(rows: Sequence[ConvergenceRow]) -> Tuple[np.ndarray, np.ndarray]:
    return (
        np.array([row.char_distance for row in rows]),
        np.array([row.bmap_distance for row in rows]),
    )
