"""
Mapping classes as automorphisms of the surface group, and their action on marked structures.
"""

import logging
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence, Tuple

from .boundary_map import (
    SampledCircleMap,
    compose,
    from_pairs,
    from_representations,
    invert,
    is_proper_power,
    sigma1_normalize,
    sup_distance,
)
from .exceptions import InvalidAutomorphism, MarkingsError
from .fuchsian import (
    DEFAULT_SAMPLE_TOLERANCE,
    GroupRepresentation,
    Word,
    concat,
    format_word,
    invert_word,
    parse_word,
    reduce_word,
)
from .marked_moduli import MarkedStructure, ball_words, phi_p
from .moebius import ElementClass, classify, sink

AUTOMORPHISM_TOLERANCE = 1e-7

logger = logging.getLogger(__name__)


def apply_to_word(images: Sequence[Word], word: Word) -> Word:
    """Image of a word under the automorphism given by generator images"""
    letters: List[Tuple[int, int]] = []
    for generator, exponent in word:
        image = images[generator]
        letters.extend(image if exponent > 0 else invert_word(image))
    return reduce_word(letters)


@dataclass(frozen=True)
class MappingClass:
    """psi_* on generators together with psi_*^-1"""

    generator_names: Tuple[str, ...]
    images: Tuple[Word, ...]
    inverse_images: Tuple[Word, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "generator_names", tuple(self.generator_names))
        object.__setattr__(self, "images", tuple(reduce_word(w) for w in self.images))
        object.__setattr__(self, "inverse_images", tuple(reduce_word(w) for w in self.inverse_images))
        rank = len(self.generator_names)
        if len(self.images) != rank or len(self.inverse_images) != rank:
            raise InvalidAutomorphism(
                f"Mapping class {self.name or '<unnamed>'} needs images and inverse images for all {rank} generators"
            )
        for word in self.images + self.inverse_images:
            for generator, _ in word:
                if not 0 <= generator < rank:
                    raise InvalidAutomorphism(f"Image refers to unknown generator index {generator}")

    @classmethod
    def from_dict(cls, data: Mapping, generator_names: Sequence[str], name: str = "") -> "MappingClass":
        """Build from {"images": {"A": "B A"}, "inverse_images": {...}} text words"""
        names = tuple(generator_names)
        try:
            images = [parse_word(data["images"][g], names) for g in names]
            inverse_images = [parse_word(data["inverse_images"][g], names) for g in names]
        except KeyError as exc:
            raise InvalidAutomorphism(f"Mapping class is missing an image for generator {exc}") from exc
        except MarkingsError as exc:
            raise InvalidAutomorphism(f"Mapping class word could not be parsed: {exc}") from exc
        return cls(names, images, inverse_images, name or data.get("name", ""))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "images": {g: format_word(w, self.generator_names) for g, w in zip(self.generator_names, self.images)},
            "inverse_images": {
                g: format_word(w, self.generator_names) for g, w in zip(self.generator_names, self.inverse_images)
            },
        }

    def apply(self, word: Word) -> Word:
        return apply_to_word(self.images, word)

    def apply_inverse(self, word: Word) -> Word:
        return apply_to_word(self.inverse_images, word)

    def validate(self, reference: GroupRepresentation, tol: float = AUTOMORPHISM_TOLERANCE) -> "MappingClass":
        """
        Check that images and inverse images undo each other and that peripheral words stay peripheral.

        Free groups are checked exactly on words, groups with relators numerically in the reference.

        Raises:
            InvalidAutomorphism: on the first failed check
        """
        if reference.generator_names != self.generator_names:
            raise InvalidAutomorphism(
                f"Mapping class generators {self.generator_names} differ from {reference.generator_names}"
            )
        for g in range(len(self.generator_names)):
            letter = ((g, 1),)
            for there, back in ((self.images, self.inverse_images), (self.inverse_images, self.images)):
                round_trip = apply_to_word(back, apply_to_word(there, letter))
                if reference.relators:
                    defect = reference.evaluate(round_trip).distance(reference.evaluate(letter))
                    ok = defect < tol
                else:
                    ok = round_trip == letter
                if not ok:
                    logger.error(f"{self.name or 'mapping class'}: generator {self.generator_names[g]} not restored")
                    raise InvalidAutomorphism(
                        f"Images and inverse images do not compose to the identity on {self.generator_names[g]}"
                    )
        self._check_peripherals(reference, tol)
        return self

    def _check_peripherals(self, reference: GroupRepresentation, tol: float):
        peripheral_traces = [abs(reference.evaluate(w).trace) for w in reference.peripheral_words]
        for word in reference.peripheral_words:
            image = reference.evaluate(self.apply(word))
            parabolic = classify(image, tol) is ElementClass.PARABOLIC
            matches = any(abs(abs(image.trace) - trace) < tol for trace in peripheral_traces)
            if not (parabolic and matches):
                raise InvalidAutomorphism(
                    f"Peripheral word {reference.format(word)} maps to a non-peripheral element"
                )

    def __matmul__(self, other: "MappingClass") -> "MappingClass":
        return compose_classes(self, other)


def identity_class(generator_names: Sequence[str]) -> MappingClass:
    letters = [((g, 1),) for g in range(len(generator_names))]
    return MappingClass(tuple(generator_names), letters, letters, "identity")


def compose_classes(first: MappingClass, second: MappingClass) -> MappingClass:
    """first o second: g -> first(second(g))"""
    if first.generator_names != second.generator_names:
        raise InvalidAutomorphism("Cannot compose mapping classes on different generators")
    images = [apply_to_word(first.images, word) for word in second.images]
    inverse_images = [apply_to_word(second.inverse_images, word) for word in first.inverse_images]
    return MappingClass(first.generator_names, images, inverse_images, f"{first.name}*{second.name}")


def inverse_class(mc: MappingClass) -> MappingClass:
    name = mc.name[:-1] if mc.name.endswith("'") else f"{mc.name}'"
    return MappingClass(mc.generator_names, mc.inverse_images, mc.images, name)


def inner(generator_names: Sequence[str], word: Word) -> MappingClass:
    """Inner automorphism g -> w g w^-1"""
    rank = len(generator_names)
    letters = [((g, 1),) for g in range(rank)]
    images = [concat(word, letter, invert_word(word)) for letter in letters]
    inverse_images = [concat(invert_word(word), letter, word) for letter in letters]
    return MappingClass(tuple(generator_names), images, inverse_images, f"inner({format_word(word, generator_names)})")


# Punctured torus presets on generators (A, B)
def torus_twist_a(generator_names: Sequence[str] = ("A", "B")) -> MappingClass:
    """A -> A, B -> BA"""
    a, b = ((0, 1),), ((1, 1),)
    return MappingClass(tuple(generator_names), [a, concat(b, a)], [a, concat(b, invert_word(a))], "T_A")


def torus_twist_b(generator_names: Sequence[str] = ("A", "B")) -> MappingClass:
    """A -> AB^-1, B -> B"""
    a, b = ((0, 1),), ((1, 1),)
    return MappingClass(tuple(generator_names), [concat(a, invert_word(b)), b], [concat(a, b), b], "T_B")


PRESETS = {
    "identity": lambda names: identity_class(names),
    "T_A": torus_twist_a,
    "T_B": torus_twist_b,
    "T_A'": lambda names: inverse_class(torus_twist_a(names)),
    "T_B'": lambda names: inverse_class(torus_twist_b(names)),
}


def get_preset(name: str, generator_names: Sequence[str]) -> MappingClass:
    if name not in PRESETS:
        raise ValueError(f"Unknown mapping class preset: {name}")
    return PRESETS[name](tuple(generator_names))


# Action on marked structures
def act(ms: MarkedStructure, mc: MappingClass, validate: bool = True) -> MarkedStructure:
    """Change the marking from f to f o psi^-1: target'(g) = target(psi^-1(g))"""
    if validate:
        mc.validate(ms.reference)
        ms.validate()
    images = [ms.target.evaluate(word) for word in mc.inverse_images]
    logger.info(f"Applied {mc.name or 'mapping class'} to {ms.name or 'marked structure'}")
    return ms.with_target(ms.target.with_images(images))


def psi_p(
    mc: MappingClass,
    reference: GroupRepresentation,
    length: int,
    tol: float = DEFAULT_SAMPLE_TOLERANCE,
    interpolation: str = "linear",
    words: Optional[Sequence[Word]] = None,
    **ball_options,
) -> SampledCircleMap:
    """
    Boundary map pairing sinks of reference(g) with sinks of reference(psi(g)).

    Samples are taken over the ball of the given depth unless explicit source words are passed.
    """
    if words is None:
        words = ball_words(reference, length, **ball_options)
    xs, ys, labels = [], [], []
    for word in words:
        if not word or is_proper_power(word):
            continue
        element = reference.evaluate(word)
        if classify(element, tol) is not ElementClass.HYPERBOLIC:
            continue
        image = reference.evaluate(mc.apply(word))
        if classify(image, tol) is not ElementClass.HYPERBOLIC:
            raise InvalidAutomorphism(
                f"{mc.name or 'mapping class'} sends hyperbolic {reference.format(word)} to a non-hyperbolic element"
            )
        xs.append(sink(element, tol).theta)
        ys.append(sink(image, tol).theta)
        labels.append(word)
    return from_pairs(xs, ys, labels, interpolation=interpolation)


def action_formula_sides(
    ms: MarkedStructure,
    mc: MappingClass,
    length: int,
    tol: float = DEFAULT_SAMPLE_TOLERANCE,
    interpolation: str = "linear",
    **ball_options,
) -> Tuple[SampledCircleMap, SampledCircleMap]:
    """
    phi_p of the acted structure and the normalized F o G^-1, sampled on the same points.

    F and G are sampled over the pulled-back words psi^-1(v), v in the ball, so G^-1 has
    its samples at the sinks of reference(v) like the left side and F is only read at its
    own samples.
    """
    acted = act(ms, mc)
    lhs = phi_p(acted, length, tol, interpolation, **ball_options)
    pulled = [mc.apply_inverse(word) for word in ball_words(ms.reference, length, **ball_options)]
    homeo = from_representations(ms.reference, ms.target, pulled, tol=tol, interpolation=interpolation)
    twist_map = psi_p(mc, ms.reference, length, tol, interpolation, words=pulled)
    rhs = sigma1_normalize(compose(homeo, invert(twist_map)))
    return lhs, rhs


def verify_action_formula(
    ms: MarkedStructure,
    mc: MappingClass,
    length: int,
    tol: float = DEFAULT_SAMPLE_TOLERANCE,
    interpolation: str = "linear",
    **ball_options,
) -> float:
    """sup distance between phi_p of the acted structure and the normalized F o G^-1"""
    lhs, rhs = action_formula_sides(ms, mc, length, tol, interpolation, **ball_options)
    defect = sup_distance(lhs, rhs)
    logger.info(f"Action formula defect for {mc.name or 'mapping class'} at depth {length}: {defect:.3e}")
    return defect
