"""
Holonomy representations from Fenchel-Nielsen pants data.

Each pair of pants gets a standard two-generator group whose boundary words X, Y, (XY)^-1
all see the pants on the same side of their axes. Tree gluings amalgamate pants along a
cuff, remaining gluings add a stable letter, and the resulting presentation is simplified
by Tietze moves to a free group (punctured surfaces) or a one-relator group (closed ones).
"""

import logging
import math
import string
from collections import Counter, deque
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .exceptions import InputError, InvalidGluing, UnknownCuff
from .fuchsian import (
    CuffData,
    GroupRepresentation,
    Word,
    cyclically_reduce,
    format_word,
    invert_word,
    raw_product,
    reduce_word,
    relabel,
    substitute,
)
from .moebius import (
    BoundaryPoint,
    MoebiusTransform,
    ccw_arc,
    fixed_points,
    moebius_from_triple,
    translation_along,
    translation_length,
)

Slot = Tuple[int, int]

# z -> -1/z: swaps 0 and infinity, fixes i
SWAP = MoebiusTransform(0.0, -1.0, 1.0, 0.0)


@dataclass(frozen=True)
class CuffSlot:
    """A boundary slot of a pair of pants: a cusp when length is None"""

    length: Optional[float] = None

    @property
    def is_cusp(self) -> bool:
        return self.length is None

    def to_dict(self) -> dict:
        return {"cusp": True} if self.is_cusp else {"length": self.length}


@dataclass(frozen=True)
class Pants:
    cuffs: Tuple[CuffSlot, CuffSlot, CuffSlot]


@dataclass(frozen=True)
class Gluing:
    source: Slot
    target: Slot
    twist: float = 0.0


@dataclass(frozen=True)
class PantsDecomposition:
    pants: Tuple[Pants, ...]
    gluings: Tuple[Gluing, ...] = ()

    # Serialization
    @classmethod
    def from_dict(cls, data: dict) -> "PantsDecomposition":
        try:
            pants = tuple(
                Pants(tuple(CuffSlot(None if cuff.get("cusp") else float(cuff["length"])) for cuff in entry["cuffs"]))
                for entry in data["pants"]
            )
            gluings = tuple(
                Gluing(tuple(g["from"]), tuple(g["to"]), float(g.get("twist", 0.0))) for g in data.get("gluings", [])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"Malformed pants decomposition: {exc}") from exc
        return cls(pants, gluings)

    def to_dict(self) -> dict:
        return {
            "pants": [{"cuffs": [cuff.to_dict() for cuff in p.cuffs]} for p in self.pants],
            "gluings": [
                {"from": list(g.source), "to": list(g.target), "twist": g.twist} for g in self.gluings
            ],
        }

    # Validation
    def slot(self, slot: Slot) -> CuffSlot:
        pants_index, cuff_index = slot
        if not (0 <= pants_index < len(self.pants) and 0 <= cuff_index < 3):
            raise InvalidGluing(f"Slot {list(slot)} does not exist", slot=slot)
        return self.pants[pants_index].cuffs[cuff_index]

    def partners(self) -> Dict[Slot, Tuple[Slot, int]]:
        """slot -> (glued slot, gluing index)"""
        result: Dict[Slot, Tuple[Slot, int]] = {}
        for index, gluing in enumerate(self.gluings):
            result[gluing.source] = (gluing.target, index)
            result[gluing.target] = (gluing.source, index)
        return result

    def validate(self):
        """Check lengths, gluing rules and connectivity"""
        if not self.pants:
            raise InvalidGluing("Decomposition has no pants")
        for p_index, p in enumerate(self.pants):
            if len(p.cuffs) != 3:
                raise InvalidGluing(f"Pants {p_index} has {len(p.cuffs)} cuffs, expected 3", slot=(p_index, None))
            for c_index, cuff in enumerate(p.cuffs):
                if not cuff.is_cusp and not (cuff.length > 0.0 and math.isfinite(cuff.length)):
                    raise InvalidGluing(f"Slot {[p_index, c_index]} has invalid length {cuff.length}", slot=(p_index, c_index))

        used: Set[Slot] = set()
        for gluing in self.gluings:
            first, second = self.slot(gluing.source), self.slot(gluing.target)
            if gluing.source == gluing.target:
                raise InvalidGluing(f"Slot {list(gluing.source)} is glued to itself", slot=gluing.source)
            for slot, cuff in ((gluing.source, first), (gluing.target, second)):
                if cuff.is_cusp:
                    raise InvalidGluing(f"Slot {list(slot)} is a cusp and cannot be glued", slot=slot)
                if slot in used:
                    raise InvalidGluing(f"Slot {list(slot)} appears in more than one gluing", slot=slot)
                used.add(slot)
            if first.length != second.length:
                raise InvalidGluing(
                    f"Length mismatch gluing {list(gluing.source)} ({first.length}) to "
                    f"{list(gluing.target)} ({second.length})",
                    slot=gluing.target,
                )

        for p_index, p in enumerate(self.pants):
            for c_index, cuff in enumerate(p.cuffs):
                if not cuff.is_cusp and (p_index, c_index) not in used:
                    raise InvalidGluing(f"Slot {[p_index, c_index]} is dangling", slot=(p_index, c_index))

        seen = {0}
        queue = deque([0])
        adjacency: Dict[int, Set[int]] = {i: set() for i in range(len(self.pants))}
        for gluing in self.gluings:
            adjacency[gluing.source[0]].add(gluing.target[0])
            adjacency[gluing.target[0]].add(gluing.source[0])
        while queue:
            for neighbour in adjacency[queue.popleft()]:
                if neighbour not in seen:
                    seen.add(neighbour)
                    queue.append(neighbour)
        if len(seen) != len(self.pants):
            missing = sorted(set(range(len(self.pants))) - seen)
            raise InvalidGluing(f"Pants {missing} are not connected to pants 0", slot=(missing[0], None))
        return True


# Suite surfaces
def _slots(*lengths) -> Pants:
    return Pants(tuple(CuffSlot(length) for length in lengths))


def three_cusp_sphere() -> PantsDecomposition:
    return PantsDecomposition((_slots(None, None, None),))


def punctured_torus_decomposition(length: float, twist: float = 0.0) -> PantsDecomposition:
    return PantsDecomposition((_slots(length, length, None),), (Gluing((0, 0), (0, 1), twist),))


def four_cusp_sphere_decomposition(length: float = 1.0, twist: float = 0.0) -> PantsDecomposition:
    return PantsDecomposition(
        (_slots(None, None, length), _slots(length, None, None)),
        (Gluing((0, 2), (1, 0), twist),),
    )


def genus_two_decomposition(
    lengths: Sequence[float] = (1.0, 1.5, 2.0), twists: Sequence[float] = (0.0, 0.1, -0.4)
) -> PantsDecomposition:
    return PantsDecomposition(
        (_slots(*lengths), _slots(*lengths)),
        tuple(Gluing((0, k), (1, k), twists[k]) for k in range(3)),
    )


def standard_pants_generators(pants: Pants) -> Tuple[MoebiusTransform, MoebiusTransform]:
    """
    X = [[u, 2], [0, 1/u]], Y = [[v, 0], [t, 1/v]] with tr X = 2cosh(l0/2), tr Y = 2cosh(l1/2)
    and tr XY = -2cosh(l2/2); cusps are the exactly parabolic limits.
    """
    lengths = [cuff.length or 0.0 for cuff in pants.cuffs]
    u = math.exp(lengths[0] / 2.0)
    v = math.exp(lengths[1] / 2.0)
    product_trace = -2.0 * math.cosh(lengths[2] / 2.0)
    t = (product_trace - u * v - 1.0 / (u * v)) / 2.0
    return MoebiusTransform(u, 2.0, 0.0, 1.0 / u), MoebiusTransform(v, 0.0, t, 1.0 / v)


class PantsBuilder:
    """Assembles a surface group representation from a pants decomposition"""

    def __init__(self, decomposition: PantsDecomposition):
        self.decomposition = decomposition
        self.logger = logging.getLogger(self.__class__.__name__)
        self.partners = decomposition.partners()
        self.pants_count = len(decomposition.pants)

    # Internal generator bookkeeping: X_i = 2i, Y_i = 2i + 1, stable letters after
    def _slot_word(self, slot: Slot) -> Word:
        pants_index, cuff_index = slot
        x, y = 2 * pants_index, 2 * pants_index + 1
        if cuff_index == 0:
            return ((x, 1),)
        if cuff_index == 1:
            return ((y, 1),)
        return ((y, -1), (x, -1))

    def _neighbour_slot(self, slot: Slot) -> Slot:
        """Slot whose perpendicular marks the zero twist on this cuff"""
        partner = self.partners.get(slot)
        if partner is not None and partner[0][0] == slot[0]:
            return partner[0]
        return slot[0], (slot[1] + 1) % 3

    def _spanning_tree(self):
        """BFS tree from pants 0: parent edges by child and the gluings left over"""
        parent_edge: Dict[int, Tuple[int, Slot, Slot]] = {}
        visited = {0}
        order = [0]
        queue = deque([0])
        while queue:
            current = queue.popleft()
            for cuff_index in range(3):
                slot = (current, cuff_index)
                if slot not in self.partners:
                    continue
                other, gluing_index = self.partners[slot]
                if other[0] not in visited:
                    visited.add(other[0])
                    parent_edge[other[0]] = (gluing_index, slot, other)
                    order.append(other[0])
                    queue.append(other[0])
        tree = {edge[0] for edge in parent_edge.values()}
        leftover = [i for i in range(len(self.decomposition.gluings)) if i not in tree]
        return order, parent_edge, leftover

    def _subtree(self, root: int, parent_edge) -> Set[int]:
        children: Dict[int, List[int]] = {}
        for child, (_, parent_slot, _) in parent_edge.items():
            children.setdefault(parent_slot[0], []).append(child)
        members, stack = set(), [root]
        while stack:
            node = stack.pop()
            members.add(node)
            stack.extend(children.get(node, []))
        return members

    @staticmethod
    def frame(cuff: MoebiusTransform, neighbour: MoebiusTransform) -> MoebiusTransform:
        """
        The element sending 0, infinity to the repelling, attracting fixed points of the cuff
        and i to the foot of the perpendicular from the neighbour's axis (or cusp point).
        """
        attracting, repelling = fixed_points(cuff)
        third = BoundaryPoint(repelling.theta + ccw_arc(repelling, attracting) / 2.0)
        normalizer = moebius_from_triple(repelling, third, attracting)
        back = normalizer.inverse()
        ends = [back.apply_disk(point.disk) for point in fixed_points(neighbour, 1e-7)]
        reals = [BoundaryPoint.from_disk(w).to_extended_real() for w in ends]
        if len(reals) == 1:
            reals = reals * 2
        height_squared = reals[0] * reals[1]
        if not (height_squared > 0.0 and math.isfinite(height_squared)):
            raise InvalidGluing(f"Neighbouring boundary crosses the cuff axis ({reals})")
        return normalizer @ MoebiusTransform.diagonal(0.5 * math.log(height_squared))

    def build(self) -> GroupRepresentation:
        self.decomposition.validate()
        pants = self.decomposition.pants
        gluings = self.decomposition.gluings
        standard = [standard_pants_generators(p) for p in pants]
        order, parent_edge, leftover = self._spanning_tree()
        stable_base = 2 * self.pants_count

        def standard_element(slot: Slot) -> MoebiusTransform:
            x, y = standard[slot[0]]
            return [x, y, (x @ y).inverse()][slot[1]]

        positions: Dict[int, MoebiusTransform] = {0: MoebiusTransform.identity()}

        def positioned(slot: Slot) -> MoebiusTransform:
            return standard_element(slot).conjugate_by(positions[slot[0]])

        relations: List[Word] = []
        for child in order[1:]:
            gluing_index, parent_slot, child_slot = parent_edge[child]
            twist = gluings[gluing_index].twist
            parent_cuff = positioned(parent_slot)
            parent_frame = self.frame(parent_cuff, positioned(self._neighbour_slot(parent_slot)))
            child_frame = self.frame(standard_element(child_slot), standard_element(self._neighbour_slot(child_slot)))
            positions[child] = translation_along(parent_cuff, -twist) @ parent_frame @ SWAP @ child_frame.inverse()
            relations.append(self._slot_word(parent_slot) + self._slot_word(child_slot))
            self.logger.debug(f"Amalgamated pants {child} along {list(parent_slot)} with twist {twist}")

        images: Dict[int, MoebiusTransform] = {}
        for index in range(self.pants_count):
            x, y = standard[index]
            images[2 * index] = x.conjugate_by(positions[index])
            images[2 * index + 1] = y.conjugate_by(positions[index])

        for k, gluing_index in enumerate(leftover):
            gluing = gluings[gluing_index]
            source_cuff, target_cuff = positioned(gluing.source), positioned(gluing.target)
            source_frame = self.frame(source_cuff, positioned(self._neighbour_slot(gluing.source)))
            target_frame = self.frame(target_cuff, positioned(self._neighbour_slot(gluing.target)))
            stable = translation_along(source_cuff, -gluing.twist) @ source_frame @ SWAP @ target_frame.inverse()
            images[stable_base + k] = stable
            letter = ((stable_base + k, 1),)
            relations.append(
                reduce_word(letter + self._slot_word(gluing.target) + invert_word(letter) + self._slot_word(gluing.source))
            )
            self.logger.debug(f"Added stable letter for gluing {gluing_index} with twist {gluing.twist}")

        return self._present(images, relations, order, parent_edge, leftover)

    def _eliminate(self, relations: List[Word], tracked: Dict[object, Word], stable_base: int):
        """Tietze moves: solve relations for generators occurring exactly once"""
        relations = [cyclically_reduce(r) for r in relations]
        eliminated: Set[int] = set()
        progress = True
        while progress:
            progress = False
            for index, relation in enumerate(relations):
                counts = Counter(g for g, _ in relation)
                once = [g for g, count in counts.items() if count == 1]
                if not once:
                    continue
                ordinary = [g for g in once if g < stable_base]
                generator = max(ordinary) if ordinary else max(once)
                position = next(i for i, (g, _) in enumerate(relation) if g == generator)
                exponent = relation[position][1]
                before, after = relation[:position], relation[position + 1:]
                solved = reduce_word(invert_word(before) + invert_word(after))
                replacement = solved if exponent > 0 else invert_word(solved)

                remaining = relations[:index] + relations[index + 1:]
                relations = [cyclically_reduce(substitute(r, generator, replacement)) for r in remaining]
                relations = [r for r in relations if r]
                for key, word in tracked.items():
                    tracked[key] = substitute(word, generator, replacement)
                eliminated.add(generator)
                self.logger.debug(f"Eliminated internal generator {generator}")
                progress = True
                break
        return relations, eliminated

    def _present(self, images, relations, order, parent_edge, leftover) -> GroupRepresentation:
        decomposition = self.decomposition
        stable_base = 2 * self.pants_count

        tracked: Dict[object, Word] = {}
        for p_index in range(self.pants_count):
            for c_index in range(3):
                tracked[(p_index, c_index)] = self._slot_word((p_index, c_index))

        relators, eliminated = self._eliminate(relations, tracked, stable_base)
        kept = [g for g in sorted(images) if g not in eliminated]
        mapping = {g: i for i, g in enumerate(kept)}
        names = generator_names(len(kept))

        cusp_words = [
            relabel(tracked[(p, c)], mapping)
            for p, piece in enumerate(decomposition.pants)
            for c, cuff in enumerate(piece.cuffs)
            if cuff.is_cusp
        ]

        stable_ends = {
            stable_base + k: (decomposition.gluings[g].source[0], decomposition.gluings[g].target[0])
            for k, g in enumerate(leftover)
        }
        cuffs: List[CuffData] = []
        tree_edges = {edge[0]: (child, edge) for child, edge in parent_edge.items()}
        for gluing_index, gluing in enumerate(decomposition.gluings):
            if gluing_index in tree_edges:
                child, (_, parent_slot, child_slot) = tree_edges[gluing_index]
                side = self._subtree(child, parent_edge)
                actions = {}
                for g in kept:
                    if g < stable_base:
                        if g // 2 in side:
                            actions[mapping[g]] = "conjugate"
                        continue
                    source_in, target_in = (end in side for end in stable_ends[g])
                    if source_in and target_in:
                        actions[mapping[g]] = "conjugate"
                    elif source_in:
                        actions[mapping[g]] = "left"
                    elif target_in:
                        actions[mapping[g]] = "right"
                word_slot, partner_slot = parent_slot, child_slot
            else:
                stable = stable_base + leftover.index(gluing_index)
                actions = {mapping[stable]: "left"}
                word_slot, partner_slot = gluing.source, gluing.target
            cuffs.append(
                CuffData(
                    name=f"P{word_slot[0]}.{word_slot[1]}-P{partner_slot[0]}.{partner_slot[1]}",
                    word=relabel(tracked[word_slot], mapping),
                    partner_word=relabel(tracked[partner_slot], mapping),
                    length=decomposition.slot(word_slot).length,
                    twist=gluing.twist,
                    actions=tuple(sorted(actions.items())),
                )
            )

        rep = GroupRepresentation(
            generator_names=tuple(names),
            images=tuple(images[g] for g in kept),
            relators=tuple(relabel(r, mapping) for r in relators),
            peripheral_words=tuple(cusp_words),
            cuffs=tuple(cuffs),
        )
        self.logger.info(
            f"Built surface group on {rep.rank} generators with {len(rep.relators)} relator(s), "
            f"{len(rep.peripheral_words)} cusp(s) and {len(rep.cuffs)} cuff(s)"
        )
        return rep


def generator_names(count: int) -> List[str]:
    letters = string.ascii_uppercase
    return [letters[i] if i < len(letters) else f"G{i}" for i in range(count)]


def build_representation(decomposition: PantsDecomposition) -> GroupRepresentation:
    return PantsBuilder(decomposition).build()


# Suite representations
def _hyperboloid_matrix(x: np.ndarray) -> np.ndarray:
    return np.array([[x[0] + x[1], x[2]], [x[2], x[0] - x[1]]])


def _hyperboloid_adjugate(x: np.ndarray) -> np.ndarray:
    return np.array([[x[0] - x[1], -x[2]], [-x[2], x[0] + x[1]]])


def balanced_position(images: Sequence[MoebiusTransform]) -> MoebiusTransform:
    """
    Conjugator tau minimizing the sum of squared Frobenius norms of tau g tau^-1.

    Writing Q = tau^T tau = [[x0 + x1, x2], [x2, x0 - x1]] with x0^2 - x1^2 - x2^2 = 1, the sum
    is the quadratic form x^T S x; its minimum on the hyperboloid is the timelike eigenvector
    of J S with J = diag(1, -1, -1).
    """
    matrices = [image.matrix for image in images]
    basis = np.eye(3)
    form = np.array(
        [
            [
                sum(np.trace(m @ _hyperboloid_adjugate(basis[i]) @ m.T @ _hyperboloid_matrix(basis[j])) for m in matrices)
                for j in range(3)
            ]
            for i in range(3)
        ]
    )
    form = (form + form.T) / 2.0
    minkowski = np.diag([1.0, -1.0, -1.0])
    values, vectors = np.linalg.eig(minkowski @ form)

    best: Optional[Tuple[float, np.ndarray]] = None
    for k in range(3):
        if abs(values[k].imag) > 1e-9 * max(1.0, abs(values[k].real)):
            continue
        x = vectors[:, k].real
        norm = float(x @ minkowski @ x)
        if norm <= 0.0:
            continue
        x = x / math.sqrt(norm)
        if x[0] < 0.0:
            x = -x
        cost = float(x @ form @ x)
        if best is None or cost < best[0]:
            best = (cost, x)
    if best is None:
        logging.getLogger(__name__).warning("No balanced position found; keeping the representation as built")
        return MoebiusTransform.identity()
    upper = np.linalg.cholesky(_hyperboloid_matrix(best[1])).T
    return MoebiusTransform.from_matrix(upper)


def frobenius_scale(rep: GroupRepresentation) -> float:
    """Largest Frobenius norm among the generator images"""
    return max(float(np.linalg.norm(image.matrix)) for image in rep.images)


def balance(rep: GroupRepresentation) -> GroupRepresentation:
    """rep conjugated so that its generators are as small as possible"""
    balanced = rep.conjugate(balanced_position(rep.images))
    logging.getLogger(__name__).info(
        f"Balanced generators: largest norm {frobenius_scale(rep):.3f} -> {frobenius_scale(balanced):.3f}"
    )
    return balanced


def punctured_torus(length: float, twist: float = 0.0) -> GroupRepresentation:
    """Generators A (cuff) and B (transversal)"""
    return build_representation(punctured_torus_decomposition(length, twist))


def four_cusp_sphere(length: float = 1.0, twist: float = 0.0) -> GroupRepresentation:
    """Generators A, B, C; built in balanced position"""
    return balance(build_representation(four_cusp_sphere_decomposition(length, twist)))


def genus_two(
    lengths: Sequence[float] = (1.0, 1.5, 2.0), twists: Sequence[float] = (0.0, 0.1, -0.4)
) -> GroupRepresentation:
    return balance(build_representation(genus_two_decomposition(lengths, twists)))


def thrice_punctured_sphere() -> GroupRepresentation:
    return build_representation(three_cusp_sphere())


# Twisting
def find_cuff(rep: GroupRepresentation, cuff_word: Word) -> CuffData:
    cuff_word = reduce_word(cuff_word)
    for cuff in rep.cuffs:
        for candidate in (cuff.word, cuff.partner_word):
            if cuff_word in (candidate, invert_word(candidate)):
                return cuff
    raise UnknownCuff(f"No twist metadata for cuff {rep.format(cuff_word)}")


def twist_deform(rep: GroupRepresentation, cuff_word: Word, delta: float) -> GroupRepresentation:
    """
    Change the twist along a cuff by delta (hyperbolic length).

    Generators on the far side of the cuff are conjugated by the translation of
    length delta along the cuff axis; stable letters crossing it are multiplied on one side.
    A full twist delta = length equals precomposition with a Dehn twist.
    """
    cuff = find_cuff(rep, cuff_word)
    shift = translation_along(rep.evaluate(cuff.word), -delta)
    images = list(rep.images)
    for generator, action in cuff.actions:
        image = images[generator]
        if action == "conjugate":
            images[generator] = image.conjugate_by(shift)
        elif action == "left":
            images[generator] = shift @ image
        elif action == "right":
            images[generator] = image @ shift.inverse()
    cuffs = tuple(replace(c, twist=c.twist + delta) if c is cuff else c for c in rep.cuffs)
    logging.getLogger(__name__).info(f"Twisted cuff {cuff.name} by {delta}")
    return replace(rep, images=tuple(images), cuffs=cuffs)


# Postcondition diagnostics
def cuff_table(rep: GroupRepresentation) -> List[dict]:
    """Expected versus measured cuff lengths and trace defects"""
    rows = []
    for cuff in rep.cuffs:
        element = rep.evaluate(cuff.word)
        expected_trace = 2.0 * math.cosh(cuff.length / 2.0)
        rows.append(
            {
                "cuff": cuff.name,
                "word": format_word(cuff.word, rep.generator_names),
                "length": cuff.length,
                "measured_length": translation_length(element, 1e-12),
                "trace_defect": abs(abs(element.trace) - expected_trace),
            }
        )
    return rows


def fricke_defect(rep: GroupRepresentation) -> float:
    """|tr[A,B] + 2| for the first two generators, computed with SL(2,R) lifts"""
    commutator_word = ((0, 1), (1, 1), (0, -1), (1, -1))
    return float(abs(np.trace(raw_product(rep, commutator_word)) + 2.0))
