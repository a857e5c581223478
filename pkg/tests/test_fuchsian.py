"""
Word, ball enumeration and sink sampling tests.
"""

import math

import numpy as np
import pytest

from hyperbolic_markings.exceptions import BallTooLarge, EllipticFound, EmptySample, UnknownGenerator
from hyperbolic_markings.fuchsian import (
    GroupRepresentation,
    SinkSample,
    concat,
    enumerate_ball,
    evaluate_word,
    format_word,
    invert_word,
    jorgensen_defects,
    max_gap,
    parse_word,
    projected_ball_size,
    reduce_word,
    sink_sample,
)
from hyperbolic_markings.moebius import (
    BoundaryPoint,
    MoebiusTransform,
    angle_distances,
    apply_boundary,
    sink,
    visual_distance,
)
from tests.base_test import BaseTest

NAMES = ("A", "B")
A = ((0, 1),)
B = ((1, 1),)


def random_word(rng, rank, length):
    letters = [(int(rng.integers(rank)), int(rng.choice((-1, 1)))) for _ in range(length)]
    return reduce_word(letters)


def cyclic_rep():
    return GroupRepresentation(("A",), (MoebiusTransform(2.0, 0.0, 0.0, 0.5),))


class TestWords(BaseTest):
    """Test class for word handling"""

    @pytest.fixture(autouse=True)
    def setup_teardown(self, request):
        """Setup and teardown for each test"""
        super().before_each(request)
        yield
        super().after_each(request)

    @pytest.mark.smoke
    @pytest.mark.fuchsian
    @pytest.mark.parametrize("text", ["A B A' B'", "B' A B A'", "A A A", "1"])
    def test_parse_and_format(self, text):
        assert format_word(parse_word(text, NAMES), NAMES) == text, f"'{text}' should read back unchanged"

    @pytest.mark.fuchsian
    def test_parse_accepts_compact_and_superscript_forms(self):
        expected = (A[0], B[0], (0, -1))
        assert parse_word("ABA'", NAMES) == expected, "Concatenated names should parse"
        assert parse_word("A B A⁻¹", NAMES) == expected, "Superscript inverse should parse"
        assert parse_word("A B A^-1", NAMES) == expected, "Caret inverse should parse"

    @pytest.mark.fuchsian
    def test_parse_rejects_unknown_generator(self):
        with pytest.raises(UnknownGenerator):
            parse_word("A C", NAMES)

    @pytest.mark.fuchsian
    def test_free_reduction(self):
        assert parse_word("A A' B", NAMES) == B, "A A' should cancel"
        assert concat(A, invert_word(A)) == (), "A A^-1 reduces to the empty word"


class TestGroupRepresentation(BaseTest):
    """Test class for evaluation and ball enumeration"""

    @pytest.fixture(autouse=True)
    def setup_teardown(self, request):
        """Setup and teardown for each test"""
        super().before_each(request)
        yield
        super().after_each(request)

    @pytest.mark.smoke
    @pytest.mark.fuchsian
    def test_evaluate_examples(self, torus_rep):
        assert torus_rep.evaluate(()) == MoebiusTransform.identity(), "Empty word evaluates to the identity"
        assert torus_rep.evaluate(A) == torus_rep.images[0], "Single letter evaluates to its image"
        self.assert_matrix_close(
            evaluate_word(torus_rep, parse_word("A A' B", NAMES)), torus_rep.images[1], 1e-12, "A A' B"
        )

    @pytest.mark.fuchsian
    def test_evaluate_rejects_unknown_generator(self, torus_rep):
        with pytest.raises(UnknownGenerator):
            evaluate_word(torus_rep, ((5, 1),))

    @pytest.mark.regression
    @pytest.mark.fuchsian
    def test_evaluation_is_homomorphism(self, torus_rep, rng):
        for _ in range(500):
            u = random_word(rng, 2, int(rng.integers(0, 7)))
            v = random_word(rng, 2, int(rng.integers(0, 7)))
            product = torus_rep.evaluate(u) @ torus_rep.evaluate(v)
            self.assert_matrix_close(torus_rep.evaluate(concat(u, v)), product, 1e-8, "evaluate(uv)")

    @pytest.mark.smoke
    @pytest.mark.fuchsian
    @pytest.mark.parametrize("length, expected", [(1, 5), (2, 17), (6, 1457)])
    def test_free_ball_sizes(self, torus_rep, length, expected):
        ball = enumerate_ball(torus_rep, length)
        assert len(ball) == expected, f"Free rank-2 ball of radius {length} should have {expected} elements"
        assert projected_ball_size(2, length) == expected, "Projected size should match the count"
        assert ball[0][0] == (), "Identity comes first"

    @pytest.mark.fuchsian
    def test_ball_budget_and_cap(self, genus_two_rep, torus_rep):
        with pytest.raises(BallTooLarge):
            enumerate_ball(genus_two_rep, 8)
        with pytest.raises(BallTooLarge):
            enumerate_ball(torus_rep, 13)
        with pytest.raises(BallTooLarge):
            enumerate_ball(torus_rep, 6, budget=1000)

    @pytest.mark.fuchsian
    def test_relators_merge_duplicate_elements(self):
        """With B = A and relator A B', the radius-2 ball holds A^-2 .. A^2 only"""
        image = MoebiusTransform(2.0, 0.0, 0.0, 0.5)
        rep = GroupRepresentation(NAMES, (image, image), relators=(parse_word("A B'", NAMES),))
        ball = enumerate_ball(rep, 2)
        assert len(ball) == 5, f"Expected 5 distinct elements, got {[rep.format(w) for w, _ in ball]}"

    @pytest.mark.regression
    @pytest.mark.fuchsian
    def test_genus_two_relator_halves_deduplicate(self, genus_two_rep):
        relator = genus_two_rep.relators[0]
        half = len(relator) // 2
        first, second = relator[:half], invert_word(relator[half:])
        words = {word for word, _ in enumerate_ball(genus_two_rep, half)}
        assert not (first in words and second in words), "Both halves of the relator name the same element"
        assert len(words) < projected_ball_size(genus_two_rep.rank, half), "Some elements should merge"


class TestSinkSample(BaseTest):
    """Test class for sink sampling and gap diagnostics"""

    @pytest.fixture(autouse=True)
    def setup_teardown(self, request):
        """Setup and teardown for each test"""
        super().before_each(request)
        yield
        super().after_each(request)

    @pytest.mark.smoke
    @pytest.mark.fuchsian
    def test_cyclic_group_has_two_sinks(self):
        sample = sink_sample(cyclic_rep(), 3)
        angles = sorted(sample.angles)
        assert len(sample) == 2, f"One axis gives two sinks, got {angles}"
        self.assert_angles_close(angles, [0.0, math.pi], 1e-12, "Sinks of z -> 4z and its inverse")

    @pytest.mark.fuchsian
    def test_three_cusp_sphere_sinks(self, sphere_rep):
        assert len(sink_sample(sphere_rep, 1)) == 0, "Both generators are parabolic"
        sample = sink_sample(sphere_rep, 2)
        target = BoundaryPoint.from_real(1.0 + math.sqrt(2.0))
        assert min(visual_distance(p, target) for _, p in sample.entries) < 1e-9, "A B' has sink 1 + sqrt 2"

    @pytest.mark.fuchsian
    def test_elliptic_element_is_fatal(self):
        rotation = MoebiusTransform.rotation(2.0 * math.pi / 5.0)
        rep = GroupRepresentation(NAMES, (MoebiusTransform(2.0, 0.0, 0.0, 0.5), rotation))
        with pytest.raises(EllipticFound):
            sink_sample(rep, 2)

    @pytest.mark.fuchsian
    def test_max_gap_examples(self):
        with pytest.raises(EmptySample):
            max_gap(SinkSample((), 1))
        single = SinkSample(((A, BoundaryPoint(1.0)),), 1)
        assert max_gap(single) == pytest.approx(2.0 * math.pi), "A single sink leaves the whole circle"
        antipodal = SinkSample(((A, BoundaryPoint(0.0)), (B, BoundaryPoint(math.pi))), 1)
        assert max_gap(antipodal) == pytest.approx(math.pi), "Antipodal sinks leave gaps of pi"

    @pytest.mark.regression
    @pytest.mark.fuchsian
    def test_sink_set_is_invariant(self, torus_rep):
        sample = sink_sample(torus_rep, 6)
        angles = sample.angles
        for word in [w for w in sample.words if len(w) <= 3]:
            for generator in range(torus_rep.rank):
                moved = apply_boundary(torus_rep.images[generator], sink(torus_rep.evaluate(word)))
                nearest = float(np.min(angle_distances(angles, moved.theta)))
                assert nearest < 1e-8, f"Image of the sink of {torus_rep.format(word)} is missing from the sample"

    @pytest.mark.slow
    @pytest.mark.regression
    @pytest.mark.fuchsian
    @pytest.mark.parametrize(
        "name, shallow, deep",
        [("punctured_torus", 4, 8), ("genus_two", 3, 5), ("four_cusp_sphere", 4, 6)],
    )
    def test_max_gap_shrinks_with_depth(self, suite, name, shallow, deep):
        rep = suite[name]
        coarse, fine = max_gap(sink_sample(rep, shallow)), max_gap(sink_sample(rep, deep))
        assert fine < coarse, f"{name}: max gap should shrink from {coarse} at L={shallow}, got {fine} at L={deep}"

    @pytest.mark.slow
    @pytest.mark.fuchsian
    @pytest.mark.parametrize(
        "name, length",
        [("three_cusp_sphere", 8), ("punctured_torus", 8), ("four_cusp_sphere", 6), ("four_cusp_sphere", 8), ("genus_two", 4)],
    )
    def test_suite_has_no_elliptics(self, suite, name, length):
        assert len(sink_sample(suite[name], length)) > 0, f"{name} should have hyperbolic elements"

    @pytest.mark.fuchsian
    def test_jorgensen_diagnostic_on_torus(self, torus_rep):
        for first, second, value in jorgensen_defects(torus_rep):
            assert value >= 1.0, f"Discrete pair ({first}, {second}) should satisfy the inequality, got {value}"
