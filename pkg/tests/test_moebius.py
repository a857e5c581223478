"""
Moebius calculus tests: classification, fixed points, triples and boundary geometry.
"""

import math

import numpy as np
import pytest

from hyperbolic_markings.exceptions import DegenerateTriple, InputError, NegativelyOriented, NotHyperbolic
from hyperbolic_markings.moebius import (
    BoundaryPoint,
    ElementClass,
    MoebiusTransform,
    Orientation,
    apply_boundary,
    axis_displacement,
    circular_order,
    classify,
    fixed_points,
    hyperbolic_distance,
    moebius_from_triple,
    random_hyperbolic,
    random_positive_triple,
    random_psl,
    sink,
    source,
    translation,
    translation_along,
    translation_length,
    visual_distance,
)
from tests.base_test import BaseTest

ZERO = BoundaryPoint.from_real(0.0)
ONE = BoundaryPoint.from_real(1.0)
INFINITY = BoundaryPoint.infinity()

DILATION = MoebiusTransform(2.0, 0.0, 0.0, 0.5)
SHIFT = MoebiusTransform(1.0, 1.0, 0.0, 1.0)


class TestMoebius(BaseTest):
    """Test class for the Moebius layer"""

    @pytest.fixture(autouse=True)
    def setup_teardown(self, request):
        """Setup and teardown for each test"""
        super().before_each(request)
        yield
        super().after_each(request)

    # Normalization
    @pytest.mark.smoke
    @pytest.mark.moebius
    def test_normalizes_determinant_and_sign(self):
        """Stored representative has determinant 1 and nonnegative trace"""
        m = MoebiusTransform(-4.0, -2.0, 0.0, -1.0)
        assert abs(m.a * m.d - m.b * m.c - 1.0) < 1e-12, "Determinant should be normalized to 1"
        assert m.trace >= 0.0, "Trace should be nonnegative"
        assert m.is_close(MoebiusTransform(2.0, 1.0, 0.0, 0.5)), "Rescaled matrix should match"

    @pytest.mark.moebius
    def test_zero_trace_sign_rule(self):
        """Near-zero trace keeps the representative with a >= 0, then b >= 0"""
        m = MoebiusTransform(0.0, 1.0, -1.0, 0.0)
        flipped = MoebiusTransform(0.0, -1.0, 1.0, 0.0)
        assert m.b > 0.0, "b should be made nonnegative when a and trace vanish"
        assert m == flipped, "Both signs should give the same stored representative"

    @pytest.mark.moebius
    def test_rejects_nonpositive_determinant(self):
        with pytest.raises(InputError):
            MoebiusTransform(1.0, 2.0, 2.0, 4.0)

    @pytest.mark.regression
    @pytest.mark.moebius
    def test_long_products_keep_parabolic_trace(self):
        """Conjugating a parabolic by a large word neither raises nor drifts off trace 2"""
        g = MoebiusTransform.identity()
        for angle in (0.7, 1.1, 2.3):
            g = g @ MoebiusTransform.diagonal(8.0) @ MoebiusTransform.rotation(angle)
        conjugate = g @ SHIFT @ g.inverse()
        assert max(abs(conjugate.b), abs(conjugate.c)) > 1e8, f"Expected a badly scaled conjugate, got {conjugate}"
        assert abs(conjugate.trace - 2.0) < 1e-3, f"Conjugate of a parabolic should keep trace 2, got {conjugate.trace}"

    @pytest.mark.moebius
    def test_products_are_not_rescaled(self):
        product = DILATION @ SHIFT
        assert (product.a, product.b, product.c, product.d) == (2.0, 2.0, 0.0, 0.5), f"Exact product expected, got {product}"
        inverse = SHIFT.inverse()
        assert (inverse.a, inverse.b, inverse.c, inverse.d) == (1.0, -1.0, 0.0, 1.0), f"Exact inverse expected, got {inverse}"

    @pytest.mark.moebius
    @pytest.mark.parametrize(
        "x, theta",
        [(0.0, math.pi), (1.0, 1.5 * math.pi), (-1.0, 0.5 * math.pi), (math.inf, 0.0)],
    )
    def test_cayley_angles(self, x, theta):
        """Half-plane points land on the expected disk angles"""
        point = BoundaryPoint.from_real(x)
        assert abs(point.theta - theta) < 1e-12, f"{x} should map to angle {theta}, got {point.theta}"

    @pytest.mark.moebius
    @pytest.mark.parametrize("x", [-1e6, -3.5, -1e-3, 0.0, 0.25, 7.0, 1e5])
    def test_extended_real_round_trip(self, x):
        back = BoundaryPoint.from_real(x).to_extended_real()
        assert abs(back - x) <= 1e-9 * max(1.0, abs(x)), f"Round trip of {x} gave {back}"

    # Classification
    @pytest.mark.smoke
    @pytest.mark.moebius
    @pytest.mark.parametrize(
        "matrix, expected",
        [
            ((2.0, 0.0, 0.0, 0.5), ElementClass.HYPERBOLIC),
            ((1.0, 1.0, 0.0, 1.0), ElementClass.PARABOLIC),
            ((math.cos(math.pi / 8), -math.sin(math.pi / 8), math.sin(math.pi / 8), math.cos(math.pi / 8)), ElementClass.ELLIPTIC),
            ((1.0, 0.0, 0.0, 1.0), ElementClass.IDENTITY),
        ],
    )
    def test_classify(self, matrix, expected):
        assert classify(MoebiusTransform(*matrix)) is expected, f"{matrix} should classify as {expected.value}"

    @pytest.mark.regression
    @pytest.mark.moebius
    def test_classification_is_conjugation_invariant(self, rng):
        for _ in range(1000):
            m, sigma = random_psl(rng, 2.0), random_psl(rng)
            if abs(abs(m.trace) - 2.0) <= 1e-8:
                continue
            assert classify(m.conjugate_by(sigma)) is classify(m), f"Conjugating {m} changed its type"

    # Fixed points
    @pytest.mark.smoke
    @pytest.mark.moebius
    @pytest.mark.parametrize(
        "matrix, expected",
        [((2.0, 0.0, 0.0, 0.5), math.inf), ((0.5, 0.0, 0.0, 2.0), 0.0), ((5.0, 2.0, 2.0, 1.0), 1.0 + math.sqrt(2.0))],
    )
    def test_sink(self, matrix, expected):
        point = sink(MoebiusTransform(*matrix))
        assert visual_distance(point, BoundaryPoint.from_real(expected)) < 1e-12, f"Sink of {matrix} should be {expected}"

    @pytest.mark.regression
    @pytest.mark.moebius
    def test_sink_matches_orbit_iteration(self):
        """Iterating z -> (5z + 2)/(2z + 1) forty times from 10 reaches the sink"""
        m = MoebiusTransform(5.0, 2.0, 2.0, 1.0)
        x = 10.0
        for _ in range(40):
            x = (5.0 * x + 2.0) / (2.0 * x + 1.0)
        assert abs(x - sink(m).to_extended_real()) < 1e-6, f"Orbit limit {x} should match the sink"

    @pytest.mark.moebius
    def test_source_is_sink_of_inverse(self, rng):
        for _ in range(50):
            m = random_hyperbolic(rng)
            assert visual_distance(source(m), sink(m.inverse())) < 1e-9, "Source should be the sink of the inverse"

    @pytest.mark.moebius
    def test_parabolic_fixed_point(self):
        points = fixed_points(SHIFT)
        assert len(points) == 1 and points[0].is_infinity, "z -> z + 1 fixes only infinity"

    @pytest.mark.moebius
    def test_sink_requires_hyperbolic(self):
        with pytest.raises(NotHyperbolic):
            sink(SHIFT)

    @pytest.mark.regression
    @pytest.mark.moebius
    def test_forward_orbits_converge_to_sink(self, rng):
        for _ in range(1000):
            m = random_hyperbolic(rng, 1.0, 3.0)
            x = BoundaryPoint(rng.uniform(0.0, 2.0 * math.pi))
            if visual_distance(x, source(m)) < 1e-3:
                continue
            image = x
            for _ in range(40):
                image = apply_boundary(m, image)
            assert visual_distance(image, sink(m)) < 1e-6, f"Orbit of {x} under {m} should approach the sink"

    # Triples
    @pytest.mark.smoke
    @pytest.mark.moebius
    def test_triple_zero_one_infinity_is_identity(self):
        self.assert_matrix_close(moebius_from_triple(ZERO, ONE, INFINITY), MoebiusTransform.identity(), 1e-12)

    @pytest.mark.moebius
    @pytest.mark.parametrize(
        "points, expected",
        [((1.0, 2.0, math.inf), (1.0, 1.0, 0.0, 1.0)), ((-1.0, 0.0, 1.0), (1.0, -1.0, 1.0, 1.0))],
    )
    def test_triple_examples(self, points, expected):
        result = moebius_from_triple(*(BoundaryPoint.from_real(x) for x in points))
        self.assert_matrix_close(result, MoebiusTransform(*expected), 1e-9, f"Triple {points}")

    @pytest.mark.regression
    @pytest.mark.moebius
    def test_triple_reproduces_inputs(self, rng):
        for _ in range(1000):
            triple = random_positive_triple(rng)
            m = moebius_from_triple(*triple)
            images = [apply_boundary(m, p) for p in (ZERO, ONE, INFINITY)]
            for image, expected in zip(images, triple):
                assert visual_distance(image, expected) < 1e-9, f"{m} should send the anchors to {triple}"

    @pytest.mark.moebius
    def test_triple_errors(self):
        with pytest.raises(DegenerateTriple):
            moebius_from_triple(ONE, ONE, INFINITY)
        with pytest.raises(NegativelyOriented):
            moebius_from_triple(ONE, ZERO, INFINITY)

    @pytest.mark.smoke
    @pytest.mark.moebius
    def test_circular_order(self):
        five = BoundaryPoint.from_real(5.0)
        assert circular_order(ZERO, ONE, INFINITY) is Orientation.POSITIVE, "(0, 1, inf) is positive"
        assert circular_order(ONE, ZERO, INFINITY) is Orientation.NEGATIVE, "(1, 0, inf) is negative"
        assert circular_order(five, five, INFINITY) is Orientation.DEGENERATE, "(5, 5, inf) is degenerate"

    @pytest.mark.regression
    @pytest.mark.moebius
    def test_action_preserves_orientation(self, rng):
        for _ in range(200):
            triple = random_positive_triple(rng, min_gap=1e-2)
            m = random_psl(rng)
            images = [apply_boundary(m, p) for p in triple]
            assert circular_order(*images, tol=1e-14) is Orientation.POSITIVE, f"{m} reversed a positive triple"

    # Boundary geometry
    @pytest.mark.moebius
    def test_visual_distance_examples(self):
        assert visual_distance(ONE, ONE) == 0.0, "Distance to itself is zero"
        assert abs(visual_distance(ZERO, INFINITY) - math.pi) < 1e-12, "0 and infinity are antipodal"
        minus_one = BoundaryPoint.from_real(-1.0)
        assert abs(visual_distance(minus_one, ONE) - math.pi) < 1e-12, "-1 and 1 are antipodal"

    @pytest.mark.moebius
    @pytest.mark.parametrize("m, x, expected", [(SHIFT, 0.0, 1.0), (DILATION, 1.0, 4.0)])
    def test_apply_boundary(self, m, x, expected):
        image = apply_boundary(m, BoundaryPoint.from_real(x))
        assert abs(image.to_extended_real() - expected) < 1e-9, f"{m} should send {x} to {expected}"

    # Translation lengths
    @pytest.mark.smoke
    @pytest.mark.moebius
    def test_translation_length_of_dilation(self):
        assert abs(translation_length(DILATION) - math.log(4.0)) < 1e-12, "z -> 4z translates by ln 4"
        assert abs(hyperbolic_distance(1j, 4j) - math.log(4.0)) < 1e-12, "i to 4i is ln 4 apart"

    @pytest.mark.moebius
    def test_translation_length_invariance(self, rng):
        for _ in range(100):
            m, sigma = random_hyperbolic(rng), random_psl(rng)
            length = translation_length(m)
            assert abs(translation_length(m.conjugate_by(sigma)) - length) < 1e-8, "Conjugation keeps the length"
            assert abs(translation_length(m @ m) - 2.0 * length) < 1e-8, "Squaring doubles the length"

    @pytest.mark.regression
    @pytest.mark.moebius
    def test_translation_length_matches_axis_displacement(self, rng):
        for _ in range(100):
            m = random_hyperbolic(rng)
            assert abs(axis_displacement(m) - translation_length(m)) < 1e-9, f"Axis displacement of {m} is off"

    @pytest.mark.moebius
    def test_translation_along_own_axis(self, rng):
        for _ in range(50):
            m = random_hyperbolic(rng)
            rebuilt = translation_along(m, translation_length(m))
            self.assert_matrix_close(rebuilt, m, 1e-8, "Translation by the length along the axis")

    @pytest.mark.moebius
    def test_translation_moves_towards_end(self):
        shift = translation(ZERO, INFINITY, math.log(4.0))
        self.assert_matrix_close(shift, DILATION, 1e-10, "Translation from 0 to infinity")
