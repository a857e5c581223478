"""
Command line tests: subcommands, output files and exit codes.
"""

import csv
import json

import pytest

from hyperbolic_markings import io
from hyperbolic_markings.fuchsian import GroupRepresentation
from hyperbolic_markings.marked_moduli import default_anchors
from hyperbolic_markings.moebius import MoebiusTransform
from hyperbolic_markings.pants_builder import punctured_torus
from scripts.markings_cli import main
from tests.base_test import BaseTest


def run(*args, out=None):
    argv = [str(a) for a in args]
    if out is not None:
        argv += ["--out", str(out)]
    return main(argv)


def write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


@pytest.fixture
def torus_files(tmp_path, data_dir):
    """Built reference and twisted torus representations plus a marked structure file"""
    assert run("build", data_dir / "pants" / "punctured_torus.json", out=tmp_path) == 0, "Torus build failed"
    assert run("build", data_dir / "pants" / "punctured_torus_twisted.json", out=tmp_path) == 0, "Twisted build failed"
    reference = tmp_path / "punctured_torus.rep.json"
    target = tmp_path / "punctured_torus_twisted.rep.json"
    marked = write_json(tmp_path / "twisted.ms.json", {"reference": reference.name, "target": target.name})
    return {"reference": reference, "target": target, "marked": marked}


class TestCli(BaseTest):
    """Test class for the batch front end"""

    @pytest.fixture(autouse=True)
    def setup_teardown(self, request):
        """Setup and teardown for each test"""
        super().before_each(request)
        yield
        super().after_each(request)

    # build
    @pytest.mark.smoke
    @pytest.mark.cli
    def test_build_three_cusp_sphere(self, tmp_path, data_dir):
        assert run("build", data_dir / "pants" / "three_cusp_sphere.json", out=tmp_path) == 0, "Build should succeed"
        rep = io.load_representation(tmp_path / "three_cusp_sphere.rep.json")
        expected = io.load_representation(data_dir / "representations" / "three_cusp_sphere.rep.json")
        for built, stored in zip(rep.images, expected.images):
            self.assert_matrix_close(built, stored, 1e-12, "Three-cusp sphere generator")

    @pytest.mark.cli
    def test_build_round_trips_torus(self, torus_files):
        rep = io.load_representation(torus_files["reference"])
        built = punctured_torus(1.0, 0.0)
        assert rep.generator_names == built.generator_names, "Generator names should survive the file"
        for loaded, expected in zip(rep.images, built.images):
            self.assert_matrix_close(loaded, expected, 1e-12, "Torus generator")
        assert len(rep.cuffs) == 1 and rep.cuffs[0].word == built.cuffs[0].word, "Cuff metadata should survive"

    @pytest.mark.smoke
    @pytest.mark.cli
    @pytest.mark.parametrize("name", ["length_mismatch.json", "empty.json"])
    def test_build_rejects_bad_input(self, tmp_path, data_dir, name):
        assert run("build", data_dir / "pants" / name, out=tmp_path) == 2, f"{name} should exit with code 2"

    @pytest.mark.cli
    def test_build_missing_file(self, tmp_path):
        assert run("build", tmp_path / "missing.json", out=tmp_path) == 2, "A missing file is an input error"

    # sinks and bmap
    @pytest.mark.cli
    def test_sinks_csv(self, tmp_path, torus_files):
        assert run("sinks", torus_files["reference"], "--depth", 4, out=tmp_path) == 0, "sinks should succeed"
        with open(tmp_path / "punctured_torus.rep.sinks.csv", newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["angle", "word"], f"Unexpected header {rows[0]}"
        assert len(rows) > 10, "Depth 4 should give a few dozen sinks"

    @pytest.mark.smoke
    @pytest.mark.cli
    def test_bmap_identical_files(self, tmp_path, data_dir):
        rep = data_dir / "representations" / "three_cusp_sphere.rep.json"
        assert run("bmap", rep, rep, "--depth", 4, out=tmp_path) == 0, "Identical files should give the identity"
        assert list(tmp_path.glob("*.bmap.csv")), "bmap should write its samples"

    @pytest.mark.cli
    def test_bmap_twist_pair_with_svg(self, tmp_path, torus_files):
        code = run("bmap", torus_files["reference"], torus_files["target"], "--depth", 5, "--svg", out=tmp_path)
        assert code == 0, f"Twist pair should be accepted, got exit code {code}"
        assert list(tmp_path.glob("*.bmap.csv")) and list(tmp_path.glob("*.bmap.svg")), "CSV and SVG expected"

    @pytest.mark.cli
    def test_bmap_type_mismatch(self, tmp_path, data_dir, torus_files):
        sphere = data_dir / "representations" / "three_cusp_sphere.rep.json"
        assert run("bmap", torus_files["reference"], sphere, "--depth", 3, out=tmp_path) == 3, "A is parabolic in the target"

    @pytest.mark.cli
    def test_bmap_random_target(self, tmp_path, torus_files):
        random_rep = GroupRepresentation(
            ("A", "B"), (MoebiusTransform(1.7, 0.4, 2.1, 1.1), MoebiusTransform(0.3, -1.2, 0.9, 0.2))
        )
        target = io.save_representation(tmp_path / "random.rep.json", random_rep)
        code = run("bmap", torus_files["reference"], target, "--depth", 4, out=tmp_path)
        assert code in (3, 4), f"A random target should fail type or monotonicity checks, got {code}"

    @pytest.mark.cli
    def test_bmap_with_extension(self, tmp_path, torus_files):
        reference, target = torus_files["reference"], torus_files["target"]
        code = run("bmap", reference, target, "--depth", 4, "--extend", "--profile", "fast", out=tmp_path)
        assert code == 0, f"Extension check should run on the twist pair, got exit code {code}"

    # act
    @pytest.mark.smoke
    @pytest.mark.cli
    def test_act_with_file(self, tmp_path, data_dir, torus_files):
        mc = data_dir / "mapping_classes" / "T_A.json"
        assert run("act", torus_files["marked"], mc, "--depth", 4, out=tmp_path) == 0, "T_A should apply"
        acted = io.load_representation(tmp_path / "twisted.ms.T_A.rep.json")
        assert acted.generator_names == ("A", "B"), "Acted target keeps the generators"

    @pytest.mark.cli
    def test_act_with_preset(self, tmp_path, torus_files):
        assert run("act", torus_files["marked"], "--preset", "identity", "--depth", 4, out=tmp_path) == 0, "identity"
        assert run("act", torus_files["marked"], "--preset", "T_C", out=tmp_path) == 2, "Unknown preset"
        assert run("act", torus_files["marked"], out=tmp_path) == 2, "A mapping class is required"

    @pytest.mark.cli
    def test_act_rejects_mismatched_structure(self, tmp_path, data_dir, torus_files):
        sphere = data_dir / "representations" / "three_cusp_sphere.rep.json"
        marked = write_json(
            tmp_path / "mixed.ms.json", {"reference": torus_files["reference"].name, "target": str(sphere.resolve())}
        )
        assert run("act", marked, "--preset", "T_A", "--depth", 4, out=tmp_path) == 3, "Types must agree on load"

    @pytest.mark.cli
    def test_act_malformed_inverse(self, tmp_path, data_dir, torus_files):
        mc = data_dir / "mapping_classes" / "malformed_inverse.json"
        assert run("act", torus_files["marked"], mc, "--depth", 4, out=tmp_path) == 5, "Broken inverse should exit 5"

    # converge
    @pytest.mark.cli
    def test_converge_constant_sequence(self, tmp_path, torus_files):
        marked = torus_files["marked"].name
        manifest = write_json(tmp_path / "constant.json", {"structures": [marked, marked, marked]})
        code = run("converge", manifest, torus_files["marked"], "--depth", 3, out=tmp_path)
        assert code == 0, f"Converge should succeed, got {code}"
        with open(tmp_path / "constant.converge.csv", newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["i", "char_dist", "bmap_dist"], f"Unexpected header {rows[0]}"
        assert len(rows) == 4, "One row per structure"
        for row in rows[1:]:
            assert float(row[1]) == 0.0 and float(row[2]) == 0.0, f"Constant sequence row should be zero: {row}"

    @pytest.mark.cli
    def test_converge_with_anchors(self, tmp_path, torus_files):
        marked = torus_files["marked"].name
        manifest = write_json(tmp_path / "anchored.json", {"structures": [marked, marked]})
        rep = io.load_representation(torus_files["target"])
        text = ", ".join(rep.format(word) for word in default_anchors(rep))
        code = run("converge", manifest, torus_files["marked"], "--depth", 3, "--anchors", text, out=tmp_path)
        assert code == 0, f"Anchors {text} should be accepted, got exit code {code}"
        reversed_text = ", ".join(reversed(text.split(", ")))
        code = run("converge", manifest, torus_files["marked"], "--depth", 3, "--anchors", reversed_text, out=tmp_path)
        assert code == 2, f"Reversed anchors {reversed_text} are negatively oriented, got exit code {code}"

    @pytest.mark.cli
    def test_converge_short_manifest(self, tmp_path, torus_files):
        manifest = write_json(tmp_path / "short.json", {"structures": [torus_files["marked"].name]})
        assert run("converge", manifest, torus_files["marked"], out=tmp_path) == 2, "A single structure is rejected"

    # settings
    @pytest.mark.cli
    def test_profiles(self, tmp_path):
        assert run("profiles", out=tmp_path) == 0, "profiles should list settings profiles"

    @pytest.mark.cli
    def test_bad_settings(self, tmp_path, torus_files):
        assert run("sinks", torus_files["reference"], "--profile", "missing", out=tmp_path) == 2, "Unknown profile"
        assert run("sinks", torus_files["reference"], "--depth", 13, out=tmp_path) == 2, "Depth above the cap"
