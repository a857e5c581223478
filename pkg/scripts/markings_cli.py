#!/usr/bin/env python3
"""
Batch front end: build surfaces, sample sinks, compute boundary maps,
apply mapping classes and run convergence reports.
"""

import argparse
import logging
import sys
from pathlib import Path

import colorlog
import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from config.settings import get_settings, list_available_profiles  # noqa: E402
from hyperbolic_markings import io, render  # noqa: E402
from hyperbolic_markings.boundary_map import (  # noqa: E402
    check_equivariance,
    max_sample_gap,
    monotonicity_defect,
)
from hyperbolic_markings.douady_earle import equivariance_check  # noqa: E402
from hyperbolic_markings.exceptions import MarkingsError  # noqa: E402
from hyperbolic_markings.fuchsian import max_gap, sink_sample  # noqa: E402
from hyperbolic_markings.marked_moduli import (  # noqa: E402
    MarkedStructure,
    ball_words,
    converge_report,
    parse_anchors,
    rep_to_homeo,
)
from hyperbolic_markings.mcg_action import act, get_preset, verify_action_formula  # noqa: E402
from hyperbolic_markings.pants_builder import build_representation, cuff_table  # noqa: E402

logger = logging.getLogger("markings")

EXIT_OK = 0
RANDOM_TESTERS = 8
EXTENSION_POINTS = (0j, 0.3j, -0.2 + 0.1j)


def setup_logging(level: str = "INFO"):
    """Colored console logging on the root logger, installed once"""
    root = colorlog.getLogger()
    if not any(getattr(h, "_markings", False) for h in root.handlers):
        handler = colorlog.StreamHandler()
        handler.setFormatter(
            colorlog.ColoredFormatter(
                "%(log_color)s%(asctime)s - %(levelname)s - %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )
        handler._markings = True
        root.addHandler(handler)
    root.setLevel(getattr(logging, level.upper(), logging.INFO))


class MarkingsRunner:
    """Runs one subcommand with resolved settings"""

    def __init__(self, settings, out_dir=None):
        self.settings = settings
        self.out_dir = Path(out_dir or settings.output_dir)
        self.rng = np.random.default_rng(settings.seed)
        self.logger = logging.getLogger(self.__class__.__name__)

    @property
    def ball_options(self) -> dict:
        return {
            "depth_cap": self.settings.depth_cap,
            "budget": self.settings.ball_budget,
            "dedup_tolerance": self.settings.dedup_tolerance,
        }

    @property
    def barycenter_options(self) -> dict:
        return {
            "step": self.settings.barycenter_step,
            "tolerance": self.settings.barycenter_tolerance,
            "max_iterations": self.settings.barycenter_max_iterations,
        }

    def cmd_build(self, pants_file) -> Path:
        """Glue pants into a representation file and print the cuff trace table"""
        pants_file = Path(pants_file)
        rep = build_representation(io.load_pants(pants_file))
        self.logger.info(f"🧩 Built {rep.rank} generators, relators {[rep.format(w) for w in rep.relators]}")
        for row in cuff_table(rep):
            self.logger.info(
                f"  cuff {row['cuff']:<12} {row['word']:<16} length {row['length']:.6f} "
                f"measured {row['measured_length']:.6f} trace defect {row['trace_defect']:.2e}"
            )
        for word, defect in zip(rep.peripheral_words, rep.peripheral_defects()):
            self.logger.info(f"  cusp {rep.format(word):<16} |tr| - 2 = {defect:.2e}")
        rep.validate(self.settings.parabolic_tolerance)
        return io.save_representation(self.out_dir / f"{pants_file.stem}.rep.json", rep)

    def cmd_sinks(self, rep_file) -> Path:
        rep = io.load_representation(rep_file)
        sample = sink_sample(
            rep,
            self.settings.depth,
            tol=self.settings.tolerance,
            merge_tolerance=self.settings.merge_tolerance,
            **self.ball_options,
        )
        self.logger.info(f"📈 {len(sample)} sinks at depth {sample.depth}, max gap {max_gap(sample):.6f}")
        return render.sinks_csv(self.out_dir / f"{Path(rep_file).stem}.sinks.csv", sample, rep.generator_names)

    def cmd_bmap(self, ref_file, target_file, svg: bool = False, extend: bool = False) -> Path:
        ms = MarkedStructure(io.load_representation(ref_file), io.load_representation(target_file)).validate()
        bmap = rep_to_homeo(ms, self.settings.depth, self.settings.tolerance, self.settings.interpolation, **self.ball_options)
        self.logger.info(f"✅ Monotonicity PASS ({len(bmap)} samples, winding defect {monotonicity_defect(bmap):.2e})")

        testers = [((g, 1),) for g in range(ms.reference.rank)]
        pool = ball_words(ms.reference, min(3, self.settings.depth), **self.ball_options)[1:]
        picks = self.rng.choice(len(pool), size=min(RANDOM_TESTERS, len(pool)), replace=False)
        testers += [pool[i] for i in sorted(picks)]
        defect = check_equivariance(bmap, ms.reference, ms.target, testers)
        self.logger.info(f"📊 Equivariance defect {defect:.3e}, max sample gap {max_sample_gap(bmap):.6f}")
        if extend:
            extension_defect = equivariance_check(
                bmap,
                ms.reference,
                ms.target,
                EXTENSION_POINTS,
                testers,
                self.settings.quadrature_points,
                **self.barycenter_options,
            )
            self.logger.info(f"📊 Douady-Earle equivariance defect {extension_defect:.3e}")

        stem = f"{Path(ref_file).stem}__{Path(target_file).stem}"
        path = render.bmap_csv(self.out_dir / f"{stem}.bmap.csv", bmap, ms.reference.generator_names)
        if svg:
            render.bmap_svg(self.out_dir / f"{stem}.bmap.svg", bmap, title=stem)
        return path

    def cmd_converge(self, manifest_file, limit_file, anchors_text=None) -> Path:
        sequence = io.load_manifest(manifest_file)
        limit = io.load_marked_structure(limit_file)
        anchors = parse_anchors(limit.target, anchors_text, self.settings.anchor_separation)
        rows = converge_report(
            sequence,
            limit,
            self.settings.depth,
            anchors,
            self.settings.tolerance,
            self.settings.interpolation,
            **self.ball_options,
        )
        return render.write_rows(
            self.out_dir / f"{Path(manifest_file).stem}.converge.csv",
            ("i", "char_dist", "bmap_dist"),
            ((row.index, f"{row.char_distance:.6e}", f"{row.bmap_distance:.6e}") for row in rows),
        )

    def cmd_act(self, ms_file, mc_file=None, preset=None) -> Path:
        ms = io.load_marked_structure(ms_file)
        names = ms.reference.generator_names
        if mc_file:
            mc = io.load_mapping_class(mc_file, names)
        elif preset:
            mc = get_preset(preset, names)
        else:
            raise MarkingsError("act needs a mapping class file or --preset")
        acted = act(ms, mc)
        defect = verify_action_formula(
            ms, mc, self.settings.depth, self.settings.tolerance, self.settings.interpolation, **self.ball_options
        )
        self.logger.info(f"📊 Action formula defect for {mc.name}: {defect:.3e}")
        return io.save_representation(self.out_dir / f"{Path(ms_file).stem}.{mc.name or 'acted'}.rep.json", acted.target)

    def cmd_profiles(self):
        for name in list_available_profiles():
            marker = "*" if name == self.settings.profile else " "
            self.logger.info(f"{marker} {name}")
        return None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", help="Settings profile (default: $MARKINGS_PROFILE or 'default')")
    common.add_argument("--depth", type=int, help="Word ball radius L")
    common.add_argument("--tol", type=float, help="Classification tolerance for sampled words")
    common.add_argument("--seed", type=int, help="Seed for randomized diagnostics")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--log-level", help="Logging level")

    parser = argparse.ArgumentParser(description="Marked hyperbolic structures toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", parents=[common], help="Glue a pants decomposition into a representation")
    build.add_argument("pants_file")

    sinks = sub.add_parser("sinks", parents=[common], help="Sample sinks of a representation")
    sinks.add_argument("rep_file")

    bmap = sub.add_parser("bmap", parents=[common], help="Boundary map between two representations")
    bmap.add_argument("ref_file")
    bmap.add_argument("target_file")
    bmap.add_argument("--svg", action="store_true", help="Also render an SVG picture")
    bmap.add_argument("--extend", action="store_true", help="Also check the Douady-Earle extension")

    converge = sub.add_parser("converge", parents=[common], help="Convergence report for a sequence")
    converge.add_argument("manifest")
    converge.add_argument("limit")
    converge.add_argument("--anchors", help='Anchor words, e.g. "A,B,A B"')

    act_parser = sub.add_parser("act", parents=[common], help="Apply a mapping class to a marked structure")
    act_parser.add_argument("ms_file")
    act_parser.add_argument("mc_file", nargs="?")
    act_parser.add_argument("--preset", help="Built-in mapping class (identity, T_A, T_B, T_A', T_B')")

    sub.add_parser("profiles", parents=[common], help="List settings profiles")
    return parser


def main(argv=None) -> int:
    """Run one subcommand and return the process exit code"""
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings(
            args.profile, depth=args.depth, tolerance=args.tol, seed=args.seed, log_level=args.log_level
        )
    except ValueError as exc:
        setup_logging()
        logger.error(f"❌ {exc}")
        return 2
    setup_logging(settings.log_level)
    runner = MarkingsRunner(settings, args.out)

    try:
        if args.command == "build":
            runner.cmd_build(args.pants_file)
        elif args.command == "sinks":
            runner.cmd_sinks(args.rep_file)
        elif args.command == "bmap":
            runner.cmd_bmap(args.ref_file, args.target_file, svg=args.svg, extend=args.extend)
        elif args.command == "converge":
            runner.cmd_converge(args.manifest, args.limit, args.anchors)
        elif args.command == "act":
            runner.cmd_act(args.ms_file, args.mc_file, args.preset)
        elif args.command == "profiles":
            runner.cmd_profiles()
    except MarkingsError as exc:
        logger.error(f"❌ {exc.__class__.__name__}: {exc}")
        return exc.exit_code
    except ValueError as exc:
        logger.error(f"❌ {exc}")
        return 2
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
