"""
Numerical settings profiles for hyperbolic marking computations.
"""

import os
from dataclasses import dataclass, replace, fields
from pathlib import Path
from typing import Dict, Optional

import yaml
from dotenv import load_dotenv

# Base directory for the project
BASE_DIR = Path(__file__).parent.parent

# Load environment variables from .env file
load_dotenv(BASE_DIR / ".env")

# Fixture and schema locations
DATA_DIR = BASE_DIR / "data"
SCHEMA_DIR = DATA_DIR / "schemas"

# Optional YAML overrides, one mapping per profile name
PROFILES_FILE = Path(os.getenv("MARKINGS_PROFILES_FILE", BASE_DIR / "config" / "profiles.yaml"))


@dataclass(frozen=True)
class Settings:
    """Tolerances, depths and budgets shared by every module"""

    profile: str = "default"
    tolerance: float = 1e-7
    parabolic_tolerance: float = 1e-6
    dedup_tolerance: float = 1e-8
    merge_tolerance: float = 1e-10
    depth: int = 6
    depth_cap: int = 12
    ball_budget: int = 5_000_000
    interpolation: str = "linear"
    anchor_separation: float = 0.1
    barycenter_step: float = 0.5
    barycenter_tolerance: float = 1e-10
    barycenter_max_iterations: int = 500
    quadrature_points: int = 64
    seed: int = 0
    output_dir: str = "reports"
    log_level: str = "INFO"


# Common settings
COMMON_SETTINGS = {
    "tolerance": float(os.getenv("MARKINGS_TOL", 1e-7)),
    "dedup_tolerance": float(os.getenv("MARKINGS_DEDUP_TOL", 1e-8)),
    "depth_cap": int(os.getenv("MARKINGS_DEPTH_CAP", 12)),
    "ball_budget": int(os.getenv("MARKINGS_BALL_BUDGET", 5_000_000)),
    "interpolation": os.getenv("MARKINGS_INTERPOLATION", "linear"),
    "output_dir": os.getenv("MARKINGS_OUTPUT_DIR", "reports"),
    "log_level": os.getenv("MARKINGS_LOG_LEVEL", "INFO"),
}

PROFILES = {
    "default": {
        **COMMON_SETTINGS,
        "depth": int(os.getenv("MARKINGS_DEPTH", 6)),
        "quadrature_points": 64,
    },
    # Quick interactive runs
    "fast": {
        **COMMON_SETTINGS,
        "depth": 4,
        "quadrature_points": 32,
    },
    # Deeper sampling for convergence studies
    "thorough": {
        **COMMON_SETTINGS,
        "depth": 8,
        "quadrature_points": 128,
    },
}

INTERPOLATION_MODES = ("mobius", "linear")


def _load_yaml_profiles(path: Path) -> Dict[str, dict]:
    """Read extra profiles from YAML; a missing file means no overrides"""
    if not path.exists():
        return {}
    with open(path, "r", encoding="utf-8") as handle:
        loaded = yaml.safe_load(handle) or {}
    if not isinstance(loaded, dict):
        raise ValueError(f"Profiles file must hold a mapping: {path}")
    return loaded


def _all_profiles(path: Optional[Path] = None) -> Dict[str, dict]:
    profiles = {name: dict(values) for name, values in PROFILES.items()}
    for name, overrides in _load_yaml_profiles(path or PROFILES_FILE).items():
        profiles[name] = {**profiles.get(name, COMMON_SETTINGS), **(overrides or {})}
    return profiles


def get_settings(profile: Optional[str] = None, profiles_file: Optional[Path] = None, **overrides) -> Settings:
    """
    Get settings for the named profile.

    Args:
        profile (str): Profile name, defaults to $MARKINGS_PROFILE or 'default'
        profiles_file (Path): Optional YAML file with extra profiles
        **overrides: Field values taking precedence over the profile (CLI flags)

    Returns:
        Settings: Frozen settings object
    """
    profile = profile or os.getenv("MARKINGS_PROFILE", "default")
    profiles = _all_profiles(profiles_file)
    if profile not in profiles:
        raise ValueError(f"Unknown profile: {profile}")

    known = {f.name for f in fields(Settings)}
    values = {key: value for key, value in profiles[profile].items() if key in known}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"Unknown setting(s): {', '.join(sorted(unknown))}")

    settings = replace(Settings(profile=profile), **values)
    settings = replace(settings, **{k: v for k, v in overrides.items() if v is not None})

    if settings.depth > settings.depth_cap:
        raise ValueError(f"Depth {settings.depth} exceeds cap {settings.depth_cap}")
    if min(settings.tolerance, settings.parabolic_tolerance, settings.dedup_tolerance) <= 0:
        raise ValueError("Tolerances must be positive")
    if settings.interpolation not in INTERPOLATION_MODES:
        raise ValueError(f"Unknown interpolation mode: {settings.interpolation}")
    return settings


def list_available_profiles(profiles_file: Optional[Path] = None):
    """List all available settings profiles"""
    return sorted(_all_profiles(profiles_file))
