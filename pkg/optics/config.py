"""
INI experiment files:

    [mirror]
    A = 1
    B = 0
    C = 1

    [camera]
    cx_world = 0
    cy_world = 0.2
    cz_world = 3
    fx = 500
    fy = 500
    cx = 320
    cy = 320

    [noise]
    kind = pixel
    levels = 0, 2, 4, 6, 8, 10
    trials = 100
    seed = 1

[mirror] and [camera] may be replaced by a `preset` key in [mirror].
"""
import configparser
import logging
import os
from typing import Dict, Optional, Tuple

from .enums import MirrorPreset, NoiseKind
from .exceptions import ValidationError
from .geometry import CameraRig, Intrinsics, MirrorShape, canonicalize_rig
from .presets import preset_rig

logger = logging.getLogger(__name__)

DEFAULT_LEVELS = {
    NoiseKind.ANGLE: (0.0, 1.0, 2.0, 3.0, 4.0, 5.0),
    NoiseKind.PIXEL: (0.0, 2.0, 4.0, 6.0, 8.0, 10.0),
}


def read_config_file(path: str) -> configparser.ConfigParser:
    if not os.path.isfile(path):
        raise ValidationError(f"config file {path} does not exist")
    logger.debug("Reading %s", path)
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as e:
        raise ValidationError(f"cannot parse {path}: {e}")
    return parser


def _float(parser, section: str, key: str, default: Optional[float] = None) -> float:
    try:
        if default is None:
            return parser.getfloat(section, key)
        return parser.getfloat(section, key, fallback=default)
    except (configparser.NoSectionError, configparser.NoOptionError):
        raise ValidationError(f"missing [{section}] {key}")
    except ValueError:
        raise ValidationError(f"[{section}] {key} must be a number")


def rig_from_config(parser: configparser.ConfigParser) -> CameraRig:
    if parser.has_option("mirror", "preset"):
        return preset_rig(parser.get("mirror", "preset"), _intrinsics(parser))
    shape = MirrorShape(
        A=_float(parser, "mirror", "A"),
        B=_float(parser, "mirror", "B"),
        C=_float(parser, "mirror", "C"),
    )
    center = [
        _float(parser, "camera", key) for key in ("cx_world", "cy_world", "cz_world")
    ]
    return canonicalize_rig(shape, center, _intrinsics(parser))


def _intrinsics(parser: configparser.ConfigParser) -> Intrinsics:
    defaults = Intrinsics()
    if not parser.has_section("camera"):
        return defaults
    return Intrinsics(
        **{
            key: _float(parser, "camera", key, getattr(defaults, key))
            for key in ("fx", "fy", "cx", "cy")
        }
    )


def noise_from_config(parser: configparser.ConfigParser) -> Dict:
    """The [noise] section as keyword arguments of SweepConfig"""
    if not parser.has_section("noise"):
        raise ValidationError("missing [noise] section")
    section = parser["noise"]
    try:
        kind = NoiseKind(section.get("kind", "pixel").strip())
    except ValueError:
        raise ValidationError("[noise] kind must be 'angle' or 'pixel'")
    try:
        raw_levels = section.get("levels")
        levels = (
            tuple(float(v) for v in raw_levels.split(",") if v.strip())
            if raw_levels
            else DEFAULT_LEVELS[kind]
        )
        trials = section.getint("trials", fallback=100)
        seed = section.getint("seed", fallback=0)
    except ValueError as e:
        raise ValidationError(f"malformed [noise] section: {e}")
    return {"noise_kind": kind, "levels": levels, "trials": trials, "seed": seed}


def resolve_rig(value: str) -> Tuple[CameraRig, Optional[MirrorPreset]]:
    """A --rig argument: either a preset name or a config file"""
    if value in [preset.value for preset in MirrorPreset]:
        preset = MirrorPreset(value)
        return preset_rig(preset), preset
    return rig_from_config(read_config_file(value)), None


SCENE_DEFAULTS = {
    "bundles": 3,
    "lines_per_bundle": 2,
    "pixels_per_line": 3,
}


def scene_from_config(parser: configparser.ConfigParser) -> Dict:
    """
    The [scene] section of a pose file: `seed`, `noise` (pixel standard
    deviation) and the make_scene sizes
    """
    if not parser.has_section("scene"):
        raise ValidationError("missing [scene] section")
    section = parser["scene"]
    try:
        options = {
            key: section.getint(key, fallback=default)
            for key, default in SCENE_DEFAULTS.items()
        }
        options["seed"] = section.getint("seed", fallback=0)
        options["noise"] = section.getfloat("noise", fallback=0.0)
    except ValueError as e:
        raise ValidationError(f"malformed [scene] section: {e}")
    if options["noise"] < 0:
        raise ValidationError("[scene] noise must be non-negative")
    if options["bundles"] < 2:
        raise ValidationError("[scene] needs at least two bundles")
    return options
