"""
JSON file formats, validated against the schemas in data/schemas.
"""

import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import List, Union

import jsonschema

from config.settings import SCHEMA_DIR

from .exceptions import InputError
from .fuchsian import CuffData, GroupRepresentation, format_word, parse_word
from .marked_moduli import MarkedStructure
from .mcg_action import MappingClass
from .moebius import MoebiusTransform
from .pants_builder import PantsDecomposition

PathLike = Union[str, Path]

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    path = SCHEMA_DIR / f"{name}.schema.json"
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def read_json(path: PathLike, schema: str) -> dict:
    """Read a JSON file and validate it; every failure becomes an InputError"""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except FileNotFoundError as exc:
        raise InputError(f"File not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"Could not parse {path}: {exc}") from exc
    try:
        jsonschema.validate(data, load_schema(schema))
    except jsonschema.ValidationError as exc:
        location = "/".join(str(part) for part in exc.absolute_path) or "<root>"
        raise InputError(f"{path} does not match the {schema} schema at {location}: {exc.message}") from exc
    logger.debug(f"Loaded {schema} file {path}")
    return data


def write_json(path: PathLike, data: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2)
        handle.write("\n")
    logger.info(f"Wrote {path}")
    return path


# Representations
def representation_to_dict(rep: GroupRepresentation) -> dict:
    names = rep.generator_names
    return {
        "generators": list(names),
        "matrices": {name: image.matrix.tolist() for name, image in zip(names, rep.images)},
        "relators": [format_word(word, names) for word in rep.relators],
        "peripherals": [format_word(word, names) for word in rep.peripheral_words],
        "cuffs": [
            {
                "name": cuff.name,
                "word": format_word(cuff.word, names),
                "partner_word": format_word(cuff.partner_word, names),
                "length": cuff.length,
                "twist": cuff.twist,
                "actions": {names[g]: action for g, action in cuff.actions},
            }
            for cuff in rep.cuffs
        ],
    }


def representation_from_dict(data: dict) -> GroupRepresentation:
    try:
        jsonschema.validate(data, load_schema("representation"))
    except jsonschema.ValidationError as exc:
        raise InputError(f"Representation does not match the schema: {exc.message}") from exc
    names = tuple(data["generators"])
    missing = [name for name in names if name not in data["matrices"]]
    if missing:
        raise InputError(f"No matrix given for generator(s) {missing}")
    index = {name: i for i, name in enumerate(names)}
    cuffs = []
    for entry in data.get("cuffs", []):
        unknown = set(entry.get("actions", {})) - set(index)
        if unknown:
            raise InputError(f"Cuff {entry['name']} has actions for unknown generators {sorted(unknown)}")
        cuffs.append(
            CuffData(
                name=entry["name"],
                word=parse_word(entry["word"], names),
                partner_word=parse_word(entry["partner_word"], names),
                length=float(entry["length"]),
                twist=float(entry["twist"]),
                actions=tuple(sorted((index[g], action) for g, action in entry.get("actions", {}).items())),
            )
        )
    return GroupRepresentation(
        generator_names=names,
        images=tuple(MoebiusTransform.from_matrix(data["matrices"][name]) for name in names),
        relators=tuple(parse_word(text, names) for text in data.get("relators", [])),
        peripheral_words=tuple(parse_word(text, names) for text in data.get("peripherals", [])),
        cuffs=tuple(cuffs),
    )


def load_representation(path: PathLike) -> GroupRepresentation:
    return representation_from_dict(read_json(path, "representation"))


def save_representation(path: PathLike, rep: GroupRepresentation) -> Path:
    return write_json(path, representation_to_dict(rep))


# Pants decompositions
def load_pants(path: PathLike) -> PantsDecomposition:
    return PantsDecomposition.from_dict(read_json(path, "pants"))


def save_pants(path: PathLike, decomposition: PantsDecomposition) -> Path:
    return write_json(path, decomposition.to_dict())


# Mapping classes
def load_mapping_class(path: PathLike, generator_names) -> MappingClass:
    path = Path(path)
    return MappingClass.from_dict(read_json(path, "mapping_class"), generator_names, name=path.stem)


def save_mapping_class(path: PathLike, mc: MappingClass) -> Path:
    return write_json(path, mc.to_dict())


# Marked structures and manifests; paths inside are relative to the file
def _resolve(base: Path, reference: str) -> Path:
    candidate = Path(reference)
    return candidate if candidate.is_absolute() else base.parent / candidate


def load_marked_structure(path: PathLike) -> MarkedStructure:
    path = Path(path)
    data = read_json(path, "marked_structure")
    return MarkedStructure(
        load_representation(_resolve(path, data["reference"])),
        load_representation(_resolve(path, data["target"])),
        name=data.get("name", path.stem),
    ).validate()


def load_manifest(path: PathLike) -> List[MarkedStructure]:
    path = Path(path)
    data = read_json(path, "manifest")
    structures = [load_marked_structure(_resolve(path, entry)) for entry in data["structures"]]
    logger.info(f"Manifest {path.name}: {len(structures)} marked structures")
    return structures
