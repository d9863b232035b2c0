"""File formats: JSON documents for models, flow categories, cubes and
matchings, plus deterministic report rendering."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .coeff import ModP, NovikovElement
from .cubical import ExplicitCubicalSet, RepresentableCube, circle, point, symmetric_square
from .flowcat import FlowCategory
from .homalg import label_from_json
from .morse import ComplexFormatError, DiscreteMorseData, SimplicialComplex, fixture, load_complex
from .stratcx import StratumData
from .stratmodel import PartitionedModel, Refinement, StratPoset, refinement_from_json


class InputError(ValueError):
    """Malformed or inconsistent input (exit code 2 on the command line)."""


def read_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, ModP):
        return int(obj.v)
    if isinstance(obj, NovikovElement):
        return obj.to_json()
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    return repr(obj)


def dumps(data) -> str:
    """Byte-stable JSON rendering."""
    return json.dumps(data, sort_keys=True, indent=2, default=_default)


def write_json(path, data):
    Path(path).write_text(dumps(data) + "\n")


# ---------------------------------------------------------------------------
# models


def model_from_json(data):
    """A StratPoset, a PartitionedModel (``kinds``), a Refinement
    (``source``/``target``/``map``) or StratumData (``model``/``dim``)."""
    try:
        if not isinstance(data, dict):
            raise InputError("model file must hold a JSON object")
        if {"source", "target", "map"} <= set(data):
            return refinement_from_json(data)
        if "model" in data and "dim" in data:
            return StratumData.from_json(data)
        P = StratPoset.from_json(data)
        if "kinds" in data:
            kinds = {label_from_json(e): k for e, k in data["kinds"]}
            return PartitionedModel(P, kinds)
        return P
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed model: {exc}") from exc


def load_model(path):
    return model_from_json(read_json(path))


def model_kind(obj) -> str:
    if isinstance(obj, Refinement):
        return "refinement"
    if isinstance(obj, PartitionedModel):
        return "partitioned"
    if isinstance(obj, StratumData):
        return "stratum-data"
    return "model"


# ---------------------------------------------------------------------------
# complexes, matchings, flow categories


FIXTURE_NAMES = ("triangle", "s1", "s2", "t2", "rp2", "klein")


def load_simplicial(path) -> SimplicialComplex:
    """A facet file, or the name of a bundled fixture when no such file exists."""
    if str(path) in FIXTURE_NAMES and not Path(path).exists():
        return fixture(str(path))
    try:
        return load_complex(path)
    except ComplexFormatError as exc:
        raise InputError(f"{path}: {exc}") from exc


def matching_from_json(K: SimplicialComplex, data) -> DiscreteMorseData:
    """Read ``{"pairs": [[face, coface], ...]}`` and check the cells exist."""
    try:
        order = {v: i for i, v in enumerate(K.vertices)}
        pairs = []
        for a, b in data["pairs"]:
            a = tuple(sorted((label_from_json(v) for v in a), key=order.__getitem__))
            b = tuple(sorted((label_from_json(v) for v in b), key=order.__getitem__))
            if a not in K.index or b not in K.index:
                raise InputError(f"matching pair ({a}, {b}) uses a cell not in the complex")
            pairs.append((a, b))
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed matching: {exc}") from exc
    used = {c for p in pairs for c in p}
    return DiscreteMorseData(K, pairs, [s for s in K.cells if s not in used])


def load_matching(K: SimplicialComplex, path) -> DiscreteMorseData:
    return matching_from_json(K, read_json(path))


def load_flow_category(path) -> FlowCategory:
    try:
        return FlowCategory.from_json(read_json(path))
    except InputError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"malformed flow category: {exc}") from exc


# ---------------------------------------------------------------------------
# cubical sets


BUILTIN_CUBICAL = {
    "point": point,
    "interval": lambda: RepresentableCube(1),
    "square": lambda: RepresentableCube(2),
    "cube3": lambda: RepresentableCube(3),
    "symmetric-square": symmetric_square,
    "circle": circle,
}


def load_cubical(spec: str):
    """A builtin name or a JSON file of generator, face and symmetry tables."""
    if spec in BUILTIN_CUBICAL:
        return BUILTIN_CUBICAL[spec]()
    if spec.startswith("cube") and spec[4:].isdigit():
        return RepresentableCube(int(spec[4:]))
    try:
        return ExplicitCubicalSet.from_json(read_json(spec))
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed cubical set: {exc}") from exc
