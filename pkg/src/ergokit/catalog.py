"""JSON catalog of named systems and observables.

Schema (see docs/formats.md): a top-level object with "systems" and
"observables" lists; every entry is {name, kind, params}.  System kinds:
translation, shear, circle_sine, doubling, full_shift, sft, interval_shift.
Observable kinds: displacement, cylinder_indicator, symbol_embedding,
trig_poly, coboundary_plus_constant, constant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .complexity import IntervalAlphabetShift
from .observables import (
    Constant,
    CoboundaryPlusConstant,
    CylinderIndicator,
    Displacement,
    Observable,
    SymbolEmbedding,
    TrigObservable,
)
from .systems import (
    SIN_SQUARED,
    CircleSineLift,
    DoublingMap,
    ShearLift,
    ShiftSystem,
    TranslationLift,
    TrigPoly,
    full_shift,
    golden_mean_sft,
)
from .symbolic import ShiftSpace


class CatalogError(ValueError):
    """Malformed catalog entry or dangling reference."""


def _trig_poly(params) -> TrigPoly:
    if params.get("sin_squared"):
        return SIN_SQUARED
    return TrigPoly(
        const=float(params.get("const", 0.0)),
        sin_coeffs=tuple(float(c) for c in params.get("sin", [])),
        cos_coeffs=tuple(float(c) for c in params.get("cos", [])),
    )


def build_system(entry: dict):
    kind = entry.get("kind")
    params = entry.get("params", {})
    name = entry.get("name", kind)
    try:
        if kind == "translation":
            return TranslationLift(params["vector"], name=name,
                                   claims_volume_preserving=params.get(
                                       "claims_volume_preserving", True))
        if kind == "shear":
            return ShearLift(_trig_poly(params), name=name,
                             claims_volume_preserving=params.get(
                                 "claims_volume_preserving", True))
        if kind == "circle_sine":
            return CircleSineLift(params["a"], params["b"], name=name)
        if kind == "doubling":
            return DoublingMap(name=name)
        if kind == "full_shift":
            emb = params.get("embedding")
            emb = {int(k): v for k, v in emb.items()} if emb else None
            return full_shift(int(params.get("alphabet", 2)), embedding=emb, name=name)
        if kind == "sft":
            if params.get("golden_mean"):
                return golden_mean_sft(name=name)
            return ShiftSystem(
                ShiftSpace(int(params["alphabet"]), transition=params["transition"],
                           name=name), name=name)
        if kind == "interval_shift":
            return IntervalAlphabetShift()
    except KeyError as exc:
        raise CatalogError(f"system {name!r}: missing parameter {exc}") from exc
    raise CatalogError(f"unknown system kind {kind!r}")


def build_observable(entry: dict, systems: dict) -> Observable:
    kind = entry.get("kind")
    params = entry.get("params", {})
    name = entry.get("name", kind)
    try:
        if kind == "displacement":
            system = systems[params["system"]]
            return Displacement(system)
        if kind == "cylinder_indicator":
            return CylinderIndicator(params["word"], scale=float(params.get("scale", 1.0)))
        if kind == "symbol_embedding":
            return SymbolEmbedding({int(k): v for k, v in params["mapping"].items()})
        if kind == "trig_poly":
            return TrigObservable(_trig_poly(params), coordinate=int(params.get("coordinate", 0)))
        if kind == "coboundary_plus_constant":
            system = systems[params["system"]]
            transfer = build_observable(params["transfer"], systems)
            return CoboundaryPlusConstant(system, transfer, params["vector"])
        if kind == "constant":
            return Constant(params["vector"])
    except KeyError as exc:
        raise CatalogError(f"observable {name!r}: missing parameter or system {exc}") from exc
    raise CatalogError(f"unknown observable kind {kind!r}")


@dataclass
class Catalog:
    systems: dict
    observables: dict

    def system(self, name: str):
        if name not in self.systems:
            raise CatalogError(f"no system named {name!r} in the catalog")
        return self.systems[name]

    def observable(self, name: str) -> Observable:
        if name not in self.observables:
            raise CatalogError(f"no observable named {name!r} in the catalog")
        return self.observables[name]


DEFAULT_CATALOG = {
    "systems": [
        {"name": "translation_3_7", "kind": "translation",
         "params": {"vector": [0.3, 0.7], "claims_volume_preserving": True}},
        {"name": "shear_sin2", "kind": "shear", "params": {"sin_squared": True}},
        {"name": "golden_rotation", "kind": "translation",
         "params": {"vector": [0.6180339887498949], "claims_volume_preserving": True}},
        {"name": "circle_north_south", "kind": "circle_sine", "params": {"a": 0.0, "b": 0.05}},
        {"name": "circle_forced", "kind": "circle_sine", "params": {"a": 0.55, "b": 0.1}},
        {"name": "doubling", "kind": "doubling", "params": {}},
        {"name": "full_shift_2", "kind": "full_shift", "params": {"alphabet": 2}},
        {"name": "full_shift_3", "kind": "full_shift",
         "params": {"alphabet": 3, "embedding": {"0": [0, 0], "1": [1, 0], "2": [0, 1]}}},
        {"name": "golden_sft", "kind": "sft", "params": {"alphabet": 2, "golden_mean": True}},
        {"name": "interval_shift", "kind": "interval_shift", "params": {}},
    ],
    "observables": [
        {"name": "disp_translation", "kind": "displacement", "params": {"system": "translation_3_7"}},
        {"name": "disp_shear", "kind": "displacement", "params": {"system": "shear_sin2"}},
        {"name": "disp_north_south", "kind": "displacement",
         "params": {"system": "circle_north_south"}},
        {"name": "cyl1", "kind": "cylinder_indicator", "params": {"word": [1]}},
        {"name": "embed3", "kind": "symbol_embedding",
         "params": {"mapping": {"0": [0, 0], "1": [1, 0], "2": [0, 1]}}},
        {"name": "sin2_height", "kind": "trig_poly", "params": {"sin_squared": True}},
        {"name": "cob_plus_half", "kind": "coboundary_plus_constant",
         "params": {"system": "full_shift_2", "vector": [0.5],
                    "transfer": {"kind": "cylinder_indicator", "params": {"word": [0, 1]}}}},
    ],
}


def load_catalog(path=None) -> Catalog:
    """Parse a catalog file; None loads the built-in default catalog."""
    data = DEFAULT_CATALOG if path is None else json.load(open(path))
    if not isinstance(data, dict) or "systems" not in data:
        raise CatalogError("catalog must be an object with a 'systems' list")
    systems = {}
    for entry in data.get("systems", []):
        systems[entry["name"]] = build_system(entry)
    observables = {}
    for entry in data.get("observables", []):
        observables[entry["name"]] = build_observable(entry, systems)
    return Catalog(systems, observables)
