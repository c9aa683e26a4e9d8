"""JSON file formats for models, maps, and partitions.

Rationals travel as strings ("p/q", "0", "1") so no float ever touches a
mass.  A model file holds either a labelled process (kind "nlmp") or an
effectivity function (kind "ef"); measures are objects mapping a state to
its atom's mass, omitted states carrying mass zero.  Emission is canonical:
states in carrier order, atoms always listed, masses in lowest terms, so
re-parsing an emitted model yields an equal value and equal inputs emit
byte-identical JSON.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .effectivity import EffFn
from .errors import EffkitError, ModelFormatError
from .measure import SubProb
from .nlmp import Kernel, Nlmp
from .space import MeasurableMap, Space
from .upperset import MeasureSet, UpperSet

__all__ = [
    "Model",
    "load_model",
    "load_map",
    "load_partition",
    "model_from_dict",
    "model_to_dict",
    "ef_model",
    "nlmp_model",
    "dumps_canonical",
]

_RATIONAL = re.compile(r"^\d+(/[1-9]\d*)?$")


@dataclass(frozen=True)
class Model:
    kind: str
    space: Space
    nlmp: Nlmp | None = None
    ef: EffFn | None = None


def _fail(message: str, file: str | None, location: str) -> ModelFormatError:
    return ModelFormatError(message, file=file, location=location)


def _parse_rational(raw: Any, file: str | None, location: str) -> Fraction:
    if not isinstance(raw, str) or not _RATIONAL.match(raw):
        raise _fail(
            f'rationals must be "p/q", "0" or "1" strings, got {raw!r}', file, location
        )
    return Fraction(raw)


def _parse_measure(raw: Any, space: Space, file: str | None, location: str) -> SubProb:
    if not isinstance(raw, dict):
        raise _fail(f"a measure must be an object, got {type(raw).__name__}", file, location)
    masses = {
        state: _parse_rational(value, file, f"{location}.{state}")
        for state, value in raw.items()
    }
    try:
        return SubProb.of(space, masses)
    except EffkitError as exc:
        raise _fail(str(exc), file, location) from exc


def _parse_space(doc: Mapping[str, Any], file: str | None) -> Space:
    states = doc.get("states")
    if not isinstance(states, list) or not states or not all(isinstance(s, str) for s in states):
        raise _fail("'states' must be a nonempty list of strings", file, "states")
    if len(set(states)) != len(states):
        raise _fail("duplicate state names", file, "states")
    sigma = doc.get("sigma")
    if sigma is not None and (
        not isinstance(sigma, list)
        or not all(isinstance(b, list) and all(isinstance(s, str) for s in b) for b in sigma)
    ):
        raise _fail("'sigma' must be a list of blocks of state names", file, "sigma")
    try:
        if sigma is None:
            return Space(states)
        return Space(states, sigma)
    except EffkitError as exc:
        raise _fail(str(exc), file, "sigma") from exc


def model_from_dict(doc: Mapping[str, Any], file: str | None = None) -> Model:
    if not isinstance(doc, Mapping):
        raise _fail("model file must hold a JSON object", file, "$")
    kind = doc.get("kind")
    if kind not in ("nlmp", "ef"):
        raise _fail("'kind' must be \"nlmp\" or \"ef\"", file, "kind")
    space = _parse_space(doc, file)
    if kind == "nlmp":
        labels = doc.get("labels")
        if not isinstance(labels, list) or not all(isinstance(a, str) for a in labels):
            raise _fail("'labels' must be a list of strings", file, "labels")
        kernels_doc = doc.get("kernels")
        if not isinstance(kernels_doc, dict) or set(kernels_doc) != set(labels):
            raise _fail("'kernels' must map every label to a kernel", file, "kernels")
        kernels = {}
        for label in labels:
            per_state = kernels_doc[label]
            if not isinstance(per_state, dict):
                raise _fail("a kernel must map states to measure lists", file, f"kernels.{label}")
            image = {}
            for state, measures in per_state.items():
                if state not in space.carrier:
                    raise _fail(f"unknown state {state!r}", file, f"kernels.{label}.{state}")
                if not isinstance(measures, list):
                    raise _fail("kernel entries must be lists of measures", file, f"kernels.{label}.{state}")
                image[state] = [
                    _parse_measure(m, space, file, f"kernels.{label}.{state}[{i}]")
                    for i, m in enumerate(measures)
                ]
            kernels[label] = Kernel(space, image)
        return Model("nlmp", space, nlmp=Nlmp(space, kernels))

    eff_doc = doc.get("effectivity")
    if not isinstance(eff_doc, dict):
        raise _fail("'effectivity' must map states to generator lists", file, "effectivity")
    portfolio = {}
    for state, gens in eff_doc.items():
        if state not in space.carrier:
            raise _fail(f"unknown state {state!r}", file, f"effectivity.{state}")
        if not isinstance(gens, list):
            raise _fail("portfolio entries must be lists of generators", file, f"effectivity.{state}")
        parsed = []
        for i, gen in enumerate(gens):
            if not isinstance(gen, list):
                raise _fail("a generator must be a list of measures", file, f"effectivity.{state}[{i}]")
            parsed.append(
                MeasureSet(
                    space,
                    [
                        _parse_measure(m, space, file, f"effectivity.{state}[{i}][{j}]")
                        for j, m in enumerate(gen)
                    ],
                )
            )
        portfolio[state] = UpperSet(space, parsed)
    missing = [s for s in space.carrier if s not in portfolio]
    if missing:
        raise _fail(f"portfolio missing states {missing}", file, "effectivity")
    return Model("ef", space, ef=EffFn(space, portfolio))


def _read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFormatError(f"cannot read file: {exc}", file=str(path)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"invalid JSON: {exc.msg}", file=str(path), location=f"line {exc.lineno}"
        ) from exc


def load_model(path: str | Path) -> Model:
    return model_from_dict(_read_json(path), file=str(path))


def load_partition(path: str | Path, space: Space) -> Space:
    """A partition file is a JSON array of blocks of state names; the result
    is the carrier of ``space`` under the listed partition."""
    doc = _read_json(path)
    if not isinstance(doc, list) or not all(isinstance(b, list) for b in doc):
        raise ModelFormatError(
            "partition file must hold a list of blocks", file=str(path), location="$"
        )
    try:
        return Space(space.carrier, doc)
    except EffkitError as exc:
        raise ModelFormatError(str(exc), file=str(path), location="$") from exc


def load_map(path: str | Path, domain: Space, codomain: Space) -> MeasurableMap:
    """A map file carries a 'map' object (and, informationally, the paths of
    its endpoint models)."""
    doc = _read_json(path)
    if not isinstance(doc, Mapping) or not isinstance(doc.get("map"), dict):
        raise ModelFormatError(
            "map file must hold an object with a 'map' entry", file=str(path), location="map"
        )
    table = doc["map"]
    for k, v in table.items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise ModelFormatError(
                "map entries must be state-to-state strings", file=str(path), location=f"map.{k}"
            )
    try:
        return MeasurableMap(domain, codomain, table)
    except EffkitError as exc:
        raise ModelFormatError(str(exc), file=str(path), location="map") from exc


def _measure_to_dict(mu: SubProb) -> dict[str, str]:
    out = {}
    for i, block in enumerate(mu.space.atoms):
        if mu.mass[i] != 0:
            out[block[0]] = str(mu.mass[i])
    return out


def _measures_to_list(ms: MeasureSet) -> list[dict[str, str]]:
    return [_measure_to_dict(mu) for mu in ms.members]


def ef_model(ef: EffFn) -> Model:
    return Model("ef", ef.space, ef=ef)


def nlmp_model(nlmp: Nlmp) -> Model:
    return Model("nlmp", nlmp.space, nlmp=nlmp)


def model_to_dict(model: Model) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "kind": model.kind,
        "states": list(model.space.carrier),
        "sigma": [list(block) for block in model.space.atoms],
    }
    if model.kind == "nlmp":
        assert model.nlmp is not None
        doc["labels"] = list(model.nlmp.labels)
        doc["kernels"] = {
            label: {s: _measures_to_list(k(s)) for s in model.space.carrier}
            for label, k in model.nlmp.kernels
        }
    else:
        assert model.ef is not None
        doc["effectivity"] = {
            s: [_measures_to_list(g) for g in model.ef(s).generators]
            for s in model.space.carrier
        }
    return doc


def dumps_canonical(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
