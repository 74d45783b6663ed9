"""JSON model files: product space, kernels, optional vector components and generator recipe.

Layout::

    {"coordinates": [{"support": [...], "probs": [...]}, ...],
     "components": [{"subset": [1, 2], "values": [...]}, ...],
     "order": 2,
     "vector": [{"order": 1, "components": [...]}, ...],
     "generator": {"kind": "homogeneous", "params": {...}}}

Subsets are 1-based; ``values`` are row-major over the supports of the subset, in subset order.
Explicit components take precedence over the generator recipe, which is then kept as metadata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ModelError
from .generators import balanced_coefficients, homogeneous_sum, symmetric_ustat, weighted_ustat
from .hoeffding import DegenerateUStatistic, HoeffdingDecomposition, VectorModel, as_ustatistic, decompose
from .space import DEFAULT_BUDGET, Coordinate, FiniteProductSpace, SubsetKernel

Components = tuple[tuple[tuple[int, ...], tuple[float, ...]], ...]


@dataclass(frozen=True)
class ModelSpec:
    coordinates: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...]
    components: Components = ()
    order: int | None = None
    vector: tuple[tuple[int, Components], ...] = ()
    generator: dict | None = field(default=None, hash=False)

    def space(self) -> FiniteProductSpace:
        if not self.coordinates:
            law = _generator_law(self.generator or {})
            n = int((self.generator or {}).get("params", {}).get("n", 0))
            if n < 1:
                raise ModelError("model has no coordinates")
            return FiniteProductSpace.iid(n, law)
        return FiniteProductSpace(tuple(Coordinate(s, p) for s, p in self.coordinates))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "coordinates": [{"support": list(s), "probs": list(p)} for s, p in self.coordinates],
            "components": _dump_components(self.components),
        }
        if self.order is not None:
            out["order"] = self.order
        if self.vector:
            out["vector"] = [{"order": o, "components": _dump_components(c)} for o, c in self.vector]
        if self.generator is not None:
            out["generator"] = self.generator
        return out


def _dump_components(comps: Components) -> list[dict]:
    return [{"subset": list(s), "values": list(v)} for s, v in comps]


def _num_list(x, what: str) -> tuple[float, ...]:
    if not isinstance(x, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        raise ModelError(f"{what} must be a list of numbers")
    return tuple(float(v) for v in x)


def _parse_components(raw, what: str) -> Components:
    if not isinstance(raw, list):
        raise ModelError(f"{what} must be a list")
    out = []
    for c in raw:
        if not isinstance(c, dict) or "subset" not in c or "values" not in c:
            raise ModelError(f"each entry of {what} needs 'subset' and 'values'")
        subset = c["subset"]
        if not isinstance(subset, list) or not all(isinstance(j, int) and not isinstance(j, bool) for j in subset):
            raise ModelError(f"subset in {what} must be a list of integers")
        out.append((tuple(subset), _num_list(c["values"], f"values in {what}")))
    return tuple(out)


def parse_model(doc: Any) -> ModelSpec:
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    coords = []
    for c in doc.get("coordinates", []):
        if not isinstance(c, dict):
            raise ModelError("each coordinate must be an object with 'support' and 'probs'")
        coords.append((_num_list(c.get("support"), "support"), _num_list(c.get("probs"), "probs")))
    comps = _parse_components(doc.get("components", []), "components")
    order = doc.get("order")
    if order is not None and (not isinstance(order, int) or order < 0):
        raise ModelError("order must be a nonnegative integer")
    vector = []
    for entry in doc.get("vector", []) or []:
        if not isinstance(entry, dict) or not isinstance(entry.get("order"), int):
            raise ModelError("each vector entry needs an integer 'order'")
        vector.append((entry["order"], _parse_components(entry.get("components", []), "vector components")))
    gen = doc.get("generator")
    if gen is not None and (not isinstance(gen, dict) or "kind" not in gen):
        raise ModelError("generator must be an object with a 'kind'")
    spec = ModelSpec(tuple(coords), comps, order, tuple(vector), gen)
    spec.space()
    return spec


def load_model(path: str | Path) -> ModelSpec:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ModelError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file {path} is not valid JSON: {exc}") from exc
    return parse_model(doc)


def save_model(spec: ModelSpec, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(spec.to_dict(), fh, indent=2)
        fh.write("\n")


def _kernels(space: FiniteProductSpace, comps: Components) -> list[SubsetKernel]:
    return [SubsetKernel.from_flat(space, s, v) for s, v in comps]


def _generator_law(gen: dict) -> Coordinate:
    law = gen.get("params", {}).get("law")
    if law is None:
        return Coordinate.rademacher()
    return Coordinate(_num_list(law.get("support"), "law support"), _num_list(law.get("probs"), "law probs"))


def _from_generator(gen: dict) -> DegenerateUStatistic:
    kind, params = gen["kind"], gen.get("params", {})
    law = _generator_law(gen)
    try:
        n, d = int(params["n"]), int(params.get("d", 2))
        if kind == "homogeneous":
            coeffs = params.get("coefficients", "balanced")
            if coeffs == "balanced":
                coeffs = balanced_coefficients(n, d)
            else:
                coeffs = {tuple(c["subset"]): float(c["a"]) for c in coeffs}
            return homogeneous_sum(n, d, coeffs, law)
        if kind == "symmetric":
            return symmetric_ustat(n, d, params["kernel"], law)
        if kind == "weighted":
            return weighted_ustat(n, params["weights"], params["kernel"], law)
    except (KeyError, TypeError) as exc:
        raise ModelError(f"bad generator parameters for {kind!r}: {exc}") from exc
    raise ModelError(f"unknown generator kind {kind!r}")


def decomposition(spec: ModelSpec, budget: int | None = DEFAULT_BUDGET) -> HoeffdingDecomposition:
    """Hoeffding decomposition of the scalar model (explicit components or generator)."""
    if spec.components:
        space = spec.space()
        return decompose(space, _kernels(space, spec.components), budget)
    if spec.generator is not None:
        return _from_generator(spec.generator).decomposition
    if spec.vector:
        raise ModelError("model is a vector model; use the vector commands")
    return HoeffdingDecomposition(spec.space(), {})


def statistic(spec: ModelSpec, budget: int | None = DEFAULT_BUDGET) -> DegenerateUStatistic:
    """The scalar model as a degenerate U-statistic (not rescaled); model error if not degenerate."""
    if not spec.components and spec.generator is not None:
        return _from_generator(spec.generator)
    return as_ustatistic(decomposition(spec, budget), spec.order)


def vector(spec: ModelSpec, budget: int | None = DEFAULT_BUDGET) -> VectorModel:
    if not spec.vector:
        raise ModelError("model has no 'vector' section")
    space = spec.space()
    comps = []
    for order, raw in spec.vector:
        comps.append(as_ustatistic(decompose(space, _kernels(space, raw), budget), order))
    return VectorModel(tuple(comps))


def spec_from_statistic(u: DegenerateUStatistic, generator: dict | None = None) -> ModelSpec:
    space = u.space
    coords = tuple((c.support, c.probs) for c in space.coordinates)
    comps = tuple((J, tuple(k.flat())) for J, k in u.components.items())
    return ModelSpec(coords, comps, u.order, (), generator)


def spec_from_vector(v: VectorModel) -> ModelSpec:
    coords = tuple((c.support, c.probs) for c in v.space.coordinates)
    vec = tuple((c.order, tuple((J, tuple(k.flat())) for J, k in c.components.items())) for c in v.components)
    return ModelSpec(coords, (), None, vec, None)

