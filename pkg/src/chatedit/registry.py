"""The plug-and-play function library.

Holds the edit functions the model can select: top-level ("main") functions,
some of which are groups of related sub-functions. The hierarchy is exactly
two levels deep — a group's children are always leaves — because selection
runs as one main pass plus at most one sub pass per chosen group.

Name resolution is exact after normalization (trim, collapse inner
whitespace, case-fold). There is deliberately no fuzzy matching: a name the
model invents must fail observably so accuracy scoring stays unambiguous.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Collection, Iterable, Optional, Union

from .errors import DuplicateName, InvalidHierarchy, NotFound, UnknownExecutor


class Kind(Enum):
    LEAF = "leaf"
    GROUP = "group"


def normalize_name(name: str) -> str:
    """Canonical form used for every name comparison."""
    return " ".join(name.split()).casefold()


@dataclass(frozen=True)
class FunctionSpec:
    """One entry of the function library.

    ``description`` is the natural-language capability summary placed into
    the functions block of the prompt, so it should read as one to three
    plain sentences.
    """

    name: str
    description: str
    kind: Kind = Kind.LEAF
    children: tuple["FunctionSpec", ...] = ()
    executor_id: Optional[str] = None

    def is_group(self) -> bool:
        return self.kind is Kind.GROUP


class MainLevel:
    """Scope marker: resolve among the top-level functions."""

    def __repr__(self) -> str:  # pragma: no cover
        return "MainLevel"


MAIN_LEVEL = MainLevel()


@dataclass(frozen=True)
class SubLevelOf:
    """Scope marker: resolve among the children of the named main function."""

    main_name: str


Scope = Union[MainLevel, SubLevelOf]


def _validate_spec(spec: FunctionSpec, known_executors: Collection[str]) -> None:
    if spec.kind is Kind.LEAF:
        if spec.children:
            raise InvalidHierarchy(f"leaf {spec.name!r} must not have children")
        if not spec.executor_id:
            raise UnknownExecutor(f"leaf {spec.name!r} has no executor_id")
        if spec.executor_id not in known_executors:
            raise UnknownExecutor(
                f"leaf {spec.name!r} references unknown executor {spec.executor_id!r}"
            )
        return

    if len(spec.children) < 2:
        raise InvalidHierarchy(f"group {spec.name!r} needs at least 2 sub-functions")
    if spec.executor_id is not None:
        raise InvalidHierarchy(f"group {spec.name!r} must not bind an executor")
    seen: set[str] = set()
    for child in spec.children:
        if child.kind is not Kind.LEAF:
            raise InvalidHierarchy(
                f"group {spec.name!r} nests {child.name!r}; hierarchy depth is fixed at 2"
            )
        key = normalize_name(child.name)
        if key in seen:
            raise DuplicateName(f"duplicate sub-function {child.name!r} in {spec.name!r}")
        seen.add(key)
        _validate_spec(child, known_executors)


@dataclass(frozen=True)
class FunctionRegistry:
    """Immutable, validated snapshot of the function library.

    The order of ``mains`` is the order used when rendering prompts, so two
    registries with the same content in the same order produce byte-identical
    prompts. Registration never mutates; it returns a new snapshot with a
    bumped version.
    """

    mains: tuple[FunctionSpec, ...] = ()
    version: int = 0
    _main_index: dict[str, FunctionSpec] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        index = {normalize_name(m.name): m for m in self.mains}
        object.__setattr__(self, "_main_index", index)

    def leaves(self) -> list[tuple[FunctionSpec, str]]:
        """Every executable leaf paired with its owning main-function name."""
        out: list[tuple[FunctionSpec, str]] = []
        for main in self.mains:
            if main.is_group():
                out.extend((child, main.name) for child in main.children)
            else:
                out.append((main, main.name))
        return out


def register_function(
    registry: FunctionRegistry,
    spec: FunctionSpec,
    known_executors: Collection[str],
) -> FunctionRegistry:
    """Append a validated spec, returning a new registry version.

    Raises DuplicateName on a case-insensitive top-level clash,
    InvalidHierarchy for malformed nesting, UnknownExecutor for a leaf whose
    executor_id is not in the execution catalog.
    """
    _validate_spec(spec, known_executors)
    key = normalize_name(spec.name)
    for main in registry.mains:
        if normalize_name(main.name) == key:
            raise DuplicateName(f"main function {spec.name!r} already registered")
    return FunctionRegistry(mains=registry.mains + (spec,), version=registry.version + 1)


def build_registry(
    specs: Iterable[FunctionSpec], known_executors: Collection[str]
) -> FunctionRegistry:
    """Validate and register a whole library in order."""
    registry = FunctionRegistry()
    for spec in specs:
        registry = register_function(registry, spec, known_executors)
    return registry


def resolve(registry: FunctionRegistry, name: str, scope: Scope = MAIN_LEVEL) -> FunctionSpec:
    """Exact lookup of a model-emitted name within one scope.

    Raises NotFound when nothing matches after normalization; the dispatcher
    treats that as a failed invocation, never a crash.
    """
    key = normalize_name(name)
    if isinstance(scope, MainLevel):
        spec = registry._main_index.get(key)
        if spec is None:
            raise NotFound(f"no main function named {name!r}")
        return spec

    parent = registry._main_index.get(normalize_name(scope.main_name))
    if parent is None:
        raise NotFound(f"no main function named {scope.main_name!r}")
    if not parent.is_group():
        raise NotFound(f"{parent.name!r} has no sub-functions")
    for child in parent.children:
        if normalize_name(child.name) == key:
            return child
    raise NotFound(f"no sub-function named {name!r} in {parent.name!r}")


def resolve_leaf(registry: FunctionRegistry, name: str) -> tuple[FunctionSpec, str]:
    """Flat lookup across every leaf (groups expanded); used by the
    non-hierarchical baseline. Returns (leaf, owning main name)."""
    key = normalize_name(name)
    for leaf, main_name in registry.leaves():
        if normalize_name(leaf.name) == key:
            return leaf, main_name
    raise NotFound(f"no leaf function named {name!r}")


# --- manifest ---------------------------------------------------------------
#
# The library ships as a JSON manifest loaded at startup:
#
#   {"functions": [
#       {"name": ..., "description": ..., "kind": "leaf", "executor_id": ...},
#       {"name": ..., "description": ..., "kind": "group",
#        "children": [{"name": ..., "description": ..., "executor_id": ...}, ...]}
#   ]}
#
# Children are always leaves, so their "kind" may be omitted.

def _spec_from_dict(entry: dict) -> FunctionSpec:
    kind = Kind(entry.get("kind", "leaf"))
    children = tuple(_spec_from_dict(c) for c in entry.get("children", []))
    return FunctionSpec(
        name=entry["name"],
        description=entry["description"],
        kind=kind,
        children=children,
        executor_id=entry.get("executor_id"),
    )


def load_manifest(path: Union[str, Path], known_executors: Collection[str]) -> FunctionRegistry:
    """Load and validate a registry manifest file."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return build_registry((_spec_from_dict(e) for e in doc["functions"]), known_executors)
