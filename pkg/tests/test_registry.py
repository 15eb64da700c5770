from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from chatedit.errors import DuplicateName, InvalidHierarchy, NotFound, UnknownExecutor
from chatedit.registry import (
    MAIN_LEVEL,
    FunctionRegistry,
    FunctionSpec,
    Kind,
    SubLevelOf,
    build_registry,
    normalize_name,
    register_function,
    resolve,
    resolve_leaf,
)

EXECUTORS = {"op.a", "op.b", "op.c", "op.d", "op.e", "op.f", "op.g"}


def leaf(name: str, executor: str = "op.a") -> FunctionSpec:
    return FunctionSpec(name=name, description=f"{name} does things.", executor_id=executor)


def group(name: str, children: list[FunctionSpec]) -> FunctionSpec:
    return FunctionSpec(
        name=name, description=f"{name} groups options.", kind=Kind.GROUP,
        children=tuple(children),
    )


def test_register_into_empty_registry():
    registry = register_function(FunctionRegistry(), leaf("Image Enhancement"), EXECUTORS)
    assert len(registry.mains) == 1
    assert registry.version == 1


def test_register_is_persistent_not_mutating():
    base = register_function(FunctionRegistry(), leaf("A"), EXECUTORS)
    extended = register_function(base, leaf("B"), EXECUTORS)
    assert [m.name for m in base.mains] == ["A"]
    assert [m.name for m in extended.mains] == ["A", "B"]
    assert extended.version == base.version + 1


def test_duplicate_name_is_case_insensitive():
    registry = register_function(
        FunctionRegistry(),
        group("Lipstick Coloring", [leaf("X"), leaf("Y")]),
        EXECUTORS,
    )
    with pytest.raises(DuplicateName):
        register_function(registry, leaf("lipstick coloring"), EXECUTORS)


def test_five_filter_group_accepted_and_lists_five_subs(registry):
    filters = resolve(registry, "Photo Filters", MAIN_LEVEL)
    assert filters.is_group()
    assert len(filters.children) == 5


def test_nine_lipstick_shades(registry):
    lipstick = resolve(registry, "Lipstick Coloring", MAIN_LEVEL)
    assert len(lipstick.children) == 9
    names = {c.name for c in lipstick.children}
    assert {"Pure Red", "Burnt Tomato", "Pure Orange"} <= names


def test_group_needs_two_children():
    with pytest.raises(InvalidHierarchy):
        register_function(FunctionRegistry(), group("G", [leaf("only")]), EXECUTORS)


def test_nested_group_rejected_at_any_depth():
    inner = group("Inner", [leaf("a"), leaf("b")])
    outer = group("Outer", [inner, leaf("c")])
    with pytest.raises(InvalidHierarchy):
        register_function(FunctionRegistry(), outer, EXECUTORS)
    # one level deeper still rejected
    outermost = group("Outermost", [group("Mid", [inner, leaf("d")]), leaf("e")])
    with pytest.raises(InvalidHierarchy):
        register_function(FunctionRegistry(), outermost, EXECUTORS)


def _tree(depth: int, label: str) -> FunctionSpec:
    if depth <= 1:
        return leaf(f"L{label}")
    return group(f"G{label}", [_tree(depth - 1, f"{label}0"), _tree(depth - 1, f"{label}1")])


@given(data=st.data())
def test_arbitrarily_nested_hierarchies_accepted_iff_depth_at_most_two(data):
    depth = data.draw(st.integers(min_value=1, max_value=5))
    spec = _tree(depth, data.draw(st.text(alphabet="abc", min_size=1, max_size=4)))
    if depth <= 2:
        registry = register_function(FunctionRegistry(), spec, EXECUTORS)
        assert registry.version == 1
    else:
        with pytest.raises(InvalidHierarchy):
            register_function(FunctionRegistry(), spec, EXECUTORS)


def test_leaf_with_children_rejected():
    bad = FunctionSpec(name="L", description="d", kind=Kind.LEAF,
                       children=(leaf("x"),), executor_id="op.a")
    with pytest.raises(InvalidHierarchy):
        register_function(FunctionRegistry(), bad, EXECUTORS)


def test_unknown_executor_rejected():
    with pytest.raises(UnknownExecutor):
        register_function(FunctionRegistry(), leaf("L", executor="op.nope"), EXECUTORS)
    with pytest.raises(UnknownExecutor):
        register_function(
            FunctionRegistry(),
            FunctionSpec(name="L", description="d"),  # no executor at all
            EXECUTORS,
        )


def test_group_with_executor_rejected():
    bad = FunctionSpec(
        name="G", description="d", kind=Kind.GROUP,
        children=(leaf("a"), leaf("b")), executor_id="op.a",
    )
    with pytest.raises(InvalidHierarchy):
        register_function(FunctionRegistry(), bad, EXECUTORS)


def test_resolve_normalizes_whitespace_and_case(registry):
    spec = resolve(registry, "  whiten   SKIN ", MAIN_LEVEL)
    assert spec.name == "Whiten Skin"


def test_resolve_has_no_fuzzy_matching(registry):
    with pytest.raises(NotFound):
        resolve(registry, "Open Eye", MAIN_LEVEL)


def test_resolve_sub_level(registry):
    spec = resolve(registry, "Pure Orange", SubLevelOf("Lipstick Coloring"))
    assert spec.executor_id == "recolor.pure_orange"


def test_resolve_sub_level_unknown_parent_and_child(registry):
    with pytest.raises(NotFound):
        resolve(registry, "Pure Orange", SubLevelOf("No Such Group"))
    with pytest.raises(NotFound):
        resolve(registry, "Hot Pink", SubLevelOf("Lipstick Coloring"))
    with pytest.raises(NotFound):
        resolve(registry, "anything", SubLevelOf("Open Eyes"))  # leaf has no subs


def test_resolve_leaf_flat_scope(registry):
    spec, main = resolve_leaf(registry, "pure orange")
    assert spec.name == "Pure Orange"
    assert main == "Lipstick Coloring"
    with pytest.raises(NotFound):
        resolve_leaf(registry, "Lipstick Coloring")  # groups are not leaves


_NAME = st.text(
    alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd"), whitelist_characters=" "),
    min_size=1,
    max_size=24,
).filter(lambda s: s.strip() and normalize_name(s))


@given(name=_NAME)
def test_register_resolve_round_trip(name):
    registry = register_function(FunctionRegistry(), leaf(name), EXECUTORS)
    assert resolve(registry, name, MAIN_LEVEL).name == name


@given(name=_NAME, query=_NAME)
def test_resolve_total_one_or_not_found(name, query):
    registry = register_function(FunctionRegistry(), leaf(name), EXECUTORS)
    try:
        spec = resolve(registry, query, MAIN_LEVEL)
        assert normalize_name(spec.name) == normalize_name(query)
    except NotFound:
        assert normalize_name(query) != normalize_name(name)


def test_manifest_round_trip(tmp_path):
    doc = {
        "functions": [
            {"name": "Solo", "description": "a leaf.", "kind": "leaf", "executor_id": "op.a"},
            {
                "name": "Pack", "description": "a group.", "kind": "group",
                "children": [
                    {"name": "One", "description": "first.", "executor_id": "op.b"},
                    {"name": "Two", "description": "second.", "executor_id": "op.c"},
                ],
            },
        ]
    }
    import json

    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(doc))
    from chatedit.registry import load_manifest

    registry = load_manifest(path, EXECUTORS)
    assert [m.name for m in registry.mains] == ["Solo", "Pack"]
    assert resolve(registry, "two", SubLevelOf("Pack")).executor_id == "op.c"


def test_build_registry_orders_mains():
    registry = build_registry([leaf("B"), leaf("A")], EXECUTORS)
    assert [m.name for m in registry.mains] == ["B", "A"]
