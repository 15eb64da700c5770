from __future__ import annotations

import random

import numpy as np
import pytest

from chatedit.dispatch import (
    ExecutionContext,
    InvocationPlan,
    PlanStep,
    execute_plan,
    flat_plan_invocation,
    plan_invocation,
)
from chatedit.errors import ChatEditError, ExecutorError, InvocationFailure
from chatedit.gateway import ScriptEntry, ScriptFixture, ScriptedBackend
from chatedit.imaging import RasterImage, adjust_brightness
from chatedit.parsing import ParsedResponse, render_canonical
from chatedit.prompts import PromptOptions, render_flat_prompt, render_main_prompt
from chatedit.registry import MAIN_LEVEL, resolve
from chatedit.tokens import count_tokens

from conftest import random_image


def reply(names, analysis="ok."):
    return render_canonical(ParsedResponse(tuple(names), analysis))


def strict_backend(turns: list[tuple[str, str]]) -> ScriptedBackend:
    fixture = ScriptFixture(entries=[ScriptEntry(m, r) for m, r in turns], strict=True)
    return ScriptedBackend(fixture)


def test_group_route_resolves_sub_function(registry):
    instruction = "i want an orange lipstick"
    backend = strict_backend(
        [
            (instruction, reply(["Lipstick Coloring"], "orange wish noted.")),
            (instruction, reply(["Pure Orange"], "pure orange fits.")),
        ]
    )
    plan = plan_invocation(instruction, registry, backend)
    assert plan.resolved_names() == ["Pure Orange"]
    assert plan.steps[0].main_name == "Lipstick Coloring"
    assert len(backend.request_log) == 2
    assert not plan.partial


def test_bigger_eyes_selects_enlarge_not_widen(registry):
    instruction = "I want bigger eyes"
    backend = strict_backend(
        [
            (instruction, reply(["Face Shaping"])),
            (instruction, reply(["Enlarge Eyes"])),
        ]
    )
    plan = plan_invocation(instruction, registry, backend)
    assert plan.resolved_names() == ["Enlarge Eyes"]
    assert "Widen Eye Distance" not in plan.resolved_names()


def test_leaf_selection_short_circuits_to_one_call(registry):
    backend = strict_backend([("open", reply(["Open Eyes"], "opening."))])
    plan = plan_invocation("open", registry, backend)
    assert plan.resolved_names() == ["Open Eyes"]
    assert len(backend.request_log) == 1


def test_call_count_is_one_plus_resolved_groups(registry):
    # randomized mains selections; model calls must equal 1 + group count
    rnd = random.Random(42)
    leaf_mains = ["Whiten Skin", "Open Eyes", "Image Enhancement", "Object Removal"]
    groups = {
        "Lipstick Coloring": "Pure Red",
        "Photo Filters": "Vintage",
        "Face Shaping": "Slim Face",
    }
    for trial in range(60):
        k = rnd.randrange(1, 4)
        chosen = rnd.sample(leaf_mains + list(groups), k)
        instruction = f"trial {trial}"
        turns = [(instruction, reply(chosen))]
        for name in chosen:
            if name in groups:
                turns.append((instruction, reply([groups[name]])))
        backend = strict_backend(turns)
        plan = plan_invocation(instruction, registry, backend)
        expected_calls = 1 + sum(1 for name in chosen if name in groups)
        assert len(backend.request_log) == expected_calls
        assert all(not step.spec.is_group() for step in plan.steps)


def test_deterministic_for_fixed_script(registry):
    instruction = "make it vintage"
    turns = [
        (instruction, reply(["Photo Filters"], "a filter fits.")),
        (instruction, reply(["Vintage"], "vintage it is.")),
    ]
    plans = [plan_invocation(instruction, registry, strict_backend(turns)) for _ in range(3)]
    assert len({(tuple(p.resolved_names()), p.token_usage, p.analysis) for p in plans}) == 1


def test_sub_call_context_is_isolated(registry):
    instruction = "i want an orange lipstick"
    history = ["make my skin brighter", "undo that please"]
    backend = strict_backend(
        [
            (instruction, reply(["Lipstick Coloring"])),
            (instruction, reply(["Pure Orange"])),
        ]
    )
    plan_invocation(instruction, registry, backend, history=history)
    main_request, sub_request = backend.request_log
    # main call carries the history
    assert [m.content for m in main_request.messages[1:-1]] == history
    # sub call: exactly [sub system prompt, instruction] and no history text
    assert len(sub_request.messages) == 2
    assert sub_request.messages[1].content == instruction
    joined = "".join(m.content for m in sub_request.messages)
    for h in history:
        assert h not in joined


def test_duplicate_names_execute_as_duplicates(registry):
    instruction = "whiten twice"
    backend = strict_backend([(instruction, reply(["Whiten Skin", "Whiten Skin"]))])
    plan = plan_invocation(instruction, registry, backend)
    assert plan.resolved_names() == ["Whiten Skin", "Whiten Skin"]


def test_format_error_retried_once_with_corrective_sentence(registry):
    instruction = "please open my eyes"
    backend = strict_backend(
        [
            (instruction, "no labels at all, just chatter"),
            ("did not follow the required format", reply(["Open Eyes"])),
        ]
    )
    plan = plan_invocation(instruction, registry, backend)
    assert plan.resolved_names() == ["Open Eyes"]
    assert len(backend.request_log) == 2
    retry_request = backend.request_log[1]
    assert retry_request.messages[-2].role == "assistant"  # failed reply in context


def test_second_format_error_raises_invocation_failure(registry):
    instruction = "please open my eyes"
    backend = strict_backend(
        [
            (instruction, "still chatter"),
            ("did not follow the required format", "chatter again"),
        ]
    )
    with pytest.raises(InvocationFailure) as info:
        plan_invocation(instruction, registry, backend)
    assert info.value.stage == "main"
    assert info.value.tokens_spent > 0


def test_unknown_main_name_raises_invocation_failure(registry):
    backend = strict_backend([("x", reply(["Paint Walls"]))])
    with pytest.raises(InvocationFailure) as info:
        plan_invocation("x", registry, backend)
    assert info.value.stage == "main"


def test_sub_not_found_degrades_to_partial_plan(registry):
    instruction = "tomato lipstick and open eyes"
    backend = strict_backend(
        [
            (instruction, reply(["Lipstick Coloring", "Open Eyes"])),
            (instruction, reply(["Smoky Tomato"])),  # not a shade
        ]
    )
    plan = plan_invocation(instruction, registry, backend)
    assert plan.partial
    assert plan.resolved_names() == ["Open Eyes"]  # failing group contributed nothing
    assert plan.failures[0].name == "Lipstick Coloring"


def test_token_usage_sums_all_calls(registry):
    instruction = "i want an orange lipstick"
    backend = strict_backend(
        [
            (instruction, reply(["Lipstick Coloring"])),
            (instruction, reply(["Pure Orange"])),
        ]
    )
    plan = plan_invocation(instruction, registry, backend)
    expected = sum(
        sum(count_tokens(m.content) for m in request.messages) for request in backend.request_log
    )
    expected += count_tokens(reply(["Lipstick Coloring"])) + count_tokens(reply(["Pure Orange"]))
    assert plan.token_usage == expected


# --- flat baseline ---------------------------------------------------------------

def test_flat_resolves_leaves_in_single_call(registry):
    instruction = "make the photo vintage"
    backend = strict_backend([(instruction, reply(["Vintage"]))])
    plan = flat_plan_invocation(instruction, registry, backend)
    assert plan.resolved_names() == ["Vintage"]
    assert plan.steps[0].main_name == "Photo Filters"
    assert len(backend.request_log) == 1


def test_flat_prompt_equals_hierarchical_for_leaf_only_registry():
    from chatedit.registry import FunctionSpec, build_registry

    leaves = [
        FunctionSpec(name=f"Fn {i}", description="plain leaf.", executor_id="op.x")
        for i in range(3)
    ]
    registry = build_registry(leaves, {"op.x"})
    options = PromptOptions()
    assert render_main_prompt(registry, options) == render_flat_prompt(registry, options)


def test_flat_prompt_costs_more_than_hierarchical_main(registry):
    options = PromptOptions()
    assert count_tokens(render_flat_prompt(registry, options)) > count_tokens(
        render_main_prompt(registry, options)
    )


# --- execution --------------------------------------------------------------------

def _plan(registry, names: list[str], analysis="did the edits.") -> InvocationPlan:
    steps = []
    for name in names:
        spec, main = _leaf_and_main(registry, name)
        steps.append(PlanStep(spec, main))
    return InvocationPlan(tuple(steps), analysis, token_usage=0)


def _leaf_and_main(registry, name):
    from chatedit.registry import resolve_leaf

    return resolve_leaf(registry, name)


def test_grayscale_step_equalizes_channels(registry, catalog, rng):
    image = random_image(rng, 24, 16)
    outcome = execute_plan(
        _plan(registry, ["Grayscale"]), image, ExecutionContext(catalog=catalog)
    )
    data = outcome.image.data
    assert np.array_equal(data[:, :, 0], data[:, :, 1])
    assert np.array_equal(data[:, :, 1], data[:, :, 2])


def test_double_whiten_equals_single_double_step(registry, catalog, rng):
    # exact on images with headroom for two +12 steps
    image = RasterImage(rng.integers(0, 232, size=(20, 20, 3), dtype=np.uint8))
    outcome = execute_plan(
        _plan(registry, ["Whiten Skin", "Whiten Skin"]), image,
        ExecutionContext(catalog=catalog),
    )
    reference = adjust_brightness(image, None, 2)
    assert outcome.image.same_pixels(reference)


def test_empty_plan_is_identity_with_analysis_reply(registry, catalog, rng):
    image = random_image(rng, 10, 10)
    outcome = execute_plan(
        InvocationPlan((), "nothing to do.", 0), image, ExecutionContext(catalog=catalog)
    )
    assert outcome.image.same_pixels(image)
    assert outcome.reply == "nothing to do."


def test_empty_analysis_gets_default_reply(registry, catalog, rng):
    image = random_image(rng, 4, 4)
    outcome = execute_plan(
        InvocationPlan((), "", 0), image, ExecutionContext(catalog=catalog)
    )
    assert outcome.reply  # never empty


def test_executor_failure_reports_step_and_partial_result(registry, rng):
    image = RasterImage(rng.integers(0, 200, size=(8, 8, 3), dtype=np.uint8))

    def boom(img, ctx):
        raise ChatEditError("deliberate failure")

    catalog = {
        "brightness.whiten": lambda img, ctx: adjust_brightness(img, None, 1),
        "stub.open_eyes": boom,
    }
    plan = _plan(registry, ["Whiten Skin", "Open Eyes", "Whiten Skin"])
    with pytest.raises(ExecutorError) as info:
        execute_plan(plan, image, ExecutionContext(catalog=catalog))
    assert info.value.step_index == 1
    partial = info.value.partial
    assert partial.same_pixels(adjust_brightness(image, None, 1))  # step 0 applied


def test_missing_executor_binding_fails_cleanly(registry, rng):
    image = random_image(rng, 4, 4)
    plan = _plan(registry, ["Open Eyes"])
    with pytest.raises(ExecutorError) as info:
        execute_plan(plan, image, ExecutionContext(catalog={}))
    assert info.value.step_index == 0
