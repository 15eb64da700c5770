"""Hierarchical function invocation and plan execution.

One request runs as a main model call that selects among the top-level
functions, followed by exactly one fresh-conversation sub call per selected
group to pin down the concrete sub-function. Leaves selected at the main
level pass through directly, so the number of model calls is always
1 + (number of resolved groups).

A reply that breaks the output grammar is retried once with a corrective
sentence appended to the same conversation; the second failure is a fault of
the request, not a crash. A group whose sub call cannot be resolved
contributes zero steps and marks the plan as a partial failure — accuracy
scoring counts such requests as incorrect.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Callable, Optional, Sequence

from .errors import (
    ChatEditError,
    ExecutorError,
    FormatError,
    InvocationFailure,
    NotFound,
)
from .gateway import ChatMessage, ChatRequest, LLMBackend, complete, make_request
from .imaging import BinaryMask, RasterImage
from .parsing import ParsedResponse, parse_invocation
from .prompts import (
    Language,
    PromptAssets,
    PromptOptions,
    render_flat_prompt,
    render_main_prompt,
    render_sub_prompt,
)
from .registry import (
    MAIN_LEVEL,
    FunctionRegistry,
    FunctionSpec,
    SubLevelOf,
    resolve,
    resolve_leaf,
)

if TYPE_CHECKING:
    from .removal import AdapterPair, RemovalConfig

RETRY_SENTENCE = (
    "Your previous reply did not follow the required format. Reply again with "
    "exactly two labeled parts: a Functions line with one bracketed list of "
    "function names, then an Analysis line."
)


@dataclass(frozen=True)
class PlanStep:
    """One executable step: a leaf function and the main function it came from."""

    spec: FunctionSpec
    main_name: str


@dataclass(frozen=True)
class PlanFailure:
    stage: str
    name: str
    detail: str


@dataclass(frozen=True)
class InvocationPlan:
    """The resolved leaf-function list for one request.

    ``token_usage`` sums prompt and completion tokens over every model call
    made for this request, including retries and failed sub calls.
    """

    steps: tuple[PlanStep, ...]
    analysis: str
    token_usage: int
    failures: tuple[PlanFailure, ...] = ()

    @property
    def partial(self) -> bool:
        return bool(self.failures)

    def resolved_names(self) -> list[str]:
        return [step.spec.name for step in self.steps]


@dataclass(frozen=True)
class EditOutcome:
    """What a completed edit returns to the user: the new image and a
    non-empty text reply, plus the plan that produced them."""

    image: RasterImage
    reply: str
    plan: InvocationPlan


Executor = Callable[[RasterImage, "ExecutionContext"], RasterImage]


@dataclass
class ExecutionContext:
    """Everything executors may need beyond the image itself.

    ``mask`` is the session-supplied region for masked executors (whole image
    when absent). ``extra_tokens`` accumulates model usage spent inside
    executors (the object-removal descriptor call) so request accounting
    stays complete.
    """

    catalog: dict[str, Executor]
    instruction: str = ""
    mask: Optional[BinaryMask] = None
    backend: Optional[LLMBackend] = None
    adapters: Optional["AdapterPair"] = None
    inpainter: Optional[Callable[[RasterImage, BinaryMask], RasterImage]] = None
    removal_config: Optional["RemovalConfig"] = None
    language: Language = Language.EN
    extra_tokens: int = 0
    notes: list[str] = field(default_factory=list)

    def add_tokens(self, amount: int) -> None:
        self.extra_tokens += amount


class _Tally:
    def __init__(self) -> None:
        self.total = 0

    def add(self, amount: int) -> None:
        self.total += amount


def _call_and_parse(
    backend: LLMBackend,
    system_prompt: str,
    instruction: str,
    history: Sequence[str],
    tally: _Tally,
) -> ParsedResponse:
    """One model call parsed under the grammar, with a single corrective
    retry on FormatError. Raises FormatError if the retry also fails."""
    request = make_request(system_prompt, instruction, history)
    result = complete(request, backend)
    tally.add(result.total_tokens)
    try:
        return parse_invocation(result.text)
    except FormatError:
        retry = ChatRequest(
            messages=request.messages
            + (ChatMessage("assistant", result.text), ChatMessage("user", RETRY_SENTENCE)),
            model_id=request.model_id,
            temperature=request.temperature,
        )
        retry_result = complete(retry, backend)
        tally.add(retry_result.total_tokens)
        return parse_invocation(retry_result.text)


def plan_invocation(
    instruction: str,
    registry: FunctionRegistry,
    backend: LLMBackend,
    options: PromptOptions = PromptOptions(),
    history: Sequence[str] = (),
    assets: Optional[PromptAssets] = None,
) -> InvocationPlan:
    """Resolve an instruction to leaf functions via the two-pass strategy.

    Raises InvocationFailure when the main reply cannot be parsed after the
    retry or names a function outside the library; sub-level failures
    degrade to a partial plan instead.
    """
    assets = assets or PromptAssets.load(options.language)
    tally = _Tally()

    main_prompt = render_main_prompt(registry, options, assets)
    try:
        parsed = _call_and_parse(backend, main_prompt, instruction, history, tally)
    except FormatError as exc:
        raise InvocationFailure("main", exc, tally.total) from exc

    steps: list[PlanStep] = []
    failures: list[PlanFailure] = []
    for name in parsed.functions:
        try:
            spec = resolve(registry, name, MAIN_LEVEL)
        except NotFound as exc:
            raise InvocationFailure("main", exc, tally.total) from exc

        if not spec.is_group():
            steps.append(PlanStep(spec, spec.name))
            continue

        # Sub invocation: a fresh conversation holding only the sub prompt
        # and the user instruction — never the main-call history.
        sub_prompt = render_sub_prompt(spec, options.language, assets)
        try:
            sub_parsed = _call_and_parse(backend, sub_prompt, instruction, (), tally)
            resolved = [
                resolve(registry, sub_name, SubLevelOf(spec.name))
                for sub_name in sub_parsed.functions
            ]
        except (FormatError, NotFound) as exc:
            failures.append(PlanFailure("sub", spec.name, str(exc)))
            continue
        steps.extend(PlanStep(child, spec.name) for child in resolved)

    return InvocationPlan(
        steps=tuple(steps),
        analysis=parsed.analysis,
        token_usage=tally.total,
        failures=tuple(failures),
    )


def flat_plan_invocation(
    instruction: str,
    registry: FunctionRegistry,
    backend: LLMBackend,
    options: PromptOptions = PromptOptions(),
    history: Sequence[str] = (),
    assets: Optional[PromptAssets] = None,
) -> InvocationPlan:
    """Non-hierarchical baseline: every leaf in one prompt, one model call.

    Exists solely as the ablation comparison arm.
    """
    assets = assets or PromptAssets.load(options.language)
    tally = _Tally()

    prompt = render_flat_prompt(registry, options, assets)
    try:
        parsed = _call_and_parse(backend, prompt, instruction, history, tally)
        resolved = [resolve_leaf(registry, name) for name in parsed.functions]
    except (FormatError, NotFound) as exc:
        raise InvocationFailure("flat", exc, tally.total) from exc

    steps = tuple(PlanStep(leaf, main_name) for leaf, main_name in resolved)
    return InvocationPlan(steps=steps, analysis=parsed.analysis, token_usage=tally.total)


DEFAULT_REPLY = "Done — the edit has been applied."


def execute_plan(
    plan: InvocationPlan, image: RasterImage, context: ExecutionContext
) -> EditOutcome:
    """Apply the plan's executors sequentially, each consuming the previous
    output.

    A failing step k raises ExecutorError with ``step_index=k`` and the
    partial result (steps < k applied) attached as ``partial``.
    """
    current = image
    for index, step in enumerate(plan.steps):
        executor = context.catalog.get(step.spec.executor_id or "")
        if executor is None:
            error = ExecutorError(
                index, ChatEditError(f"no executor bound for {step.spec.name!r}")
            )
            error.partial = current  # type: ignore[attr-defined]
            raise error
        try:
            current = executor(current, context)
        except ChatEditError as exc:
            error = ExecutorError(index, exc)
            error.partial = current  # type: ignore[attr-defined]
            raise error from exc

    if context.extra_tokens:
        plan = replace(plan, token_usage=plan.token_usage + context.extra_tokens)
    reply = plan.analysis.strip() or DEFAULT_REPLY
    return EditOutcome(image=current, reply=reply, plan=plan)


def model_call_count(backend: Any) -> int:
    """Number of calls a scripted backend has served (test/eval helper)."""
    return len(backend.request_log)
