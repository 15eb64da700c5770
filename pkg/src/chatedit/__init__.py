"""Conversational image editing through hierarchical LLM function invocation.

Free-form instructions are resolved against a plug-and-play function library
in two passes (main functions, then sub-functions per selected group),
executed over the image, and served through a session API with undo. A
deterministic scripted backend makes every flow — including the evaluation
harness — reproducible without a live model.
"""

from .dispatch import (
    EditOutcome,
    ExecutionContext,
    InvocationPlan,
    PlanStep,
    execute_plan,
    flat_plan_invocation,
    plan_invocation,
)
from .errors import ChatEditError
from .executors import default_catalog, default_registry
from .gateway import (
    ChatMessage,
    ChatRequest,
    ChatResult,
    HttpChatBackend,
    RecordingBackend,
    ScriptedBackend,
    ScriptFixture,
)
from .imaging import BinaryMask, RasterImage
from .parsing import ObjectDescriptor, ParsedResponse, parse_invocation, parse_object_descriptors
from .prompts import Language, PromptOptions, render_main_prompt, render_sub_prompt
from .registry import (
    MAIN_LEVEL,
    FunctionRegistry,
    FunctionSpec,
    Kind,
    SubLevelOf,
    register_function,
    resolve,
)
from .session import RuntimeDeps, Session, SessionStore, run_turn, undo, upload
from .tokens import count_tokens

__version__ = "0.1.0"

__all__ = [
    "BinaryMask",
    "ChatEditError",
    "ChatMessage",
    "ChatRequest",
    "ChatResult",
    "EditOutcome",
    "ExecutionContext",
    "FunctionRegistry",
    "FunctionSpec",
    "HttpChatBackend",
    "InvocationPlan",
    "Kind",
    "Language",
    "MAIN_LEVEL",
    "ObjectDescriptor",
    "ParsedResponse",
    "PlanStep",
    "PromptOptions",
    "RasterImage",
    "RecordingBackend",
    "RuntimeDeps",
    "ScriptFixture",
    "ScriptedBackend",
    "Session",
    "SessionStore",
    "SubLevelOf",
    "count_tokens",
    "default_catalog",
    "default_registry",
    "execute_plan",
    "flat_plan_invocation",
    "parse_invocation",
    "parse_object_descriptors",
    "plan_invocation",
    "register_function",
    "render_main_prompt",
    "render_sub_prompt",
    "resolve",
    "run_turn",
    "undo",
    "upload",
]
