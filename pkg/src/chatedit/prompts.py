"""Prompt assembly for the main conversation and per-group sub calls.

Every prompt is the byte-exact concatenation of four parts, in order:
role-setting prefix, rendered function list, fixed output-format block, and
few-shot examples. The parts are kept addressable on ``PromptTemplate`` so
tests can assert the concatenation law directly.

Template text ships as versioned files per language under ``templates/`` and
can be overridden by pointing ``PromptAssets.load`` at a config directory
with the same layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

from .errors import NotAGroup
from .parsing import ParsedResponse, render_canonical
from .registry import FunctionRegistry, FunctionSpec
from .tokens import count_tokens

__all__ = [
    "Language",
    "PromptOptions",
    "PromptAssets",
    "PromptTemplate",
    "FewShotExample",
    "REASONING_SENTENCE",
    "render_main_prompt",
    "render_sub_prompt",
    "render_flat_prompt",
    "build_main_template",
    "count_tokens",
]

# Verbatim; ablation config toggles whether it is included in the prefix.
REASONING_SENTENCE = (
    "You first analyze the needs of users, and then answer your reasons "
    "and suggestions for choosing these functions"
)

_TEMPLATE_ROOT = Path(__file__).parent / "templates"

MAX_EXAMPLES = 4


class Language(Enum):
    EN = "en"
    CN = "cn"


@dataclass(frozen=True)
class PromptOptions:
    """Knobs of the ablation grid: reasoning sentence on/off, number of
    few-shot examples (0..4), prompt language."""

    reasoning_enabled: bool = True
    example_count: int = 3
    language: Language = Language.EN

    def __post_init__(self) -> None:
        if not 0 <= self.example_count <= MAX_EXAMPLES:
            raise ValueError(f"example_count must be 0..{MAX_EXAMPLES}")


@dataclass(frozen=True)
class FewShotExample:
    instruction: str
    functions: tuple[str, ...]
    analysis: str


@dataclass(frozen=True)
class PromptAssets:
    """Template text for one language."""

    prefix: str
    sub_prefix: str
    format_block: str
    examples: tuple[FewShotExample, ...]
    descriptor_prompt: str

    @staticmethod
    def load(language: Language = Language.EN, directory: Optional[Path] = None) -> "PromptAssets":
        root = Path(directory) if directory is not None else _TEMPLATE_ROOT
        return _load_assets(str(root / language.value))


@lru_cache(maxsize=None)
def _load_assets(directory: str) -> PromptAssets:
    root = Path(directory)
    raw = json.loads((root / "examples.json").read_text(encoding="utf-8"))
    examples = tuple(
        FewShotExample(e["instruction"], tuple(e["functions"]), e["analysis"]) for e in raw
    )
    if len(examples) < MAX_EXAMPLES:
        raise ValueError(f"{root}: need at least {MAX_EXAMPLES} authored examples")
    return PromptAssets(
        prefix=(root / "prefix.txt").read_text(encoding="utf-8"),
        sub_prefix=(root / "sub_prefix.txt").read_text(encoding="utf-8"),
        format_block=(root / "format.txt").read_text(encoding="utf-8"),
        examples=examples,
        descriptor_prompt=(root / "descriptor.txt").read_text(encoding="utf-8"),
    )


@dataclass(frozen=True)
class PromptTemplate:
    """The four prompt parts; ``text()`` is their exact concatenation."""

    prefix: str
    functions_block: str
    format_block: str
    examples_block: str
    options: PromptOptions = field(default_factory=PromptOptions)

    def text(self) -> str:
        return self.prefix + self.functions_block + self.format_block + self.examples_block


def _function_lines(specs: Sequence[FunctionSpec]) -> str:
    return "".join(f"- {s.name}: {s.description}\n" for s in specs)


def _examples_block(examples: Sequence[FewShotExample], count: int) -> str:
    chunks = []
    for ex in examples[:count]:
        reply = render_canonical(ParsedResponse(tuple(ex.functions), ex.analysis))
        chunks.append(f"Example:\nUser: {ex.instruction}\n{reply}\n")
    return "".join(chunks)


def _prefix(base: str, options: PromptOptions) -> str:
    if options.reasoning_enabled:
        return base + REASONING_SENTENCE + ".\n"
    return base


def build_main_template(
    registry: FunctionRegistry,
    options: PromptOptions = PromptOptions(),
    assets: Optional[PromptAssets] = None,
) -> PromptTemplate:
    """Main-conversation prompt: one name+description line per main function.

    Groups appear under their group name only; their children are never
    rendered here — that is what keeps the main prompt small.
    """
    assets = assets or PromptAssets.load(options.language)
    return PromptTemplate(
        prefix=_prefix(assets.prefix, options),
        functions_block=_function_lines(registry.mains),
        format_block=assets.format_block,
        examples_block=_examples_block(assets.examples, options.example_count),
        options=options,
    )


def render_main_prompt(
    registry: FunctionRegistry,
    options: PromptOptions = PromptOptions(),
    assets: Optional[PromptAssets] = None,
) -> str:
    return build_main_template(registry, options, assets).text()


def render_sub_prompt(
    group: FunctionSpec,
    language: Language = Language.EN,
    assets: Optional[PromptAssets] = None,
) -> str:
    """Fresh-conversation prompt for resolving one group's sub-function.

    Lists only the group's children; carries no information about any other
    main function, so its size depends on the group alone.
    """
    if not group.is_group():
        raise NotAGroup(f"{group.name!r} has no sub-functions")
    assets = assets or PromptAssets.load(language)
    template = PromptTemplate(
        prefix=assets.sub_prefix,
        functions_block=_function_lines(group.children),
        format_block=assets.format_block,
        examples_block="",
    )
    return template.text()


def render_flat_prompt(
    registry: FunctionRegistry,
    options: PromptOptions = PromptOptions(),
    assets: Optional[PromptAssets] = None,
) -> str:
    """Non-hierarchical baseline prompt: every leaf of every group rendered
    into one function list. Exists only as the ablation comparison arm."""
    assets = assets or PromptAssets.load(options.language)
    leaves = [leaf for leaf, _ in registry.leaves()]
    template = PromptTemplate(
        prefix=_prefix(assets.prefix, options),
        functions_block=_function_lines(leaves),
        format_block=assets.format_block,
        examples_block=_examples_block(assets.examples, options.example_count),
        options=options,
    )
    return template.text()
