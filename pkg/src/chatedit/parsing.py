"""Parsing of the model's fixed-format replies.

The output grammar is two labeled parts::

    Functions: [Name 1, Name 2]
    Analysis: free text, may span lines

and, for object removal descriptors::

    Category: short noun phrase
    Description: referring expression

Both parsers are total: any input yields either a parsed value or a
FormatError, never an exception of another type. Tolerated decorations are
enumerated in docs/grammar.md: surrounding whitespace, surrounding code
fences, and label-case variation. Function names carry no arguments by
design — all parameters live in the function library as sub-functions and
fixed degree steps, which is what makes this grammar parse reliably.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FormatError

_FUNCTIONS_LABEL = re.compile(r"functions\s*:", re.IGNORECASE)
_ANALYSIS_LABEL = re.compile(r"analysis\s*:", re.IGNORECASE)
_CATEGORY_LABEL = re.compile(r"category\s*:[ \t]*(?P<body>[^\n]*)", re.IGNORECASE)
_DESCRIPTION_LABEL = re.compile(r"description\s*:\s*(?P<body>.*)", re.IGNORECASE | re.DOTALL)
_FENCE = re.compile(r"^```[^\n]*\n(?P<body>.*?)\n?```\s*$", re.DOTALL)


@dataclass(frozen=True)
class ParsedResponse:
    """The structured reply: ordered function names plus the analysis text."""

    functions: tuple[str, ...]
    analysis: str = ""


@dataclass(frozen=True)
class ObjectDescriptor:
    """What to segment: an object class plus its referring expression."""

    category: str
    description: str


def _strip_decorations(text: str) -> str:
    text = text.strip()
    fence = _FENCE.match(text)
    if fence:
        text = fence.group("body").strip()
    return text


def parse_invocation(text: str) -> ParsedResponse:
    """Parse a function-selection reply.

    Raises FormatError when the Functions line is missing, its brackets are
    unbalanced, or the list is empty. The Analysis part is optional and
    defaults to empty; when present it runs to the end of the reply.
    """
    body = _strip_decorations(text)

    label = _FUNCTIONS_LABEL.search(body)
    if label is None:
        raise FormatError("missing Functions line")

    rest = body[label.end():]
    stripped = rest.lstrip()
    if not stripped.startswith("["):
        raise FormatError("Functions line has no bracketed list")
    open_idx = len(rest) - len(stripped)
    close_idx = rest.find("]", open_idx + 1)
    if close_idx < 0:
        raise FormatError("unbalanced brackets in Functions line")

    inner = rest[open_idx + 1 : close_idx]
    names = tuple(n.strip() for n in inner.split(","))
    if names == ("",):
        raise FormatError("empty function list")
    if any(not n for n in names):
        raise FormatError("empty name in function list")

    tail = rest[close_idx + 1 :]
    analysis_label = _ANALYSIS_LABEL.search(tail)
    analysis = tail[analysis_label.end():].strip() if analysis_label else ""
    return ParsedResponse(functions=names, analysis=analysis)


def parse_object_descriptors(text: str) -> ObjectDescriptor:
    """Parse a Category/Description reply; both fields must be non-empty."""
    body = _strip_decorations(text)

    category_m = _CATEGORY_LABEL.search(body)
    if category_m is None:
        raise FormatError("missing Category line")
    category = category_m.group("body").strip()
    if not category:
        raise FormatError("empty Category")

    description_m = _DESCRIPTION_LABEL.search(body, category_m.end())
    if description_m is None:
        raise FormatError("missing Description line")
    description = description_m.group("body").strip()
    if not description:
        raise FormatError("empty Description")

    return ObjectDescriptor(category=category, description=description)


def render_canonical(response: ParsedResponse) -> str:
    """Emit the frozen grammar; fixtures and few-shot examples go through
    this so the parser and the prompts can never drift apart."""
    return f"Functions: [{', '.join(response.functions)}]\nAnalysis: {response.analysis}"


def render_canonical_descriptor(descriptor: ObjectDescriptor) -> str:
    return f"Category: {descriptor.category}\nDescription: {descriptor.description}"
