"""The execution catalog: executor ids -> image-transforming callables.

Pixel-level functions run in-process. The functions that need learned models
in production (face shaping, eye opening) run as deterministic placeholder
executors here: they apply a mild, visible brightness lift so interactive
flows remain observable, and real deployments rebind those ids to service
adapters without touching the registry.
"""

from __future__ import annotations

from pathlib import Path

from .dispatch import ExecutionContext, Executor
from .errors import ChatEditError
from .imaging import (
    Filter,
    LIPSTICK_SHADES,
    RasterImage,
    adjust_brightness,
    apply_filter,
    auto_contrast,
    recolor_region,
)
from .registry import FunctionRegistry, load_manifest
from .removal import run_removal

DEFAULT_MANIFEST = Path(__file__).parent / "data" / "registry.json"


def _brightness(degree: int) -> Executor:
    def run(image: RasterImage, ctx: ExecutionContext) -> RasterImage:
        return adjust_brightness(image, ctx.mask, degree)

    return run


def _filter(filter: Filter) -> Executor:
    def run(image: RasterImage, ctx: ExecutionContext) -> RasterImage:
        return apply_filter(image, filter)

    return run


def _recolor(shade: tuple[int, int, int]) -> Executor:
    def run(image: RasterImage, ctx: ExecutionContext) -> RasterImage:
        if ctx.mask is None:
            raise ChatEditError(
                "lipstick coloring needs a lip region mask; upload one for the session"
            )
        return recolor_region(image, ctx.mask, shade)

    return run


def _placeholder(tag: str) -> Executor:
    # Stand-in for a learned model: one visible brightness step, so demos and
    # UI flows show a change and undo has something real to revert.
    def run(image: RasterImage, ctx: ExecutionContext) -> RasterImage:
        ctx.notes.append(f"{tag}: placeholder executor applied")
        return adjust_brightness(image, ctx.mask, 1)

    return run


def _removal(retain: bool) -> Executor:
    def run(image: RasterImage, ctx: ExecutionContext) -> RasterImage:
        if ctx.adapters is None or ctx.backend is None:
            raise ChatEditError(
                "object removal needs segmentation adapters and a model backend"
            )
        from .removal import RemovalConfig

        result = run_removal(
            image,
            ctx.instruction,
            ctx.adapters,
            ctx.backend,
            inpainter=ctx.inpainter,
            config=ctx.removal_config or RemovalConfig(),
            language=ctx.language,
            retain=retain,
        )
        ctx.add_tokens(result.tokens_spent)
        if result.degraded:
            ctx.notes.append("segmentation degraded: coarse mask used")
        return result.image

    return run


def _enhance(image: RasterImage, ctx: ExecutionContext) -> RasterImage:
    return auto_contrast(image)


def default_catalog() -> dict[str, Executor]:
    catalog: dict[str, Executor] = {
        "brightness.whiten": _brightness(+1),
        "brightness.darken": _brightness(-1),
        "enhance.auto_contrast": _enhance,
        "removal.remove": _removal(retain=False),
        "removal.retain": _removal(retain=True),
        "stub.open_eyes": _placeholder("open-eyes"),
        "shape.enlarge_eyes": _placeholder("enlarge-eyes"),
        "shape.widen_eye_distance": _placeholder("widen-eye-distance"),
        "shape.slim_face": _placeholder("slim-face"),
    }
    for slug, shade in LIPSTICK_SHADES.items():
        catalog[f"recolor.{slug}"] = _recolor(shade)
    for filter in Filter:
        catalog[f"filter.{filter.value}"] = _filter(filter)
    return catalog


def default_registry(manifest_path: Path | str = DEFAULT_MANIFEST) -> FunctionRegistry:
    """The bundled function library, validated against the default catalog."""
    return load_manifest(manifest_path, known_executors=default_catalog().keys())
