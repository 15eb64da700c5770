"""Two-stage instructional object removal.

Stage one turns the instruction into an object descriptor via a dedicated
model call (category + referring expression). Stage two segments twice — the
description-based adapter yields one coarse mask, the category-based adapter
yields a candidate list — then keeps the candidate with the largest overlap
against the coarse mask, dilates it to hide seam artifacts, and inpaints.

Retention shares the whole front half and ends with region extraction
instead of inpainting (and without dilation).

Segmentation runs behind adapters: either an HTTP service or a deterministic
stub reading masks from a manifest, so the pipeline is fully testable
without any learned model.
"""

from __future__ import annotations

import base64
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Protocol, Union

import httpx

from .dispatch import EditOutcome, InvocationPlan
from .errors import (
    BackendError,
    EmptyCandidates,
    FormatError,
    InvocationFailure,
    NoOverlap,
    RemovalError,
)
from .gateway import ChatMessage, ChatRequest, LLMBackend, complete, make_request
from .imaging import (
    BinaryMask,
    RasterImage,
    dilate_mask,
    naive_inpaint,
    overlap_area,
    retain_object,
)
from .parsing import ObjectDescriptor, parse_object_descriptors
from .prompts import Language, PromptAssets

logger = logging.getLogger("chatedit.removal")

DESCRIPTOR_RETRY_SENTENCE = (
    "Your previous reply did not follow the required format. Reply again with "
    "exactly two labeled lines: Category: ... then Description: ..."
)

Inpainter = Callable[[RasterImage, BinaryMask], RasterImage]


@dataclass(frozen=True)
class RemovalConfig:
    """Dilation hides mask-boundary seams before inpainting; the overlap
    metric defaults to raw intersection with IoU as the alternative."""

    dilation_radius: int = 3
    overlap_metric: str = "intersection"  # or "iou"


class SegmentationAdapter(Protocol):
    def segment(
        self, image: RasterImage, query: str, image_id: Optional[str] = None
    ) -> list[tuple[BinaryMask, str]]: ...


@dataclass(frozen=True)
class AdapterConfig:
    """Wiring for one segmentation adapter: exactly one of ``endpoint`` or
    ``stub_manifest`` must be set."""

    kind: str  # "category" | "description"
    endpoint: Optional[str] = None
    stub_manifest: Optional[Path] = None

    def __post_init__(self) -> None:
        if (self.endpoint is None) == (self.stub_manifest is None):
            raise ValueError("configure exactly one of endpoint / stub_manifest")


@dataclass(frozen=True)
class AdapterPair:
    description: SegmentationAdapter
    category: SegmentationAdapter


class StubSegmentationAdapter:
    """Deterministic adapter reading masks from a manifest file.

    Manifest format: ``{"<image_id>": ["mask1.png", ...], ...}`` with paths
    relative to the manifest location; the entry ``"default"`` answers
    requests that carry no image id.
    """

    def __init__(self, manifest_path: Union[str, Path]):
        self.root = Path(manifest_path).parent
        self.mapping: dict[str, list[str]] = json.loads(
            Path(manifest_path).read_text(encoding="utf-8")
        )

    def segment(
        self, image: RasterImage, query: str, image_id: Optional[str] = None
    ) -> list[tuple[BinaryMask, str]]:
        key = image_id if image_id is not None and image_id in self.mapping else "default"
        if key not in self.mapping:
            raise BackendError("transport", f"stub manifest has no entry for {image_id!r}")
        out = []
        for rel in self.mapping[key]:
            path = self.root / rel
            out.append((BinaryMask.load(path), path.stem))
        return out


class StaticSegmentationAdapter:
    """In-memory stub returning a fixed mask list; test construction helper."""

    def __init__(self, masks: list[tuple[BinaryMask, str]]):
        self.masks = masks

    def segment(
        self, image: RasterImage, query: str, image_id: Optional[str] = None
    ) -> list[tuple[BinaryMask, str]]:
        return list(self.masks)


class HttpSegmentationAdapter:
    """Client for the segmentation service protocol: POST the image plus the
    query; the response lists PNG-encoded masks with instance labels as
    ``{"masks": [{"label": ..., "png_base64": ...}]}``."""

    def __init__(
        self,
        endpoint: str,
        kind: str,
        timeout: float = 60.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.endpoint = endpoint
        self.kind = kind
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def segment(
        self, image: RasterImage, query: str, image_id: Optional[str] = None
    ) -> list[tuple[BinaryMask, str]]:
        payload = {
            "image_png_base64": base64.b64encode(image.to_png_bytes()).decode("ascii"),
            self.kind: query,
        }
        try:
            resp = self._client.post(self.endpoint, json=payload)
        except httpx.HTTPError as exc:
            raise BackendError("transport", str(exc)) from exc
        if resp.status_code != 200:
            raise BackendError("transport", f"HTTP {resp.status_code}")
        doc = resp.json()
        return [
            (BinaryMask.from_bytes(base64.b64decode(m["png_base64"])), m.get("label", ""))
            for m in doc["masks"]
        ]


class HttpInpaintingAdapter:
    """Client for an inpainting service; the protocol mirrors segmentation:
    POST image + mask as base64 PNG, get the filled image back as
    ``{"image_png_base64": ...}``."""

    def __init__(
        self,
        endpoint: str,
        timeout: float = 60.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.endpoint = endpoint
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def __call__(self, image: RasterImage, mask: BinaryMask) -> RasterImage:
        payload = {
            "image_png_base64": base64.b64encode(image.to_png_bytes()).decode("ascii"),
            "mask_png_base64": base64.b64encode(mask.to_png_bytes()).decode("ascii"),
        }
        try:
            resp = self._client.post(self.endpoint, json=payload)
        except httpx.HTTPError as exc:
            raise BackendError("transport", str(exc)) from exc
        if resp.status_code != 200:
            raise BackendError("transport", f"HTTP {resp.status_code}")
        doc = resp.json()
        return RasterImage.from_bytes(base64.b64decode(doc["image_png_base64"]))


def build_adapter(config: AdapterConfig) -> SegmentationAdapter:
    if config.endpoint is not None:
        return HttpSegmentationAdapter(config.endpoint, config.kind)
    assert config.stub_manifest is not None
    return StubSegmentationAdapter(config.stub_manifest)


@dataclass(frozen=True)
class CandidateMaskList:
    """Instance masks from the category-based model, all image-sized."""

    masks: tuple[tuple[BinaryMask, str], ...]

    def __post_init__(self) -> None:
        dims = {(m.height, m.width) for m, _ in self.masks}
        if len(dims) > 1:
            raise ValueError(f"candidate masks disagree on dimensions: {dims}")


def refine_mask(
    coarse: BinaryMask,
    candidates: CandidateMaskList,
    metric: str = "intersection",
) -> BinaryMask:
    """Pick the candidate with the largest overlap against the coarse mask.

    Ties break toward the lowest candidate index; the result is always a
    member of the candidate list, never the coarse mask itself. Raises
    EmptyCandidates with no candidates and NoOverlap when every candidate is
    disjoint from the coarse mask (callers fall back to the coarse mask).
    """
    if not candidates.masks:
        raise EmptyCandidates("no candidate masks")

    best_index = -1
    best_score = -1.0
    any_overlap = False
    for index, (mask, _) in enumerate(candidates.masks):
        inter = overlap_area(mask, coarse)
        if inter > 0:
            any_overlap = True
        if metric == "iou":
            union = mask.area + coarse.area - inter
            score = inter / union if union else 0.0
        else:
            score = float(inter)
        if score > best_score:
            best_score = score
            best_index = index

    if not any_overlap:
        raise NoOverlap("no candidate overlaps the coarse mask")
    return candidates.masks[best_index][0]


def _descriptor_call(
    instruction: str,
    backend: LLMBackend,
    language: Language,
    assets: Optional[PromptAssets],
) -> tuple[ObjectDescriptor, int]:
    """The pipeline's second model response: category + description of the
    object, parsed under the descriptor grammar with one corrective retry."""
    if not instruction.strip():
        raise InvocationFailure("descriptor", FormatError("empty instruction"), 0)
    assets = assets or PromptAssets.load(language)
    tokens = 0
    request = make_request(assets.descriptor_prompt, instruction)
    result = complete(request, backend)
    tokens += result.total_tokens
    try:
        return parse_object_descriptors(result.text), tokens
    except FormatError:
        retry = ChatRequest(
            messages=request.messages
            + (
                ChatMessage("assistant", result.text),
                ChatMessage("user", DESCRIPTOR_RETRY_SENTENCE),
            )
        )
        retry_result = complete(retry, backend)
        tokens += retry_result.total_tokens
        try:
            return parse_object_descriptors(retry_result.text), tokens
        except FormatError as exc:
            raise InvocationFailure("descriptor", exc, tokens) from exc


def extract_descriptors(
    instruction: str,
    backend: LLMBackend,
    language: Language = Language.EN,
    assets: Optional[PromptAssets] = None,
) -> ObjectDescriptor:
    descriptor, _ = _descriptor_call(instruction, backend, language, assets)
    return descriptor


@dataclass(frozen=True)
class RemovalResult:
    image: RasterImage
    descriptor: ObjectDescriptor
    refined_mask: BinaryMask
    tokens_spent: int
    degraded: bool  # coarse-mask fallback was taken


def _segment_stage(
    image: RasterImage,
    descriptor: ObjectDescriptor,
    adapters: AdapterPair,
    image_id: Optional[str],
) -> tuple[BinaryMask, CandidateMaskList]:
    try:
        coarse_list = adapters.description.segment(image, descriptor.description, image_id)
        candidate_list = adapters.category.segment(image, descriptor.category, image_id)
    except BackendError as exc:
        raise RemovalError("segmentation", exc) from exc
    if not coarse_list:
        raise RemovalError("segmentation", BackendError("transport", "empty coarse mask list"))
    return coarse_list[0][0], CandidateMaskList(tuple(candidate_list))


def _refine_stage(
    coarse: BinaryMask, candidates: CandidateMaskList, config: RemovalConfig
) -> tuple[BinaryMask, bool]:
    try:
        return refine_mask(coarse, candidates, config.overlap_metric), False
    except NoOverlap:
        logger.warning("no candidate overlaps the coarse mask; using coarse mask (degraded)")
        return coarse, True


def run_removal(
    image: RasterImage,
    instruction: str,
    adapters: AdapterPair,
    backend: LLMBackend,
    inpainter: Optional[Inpainter] = None,
    config: RemovalConfig = RemovalConfig(),
    image_id: Optional[str] = None,
    language: Language = Language.EN,
    assets: Optional[PromptAssets] = None,
    retain: bool = False,
) -> RemovalResult:
    """Pipeline core shared by removal and retention.

    The input image is never mutated; any stage failure propagates tagged
    with its stage name and leaves no output.
    """
    descriptor, tokens = _descriptor_call(instruction, backend, language, assets)
    coarse, candidates = _segment_stage(image, descriptor, adapters, image_id)
    refined, degraded = _refine_stage(coarse, candidates, config)

    if retain:
        result = retain_object(image, refined)
    else:
        working_mask = dilate_mask(refined, config.dilation_radius)
        fill = inpainter or naive_inpaint
        try:
            result = fill(image, working_mask)
        except BackendError as exc:
            raise RemovalError("inpaint", exc) from exc

    return RemovalResult(
        image=result,
        descriptor=descriptor,
        refined_mask=refined,
        tokens_spent=tokens,
        degraded=degraded,
    )


def _outcome(result: RemovalResult, verb: str, plan: Optional[InvocationPlan]) -> EditOutcome:
    reply = f"{verb} the {result.descriptor.category}."
    if plan is None:
        plan = InvocationPlan(steps=(), analysis=reply, token_usage=result.tokens_spent)
    return EditOutcome(image=result.image, reply=reply, plan=plan)


def remove_object(
    image: RasterImage,
    instruction: str,
    adapters: AdapterPair,
    backend: LLMBackend,
    inpainter: Optional[Inpainter] = None,
    config: RemovalConfig = RemovalConfig(),
    image_id: Optional[str] = None,
    language: Language = Language.EN,
    plan: Optional[InvocationPlan] = None,
) -> EditOutcome:
    """Remove the object the instruction names; pixels outside the dilated
    refined mask are bit-identical to the input."""
    result = run_removal(
        image, instruction, adapters, backend, inpainter, config, image_id, language,
        retain=False,
    )
    return _outcome(result, "Removed", plan)


def retain_object_pipeline(
    image: RasterImage,
    instruction: str,
    adapters: AdapterPair,
    backend: LLMBackend,
    config: RemovalConfig = RemovalConfig(),
    image_id: Optional[str] = None,
    language: Language = Language.EN,
    plan: Optional[InvocationPlan] = None,
) -> EditOutcome:
    """Keep only the object the instruction names, on the refined
    (undilated) mask; everything else becomes the blank background."""
    result = run_removal(
        image, instruction, adapters, backend, None, config, image_id, language,
        retain=True,
    )
    return _outcome(result, "Kept", plan)
