"""Multi-turn conversational editing state.

A session owns an image version stack (bottom = original upload), the chat
history, and a cumulative token counter. Undo pops the stack — versions, not
inverse operations, so restoration is bit-exact for every executor including
inpainting. Each session serializes its turns; undo and upload are mutually
exclusive with an in-flight turn.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

from .dispatch import (
    EditOutcome,
    ExecutionContext,
    Executor,
    InvocationPlan,
    execute_plan,
    plan_invocation,
)
from .errors import ExecutorError, InvocationFailure, NothingToUndo, SessionError, SizeLimit
from .gateway import LLMBackend
from .imaging import BinaryMask, RasterImage
from .prompts import Language, PromptOptions
from .registry import FunctionRegistry
from .removal import AdapterPair, Inpainter, RemovalConfig

# How many prior turns' instructions ride along in the main call; bounds
# token growth over long conversations.
HISTORY_WINDOW = 8

DEFAULT_SIZE_LIMIT = 16 * 1024 * 1024


@dataclass(frozen=True)
class TurnRecord:
    instruction: str
    reply: str
    functions: tuple[str, ...]
    ok: bool
    token_usage: int


@dataclass
class RuntimeDeps:
    """Everything a turn needs besides the session itself."""

    registry: FunctionRegistry
    backend: LLMBackend
    catalog: dict[str, Executor]
    options: PromptOptions = PromptOptions()
    adapters: Optional[AdapterPair] = None
    inpainter: Optional[Inpainter] = None
    removal_config: RemovalConfig = RemovalConfig()
    include_history: bool = True
    upload_size_limit: int = DEFAULT_SIZE_LIMIT


@dataclass
class Session:
    id: str
    image_stack: list[RasterImage] = field(default_factory=list)
    history: list[TurnRecord] = field(default_factory=list)
    mask: Optional[BinaryMask] = None
    token_total: int = 0
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def current_image(self) -> RasterImage:
        if not self.image_stack:
            raise SessionError("no image uploaded yet")
        return self.image_stack[-1]

    def stack_depth(self) -> int:
        return len(self.image_stack)

    def _touch(self) -> None:
        self.updated = time.time()


def upload(session: Session, raw: bytes, size_limit: int = DEFAULT_SIZE_LIMIT) -> Session:
    """Replace the session's image with a fresh upload.

    The version stack resets to the decoded image alone; conversation history
    is preserved. Raises DecodeError for undecodable bytes and SizeLimit for
    oversized payloads.
    """
    if len(raw) > size_limit:
        raise SizeLimit(f"upload exceeds {size_limit} bytes")
    image = RasterImage.from_bytes(raw)
    with session.lock:
        session.image_stack = [image]
        session.mask = None
        session._touch()
    return session


def undo(session: Session) -> RasterImage:
    """Pop the newest version and return the previous result image.

    The original upload is never popped; undoing there raises NothingToUndo.
    Only the image rewinds — conversation history stays.
    """
    with session.lock:
        if len(session.image_stack) < 2:
            raise NothingToUndo("only the original image remains")
        session.image_stack.pop()
        session._touch()
        return session.image_stack[-1]


def set_mask(session: Session, mask: Optional[BinaryMask]) -> None:
    with session.lock:
        session.mask = mask
        session._touch()


def run_turn(session: Session, instruction: str, deps: RuntimeDeps) -> EditOutcome:
    """One conversational edit turn: plan, execute on the current image,
    push the result, record history and token usage.

    A failed invocation leaves the image stack untouched and returns the
    failure as the reply; tokens spent before the failure still count. An
    executor failure pushes the partially applied result with a warning
    reply.
    """
    with session.lock:
        image = session.current_image()
        history: Sequence[str] = ()
        if deps.include_history:
            history = [t.instruction for t in session.history[-HISTORY_WINDOW:]]

        try:
            plan = plan_invocation(
                instruction, deps.registry, deps.backend, deps.options, history
            )
        except InvocationFailure as exc:
            session.token_total += exc.tokens_spent
            reply = f"Sorry, I could not work out which edit to apply ({exc.stage} stage failed). Please rephrase."
            record = TurnRecord(instruction, reply, (), False, exc.tokens_spent)
            session.history.append(record)
            session._touch()
            return EditOutcome(
                image=image,
                reply=reply,
                plan=InvocationPlan((), reply, exc.tokens_spent),
            )

        context = ExecutionContext(
            catalog=deps.catalog,
            instruction=instruction,
            mask=session.mask,
            backend=deps.backend,
            adapters=deps.adapters,
            inpainter=deps.inpainter,
            removal_config=deps.removal_config,
            language=deps.options.language,
        )
        try:
            outcome = execute_plan(plan, image, context)
        except ExecutorError as exc:
            partial = getattr(exc, "partial", image)
            tokens = plan.token_usage + context.extra_tokens
            reply = f"The edit stopped at step {exc.step_index + 1}: {exc.cause}"
            session.image_stack.append(partial)
            session.token_total += tokens
            session.history.append(
                TurnRecord(instruction, reply, tuple(plan.resolved_names()), False, tokens)
            )
            session._touch()
            return EditOutcome(image=partial, reply=reply, plan=plan)

        session.image_stack.append(outcome.image)
        session.token_total += outcome.plan.token_usage
        session.history.append(
            TurnRecord(
                instruction,
                outcome.reply,
                tuple(outcome.plan.resolved_names()),
                not outcome.plan.partial,
                outcome.plan.token_usage,
            )
        )
        session._touch()
        return outcome


class SessionStore:
    """In-memory session table with optional directory-backed snapshots and
    idle-TTL eviction."""

    def __init__(self, snapshot_dir: Optional[Union[str, Path]] = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir else None

    def create(self) -> Session:
        session = Session(id=uuid.uuid4().hex)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise SessionError(f"unknown session {session_id!r}")
        return session

    def evict_idle(self, ttl_seconds: float) -> int:
        cutoff = time.time() - ttl_seconds
        with self._lock:
            stale = [sid for sid, s in self._sessions.items() if s.updated < cutoff]
            for sid in stale:
                del self._sessions[sid]
        return len(stale)

    # --- snapshots: one PNG per stack version plus a metadata file ---

    def save_snapshot(self, session: Session) -> None:
        if self.snapshot_dir is None:
            return
        root = self.snapshot_dir / session.id
        root.mkdir(parents=True, exist_ok=True)
        for index, image in enumerate(session.image_stack):
            image.save(root / f"v{index:03d}.png")
        meta = {
            "id": session.id,
            "token_total": session.token_total,
            "created": session.created,
            "updated": session.updated,
            "stack_depth": len(session.image_stack),
            "history": [
                {
                    "instruction": t.instruction,
                    "reply": t.reply,
                    "functions": list(t.functions),
                    "ok": t.ok,
                    "token_usage": t.token_usage,
                }
                for t in session.history
            ],
        }
        (root / "session.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")

    def load_snapshot(self, session_id: str) -> Session:
        if self.snapshot_dir is None:
            raise SessionError("no snapshot directory configured")
        root = self.snapshot_dir / session_id
        meta = json.loads((root / "session.json").read_text(encoding="utf-8"))
        session = Session(id=meta["id"])
        session.token_total = meta["token_total"]
        session.created = meta["created"]
        session.updated = meta["updated"]
        session.image_stack = [
            RasterImage.load(root / f"v{i:03d}.png") for i in range(meta["stack_depth"])
        ]
        session.history = [
            TurnRecord(
                t["instruction"], t["reply"], tuple(t["functions"]), t["ok"], t["token_usage"]
            )
            for t in meta["history"]
        ]
        with self._lock:
            self._sessions[session.id] = session
        return session
