"""Token counting used for all usage accounting.

The default counter is a fixed byte-quarter estimate so every harness run is
deterministic regardless of which model (if any) sits behind the gateway.
Live backends substitute server-reported usage; anything implementing
``TokenCounter`` can be plugged in instead.
"""

from __future__ import annotations

from typing import Callable

TokenCounter = Callable[[str], int]


def count_tokens(text: str) -> int:
    """Deterministic token estimate: ceil(utf-8 byte length / 4).

    Exactly additive across 4-byte-aligned parts and never undercounts a
    concatenation by more than one token per joint.
    """
    n = len(text.encode("utf-8"))
    return -(-n // 4)
