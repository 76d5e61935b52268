"""Structured results shared by the checkers and decision procedures."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Any

DEFAULT_MAX_WORLDS = 6
MAX_VARS = 4


class ResourceLimitError(RuntimeError):
    """An exhaustive search was refused because it would be too large."""


def max_worlds() -> int:
    """World-count guard; the ``IMLK_MAX_WORLDS`` environment variable overrides it."""
    raw = os.environ.get("IMLK_MAX_WORLDS")
    if raw is None:
        return DEFAULT_MAX_WORLDS
    try:
        return int(raw)
    except ValueError:
        raise ResourceLimitError(f"IMLK_MAX_WORLDS is not an integer: {raw!r}") from None


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check. ``holds`` is True for the positive verdict (valid, theorem,
    unrefuted, ...); ``witness`` explains a negative verdict."""

    holds: bool
    label: str
    witness: Any = None
    bound: int | None = None

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"verdict": self.label, "holds": self.holds}
        if self.witness is not None:
            w = self.witness
            out["witness"] = w.to_dict() if hasattr(w, "to_dict") else w
        if self.bound is not None:
            out["bound"] = self.bound
        return out
