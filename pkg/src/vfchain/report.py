"""Diagnostic reports shared by every validator."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Report:
    """Outcome of a validation: a verdict, human messages and structured data."""

    ok: bool = True
    messages: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def fail(self, message: str, **located) -> "Report":
        self.ok = False
        self.messages.append(message)
        if located:
            self.data.setdefault("violations", []).append(located)
        return self

    def note(self, message: str) -> "Report":
        self.messages.append(message)
        return self

    def merge(self, other: "Report", prefix: str = "") -> "Report":
        if not other.ok:
            self.ok = False
        self.messages.extend(prefix + m for m in other.messages)
        for v in other.data.get("violations", []):
            self.data.setdefault("violations", []).append(v)
        return self

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "messages": list(self.messages), "data": self.data}

    def text(self) -> str:
        head = "PASS" if self.ok else "FAIL"
        return "\n".join([head] + ["  " + m for m in self.messages])
