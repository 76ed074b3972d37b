"""Check reports shared by the validators and model checkers."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Report:
    name: str = "check"
    issues: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def fail(self, msg: str) -> None:
        self.issues.append(msg)

    def extend(self, other: "Report", prefix: str = "") -> None:
        self.issues.extend(prefix + m for m in other.issues)

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        head = f"{self.name}: {'pass' if self.ok else 'fail'}"
        return "\n".join([head] + ["  " + m for m in self.issues[:20]])
