"""Criterion verdicts with an auditable evidence trail, plus JSON output.

A verdict can claim oscillation (on an interval or on the half line) or
admit it cannot decide.  It never claims nonoscillation: every test here is
a sufficient condition only.  JSON rendering fixes floating-point formatting
to 17 significant digits so identical runs produce byte-identical reports.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

__all__ = [
    "OSCILLATORY", "OSCILLATORY_ON_INTERVAL", "INCONCLUSIVE",
    "Condition", "CriterionVerdict", "conclusive", "inconclusive",
    "json_dumps", "atomic_write_text",
]

OSCILLATORY = "Oscillatory"
OSCILLATORY_ON_INTERVAL = "OscillatoryOnInterval"
INCONCLUSIVE = "Inconclusive"
_STATUSES = (OSCILLATORY, OSCILLATORY_ON_INTERVAL, INCONCLUSIVE)


@dataclass(frozen=True)
class Condition:
    """One checked hypothesis: name, outcome, the computed value, tolerance."""

    name: str
    passed: bool
    value: float | str | None = None
    tol: float | None = None
    detail: str = ""

    def as_dict(self) -> dict:
        d = {"name": self.name, "passed": self.passed,
             "value": self.value, "tol": self.tol}
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass(frozen=True)
class CriterionVerdict:
    status: str
    method: str
    conditions: tuple[Condition, ...]
    interval: tuple[float, float] | None = None
    horizon: float | None = None
    notes: tuple[str, ...] = ()
    tolerances: dict | None = None

    def __post_init__(self):
        if self.status not in _STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status != INCONCLUSIVE and not all(c.passed for c in self.conditions):
            raise ValueError("a positive verdict cannot carry failed conditions")
        if self.status == INCONCLUSIVE and self.conditions and all(
                c.passed for c in self.conditions):
            raise ValueError("an inconclusive verdict must carry a failed or "
                             "unverified condition")

    @property
    def oscillatory(self) -> bool:
        return self.status in (OSCILLATORY, OSCILLATORY_ON_INTERVAL)

    def condition(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        d = {
            "status": self.status,
            "interval": list(self.interval) if self.interval else None,
            "method": self.method,
            "conditions": [c.as_dict() for c in self.conditions],
        }
        if self.horizon is not None:
            d["horizon"] = self.horizon
        d["notes"] = list(self.notes)
        if self.tolerances is not None:
            d["tolerances"] = self.tolerances
        return d


def conclusive(status: str, method: str, conditions, **kwargs) -> CriterionVerdict:
    return CriterionVerdict(status=status, method=method,
                            conditions=tuple(conditions), **kwargs)


def inconclusive(method: str, conditions, **kwargs) -> CriterionVerdict:
    return CriterionVerdict(status=INCONCLUSIVE, method=method,
                            conditions=tuple(conditions), **kwargs)


# ------------------------------------------------------------ deterministic JSON

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _fmt(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, np.integer):
        return str(int(obj))
    if isinstance(obj, np.floating):
        return _fmt_float(float(obj))
    if isinstance(obj, np.ndarray):
        return _fmt(obj.tolist())
    if isinstance(obj, str):
        escaped = (obj.replace("\\", "\\\\").replace('"', '\\"')
                   .replace("\n", "\\n").replace("\t", "\\t"))
        return f'"{escaped}"'
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{_fmt(str(k))}: {_fmt(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in obj) + "]"
    try:
        return _fmt_float(float(obj))
    except (TypeError, ValueError):
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def json_dumps(obj) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    return _fmt(obj)


def atomic_write_text(path: str, text: str):
    """Write via a temp file in the destination directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
