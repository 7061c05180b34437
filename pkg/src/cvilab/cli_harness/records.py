"""Check records and report emission."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

STATUSES = ("pass", "fail", "skip")


@dataclass
class CheckRecord:
    suite: str
    check: str
    anchor: str
    status: str
    residual: object  # bool for exact checks ("identically zero"), float otherwise, None when skipped
    runtime_ms: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "check": self.check,
            "anchor": self.anchor,
            "status": self.status,
            "residual": _jsonable(self.residual),
            "runtime_ms": round(self.runtime_ms, 3),
            "params": {k: _jsonable(v) for k, v in self.params.items()},
        }

    def text(self) -> str:
        res = self.residual
        if isinstance(res, bool):
            res = "identically zero" if res else "NONZERO"
        elif isinstance(res, float):
            res = f"{res:.3e}"
        elif res is None:
            res = "-"
        par = " ".join(f"{k}={_jsonable(v)}" for k, v in self.params.items())
        return f"{self.status.upper():4} {self.suite}/{self.check}  residual={res}  [{self.anchor}] {par}".rstrip()


def _jsonable(x):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    try:
        return float(x)
    except (TypeError, ValueError):
        return str(x)


class Recorder:
    """Collects records for one suite; every check runs through :meth:`run`."""

    def __init__(self, suite: str):
        self.suite = suite
        self.records: list[CheckRecord] = []

    def run(self, check: str, anchor: str, func: Callable[[], tuple], params: dict | None = None, expect_failure: bool = False):
        """``func`` returns ``(ok, residual)``.  Exceptions become failures.

        With ``expect_failure`` the check is a negative control: it passes
        when the underlying identity fails.
        """
        t0 = time.perf_counter()
        try:
            ok, residual = func()
            if expect_failure:
                ok = not ok
        except Exception as exc:  # a crashing check is a failing check
            ok, residual = False, f"{type(exc).__name__}: {exc}"
        ms = (time.perf_counter() - t0) * 1000.0
        rec = CheckRecord(self.suite, check, anchor, "pass" if ok else "fail", residual, ms, dict(params or {}))
        self.records.append(rec)
        return rec

    def skip(self, check: str, anchor: str, reason: str, params: dict | None = None):
        p = dict(params or {})
        p["reason"] = reason
        rec = CheckRecord(self.suite, check, anchor, "skip", None, 0.0, p)
        self.records.append(rec)
        return rec


def emit_report(records: Sequence[CheckRecord], fmt: str = "json", path: str | Path | None = None) -> str:
    """Render records in input order; write to ``path`` when given."""
    if not records:
        raise ValueError("no records to report")
    if fmt == "json":
        body = json.dumps([r.as_dict() for r in records], indent=2) + "\n"
    elif fmt == "text":
        body = "\n".join(r.text() for r in records) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(body)
    return body
