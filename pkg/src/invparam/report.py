"""Suite reports: text and JSON rendering, overall status and exit codes."""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Iterator, List

from .symcore.zero import ZeroVerdict

VERDICTS = ("symbolic-zero", "numeric-zero", "nonzero", "error")

GEN_WIDTH = 48

EXIT_PASS, EXIT_FAIL, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 3


@dataclass
class CaseResult:
    case: str
    generator: str
    verdict: str
    seconds: float = 0.0
    detail: str = ""

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError("unknown verdict class %r" % self.verdict)

    @classmethod
    def from_verdict(cls, case: str, generator: str, v: ZeroVerdict, seconds: float = 0.0, detail: str = "") -> "CaseResult":
        return cls(case, generator, v.label, round(seconds, 6), detail or v.note)

    @classmethod
    def from_bool(cls, case: str, generator: str, ok: bool, seconds: float = 0.0, detail: str = "") -> "CaseResult":
        return cls(case, generator, "symbolic-zero" if ok else "nonzero", round(seconds, 6), detail)


@dataclass
class SuiteReport:
    suite: str
    cases: List[CaseResult] = field(default_factory=list)

    def add(self, *results: CaseResult) -> None:
        self.cases.extend(results)

    def sorted(self) -> "SuiteReport":
        return SuiteReport(self.suite, sorted(self.cases, key=lambda c: (c.case, c.generator)))

    def count(self, verdict: str) -> int:
        return sum(1 for c in self.cases if c.verdict == verdict)

    @property
    def status(self) -> str:
        if any(c.verdict in ("nonzero", "error") for c in self.cases):
            return "fail"
        if any(c.verdict == "numeric-zero" for c in self.cases):
            return "pass-numeric"
        return "pass"

    @property
    def exit_code(self) -> int:
        return {"pass": EXIT_PASS, "pass-numeric": EXIT_NUMERIC, "fail": EXIT_FAIL}[self.status]

    def to_dict(self) -> dict:
        return {"suite": self.suite, "status": self.status, "cases": [asdict(c) for c in self.cases]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteReport":
        return cls(d["suite"], [CaseResult(**c) for c in d["cases"]])

    @classmethod
    def from_json(cls, s: str) -> "SuiteReport":
        return cls.from_dict(json.loads(s))

    def to_text(self) -> str:
        lines = ["== %s ==" % self.suite]
        w = max([len(c.case) for c in self.cases] + [4])
        g = min(max([len(c.generator) for c in self.cases] + [9]), GEN_WIDTH)
        for c in self.cases:
            mark = "*" if c.verdict == "numeric-zero" else " "
            gen = c.generator if len(c.generator) <= GEN_WIDTH else c.generator[: GEN_WIDTH - 3] + "..."
            line = "%s %-*s  %-*s  %-13s %8.2fs" % (mark, w, c.case, g, gen, c.verdict, c.seconds)
            if c.detail and c.verdict in ("nonzero", "error"):
                line += "  " + c.detail
            lines.append(line)
        n = len(self.cases)
        lines.append(
            "%s: %d cases, %d symbolic-zero, %d numeric-zero, %d nonzero, %d error"
            % (self.status.upper(), n, self.count("symbolic-zero"), self.count("numeric-zero"), self.count("nonzero"), self.count("error"))
        )
        if self.count("numeric-zero"):
            lines.append("(* numeric-zero: no symbolic proof, all sampled residuals below 1e-30)")
        return "\n".join(lines)


def merge(name: str, reports: List[SuiteReport]) -> SuiteReport:
    out = SuiteReport(name)
    for r in reports:
        for c in r.cases:
            out.add(CaseResult("%s/%s" % (r.suite, c.case), c.generator, c.verdict, c.seconds, c.detail))
    return out


@contextmanager
def timer() -> Iterator[List[float]]:
    box = [0.0]
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = time.perf_counter() - t0
