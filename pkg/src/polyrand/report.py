"""Envelope reports: grids of (abscissa, statistic, bounds, pass flag).

Every verification suite emits the same shape so CSV/JSON output and
golden-file testing share one code path.  The CSV starts with a
versioned header comment naming the columns.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

CSV_VERSION = 1


@dataclass(frozen=True)
class EnvelopeRow:
    abscissa: float
    statistic: float
    lower: float | None = None
    upper: float | None = None
    passed: bool = True

    def check(self) -> bool:
        ok = True
        if self.lower is not None:
            ok = ok and self.statistic >= self.lower
        if self.upper is not None:
            ok = ok and self.statistic <= self.upper
        return ok


@dataclass
class EnvelopeReport:
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, abscissa, statistic, lower=None, upper=None, passed=None):
        row = EnvelopeRow(
            float(abscissa),
            float(statistic),
            None if lower is None else float(lower),
            None if upper is None else float(upper),
            True,
        )
        if passed is None:
            passed = row.check()
        object.__setattr__(row, "passed", bool(passed))
        self.rows.append(row)
        return row

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def min_statistic(self) -> float:
        return min((r.statistic for r in self.rows), default=math.nan)

    @property
    def max_statistic(self) -> float:
        return max((r.statistic for r in self.rows), default=math.nan)

    @property
    def argmax(self):
        """(abscissa, statistic) at the largest statistic."""
        r = max(self.rows, key=lambda r: r.statistic)
        return r.abscissa, r.statistic

    def summary(self) -> dict:
        out = {
            "min_statistic": self.min_statistic,
            "max_statistic": self.max_statistic,
            "all_pass": self.all_pass,
            "n_rows": len(self.rows),
        }
        out.update(self.meta)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(
            f"# envelope-report v{CSV_VERSION}: "
            "abscissa,statistic,lower,upper,pass\n"
        )
        buf.write("abscissa,statistic,lower,upper,pass\n")
        for r in self.rows:
            lo = "" if r.lower is None else repr(r.lower)
            up = "" if r.upper is None else repr(r.upper)
            buf.write(f"{r.abscissa!r},{r.statistic!r},{lo},{up},{int(r.passed)}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "summary": self.summary(),
                "rows": [
                    {
                        "abscissa": r.abscissa,
                        "statistic": r.statistic,
                        "lower": r.lower,
                        "upper": r.upper,
                        "pass": r.passed,
                    }
                    for r in self.rows
                ],
            },
            indent=2,
            sort_keys=True,
            default=float,
        )

    def write(self, path, fmt: str = "csv"):
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w") as fh:
            fh.write(text)
