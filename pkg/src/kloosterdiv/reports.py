"""Report envelope and CSV/JSON serialization."""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Sequence

from . import __version__
from .divisor_ap import DiscrepancyRecord, MainTerm
from .modcore import PrimePowerModulus

TOOL = "kloosterdiv"
SAFE_INT = 2**53

DIVAP_COLUMNS = ["a", "ap_sum", "main_term_num", "main_term_den", "discrepancy", "normalized"]


@dataclass
class ReportEnvelope:
    config: Dict[str, Any]
    payload: Any
    timing: Dict[str, float] = field(default_factory=dict)
    tool: str = TOOL
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "tool": self.tool,
            "version": self.version,
            "config": to_jsonable(self.config),
            "timing": {k: float(v) for k, v in self.timing.items()},
            "payload": to_jsonable(self.payload),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    def payload_json(self) -> str:
        """Canonical payload text; identical for identical config and seed."""
        return json.dumps(to_jsonable(self.payload), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ReportEnvelope":
        d = json.loads(text)
        return cls(config=d["config"], payload=d["payload"], timing=d["timing"], tool=d["tool"], version=d["version"])


def to_jsonable(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, int):
        return str(obj) if abs(obj) > SAFE_INT else obj
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return str(obj)
        return obj
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (Fraction, MainTerm)):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, PrimePowerModulus):
        return {"p": obj.p, "k": obj.k, "q": to_jsonable(obj.q)}
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return to_jsonable(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (Fraction, MainTerm)):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, complex):
        return format(v.real, ".17g")
    if hasattr(v, "item"):
        return csv_cell(v.item())
    return str(v)


def write_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([csv_cell(v) for v in row])
    return buf.getvalue()


def divap_rows(records: List[DiscrepancyRecord]):
    for r in records:
        yield (r.a, r.ap_sum, r.main_term.numerator, r.main_term.denominator, r.discrepancy, r.normalized)


def divap_csv(records: List[DiscrepancyRecord]) -> str:
    return write_csv(DIVAP_COLUMNS, divap_rows(records))


def dicts_csv(rows: List[dict]) -> str:
    if not rows:
        return ""
    columns = list(rows[0].keys())
    return write_csv(columns, ([r.get(c) for c in columns] for r in rows))
