"""Line-oriented reports: a ``#`` header, one tab-separated row per record, summary lines."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


def _cell(value) -> str:
    if hasattr(value, "item"):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(_cell(v) for v in value)
    return str(value)


def _plain(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    if hasattr(value, "item"):
        return value.item()
    return value


@dataclass
class Report:
    header: dict = field(default_factory=dict)
    columns: list[str] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def add(self, **row) -> None:
        self.rows.append(row)

    def text(self) -> str:
        lines = ["# nodalgraph report"]
        lines += [f"# {k}: {_cell(v)}" for k, v in self.header.items()]
        if self.columns:
            lines.append("\t".join(self.columns))
            lines += ["\t".join(_cell(r.get(c)) for c in self.columns) for r in self.rows]
        lines += [f"{k}: {_cell(v)}" for k, v in self.summary.items()]
        return "\n".join(lines) + "\n"

    def json(self) -> str:
        doc = {
            "header": {k: _plain(v) for k, v in self.header.items()},
            "columns": list(self.columns),
            "rows": [{c: _plain(r.get(c)) for c in self.columns} for r in self.rows],
            "summary": {k: _plain(v) for k, v in self.summary.items()},
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"

    def render(self, fmt: str = "text") -> str:
        return self.json() if fmt == "json" else self.text()
