"""Evaluation reports: a JSON-lines file whose first line is a header
object (effective settings plus scoring conventions) followed by one row
per document, and an aligned text rendering for humans."""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ParseError, ValidationError

# stated in every header: how empty-vs-empty documents are scored
DEGENERATE_CONVENTION = ("a document with empty gold and empty predicted "
                         "relation sets scores precision=recall=f1=1.0")


def write_report(path, settings: dict, rows: list[dict],
                 summary: dict | None = None) -> None:
    header = {
        "kind": "header",
        "settings": dict(settings),
        "conventions": {"degenerate_document": DEGENERATE_CONVENTION},
    }
    if summary is not None:
        header["summary"] = dict(summary)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False, sort_keys=True)
                 + "\n")
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True)
                     + "\n")


def load_report(path) -> tuple[dict, list[dict]]:
    rows = []
    header = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: invalid JSON", lineno) from exc
            if lineno == 1:
                if rec.get("kind") != "header":
                    raise ParseError(f"{path}: missing report header",
                                     lineno)
                header = rec
            else:
                rows.append(rec)
    if header is None:
        raise ParseError(f"{path}: empty report", 0)
    return header, rows


def doc_scores(rows: list[dict], key: str = "score") -> dict[str, float]:
    out = {}
    for row in rows:
        if "doc_id" not in row or key not in row:
            raise ValidationError(f"report row missing doc_id/{key}: {row}")
        out[row["doc_id"]] = float(row[key])
    return out


def format_table(rows: list[dict], columns: list[str]) -> str:
    """Aligned plain-text table of the given columns."""
    def cell(v):
        if isinstance(v, float):
            return f"{v:.4f}"
        return str(v)

    table = [[cell(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(c), *(len(t[i]) for t in table)) if table else len(c)
              for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for t in table:
        lines.append("  ".join(c.ljust(w) for c, w in zip(t, widths)))
    return "\n".join(lines)
