"""Markdown rendering for verification report documents.

Input is the JSON document produced by the serializers (single reports or
surrogate-chain reports), so rendering works equally on fresh results and
on files written earlier by the CLI or the service.
"""

from __future__ import annotations

from .errors import ParseError


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _table(headers: list[str], rows: list[list]) -> list[str]:
    out = ["| " + " | ".join(headers) + " |",
           "| " + " | ".join("---" for _ in headers) + " |"]
    for row in rows:
        out.append("| " + " | ".join(_fmt(c) for c in row) + " |")
    return out


def _render_single(doc: dict, heading: str, level: int) -> list[str]:
    mark = "#" * level
    status = "PASS" if doc.get("passed") else "FAIL"
    lines = [f"{mark} {heading}", ""]
    lines.append(
        f"**{status}** under mode `{doc.get('mode', '?')}` at tolerance"
        f" {_fmt(doc.get('tolerance', ''))}; worst discrepancy"
        f" {_fmt(doc.get('max_discrepancy', ''))}."
    )
    lines.append("")
    lines += _table(
        ["checked", "undefined", "ambiguous", "untestable", "evaluations", "state cost"],
        [[doc.get("checked", 0), doc.get("undefined", 0), doc.get("ambiguous", 0),
          doc.get("untestable", 0), doc.get("cost", 0), doc.get("cost_states", 0)]],
    )
    lines.append("")
    if doc.get("region"):
        lines.append(f"Region: {doc['region']}")
        lines.append("")
    actions = doc.get("actions", [])
    if actions:
        # discrepancy is null for undefined/ambiguous/untestable rows
        worst = sorted(actions, key=lambda a: -(a.get("discrepancy") or 0.0))[:20]
        rows = [[a.get("action", ""),
                 "" if a.get("discrepancy") is None else a["discrepancy"],
                 a.get("verdict", ""), a.get("note", "")] for a in worst]
        lines.append(f"{mark}# Actions" + (" (worst 20)" if len(actions) > 20 else ""))
        lines.append("")
        lines += _table(["action", "discrepancy", "verdict", "note"], rows)
        lines.append("")
    counterexamples = doc.get("counterexamples", [])
    if counterexamples:
        lines.append(f"{mark}# Counterexamples")
        lines.append("")
        rows = [[c.get("action", ""), " ".join(str(v) for v in c.get("assignment", [])),
                 c.get("lhs", 0.0), c.get("rhs", 0.0)] for c in counterexamples[:10]]
        lines += _table(["action", "assignment", "translated side", "native side"], rows)
        lines.append("")
    detail = doc.get("detail", {})
    per_var = detail.get("per_variable")
    if per_var:
        lines.append(f"{mark}# Local neighborhoods")
        lines.append("")
        rows = [[name, ", ".join(info.get("neighborhood", [])),
                 info.get("max_discrepancy", 0.0)]
                for name, info in per_var.items()]
        lines += _table(["variable", "neighborhood", "max discrepancy"], rows)
        lines.append("")
    violations = detail.get("violations")
    if violations:
        lines.append(f"{mark}# Independence mismatches")
        lines.append("")
        lines += [f"- {v}" for v in violations]
        lines.append("")
    return lines


def render_markdown(doc: dict, title: str = "Verification report") -> str:
    if not isinstance(doc, dict):
        raise ParseError("report: expected a JSON object")
    if "first_link" in doc:
        status = "PASS" if doc.get("passed") else "FAIL"
        lines = [f"# {title}", "",
                 f"Surrogate chain: **{status}** overall.", ""]
        lines += _render_single(doc["first_link"], "Original to surrogate", 2)
        lines += _render_single(doc["second_link"], "Surrogate to human", 2)
        lines += _render_single(doc["composed"], "Composed end to end", 2)
    elif "mode" in doc:
        lines = _render_single(doc, title, 1)
    else:
        raise ParseError("report: unrecognized document shape")
    return "\n".join(lines).rstrip() + "\n"
