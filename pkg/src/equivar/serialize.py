"""Canonical JSON encodings shared by the CLI and the HTTP service.

Both front ends must emit byte-identical documents for the same request, so
every serializer here builds plain dicts with a fixed key order and all
output goes through `dumps`. Report timing (`elapsed`) is deliberately left
out of the JSON: the documents are meant to be reproducible.
"""

from __future__ import annotations

import json

from .errors import ParseError
from .systems import Action, VariableSystem
from .verify import EquivarianceReport, SurrogateChainReport


def dumps(obj) -> str:
    """The one JSON writer: 2-space indent, no trailing newline."""
    return json.dumps(obj, indent=2, ensure_ascii=False)


# -- actions -----------------------------------------------------------------


def action_to_dict(action: Action, system: VariableSystem) -> dict:
    return {action.kind: {system.variables[action.target].name: action.value}}


def action_from_dict(obj, system: VariableSystem, where: str = "action") -> Action:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ParseError(f"{where}: expected one of {{\"observe\": ...}} / {{\"do\": ...}}")
    kind, body = next(iter(obj.items()))
    if kind not in ("observe", "do"):
        raise ParseError(f"{where}: unknown action kind {kind!r}")
    if not isinstance(body, dict) or len(body) != 1:
        raise ParseError(f"{where}.{kind}: expected exactly one variable: value pair")
    name, value = next(iter(body.items()))
    try:
        target = system.index(name)
    except Exception:
        raise ParseError(f"{where}.{kind}: unknown variable {name!r}") from None
    action = Action(kind, target, str(value))
    try:
        action.validate(system)
    except Exception:
        raise ParseError(
            f"{where}.{kind}.{name}: {value!r} not in the domain of {name!r}"
        ) from None
    return action


def compound_from_obj(obj, system: VariableSystem, where: str = "action"):
    """A single action dict or a list of them -> tuple of Actions."""
    if isinstance(obj, list):
        return tuple(
            action_from_dict(a, system, f"{where}[{i}]") for i, a in enumerate(obj)
        )
    return (action_from_dict(obj, system, where),)


# -- verification reports ------------------------------------------------------


def report_to_dict(report: EquivarianceReport) -> dict:
    out = {
        "mode": report.mode,
        "tolerance": report.tolerance,
        "passed": report.passed,
        "max_discrepancy": report.max_discrepancy,
        "cost": report.cost,
        "cost_states": report.cost_states,
        "checked": report.checked,
        "undefined": report.undefined,
        "ambiguous": report.ambiguous,
        "untestable": report.untestable,
        "actions": [
            {
                "action": v.action,
                "discrepancy": v.discrepancy,
                "verdict": v.verdict,
                **({"note": v.note} if v.note else {}),
            }
            for v in report.per_action
        ],
        "counterexamples": [
            {
                "action": c.action,
                "assignment": list(c.assignment),
                "lhs": c.lhs,
                "rhs": c.rhs,
            }
            for c in report.counterexamples
        ],
    }
    if report.region is not None:
        out["region"] = report.region
    if report.per_action_truncated:
        out["actions_truncated"] = True
    if report.detail:
        out["detail"] = report.detail
    return out


def chain_report_to_dict(report: SurrogateChainReport) -> dict:
    return {
        "first_link": report_to_dict(report.first_link),
        "second_link": report_to_dict(report.second_link),
        "composed": report_to_dict(report.composed),
        "passed": report.passed,
    }


def load_profile_to_dict(profile) -> dict:
    return {
        "max_load": profile.max_load,
        "limit": profile.limit,
        "within_limit": profile.within_limit,
        "per_action": dict(profile.per_action),
    }
