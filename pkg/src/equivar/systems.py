"""Variable systems and single-variable actions.

A VariableSystem is an ordered list of named discrete variables; the index
set is 0..n-1 in declaration order. Actions target one variable and either
observe it (condition) or set it (intervene).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Literal, Sequence

from .errors import UnknownVariable


@dataclass(frozen=True)
class Variable:
    name: str
    domain: tuple[str, ...]

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable name must be nonempty")
        if len(self.domain) < 2:
            raise ValueError(f"variable {self.name!r}: domain needs >= 2 values")
        if len(set(self.domain)) != len(self.domain):
            raise ValueError(f"variable {self.name!r}: duplicate domain labels")
        object.__setattr__(self, "domain", tuple(str(v) for v in self.domain))


@dataclass(frozen=True)
class VariableSystem:
    variables: tuple[Variable, ...]
    _name_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        object.__setattr__(self, "_name_index", {n: i for i, n in enumerate(names)})

    @staticmethod
    def of(*pairs: tuple[str, Sequence[str]]) -> "VariableSystem":
        return VariableSystem(tuple(Variable(n, tuple(d)) for n, d in pairs))

    def __len__(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def index(self, name: str) -> int:
        try:
            return self._name_index[name]
        except KeyError:
            raise UnknownVariable(f"no variable named {name!r}") from None

    def domain(self, i: int) -> tuple[str, ...]:
        return self.variables[i].domain

    def sizes(self, subset: Sequence[int] | None = None) -> tuple[int, ...]:
        idx = range(len(self.variables)) if subset is None else subset
        return tuple(len(self.variables[i].domain) for i in idx)

    def state_count(self, subset: Sequence[int] | None = None) -> int:
        n = 1
        for s in self.sizes(subset):
            n *= s
        return n

    def value_index(self, var: int, label: str) -> int:
        dom = self.variables[var].domain
        try:
            return dom.index(label)
        except ValueError:
            raise UnknownVariable(
                f"value {label!r} not in domain of {self.variables[var].name!r}"
            ) from None

    def assignments(self, subset: Sequence[int] | None = None) -> Iterator[tuple[int, ...]]:
        """All index-tuples over the given variables, row-major."""
        idx = range(len(self.variables)) if subset is None else subset
        return itertools.product(*(range(len(self.variables[i].domain)) for i in idx))

    def labels(self, assignment: Sequence[int], subset: Sequence[int] | None = None) -> tuple[str, ...]:
        idx = range(len(self.variables)) if subset is None else subset
        return tuple(self.variables[i].domain[a] for i, a in zip(idx, assignment))

    def subsystem(self, subset: Sequence[int]) -> "VariableSystem":
        return VariableSystem(tuple(self.variables[i] for i in subset))


ActionKind = Literal["observe", "do"]


@dataclass(frozen=True)
class Action:
    """observe: condition on target=value; do: intervene (truncated factorization)."""

    kind: ActionKind
    target: int
    value: str

    def __post_init__(self):
        if self.kind not in ("observe", "do"):
            raise ValueError(f"unknown action kind {self.kind!r}")

    def validate(self, system: VariableSystem) -> None:
        if not 0 <= self.target < len(system):
            raise UnknownVariable(f"action target {self.target} out of range")
        system.value_index(self.target, self.value)

    def describe(self, system: VariableSystem) -> str:
        name = system.variables[self.target].name
        if self.kind == "do":
            return f"do({name}={self.value})"
        return f"{name}={self.value}"


def observe(system: VariableSystem, name: str, value: str) -> Action:
    return Action("observe", system.index(name), str(value))


def do(system: VariableSystem, name: str, value: str) -> Action:
    return Action("do", system.index(name), str(value))
