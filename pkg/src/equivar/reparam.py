"""Functional-mixture re-parametrization and concept-level refits.

A MixtureModel represents a complex system as selector-gated simple
components: one discrete selector (the indicator light) picks which
component is active, and each component is a full factored model over the
shared variables. `flatten` rebuilds the equivalent monolithic model;
`cognitive_load` quantifies why the mixture is easier on a human: per
query, only the active component's neighborhood plus the selector must be
held in mind.

`semantic_reparam` refits a model at concept level: push the joint through
a translation and re-estimate CPTs under a declared concept DAG, failing
loudly when that structure cannot reproduce the pushforward exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    StateSpaceTooLarge,
    StructureInconsistent,
    SystemMismatch,
    UnknownSelectorValue,
)
from .models import (
    DEFAULT_STATE_CAP,
    Distribution,
    FactoredModel,
    apply_actions,
    joint,
    marginal,
    tv,
)
from .systems import Action, Variable, VariableSystem
from .translation import Translation

LOAD_LIMIT = 9  # short-term memory holds about seven plus or minus two items


@dataclass(eq=False)
class MixtureModel:
    """Selector-gated mixture. Every component is a model over the same
    shared system (which does not contain the selector); the selector is a
    root with the given prior and sits at index 0 of the flattened system."""

    selector: Variable
    components: dict[str, FactoredModel]
    selector_prior: np.ndarray

    def __post_init__(self):
        if set(self.components) != set(self.selector.domain):
            raise ValueError("need exactly one component per selector value")
        systems = {c.system for c in self.components.values()}
        if len(systems) != 1:
            raise ValueError("all components must share one variable system")
        shared = next(iter(systems))
        if self.selector.name in shared.names:
            raise ValueError(f"selector name {self.selector.name!r} collides "
                             f"with a component variable")
        prior = np.asarray(self.selector_prior, dtype=np.float64)
        if prior.shape != (len(self.selector.domain),):
            raise ValueError("selector prior length must match selector domain")
        if np.any(prior < 0) or abs(float(prior.sum()) - 1.0) > 1e-12:
            raise ValueError("selector prior must be a probability vector")
        prior = prior.copy()
        prior.setflags(write=False)
        self.selector_prior = prior

    @property
    def shared_system(self) -> VariableSystem:
        return next(iter(self.components.values())).system

    @property
    def flat_system(self) -> VariableSystem:
        return VariableSystem((self.selector,) + self.shared_system.variables)

    @property
    def selector_index(self) -> int:
        return 0

    def component_list(self) -> list[FactoredModel]:
        return [self.components[v] for v in self.selector.domain]


def active_component(mix: MixtureModel, selector_value: str) -> FactoredModel:
    if selector_value not in mix.components:
        raise UnknownSelectorValue(
            f"{selector_value!r} is not a value of {mix.selector.name!r}"
        )
    return mix.components[selector_value]


def flatten(mix: MixtureModel, cap: int = DEFAULT_STATE_CAP) -> FactoredModel:
    """Monolithic model with the same semantics: the selector becomes root 0
    and every shared variable gains it as a parent (plus the union of its
    per-component parents), with rows copied from the active component."""
    shared = mix.shared_system
    comps = mix.component_list()
    k = len(comps)
    n = len(shared)
    parents: list[tuple[int, ...]] = [()]
    cpds: list = [mix.selector_prior]
    for i in range(n):
        union = sorted(set().union(*(set(c.parents[i]) for c in comps)))
        psizes = shared.sizes(union)
        size = len(shared.domain(i))
        entries = k * size
        for s in psizes:
            entries *= s
        if entries > cap:
            raise StateSpaceTooLarge(
                f"flattened cpd for {shared.variables[i].name!r} "
                f"has {entries} entries (cap {cap})"
            )
        table = np.zeros((k,) + psizes + (size,))
        for s, comp in enumerate(comps):
            own = comp.parents[i]
            own_pos = [union.index(p) for p in own]
            for assign in np.ndindex(*psizes) if psizes else [()]:
                row_key = tuple(assign[p] for p in own_pos)
                table[(s,) + tuple(assign)] = comp.cpd_row(i, row_key)
        parents.append((0,) + tuple(p + 1 for p in union))
        cpds.append(table)
    # parameter flags cannot survive: every shared variable gains the
    # selector as a parent, and parameter variables must stay roots
    return FactoredModel(mix.flat_system, tuple(parents), tuple(cpds))


def mixture_joint(mix: MixtureModel, cap: int = DEFAULT_STATE_CAP) -> Distribution:
    """Direct mixture semantics: prior-weighted stack of component joints."""
    flat = mix.flat_system
    if flat.state_count() > cap:
        raise StateSpaceTooLarge(f"mixture joint has {flat.state_count()} states")
    out = np.zeros(flat.sizes())
    for s, comp in enumerate(mix.component_list()):
        out[s] = mix.selector_prior[s] * joint(comp, cap).weights
    return Distribution(flat, out)


def mixture_apply_action(
    mix: MixtureModel, action: Action, cap: int = DEFAULT_STATE_CAP
) -> Distribution:
    """Query the mixture without flattening: act inside each component and
    reweight the selector (observation) or keep the prior (intervention)."""
    flat = mix.flat_system
    action.validate(flat)
    out = np.zeros(flat.sizes())
    if action.target == mix.selector_index:
        # selector is a root: conditioning and intervening coincide
        s = flat.value_index(0, action.value)
        out[s] = joint(mix.components[action.value], cap).weights
        return Distribution(flat, out)
    inner = Action(action.kind, action.target - 1, action.value)
    comps = mix.component_list()
    if action.kind == "do":
        for s, comp in enumerate(comps):
            out[s] = mix.selector_prior[s] * apply_actions(comp, [inner], cap).weights
        return Distribution(flat, out)
    # observation: selector posterior ∝ prior × in-component evidence mass
    i = inner.target
    vidx = mix.shared_system.value_index(i, inner.value)
    evidence = np.zeros(len(comps))
    conditioned = []
    for s, comp in enumerate(comps):
        w = joint(comp, cap)
        m = marginal(w, [i])
        evidence[s] = m.weights[vidx]
        conditioned.append(w)
    total = float((mix.selector_prior * evidence).sum())
    if total <= 0.0:
        from .errors import ZeroProbabilityEvidence

        raise ZeroProbabilityEvidence(
            f"P({mix.shared_system.variables[i].name}={inner.value}) = 0 "
            f"under every component"
        )
    for s, w in enumerate(conditioned):
        if evidence[s] > 0:
            out[s] = (mix.selector_prior[s] / total) * w.condition(i, vidx).weights \
                * evidence[s]
    return Distribution(flat, out)


# -- cognitive load --------------------------------------------------------


@dataclass(frozen=True)
class CognitiveLoadProfile:
    per_action: dict
    max_load: int
    limit: int = LOAD_LIMIT

    @property
    def within_limit(self) -> bool:
        return self.max_load <= self.limit


_FAMILY_KINDS = {"observe": ("observe",), "do": ("do",), "both": ("observe", "do")}


def _blankets(model: FactoredModel) -> list[set[int]]:
    n = len(model.system)
    children: list[list[int]] = [[] for _ in range(n)]
    for c in range(n):
        for p in model.parents[c]:
            children[p].append(c)
    out = []
    for i in range(n):
        bl = set(model.parents[i])
        for c in children[i]:
            bl.add(c)
            bl.update(model.parents[c])
        bl.discard(i)
        out.append(bl)
    return out


def cognitive_load(model, action_family: str = "both") -> CognitiveLoadProfile:
    """Variables a user must jointly consider, per action.

    For a plain model: the action target plus its Markov neighborhood
    (graphical blanket). For a mixture: the worst case over components of
    the in-component neighborhood, plus one for the indicator light itself;
    selector actions are not part of the family (the components' system has
    no selector).
    """
    if action_family not in _FAMILY_KINDS:
        raise ValueError(f"unknown action family {action_family!r}")
    kinds = _FAMILY_KINDS[action_family]
    per_action: dict[str, int] = {}
    if isinstance(model, MixtureModel):
        system = model.shared_system
        comp_blankets = [_blankets(c) for c in model.component_list()]
        loads = [
            1 + max(len({i} | bl[i]) for bl in comp_blankets)
            for i in range(len(system))
        ]
    else:
        system = model.system
        blankets = _blankets(model)
        loads = [len({i} | blankets[i]) for i in range(len(system))]
    for i in range(len(system)):
        for kind in kinds:
            for value in system.domain(i):
                per_action[Action(kind, i, value).describe(system)] = loads[i]
    return CognitiveLoadProfile(per_action=per_action, max_load=max(loads))


# -- concept-level refit ----------------------------------------------------


def induced_concept_parents(machine: FactoredModel, t: Translation) -> tuple[tuple[int, ...], ...]:
    """Concept DAG induced by omega: j -> k when some source edge crosses
    the corresponding blocks."""
    k = len(t.target)
    parents: list[set[int]] = [set() for _ in range(k)]
    for c in range(len(machine.system)):
        for p in machine.parents[c]:
            j, jc = t.omega[p], t.omega[c]
            if j != jc:
                parents[jc].add(j)
    return tuple(tuple(sorted(ps)) for ps in parents)


def semantic_reparam(
    machine: FactoredModel,
    t: Translation,
    concept_parents: Iterable[Iterable[int]] | None = None,
    tolerance: float = 1e-9,
    cap: int = DEFAULT_STATE_CAP,
) -> FactoredModel:
    """Concept-level model fitted exactly to the translated joint.

    CPTs are re-estimated from the pushforward under the declared concept
    DAG (default: the omega-induced graph). If that structure cannot
    reproduce the pushforward exactly, the declared concepts are not a
    faithful re-parametrization and StructureInconsistent is raised.
    """
    if t.source != machine.system:
        raise SystemMismatch("translation source does not match the model system")
    push = t.pushforward(joint(machine, cap))
    if concept_parents is None:
        parents = induced_concept_parents(machine, t)
    else:
        parents = tuple(tuple(sorted(set(ps))) for ps in concept_parents)
    try:
        _check_dag(parents)
    except ValueError as e:
        raise StructureInconsistent(
            f"concept graph is not a DAG ({e}); declare concept_parents explicitly"
        ) from None
    k = len(t.target)
    cpds = []
    for j in range(k):
        ps = parents[j]
        sub = marginal(push, list(ps) + [j])
        keep = sorted(set(ps) | {j})
        pos = {v: idx for idx, v in enumerate(keep)}
        order = tuple(pos[p] for p in ps) + (pos[j],)
        table = np.transpose(sub.weights, order)
        sums = table.sum(axis=-1, keepdims=True)
        size = len(t.target.domain(j))
        cpd = np.where(sums > 0, table / np.where(sums > 0, sums, 1.0), 1.0 / size)
        cpds.append(cpd)
    params = frozenset(
        j for j in range(k)
        if not parents[j]
        and t.block(j)
        and set(t.block(j)) <= machine.parameter_vars
    )
    fitted = FactoredModel(t.target, parents, tuple(cpds), params)
    d = tv(joint(fitted, cap), push)
    if d > tolerance:
        raise StructureInconsistent(
            f"declared concept structure cannot reproduce the translated "
            f"joint (TV {d:.3g} > {tolerance:g})"
        )
    return fitted


def _check_dag(parents) -> None:
    n = len(parents)
    state = [0] * n

    def visit(v, stack):
        if state[v] == 1:
            raise ValueError("cycle through " + " -> ".join(str(u) for u in stack + [v]))
        if state[v] == 2:
            return
        state[v] = 1
        for p in parents[v]:
            visit(p, stack + [v])
        state[v] = 2

    for v in range(n):
        visit(v, [])
