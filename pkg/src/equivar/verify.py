"""Equivariance verification between a source model and a target model.

The property under test: translating the source distribution and then
querying equals querying the source and then translating the query. Each
check evaluates one action (or compound action) on both sides and measures
the total-variation distance between the two routes.

Four modes with different cost/coverage trade-offs:
- brute: every action in a family, every value, exact comparison;
- ci-preservation: conditional independencies must match across the
  translation (a biconditional over all conditioning subsets);
- markov-local: per-variable checks restricted to Markov neighborhoods,
  keeping cost local instead of exponential;
- region: exactly a caller-given action subset, for "interpretable under
  these conditions" verdicts.

Cost accounting: `cost` counts distribution evaluations (one per side per
action, plus baselines); `cost_states` additionally weights each evaluation
by the state count of the table it produced. Reports are deterministic:
actions are enumerated in canonical order (subsets by size then index,
observations before interventions, values in domain order).
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousTranslation,
    EmptySubset,
    StateSpaceTooLarge,
    ZeroProbabilityEvidence,
)
from .models import (
    DEFAULT_STATE_CAP,
    Distribution,
    FactoredModel,
    apply_actions,
    ci_holds,
    intervene,
    joint,
    marginal_of_model,
    tv,
)
from .systems import Action, VariableSystem
from .translation import Translation, compose_translations

# per_action lists are capped so exponential scans stay in memory; failures
# are always kept
PER_ACTION_LIMIT = 20_000
FAILURE_LIMIT = 1_000
COUNTEREXAMPLE_LIMIT = 100
MAX_FAMILY = 2_000_000

_FAMILIES = {"observe": ("observe",), "do": ("do",), "both": ("observe", "do")}


@dataclass(frozen=True)
class ActionVerdict:
    action: str
    discrepancy: float | None
    verdict: str  # pass | fail | undefined | ambiguous | untestable
    note: str = ""


@dataclass(frozen=True)
class Counterexample:
    action: str
    assignment: tuple[str, ...]
    lhs: float
    rhs: float


@dataclass(frozen=True)
class MarkovNeighborhood:
    variable: int
    members: frozenset[int]

    @property
    def cardinality(self) -> int:
        return len(self.members)


@dataclass
class EquivarianceReport:
    mode: str
    tolerance: float
    passed: bool
    max_discrepancy: float
    cost: int
    cost_states: int
    checked: int
    undefined: int
    ambiguous: int
    untestable: int
    per_action: list[ActionVerdict]
    counterexamples: list[Counterexample]
    region: str | None = None
    per_action_truncated: bool = False
    elapsed: float = 0.0
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SurrogateChainReport:
    first_link: EquivarianceReport
    second_link: EquivarianceReport
    composed: EquivarianceReport
    passed: bool


def describe_compound(system: VariableSystem, acts: tuple[Action, ...]) -> str:
    if not acts:
        return "baseline"
    return " & ".join(a.describe(system) for a in acts)


class _Agg:
    """Accumulates verdicts and the two cost counters for one report."""

    def __init__(self, mode: str, tolerance: float, collect: bool = True,
                 region: str | None = None):
        self.mode = mode
        self.tolerance = tolerance
        self.collect = collect
        self.region = region
        self.cost = 0
        self.cost_states = 0
        self.checked = 0
        self.undefined = 0
        self.ambiguous = 0
        self.untestable = 0
        self.max_discrepancy = 0.0
        self.per_action: list[ActionVerdict] = []
        self.counterexamples: list[Counterexample] = []
        self.failures = 0
        self.truncated = False
        self.detail: dict = {}
        self._start = time.perf_counter()

    def count(self, states: int, evaluations: int = 1):
        self.cost += evaluations
        self.cost_states += states * evaluations

    def entry(self, action: str, discrepancy: float | None, verdict: str, note: str = ""):
        if verdict == "fail":
            self.failures += 1
            if self.failures > FAILURE_LIMIT:
                self.truncated = True
                return
        elif not self.collect:
            self.truncated = True
            return
        elif len(self.per_action) >= PER_ACTION_LIMIT:
            self.truncated = True
            return
        self.per_action.append(ActionVerdict(action, discrepancy, verdict, note))

    def track(self, discrepancy: float):
        if discrepancy > self.max_discrepancy:
            self.max_discrepancy = discrepancy

    def counterexample(self, action: str, push: Distribution, target_dist: Distribution):
        if len(self.counterexamples) >= COUNTEREXAMPLE_LIMIT:
            return
        diff = np.abs(push.weights - target_dist.weights)
        idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
        labels = tuple(
            push.system.domain(j)[idx[j]] for j in range(len(push.system))
        )
        self.counterexamples.append(
            Counterexample(action, labels, float(push.weights[idx]),
                           float(target_dist.weights[idx]))
        )

    def finish(self) -> EquivarianceReport:
        return EquivarianceReport(
            mode=self.mode,
            tolerance=self.tolerance,
            passed=self.failures == 0,
            max_discrepancy=self.max_discrepancy,
            cost=self.cost,
            cost_states=self.cost_states,
            checked=self.checked,
            undefined=self.undefined,
            ambiguous=self.ambiguous,
            untestable=self.untestable,
            per_action=self.per_action,
            counterexamples=self.counterexamples,
            region=self.region,
            per_action_truncated=self.truncated,
            elapsed=time.perf_counter() - self._start,
            detail=self.detail,
        )


def verify_action(
    machine: FactoredModel,
    human: FactoredModel,
    t: Translation,
    action: Action,
    cap: int = DEFAULT_STATE_CAP,
) -> tuple[float, Counterexample | None]:
    """Discrepancy of one action, with the worst target assignment when the
    two routes disagree. Propagates AmbiguousTranslation and
    ZeroProbabilityEvidence."""
    h_action = t.translate_action(action)
    push = t.pushforward(apply_actions(machine, [action], cap))
    target_dist = apply_actions(human, [h_action], cap)
    d = tv(push, target_dist)
    if d == 0.0:
        return d, None
    diff = np.abs(push.weights - target_dist.weights)
    idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
    labels = tuple(push.system.domain(j)[idx[j]] for j in range(len(push.system)))
    ce = Counterexample(
        action.describe(machine.system), labels,
        float(push.weights[idx]), float(target_dist.weights[idx]),
    )
    return d, ce


def _evaluate_compound(
    machine: FactoredModel,
    human: FactoredModel,
    t: Translation,
    acts: tuple[Action, ...],
    cap: int,
    agg: _Agg,
):
    desc = describe_compound(machine.system, acts)
    try:
        h_acts = t.translate_actions(acts)
    except AmbiguousTranslation as e:
        agg.ambiguous += 1
        agg.entry(desc, None, "ambiguous", str(e))
        return
    m_states = machine.system.state_count()
    h_states = human.system.state_count()
    try:
        dm = apply_actions(machine, acts, cap)
        agg.count(m_states)
    except ZeroProbabilityEvidence as e:
        agg.count(m_states)
        agg.undefined += 1
        agg.entry(desc, None, "undefined", str(e))
        return
    push = t.pushforward(dm)
    try:
        dh = apply_actions(human, h_acts, cap)
        agg.count(h_states)
    except ZeroProbabilityEvidence as e:
        agg.count(h_states)
        agg.undefined += 1
        agg.entry(desc, None, "undefined", str(e))
        return
    d = tv(push, dh)
    agg.checked += 1
    agg.track(d)
    if d <= agg.tolerance:
        agg.entry(desc, d, "pass")
    else:
        agg.entry(desc, d, "fail")
        agg.counterexample(desc, push, dh)


def _family_size(option_counts: list[int], max_compound: int) -> int:
    # combos with at most max_compound chosen variables, empty one included
    f = [0] * (max_compound + 1)
    f[0] = 1
    for c in option_counts:
        for s in range(min(max_compound, len(f) - 1), 0, -1):
            f[s] += f[s - 1] * c
    return sum(f)


def _enumerate_compounds(system: VariableSystem, kinds, max_compound):
    n = len(system)
    yield ()
    options = []
    for i in range(n):
        options.append([
            Action(kind, i, v) for kind in kinds for v in system.domain(i)
        ])
    for size in range(1, max_compound + 1):
        for subset in itertools.combinations(range(n), size):
            for combo in itertools.product(*(options[i] for i in subset)):
                yield tuple(combo)


def verify_brute(
    machine: FactoredModel,
    human: FactoredModel,
    t: Translation,
    action_family: str = "both",
    max_compound: int = 1,
    tolerance: float = 1e-9,
    cap: int = DEFAULT_STATE_CAP,
) -> EquivarianceReport:
    """Check every action in the family on both routes.

    action_family: "observe", "do", or "both". max_compound bounds the size
    of compound actions (pairwise-distinct targets); the empty compound is
    the baseline comparison of the unacted models.
    """
    if action_family not in _FAMILIES:
        raise ValueError(f"unknown action family {action_family!r}")
    kinds = _FAMILIES[action_family]
    if max_compound < 0:
        raise ValueError("max_compound must be >= 0")
    max_compound = min(max_compound, len(machine.system))
    option_counts = [
        len(kinds) * len(machine.system.domain(i)) for i in range(len(machine.system))
    ]
    planned = _family_size(option_counts, max_compound)
    if planned > MAX_FAMILY:
        raise StateSpaceTooLarge(
            f"action family has {planned} compound actions (cap {MAX_FAMILY})"
        )
    agg = _Agg("brute", tolerance, collect=planned <= PER_ACTION_LIMIT)
    if kinds == ("observe",) and t.is_relabeling() and not machine.has_rule_cpds() \
            and not human.has_rule_cpds():
        _brute_observe_fast(machine, human, t, max_compound, cap, agg)
    else:
        for acts in _enumerate_compounds(machine.system, kinds, max_compound):
            _evaluate_compound(machine, human, t, acts, cap, agg)
    return agg.finish()


def _aligned_target_table(human: FactoredModel, t: Translation, cap: int) -> np.ndarray:
    """Target joint re-indexed into source axes/values. Valid only for
    relabeling translations (singleton blocks, bijective value maps)."""
    arr = joint(human, cap).weights
    for i in range(len(t.source)):
        j = t.omega[i]
        arr = np.take(arr, t.value_maps[j], axis=j)
    return np.transpose(arr, axes=t.omega)


def _brute_observe_fast(machine, human, t, max_compound, cap, agg):
    """Observe-only brute scan for relabeling translations.

    Processes one variable subset at a time: every value combination of the
    subset is one row after transposing the joint, so conditioning,
    normalization, and the TV distance vectorize across rows. Counters are
    still tallied per action, matching the one-action-at-a-time path.
    """
    system = machine.system
    n = len(system)
    m_states = system.state_count()
    h_states = human.system.state_count()
    Wm = joint(machine, cap).weights
    Wh = _aligned_target_table(human, t, cap)

    # baseline
    d0 = 0.5 * float(np.abs(Wm - Wh).sum())
    agg.count(m_states)
    agg.count(h_states)
    agg.checked += 1
    agg.track(d0)
    agg.entry("baseline", d0, "pass" if d0 <= agg.tolerance else "fail")
    if d0 > agg.tolerance:
        agg.counterexample("baseline", t.pushforward(joint(machine, cap)),
                           joint(human, cap))

    sizes = system.sizes()
    for size in range(1, max_compound + 1):
        for subset in itertools.combinations(range(n), size):
            rest = tuple(i for i in range(n) if i not in subset)
            rows = int(np.prod([sizes[i] for i in subset], dtype=np.int64))
            Tm = np.transpose(Wm, subset + rest).reshape(rows, -1)
            Th = np.transpose(Wh, subset + rest).reshape(rows, -1)
            mass_m = Tm.sum(axis=1)
            mass_h = Th.sum(axis=1)
            both = (mass_m > 0) & (mass_h > 0)
            m_zero = mass_m <= 0
            h_zero = (mass_m > 0) & (mass_h <= 0)
            d = np.zeros(rows)
            if both.any():
                d[both] = 0.5 * np.abs(
                    Tm[both] / mass_m[both, None] - Th[both] / mass_h[both, None]
                ).sum(axis=1)
            n_both = int(both.sum())
            n_mz = int(m_zero.sum())
            n_hz = int(h_zero.sum())
            agg.cost += 2 * n_both + n_mz + 2 * n_hz
            agg.cost_states += (m_states + h_states) * n_both + m_states * n_mz \
                + (m_states + h_states) * n_hz
            agg.checked += n_both
            agg.undefined += n_mz + n_hz
            if n_both:
                agg.track(float(d[both].max()))
            need_rows = np.nonzero(both & (d > agg.tolerance))[0] if n_both else []
            if agg.collect:
                need_rows = range(rows)
            for r in need_rows:
                combo = np.unravel_index(r, tuple(sizes[i] for i in subset))
                acts = tuple(
                    Action("observe", v, system.domain(v)[combo[k]])
                    for k, v in enumerate(subset)
                )
                desc = describe_compound(system, acts)
                if m_zero[r]:
                    agg.entry(desc, None, "undefined", "observed event has mass 0")
                elif h_zero[r]:
                    agg.entry(desc, None, "undefined",
                              "translated event has mass 0 on the target side")
                elif d[r] <= agg.tolerance:
                    agg.entry(desc, float(d[r]), "pass")
                else:
                    agg.entry(desc, float(d[r]), "fail")
                    dm = apply_actions(machine, acts, cap)
                    dh = apply_actions(human, t.translate_actions(acts), cap)
                    agg.counterexample(desc, t.pushforward(dm), dh)


def verify_region(
    machine: FactoredModel,
    human: FactoredModel,
    t: Translation,
    region,
    tolerance: float = 1e-9,
    cap: int = DEFAULT_STATE_CAP,
) -> EquivarianceReport:
    """Check exactly the given actions (each an Action or a compound tuple)."""
    normalized: list[tuple[Action, ...]] = []
    for item in region:
        if isinstance(item, Action):
            normalized.append((item,))
        else:
            normalized.append(tuple(item))
    if not normalized:
        raise EmptySubset("region must contain at least one action")
    desc = "; ".join(describe_compound(machine.system, acts) for acts in normalized)
    agg = _Agg("region", tolerance, region=desc)
    for acts in normalized:
        _evaluate_compound(machine, human, t, acts, cap, agg)
    return agg.finish()


# -- conditional-independence preservation --------------------------------


def _describe_ci(system: VariableSystem, a: int, b, s) -> str:
    names = system.names
    bs = "{" + ", ".join(names[j] for j in sorted(b)) + "}"
    ss = "{" + ", ".join(names[j] for j in sorted(s)) + "}"
    return f"{names[a]} _||_ {bs} | {ss}"


def verify_ci_preservation(
    machine: FactoredModel,
    human: FactoredModel,
    t: Translation,
    max_vars: int = 12,
    eps: float = 1e-9,
    cap: int = DEFAULT_STATE_CAP,
) -> EquivarianceReport:
    """For every variable i and every S ⊆ V∖{i}, the statement
    (i ⊥ rest | S) must hold in the source iff its translated counterpart
    holds in the target.

    Statements are testable only when {i} is a full block and S is a union
    of blocks; others are tallied as untestable (a split block has no
    translated image).
    """
    n = len(machine.system)
    if n > max_vars:
        raise StateSpaceTooLarge(
            f"ci preservation scans all conditioning subsets; "
            f"{n} variables exceeds the cap of {max_vars}"
        )
    agg = _Agg("ci-preservation", eps, collect=n <= 8)
    dist_m = joint(machine, cap)
    agg.count(machine.system.state_count())
    dist_h = joint(human, cap)
    agg.count(human.system.state_count())
    blocks = {j: set(t.block(j)) for j in range(len(t.target))}
    violations = []
    for i in range(n):
        others = [v for v in range(n) if v != i]
        i_aligned = blocks[t.omega[i]] == {i}
        for size in range(0, n):
            for s in itertools.combinations(others, size):
                b = [v for v in others if v not in s]
                if not b:
                    continue
                desc = _describe_ci(machine.system, i, b, s)
                s_set = set(s)
                aligned = i_aligned and all(
                    blocks[t.omega[v]] <= s_set for v in s
                )
                if not aligned:
                    agg.untestable += 1
                    agg.entry(desc, None, "untestable",
                              "conditioning set splits a translation block")
                    continue
                m_holds = ci_holds(dist_m, i, b, s, eps)
                hi = t.omega[i]
                hs = sorted({t.omega[v] for v in s})
                hb = [j for j in range(len(t.target)) if j != hi and j not in hs]
                h_holds = True if not hb else ci_holds(dist_h, hi, hb, hs, eps)
                agg.count(machine.system.state_count(sorted([i] + b + list(s))), 1)
                agg.count(human.system.state_count(sorted([hi] + hb + hs)), 1)
                agg.checked += 1
                if m_holds == h_holds:
                    agg.entry(desc, None, "pass")
                else:
                    side = ("holds in source, fails among translated counterparts"
                            if m_holds else
                            "fails in source, holds among translated counterparts")
                    agg.entry(desc, None, "fail", side)
                    violations.append(desc)
    agg.detail["violations"] = violations
    return agg.finish()


# -- markov-local ----------------------------------------------------------


def minimal_neighborhood(
    model: FactoredModel, i: int, eps: float = 1e-9, cap: int = DEFAULT_STATE_CAP
) -> MarkovNeighborhood:
    """Smallest conditioning set making i independent of everything else;
    ties broken by lexicographically smallest index set. Exhaustive search,
    ascending by cardinality (the full complement always qualifies)."""
    n = len(model.system)
    dist = joint(model, cap)
    others = [v for v in range(n) if v != i]
    for size in range(0, len(others) + 1):
        for s in itertools.combinations(others, size):
            b = [v for v in others if v not in s]
            if ci_holds(dist, i, b, s, eps):
                return MarkovNeighborhood(i, frozenset(s))
    raise AssertionError("unreachable: full complement renders i independent")


def _restrict_translation(t: Translation, local: list[int], target_local: list[int]) -> Translation:
    source_sub = t.source.subsystem(local)
    target_sub = t.target.subsystem(target_local)
    pos = {j: k for k, j in enumerate(target_local)}
    omega_loc = tuple(pos[t.omega[v]] for v in local)
    maps = tuple(t.value_maps[j] for j in target_local)
    return Translation(source_sub, target_sub, omega_loc, maps)


def verify_markov_local(
    machine: FactoredModel,
    human: FactoredModel,
    t: Translation,
    tolerance: float = 1e-9,
    cap: int = DEFAULT_STATE_CAP,
) -> EquivarianceReport:
    """Per-variable equivariance restricted to Markov neighborhoods.

    For each source variable i, both sides are marginalized onto the block
    closure of {i} ∪ blanket(i) (and its translated image), and every
    single-variable action on i is checked there. The neighborhood is the
    graphical blanket (parents, children, co-parents), which equals the
    minimal conditioning set for faithful CPTs; cost stays proportional to
    the local state spaces instead of the full joint.
    """
    agg = _Agg("markov-local", tolerance)
    per_variable = {}
    n = len(machine.system)
    for i in range(n):
        base = {i} | set(machine.markov_blanket(i))
        local = sorted(set().union(*(set(t.block(t.omega[v])) for v in base)))
        target_local = sorted({t.omega[v] for v in local})
        t_loc = _restrict_translation(t, local, target_local)
        m_size = machine.system.state_count(local)
        h_size = human.system.state_count(target_local)
        m_base = marginal_of_model(machine, local, cap)
        agg.count(m_size)
        h_base = marginal_of_model(human, target_local, cap)
        agg.count(h_size)
        li = local.index(i)
        var_max = 0.0
        for kind in ("observe", "do"):
            for value in machine.system.domain(i):
                action = Action(kind, i, value)
                desc = action.describe(machine.system) + " [local]"
                try:
                    h_action = t.translate_action(action)
                except AmbiguousTranslation as e:
                    agg.ambiguous += 1
                    agg.entry(desc, None, "ambiguous", str(e))
                    continue
                vidx = machine.system.value_index(i, value)
                hj = h_action.target
                hvidx = human.system.value_index(hj, h_action.value)
                lj = target_local.index(hj)
                try:
                    if kind == "observe":
                        m_res = m_base.condition(li, vidx)
                    else:
                        m_res = marginal_of_model(intervene(machine, i, vidx), local, cap)
                    agg.count(m_size)
                except ZeroProbabilityEvidence as e:
                    agg.count(m_size)
                    agg.undefined += 1
                    agg.entry(desc, None, "undefined", str(e))
                    continue
                try:
                    if kind == "observe":
                        h_res = h_base.condition(lj, hvidx)
                    else:
                        h_res = marginal_of_model(intervene(human, hj, hvidx), target_local, cap)
                    agg.count(h_size)
                except ZeroProbabilityEvidence as e:
                    agg.count(h_size)
                    agg.undefined += 1
                    agg.entry(desc, None, "undefined", str(e))
                    continue
                d = tv(t_loc.pushforward(m_res), h_res)
                agg.checked += 1
                agg.track(d)
                var_max = max(var_max, d)
                if d <= tolerance:
                    agg.entry(desc, d, "pass")
                else:
                    agg.entry(desc, d, "fail")
                    agg.counterexample(desc, t_loc.pushforward(m_res), h_res)
        per_variable[machine.system.variables[i].name] = {
            "neighborhood": [machine.system.variables[v].name for v in local if v != i],
            "max_discrepancy": var_max,
        }
    agg.detail["per_variable"] = per_variable
    return agg.finish()


# -- surrogate chains ------------------------------------------------------


def verify_surrogate_chain(
    original: FactoredModel,
    surrogate: FactoredModel,
    human: FactoredModel,
    t_os: Translation,
    t_sh: Translation,
    action_family: str = "both",
    max_compound: int = 1,
    tolerance: float = 1e-9,
    cap: int = DEFAULT_STATE_CAP,
) -> SurrogateChainReport:
    """Interpreting through a surrogate needs two equivariance relations:
    original→surrogate and surrogate→human. Both links are brute-checked,
    plus the composed translation on single actions; the verdict is their
    conjunction."""
    first = verify_brute(original, surrogate, t_os, action_family, max_compound,
                         tolerance, cap)
    second = verify_brute(surrogate, human, t_sh, action_family, max_compound,
                          tolerance, cap)
    composed = verify_brute(original, human, compose_translations(t_os, t_sh),
                            action_family, 1, tolerance, cap)
    return SurrogateChainReport(
        first_link=first,
        second_link=second,
        composed=composed,
        passed=first.passed and second.passed and composed.passed,
    )
