"""Discrete factored probability models and exact inference.

A FactoredModel is a DAG of discrete variables with one conditional
probability table per variable (rows indexed by parent assignment). All
inference here is exact: dense enumeration for joint queries, variable
elimination for marginals of large models. Everything is immutable and
pure; sampling takes an explicit seed.

Conventions:
- cpds[i] is an ndarray of shape (parent domain sizes..., domain size of i),
  axes in parents-declaration order.
- Distribution.weights is a dense ndarray whose axes follow the system's
  variable order.
- Interventions use truncated factorization: the target's CPT is replaced
  by a point mass and its parent edges dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    EmptySubset,
    StateSpaceTooLarge,
    SystemMismatch,
    ZeroProbabilityEvidence,
)
from .systems import Action, VariableSystem

DEFAULT_STATE_CAP = 2 ** 24
ROW_SUM_TOL = 1e-12
MASS_TOL = 1e-9


@dataclass(frozen=True)
class RuleCpd:
    """Deterministic CPD backed by a named rule instead of a dense table.

    Used for models whose tables are intentionally too large to materialize
    (a 100-parent node has 2^100 rows). `fn` maps a parent index-assignment
    to the child's value index.
    """

    name: str
    params: tuple = ()
    fn: Callable[[tuple[int, ...]], int] = field(default=None, repr=False, compare=False)

    def row(self, parent_assignment: tuple[int, ...], domain_size: int) -> np.ndarray:
        out = np.zeros(domain_size)
        out[self.fn(parent_assignment)] = 1.0
        return out


def _as_cpd_array(cpd, parent_sizes: tuple[int, ...], size: int, name: str) -> np.ndarray:
    arr = np.asarray(cpd, dtype=np.float64)
    want = parent_sizes + (size,)
    if arr.shape != want:
        raise ValueError(f"cpd for {name!r}: shape {arr.shape}, expected {want}")
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise ValueError(f"cpd for {name!r}: entries must be finite and nonnegative")
    sums = arr.sum(axis=-1)
    if np.max(np.abs(sums - 1.0)) > ROW_SUM_TOL:
        raise ValueError(f"cpd for {name!r}: rows must sum to 1 within {ROW_SUM_TOL}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(eq=False)
class FactoredModel:
    """Immutable DAG-factored model. parameter_vars flags root variables
    whose value selects between alternative functional structures; they are
    ordinary discrete roots everywhere else."""

    system: VariableSystem
    parents: tuple[tuple[int, ...], ...]
    cpds: tuple
    parameter_vars: frozenset[int] = frozenset()

    def __post_init__(self):
        n = len(self.system)
        self.parents = tuple(tuple(p) for p in self.parents)
        if len(self.parents) != n or len(self.cpds) != n:
            raise ValueError("parents/cpds must cover every variable")
        for i, ps in enumerate(self.parents):
            for p in ps:
                if not 0 <= p < n or p == i:
                    raise ValueError(f"variable {i}: bad parent index {p}")
            if len(set(ps)) != len(ps):
                raise ValueError(f"variable {i}: duplicate parents")
        self._topo = _topological_order(self.parents)  # raises on cycles
        checked = []
        for i, cpd in enumerate(self.cpds):
            psizes = self.system.sizes(self.parents[i])
            size = len(self.system.domain(i))
            if isinstance(cpd, RuleCpd):
                checked.append(cpd)
            else:
                checked.append(_as_cpd_array(cpd, psizes, size, self.system.variables[i].name))
        self.cpds = tuple(checked)
        self.parameter_vars = frozenset(self.parameter_vars)
        for i in self.parameter_vars:
            if self.parents[i]:
                raise ValueError(f"parameter variable {i} must be a root")

    # -- graph structure -------------------------------------------------

    @property
    def topological_order(self) -> tuple[int, ...]:
        return self._topo

    def children(self, i: int) -> tuple[int, ...]:
        return tuple(j for j in range(len(self.system)) if i in self.parents[j])

    def markov_blanket(self, i: int) -> frozenset[int]:
        """Parents, children, and co-parents of i (graphical blanket)."""
        out = set(self.parents[i])
        for c in self.children(i):
            out.add(c)
            out.update(self.parents[c])
        out.discard(i)
        return frozenset(out)

    def cpd_row(self, i: int, parent_assignment: tuple[int, ...]) -> np.ndarray:
        cpd = self.cpds[i]
        if isinstance(cpd, RuleCpd):
            return cpd.row(parent_assignment, len(self.system.domain(i)))
        return cpd[parent_assignment]

    def cpd_array(self, i: int, cap: int = DEFAULT_STATE_CAP) -> np.ndarray:
        """Dense table for variable i, materializing rule CPDs if small enough."""
        cpd = self.cpds[i]
        if not isinstance(cpd, RuleCpd):
            return cpd
        psizes = self.system.sizes(self.parents[i])
        size = len(self.system.domain(i))
        total = size
        for s in psizes:
            total *= s
        if total > cap:
            raise StateSpaceTooLarge(
                f"cpd for variable {i} has {total} entries (cap {cap})"
            )
        arr = np.zeros(psizes + (size,))
        for pa in np.ndindex(*psizes) if psizes else [()]:
            arr[pa] = cpd.row(tuple(pa), size)
        arr.setflags(write=False)
        return arr

    def has_rule_cpds(self) -> bool:
        return any(isinstance(c, RuleCpd) for c in self.cpds)


def _topological_order(parents: Sequence[Sequence[int]]) -> tuple[int, ...]:
    n = len(parents)
    indeg = [len(p) for p in parents]
    children = [[] for _ in range(n)]
    for i, ps in enumerate(parents):
        for p in ps:
            children[p].append(i)
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    order = []
    while ready:
        i = ready.pop(0)
        order.append(i)
        for c in children[i]:
            indeg[c] -= 1
            if indeg[c] == 0:
                # keep deterministic order
                lo = 0
                while lo < len(ready) and ready[lo] < c:
                    lo += 1
                ready.insert(lo, c)
    if len(order) != n:
        raise ValueError("parent graph has a cycle")
    return tuple(order)


@dataclass(eq=False)
class Distribution:
    """Dense joint distribution over a VariableSystem."""

    system: VariableSystem
    weights: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != self.system.sizes():
            raise SystemMismatch(
                f"weights shape {w.shape} does not match system {self.system.sizes()}"
            )
        if np.any(w < 0) or np.any(~np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if self.normalized and abs(float(w.sum()) - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {w.sum()} not within {MASS_TOL} of 1")
        w = w.copy()
        w.setflags(write=False)
        self.weights = w

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def condition(self, var: int, value_idx: int) -> "Distribution":
        """Bayesian conditioning on var=value; keeps the full system with the
        observed variable pinned to a point mass."""
        take = [slice(None)] * len(self.system)
        take[var] = value_idx
        slab = self.weights[tuple(take)]
        mass = float(slab.sum())
        if mass <= 0.0:
            name = self.system.variables[var].name
            label = self.system.domain(var)[value_idx]
            raise ZeroProbabilityEvidence(f"P({name}={label}) = 0")
        out = np.zeros_like(self.weights)
        out[tuple(take)] = slab / mass
        return Distribution(self.system, out)

    def probability(self, assignment: Sequence[int]) -> float:
        return float(self.weights[tuple(assignment)])


def tv(a: Distribution, b: Distribution) -> float:
    """Total-variation distance between distributions on matching state spaces."""
    if a.weights.shape != b.weights.shape:
        raise SystemMismatch("distributions live on different state spaces")
    return 0.5 * float(np.abs(a.weights - b.weights).sum())


# -- core operations -----------------------------------------------------


def joint(model: FactoredModel, cap: int = DEFAULT_STATE_CAP) -> Distribution:
    """Exact joint by dense enumeration of the factored product."""
    total = model.system.state_count()
    if total > cap:
        raise StateSpaceTooLarge(f"joint has {total} states (cap {cap})")
    n = len(model.system)
    sizes = model.system.sizes()
    weights = np.ones(sizes)
    for i in range(n):
        axes = tuple(model.parents[i]) + (i,)
        cpd = model.cpd_array(i, cap)
        # lay the cpd out on the full axis grid (broadcast over the rest)
        order = np.argsort(axes)
        arranged = np.transpose(cpd, order)
        shape = [1] * n
        for ax in axes:
            shape[ax] = sizes[ax]
        weights = weights * arranged.reshape(shape)
    return Distribution(model.system, weights)


def intervene(model: FactoredModel, var: int, value_idx: int) -> FactoredModel:
    """Truncated factorization: replace var's CPT by a point mass, cut its
    parent edges."""
    point = np.zeros(len(model.system.domain(var)))
    point[value_idx] = 1.0
    parents = list(model.parents)
    cpds = list(model.cpds)
    parents[var] = ()
    cpds[var] = point
    return FactoredModel(model.system, tuple(parents), tuple(cpds), model.parameter_vars)


def apply_actions(
    model: FactoredModel, actions: Iterable[Action], cap: int = DEFAULT_STATE_CAP
) -> Distribution:
    """Joint after a set of single-variable actions on distinct targets.

    Interventions rewrite the model first (truncated factorization), then
    observations condition the resulting joint. Raises
    ZeroProbabilityEvidence rather than returning NaNs when an observation
    has mass zero.
    """
    acts = list(actions)
    targets = [a.target for a in acts]
    if len(set(targets)) != len(targets):
        raise ValueError("compound action targets must be pairwise distinct")
    for a in acts:
        a.validate(model.system)
    m = model
    for a in acts:
        if a.kind == "do":
            m = intervene(m, a.target, model.system.value_index(a.target, a.value))
    dist = joint(m, cap)
    for a in acts:
        if a.kind == "observe":
            dist = dist.condition(a.target, model.system.value_index(a.target, a.value))
    return dist


def apply_action(model: FactoredModel, action: Action, cap: int = DEFAULT_STATE_CAP) -> Distribution:
    return apply_actions(model, [action], cap)


def marginal(dist: Distribution, subset: Sequence[int]) -> Distribution:
    """Sum out everything outside subset. Result variables keep declaration
    order regardless of the order indices are passed, making projection
    idempotent."""
    if len(subset) == 0:
        raise EmptySubset("marginal needs a nonempty variable subset")
    n = len(dist.system)
    keep = sorted(set(subset))
    if keep[0] < 0 or keep[-1] >= n:
        raise SystemMismatch(f"subset {subset} out of range for {n} variables")
    drop = tuple(i for i in range(n) if i not in set(keep))
    w = dist.weights.sum(axis=drop) if drop else dist.weights
    return Distribution(dist.system.subsystem(keep), w, normalized=dist.normalized)


def ci_holds(
    dist: Distribution,
    a: int,
    b: Iterable[int],
    s: Iterable[int],
    eps: float = 1e-9,
) -> bool:
    """Whether V_a is independent of the set b given the set s under dist.

    True iff for every s* with P(s*) > 0 and every (a*, b*):
    |P(a*,b*|s*) - P(a*|s*) P(b*|s*)| <= eps. Vacuously true for empty b.
    """
    b = sorted(set(b))
    s = sorted(set(s))
    if a in b or a in s or set(b) & set(s):
        raise ValueError("ci test requires a, b, s pairwise disjoint")
    if not b:
        return True
    sub = marginal(dist, [a] + b + s)
    # axes of sub follow declaration order; find positions
    keep = sorted(set([a] + b + s))
    pos = {v: k for k, v in enumerate(keep)}
    a_ax = (pos[a],)
    b_ax = tuple(pos[v] for v in b)
    s_ax = tuple(pos[v] for v in s)
    t = np.transpose(sub.weights, a_ax + b_ax + s_ax)
    da = t.shape[0]
    db = int(np.prod(t.shape[1 : 1 + len(b_ax)], dtype=np.int64)) if b_ax else 1
    ds = int(np.prod(t.shape[1 + len(b_ax) :], dtype=np.int64)) if s_ax else 1
    t = t.reshape(da, db, ds)
    ps = t.sum(axis=(0, 1))
    ok = ps > 0.0
    if not ok.any():
        return True
    cond = t[:, :, ok] / ps[ok]
    pa = cond.sum(axis=1, keepdims=True)
    pb = cond.sum(axis=0, keepdims=True)
    return float(np.max(np.abs(cond - pa * pb))) <= eps


def ci_test(
    model: FactoredModel,
    a: int,
    b: Iterable[int],
    s: Iterable[int],
    eps: float = 1e-9,
    cap: int = DEFAULT_STATE_CAP,
) -> bool:
    return ci_holds(joint(model, cap), a, b, s, eps)


def sample(model: FactoredModel, seed: int, n: int) -> list[tuple[str, ...]]:
    """Ancestral sampling in topological order; deterministic given seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    nvars = len(model.system)
    draws = np.zeros((n, nvars), dtype=np.int64)
    for i in model.topological_order:
        ps = model.parents[i]
        size = len(model.system.domain(i))
        u = rng.random(n)
        if not ps:
            row = model.cpd_row(i, ())
            draws[:, i] = np.searchsorted(np.cumsum(row), u, side="right").clip(0, size - 1)
            continue
        pa_vals = draws[:, ps]
        # group rows by parent assignment to vectorize the categorical draws
        keys, inverse = np.unique(pa_vals, axis=0, return_inverse=True)
        for k, key in enumerate(keys):
            sel = inverse == k
            row = model.cpd_row(i, tuple(int(v) for v in key))
            draws[sel, i] = np.searchsorted(np.cumsum(row), u[sel], side="right").clip(0, size - 1)
    doms = [model.system.domain(i) for i in range(nvars)]
    return [tuple(doms[i][draws[r, i]] for i in range(nvars)) for r in range(n)]


# -- variable elimination -------------------------------------------------


def _multiply_factors(factors, all_sizes, cap):
    """Multiply factors (vars tuple, array) into one over the sorted union."""
    union = sorted(set().union(*(set(v) for v, _ in factors)))
    total = 1
    for v in union:
        total *= all_sizes[v]
    if total > cap:
        raise StateSpaceTooLarge(f"elimination intermediate has {total} states (cap {cap})")
    shape = tuple(all_sizes[v] for v in union)
    pos = {v: k for k, v in enumerate(union)}
    out = np.ones(shape)
    for vars_, arr in factors:
        order = np.argsort([pos[v] for v in vars_])
        arranged = np.transpose(arr, order)
        expand = [1] * len(union)
        for v in vars_:
            expand[pos[v]] = all_sizes[v]
        out = out * arranged.reshape(expand)
    return union, out


def marginal_of_model(
    model: FactoredModel, targets: Sequence[int], cap: int = DEFAULT_STATE_CAP
) -> Distribution:
    """Exact marginal over `targets` by variable elimination (min-weight
    order), without materializing the full joint."""
    targets = sorted(set(targets))
    if not targets:
        raise EmptySubset("marginal needs a nonempty variable subset")
    n = len(model.system)
    sizes = model.system.sizes()
    factors = []
    for i in range(n):
        vars_ = tuple(model.parents[i]) + (i,)
        factors.append((vars_, model.cpd_array(i, cap)))
    to_eliminate = set(range(n)) - set(targets)
    while to_eliminate:
        # min-weight heuristic: eliminate the variable whose combined factor
        # is smallest
        best, best_cost = None, None
        for v in sorted(to_eliminate):
            union = set()
            for vars_, _ in factors:
                if v in vars_:
                    union |= set(vars_)
            cost = 1
            for u in union:
                cost *= sizes[u]
            if best_cost is None or cost < best_cost:
                best, best_cost = v, cost
        v = best
        touching = [f for f in factors if v in f[0]]
        rest = [f for f in factors if v not in f[0]]
        union, prod = _multiply_factors(touching, sizes, cap)
        ax = union.index(v)
        summed = prod.sum(axis=ax)
        union.remove(v)
        rest.append((tuple(union), summed))
        factors = rest
        to_eliminate.discard(v)
    union, prod = _multiply_factors(factors, sizes, cap)
    # prod axes are sorted(union); union must equal targets here
    if union != targets:
        # factors may not mention isolated target variables with no cpd axes;
        # cannot happen since every variable has its own cpd factor
        raise SystemMismatch(f"elimination left {union}, wanted {targets}")
    return Distribution(model.system.subsystem(targets), prod)
