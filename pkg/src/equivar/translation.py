"""Translations between variable systems.

A Translation sends states of a fine-grained source system to states of a
coarser target system. It has two parts: an index map `omega` assigning every
source variable to exactly one target variable (surjective, so target
variables partition the source ones into blocks), and one value map per
target variable taking a joint assignment of its block to a target value.

Only the forward direction exists. Actions are translated per block: a
source action pins some block variables, and the target value must already
be determined by that pin regardless of how the free block members are
filled in; otherwise the translation of the action is ambiguous and we say
so instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import AmbiguousTranslation, StateSpaceTooLarge, SystemMismatch
from .models import DEFAULT_STATE_CAP, Distribution
from .systems import Action, VariableSystem


@dataclass(eq=False)
class Translation:
    source: VariableSystem
    target: VariableSystem
    omega: tuple[int, ...]
    value_maps: tuple[np.ndarray, ...]

    def __post_init__(self):
        m, h = len(self.source), len(self.target)
        self.omega = tuple(int(i) for i in self.omega)
        if len(self.omega) != m:
            raise SystemMismatch("omega must assign every source variable")
        if any(not 0 <= t < h for t in self.omega):
            raise SystemMismatch("omega target out of range")
        if set(self.omega) != set(range(h)):
            raise SystemMismatch("omega must cover every target variable")
        if len(self.value_maps) != h:
            raise SystemMismatch("need one value map per target variable")
        maps = []
        for j in range(h):
            block = self.block(j)
            want = self.source.sizes(block)
            vm = np.asarray(self.value_maps[j], dtype=np.int64)
            if vm.shape != want:
                raise SystemMismatch(
                    f"value map for {self.target.variables[j].name!r}: "
                    f"shape {vm.shape}, expected {want}"
                )
            size = len(self.target.domain(j))
            if vm.min() < 0 or vm.max() >= size:
                raise SystemMismatch(
                    f"value map for {self.target.variables[j].name!r} "
                    f"hits values outside the domain"
                )
            if len(np.unique(vm)) != size:
                raise SystemMismatch(
                    f"value map for {self.target.variables[j].name!r} "
                    f"must reach every target value"
                )
            vm = vm.copy()
            vm.setflags(write=False)
            maps.append(vm)
        self.value_maps = tuple(maps)
        self._flat_map = None

    def block(self, target_var: int) -> tuple[int, ...]:
        """Source variables mapped onto target_var, ascending."""
        return tuple(i for i, t in enumerate(self.omega) if t == target_var)

    def is_relabeling(self) -> bool:
        """True when every block is a singleton and every value map is a
        bijection, i.e. the translation only renames axes and values."""
        if len(self.source) != len(self.target):
            return False
        for j in range(len(self.target)):
            vm = self.value_maps[j]
            if vm.ndim != 1 or len(vm) != len(self.target.domain(j)):
                return False
        return True

    # -- states ----------------------------------------------------------

    def translate_assignment(self, source_idx: Sequence[int]) -> tuple[int, ...]:
        out = []
        for j in range(len(self.target)):
            key = tuple(source_idx[v] for v in self.block(j))
            out.append(int(self.value_maps[j][key]))
        return tuple(out)

    def translate_labels(self, source_labels: Sequence[str]) -> tuple[str, ...]:
        idx = tuple(
            self.source.value_index(i, lab) for i, lab in enumerate(source_labels)
        )
        hidx = self.translate_assignment(idx)
        return tuple(self.target.domain(j)[k] for j, k in enumerate(hidx))

    def _state_map(self) -> np.ndarray:
        """Flat source state index -> flat target state index, cached."""
        if self._flat_map is not None:
            return self._flat_map
        total = self.source.state_count()
        if total > DEFAULT_STATE_CAP:
            raise StateSpaceTooLarge(
                f"cannot tabulate a state map over {total} source states"
            )
        msizes = self.source.sizes()
        hsizes = self.target.sizes()
        digits = np.unravel_index(np.arange(total), msizes)
        hstrides = np.ones(len(hsizes), dtype=np.int64)
        for j in range(len(hsizes) - 2, -1, -1):
            hstrides[j] = hstrides[j + 1] * hsizes[j + 1]
        flat = np.zeros(total, dtype=np.int64)
        for j in range(len(self.target)):
            block = self.block(j)
            vm = self.value_maps[j]
            key = np.zeros(total, dtype=np.int64)
            stride = 1
            for v in reversed(block):
                key += digits[v] * stride
                stride *= msizes[v]
            flat += vm.reshape(-1)[key] * hstrides[j]
        self._flat_map = flat
        return flat

    def pushforward(self, dist: Distribution) -> Distribution:
        """Image of a source distribution under the state translation."""
        if dist.system != self.source:
            raise SystemMismatch("distribution is not over the source system")
        flat = self._state_map()
        out = np.zeros(self.target.state_count())
        np.add.at(out, flat, dist.weights.reshape(-1))
        return Distribution(
            self.target, out.reshape(self.target.sizes()), normalized=dist.normalized
        )

    # -- actions ----------------------------------------------------------

    def translate_actions(self, actions: Iterable[Action]) -> tuple[Action, ...]:
        """Target actions equivalent to the given source actions.

        Source actions on the same block must agree in kind and must pin
        the block's target value uniquely; raises AmbiguousTranslation with
        an explanation otherwise. Output is ordered by target variable.
        """
        acts = list(actions)
        targets = [a.target for a in acts]
        if len(set(targets)) != len(targets):
            raise ValueError("compound action targets must be pairwise distinct")
        for a in acts:
            a.validate(self.source)
        groups: dict[int, list[Action]] = {}
        for a in acts:
            groups.setdefault(self.omega[a.target], []).append(a)
        out = []
        for j in sorted(groups):
            group = groups[j]
            hname = self.target.variables[j].name
            kinds = {a.kind for a in group}
            if len(kinds) > 1:
                raise AmbiguousTranslation(
                    f"actions on the block of {hname!r} mix observe and do; "
                    f"no single action on {hname!r} has both readings"
                )
            block = self.block(j)
            pinned = {
                a.target: self.source.value_index(a.target, a.value) for a in group
            }
            slicer = tuple(pinned.get(v, slice(None)) for v in block)
            reachable = np.unique(np.atleast_1d(self.value_maps[j][slicer]))
            if len(reachable) != 1:
                labels = ", ".join(self.target.domain(j)[k] for k in reachable)
                pins = ", ".join(
                    f"{self.source.variables[v].name}={self.source.domain(v)[k]}"
                    for v, k in sorted(pinned.items())
                )
                raise AmbiguousTranslation(
                    f"value of {hname!r} is underdetermined: pinning {pins} "
                    f"leaves completions reaching {{{labels}}}"
                )
            value = self.target.domain(j)[int(reachable[0])]
            out.append(Action(kind=group[0].kind, target=j, value=value))
        return tuple(out)

    def translate_action(self, action: Action) -> Action:
        return self.translate_actions([action])[0]


def pushforward(dist: Distribution, t: Translation) -> Distribution:
    return t.pushforward(dist)


def translate_action(action: Action, t: Translation) -> Action:
    return t.translate_action(action)


def identity_translation(system: VariableSystem) -> Translation:
    """Each variable maps to itself, values unchanged."""
    maps = tuple(
        np.arange(len(system.domain(i)), dtype=np.int64) for i in range(len(system))
    )
    return Translation(system, system, tuple(range(len(system))), maps)


def compose_translations(first: Translation, second: Translation) -> Translation:
    """Translation equal to applying `first`, then `second`.

    Requires first's target system to be second's source system. Blocks of
    the result are unions of first-level blocks, and the composed value maps
    are tabulated by chaining the two levels.
    """
    if first.target != second.source:
        raise SystemMismatch("translations do not chain: systems differ")
    omega = tuple(second.omega[first.omega[i]] for i in range(len(first.source)))
    maps = []
    for c in range(len(second.target)):
        mid_block = second.block(c)
        low_block = tuple(i for i in range(len(first.source)) if omega[i] == c)
        sizes = first.source.sizes(low_block)
        vm = np.zeros(sizes, dtype=np.int64)
        pos = {v: k for k, v in enumerate(low_block)}
        for assign in np.ndindex(*sizes) if sizes else [()]:
            mid_vals = []
            for b in mid_block:
                key = tuple(assign[pos[v]] for v in first.block(b))
                mid_vals.append(int(first.value_maps[b][key]))
            vm[assign] = int(second.value_maps[c][tuple(mid_vals)])
        maps.append(vm)
    return Translation(first.source, second.target, omega, tuple(maps))
