"""Bundled machine/human system pairs and their on-disk JSON format.

A scenario file packages everything one comparison needs: the machine
model, the human model, the translation between them, and optionally a
mixture decomposition and a neural training block. Builders here construct
the bundled scenarios programmatically; `load`/`save` round-trip them
through JSON losslessly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError, UnknownScenario, ValidationError
from .models import FactoredModel, RuleCpd, joint, tv
from .nir import SyntheticDataset
from .reparam import MixtureModel, flatten, mixture_joint, semantic_reparam
from .serialize import compound_from_obj, dumps
from .systems import Variable, VariableSystem
from .translation import Translation, identity_translation
from .verify import verify_brute, verify_region

SCHEMA_VERSION = "scenario/1"


@dataclass
class ScenarioFile:
    """One packaged comparison: machine, human, translation, extras."""

    name: str
    machine: FactoredModel
    human: FactoredModel
    translation: Translation
    mixture: MixtureModel | None = None
    nir: dict | None = None
    metadata: dict = field(default_factory=dict)


# -- rule registry -------------------------------------------------------------
#
# Rule CPDs serialize as a name plus parameters; the registry rebuilds the
# function on load. Rules must be deterministic given the parent assignment.

def _majority_fn(params):
    threshold = int(params[0])
    return lambda pa: 1 if sum(pa) >= threshold else 0


_RULES = {"majority": _majority_fn}


def rule_cpd(name: str, *params) -> RuleCpd:
    if name not in _RULES:
        raise ParseError(f"unknown rule {name!r}")
    return RuleCpd(name, tuple(params), _RULES[name](params))


# -- builders ------------------------------------------------------------------


def _onehot_rows(indices, size):
    out = np.zeros((len(indices), size))
    out[np.arange(len(indices)), indices] = 1.0
    return out


_WHEEL = Variable("wheel", tuple(str(i) for i in range(1, 9)))
_DISPLAY = Variable("display", tuple(str(i) for i in range(11)))
_HEAT = Variable("heat", ("low", "med", "high"))
_COMFORT = Variable("comfort", ("no", "yes"))

# display code per wheel position: 1-2 -> "3", 3-4 -> "2", 5-8 -> "1"
_DISPLAY_OF_WHEEL = [3, 3, 2, 2, 1, 1, 1, 1]
# heat band per wheel position: 1-2 low, 3-4 med, 5-8 high
_HEAT_OF_WHEEL = [0, 0, 1, 1, 2, 2, 2, 2]
# heat reading per display code: <=1 high, ==2 med, >=3 low
_HEAT_OF_DISPLAY = [2, 2, 1, 0, 0, 0, 0, 0, 0, 0, 0]


def _thermostat_machine() -> FactoredModel:
    system = VariableSystem((_WHEEL, _DISPLAY, _COMFORT))
    comfort = np.tile([1.0, 0.0], (11, 1))
    comfort[2] = (0.0, 1.0)  # comfortable exactly when the display reads 2
    return FactoredModel(
        system,
        parents=((), (0,), (1,)),
        cpds=(np.full(8, 1 / 8), _onehot_rows(_DISPLAY_OF_WHEEL, 11), comfort),
    )


def _thermostat_human() -> FactoredModel:
    system = VariableSystem((_WHEEL, _HEAT, _COMFORT))
    comfort = np.tile([1.0, 0.0], (3, 1))
    comfort[1] = (0.0, 1.0)  # comfortable exactly on the medium setting
    return FactoredModel(
        system,
        parents=((), (0,), (1,)),
        cpds=(np.full(8, 1 / 8), _onehot_rows(_HEAT_OF_WHEEL, 3), comfort),
    )


def _thermostat_translation(display_to_heat) -> Translation:
    machine, human = _thermostat_machine(), _thermostat_human()
    return Translation(
        machine.system,
        human.system,
        omega=np.array([0, 1, 2]),
        value_maps={
            0: np.arange(8),
            1: np.asarray(display_to_heat),
            2: np.arange(2),
        },
    )


def thermostat_basic() -> ScenarioFile:
    return ScenarioFile(
        name="thermostat_basic",
        machine=_thermostat_machine(),
        human=_thermostat_human(),
        translation=_thermostat_translation(_HEAT_OF_DISPLAY),
        metadata={
            "description": "dial-to-display thermostat against its heat-band reading",
            "equivariance": "full",
            "extrapolated": [
                "display codes 0 and 4..10 carry no probability mass; observing"
                " them is undefined on both sides",
                "wheel positions other than 4 and 6 follow the same banded rule"
                " as the two recorded settings",
            ],
        },
    )


def thermostat_scrambled() -> ScenarioFile:
    # cyclically permuted reading: low->med, med->high, high->low
    scrambled = [0, 0, 2, 1, 1, 1, 1, 1, 1, 1, 1]
    return ScenarioFile(
        name="thermostat_scrambled",
        machine=_thermostat_machine(),
        human=_thermostat_human(),
        translation=_thermostat_translation(scrambled),
        metadata={
            "description": "same systems, deliberately wrong display reading",
            "equivariance": "none",
        },
    )


def thermostat_paired() -> ScenarioFile:
    """Wheel and display merged into one coarse setting. Pinning the wheel
    still determines the setting, but pinning the display alone does not,
    so display probes are reported as having no usable translation."""
    machine = _thermostat_machine()
    setting = Variable("setting", ("lo", "mid", "hi"))
    target = VariableSystem((setting, _COMFORT))
    comfort = np.tile([1.0, 0.0], (3, 1))
    comfort[1] = (0.0, 1.0)
    human = FactoredModel(
        target,
        parents=((), (0,)),
        cpds=(np.array([0.25, 0.25, 0.5]), comfort),
    )
    pair_map = np.repeat(
        np.array([0, 0, 1, 1, 2, 2, 2, 2])[:, None], 11, axis=1
    )
    translation = Translation(
        machine.system,
        target,
        omega=np.array([0, 0, 1]),
        value_maps={0: pair_map, 1: np.arange(2)},
    )
    return ScenarioFile(
        name="thermostat_paired",
        machine=machine,
        human=human,
        translation=translation,
        metadata={
            "description": "dial and display collapsed into one coarse"
            " setting; display-only probes cannot be carried over",
            "equivariance": "full",
        },
    )


def _knob_model(n_knobs: int, threshold: int) -> FactoredModel:
    variables = [Variable(f"k{i + 1}", ("off", "on")) for i in range(n_knobs)]
    variables.append(Variable("temperature", ("cold", "hot")))
    system = VariableSystem(tuple(variables))
    parents = tuple(() for _ in range(n_knobs)) + (tuple(range(n_knobs)),)
    cpds = tuple(np.array([0.5, 0.5]) for _ in range(n_knobs)) + (
        rule_cpd("majority", threshold),
    )
    return FactoredModel(system, parents, cpds)


def thermostat_knobs() -> ScenarioFile:
    machine = _knob_model(100, 50)
    return ScenarioFile(
        name="thermostat_knobs",
        machine=machine,
        human=_knob_model(100, 50),
        translation=identity_translation(machine.system),
        metadata={
            "description": "monolithic 100-knob panel; temperature is a majority vote",
            "equivariance": "none",
            "note": "state space is far past enumeration; use structural tools only",
        },
    )


def thermostat_knobs_small() -> ScenarioFile:
    machine = _knob_model(8, 4)
    return ScenarioFile(
        name="thermostat_knobs_small",
        machine=machine,
        human=_knob_model(8, 4),
        translation=identity_translation(machine.system),
        metadata={
            "description": "8-knob majority panel, small enough to enumerate",
            "equivariance": "full",
        },
    )


def make_knob_mixture(n_components: int, n_knobs: int | None = None) -> MixtureModel:
    """One component per selector value; component i wires the temperature
    to knob i alone. The shared state space is identical across components."""
    if n_knobs is None:
        n_knobs = n_components
    variables = [Variable(f"k{i + 1}", ("off", "on")) for i in range(n_knobs)]
    variables.append(Variable("temperature", ("cold", "hot")))
    shared = VariableSystem(tuple(variables))
    temp = n_knobs
    components = {}
    for c in range(n_components):
        active = c % n_knobs
        parents = tuple(() for _ in range(n_knobs)) + ((active,),)
        cpds = tuple(np.array([0.5, 0.5]) for _ in range(n_knobs)) + (
            np.array([[1.0, 0.0], [0.0, 1.0]]),
        )
        components[f"d{c + 1}"] = FactoredModel(shared, parents, cpds)
    selector = Variable("day", tuple(f"d{c + 1}" for c in range(n_components)))
    prior = np.full(n_components, 1.0 / n_components)
    return MixtureModel(selector, components, prior)


def thermostat_mixture() -> ScenarioFile:
    # four physical knobs; which one moves the temperature rotates with
    # the season, so the flat model stays small enough to ship as JSON
    mixture = make_knob_mixture(12, n_knobs=4)
    machine = flatten(mixture)
    return ScenarioFile(
        name="thermostat_mixture",
        machine=machine,
        human=flatten(mixture),
        translation=identity_translation(machine.system),
        mixture=mixture,
        metadata={
            "description": "12-day knob panel as a mixture over which knob"
            " matters this month",
            "equivariance": "full",
        },
    )


def braking() -> ScenarioFile:
    amb = Variable("ambulance", ("0", "1"))
    green = Variable("green_light", ("0", "1"))
    brake = Variable("brake", ("0", "1"))
    system = VariableSystem((amb, green, brake))
    # brake whenever an ambulance is present or the light is not green;
    # equivalently threshold(2*amb - green + 0.5) > 0
    brake_cpd = np.array([
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, 1.0], [0.0, 1.0]],
    ])
    machine = FactoredModel(
        system,
        parents=((), (), (0, 1)),
        cpds=(np.array([0.875, 0.125]), np.array([0.5, 0.5]), brake_cpd),
    )
    human = FactoredModel(system, machine.parents, machine.cpds)
    nir = json.loads(
        resources.files("equivar").joinpath("data/nir_braking_config.json").read_text()
    )
    return ScenarioFile(
        name="braking",
        machine=machine,
        human=human,
        translation=identity_translation(system),
        nir=nir,
        metadata={
            "description": "brake decision driven by two named concepts over a"
            " six-dimensional sensor vector",
            "equivariance": "full",
            "weights_story": {"ambulance": 2.0, "green_light": -1.0, "bias": 0.5},
        },
    )


_BIN_EDGES = (-math.inf, -1.5, -0.5, 0.5, 1.5, 2.5, 3.5, 4.5, 5.5, math.inf)
_SIGMA_VALUES = {"low": 0.5, "medium": 1.0, "high": 2.0}


def _phi(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def gaussian_unit() -> ScenarioFile:
    v1 = Variable("V1", tuple(str(i) for i in range(5)))
    sigma = Variable("sigma", ("low", "medium", "high"))
    v2 = Variable("V2", tuple(str(i) for i in range(-2, 7)))
    system = VariableSystem((v1, sigma, v2))
    rows = np.zeros((5, 3, 9))
    for m in range(5):
        for s, sv in enumerate(_SIGMA_VALUES.values()):
            cdf = [_phi((e - m) / sv) if math.isfinite(e) else (0.0 if e < 0 else 1.0)
                   for e in _BIN_EDGES]
            row = np.diff(cdf)
            rows[m, s] = row / row.sum()
    machine = FactoredModel(
        system,
        parents=((), (), (0, 1)),
        cpds=(np.full(5, 0.2), np.full(3, 1 / 3), rows),
        parameter_vars=frozenset({1}),
    )
    v2c = Variable("V2", ("low", "mid", "high"))
    target = VariableSystem((v1, sigma, v2c))
    translation = Translation(
        system,
        target,
        omega=np.array([0, 1, 2]),
        value_maps={0: np.arange(5), 1: np.arange(3), 2: np.arange(9) // 3},
    )
    human = semantic_reparam(machine, translation)
    region = (
        [{"observe": {"V1": v}} for v in v1.domain]
        + [{"do": {"V1": v}} for v in v1.domain]
        + [{"observe": {"sigma": v}} for v in sigma.domain]
        + [{"do": {"sigma": v}} for v in sigma.domain]
        + [{"do": {"V2": v}} for v in v2.domain]
    )
    return ScenarioFile(
        name="gaussian_unit",
        machine=machine,
        human=human,
        translation=translation,
        metadata={
            "description": "binned unit with a noise knob; coarse reading loses"
            " the posterior over the mean, so observation of the output is"
            " excluded from the verified region",
            "equivariance": "region",
            "region": {"actions": region, "tolerance": 1e-9},
            "sigma_values": dict(_SIGMA_VALUES),
            "bin_edges": [e for e in _BIN_EDGES if math.isfinite(e)],
        },
    )


def make_braking_dataset(n: int = 4000, seed: int = 7,
                         input_dim: int = 6) -> SyntheticDataset:
    """Sensor vectors with two labelled concepts and the brake decision.

    Coordinates beyond the first four are distractors the rule ignores.
    """
    if input_dim < 4:
        raise ValueError("the rule reads four coordinates")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, input_dim))
    ambulance = (x[:, 0] + x[:, 1] > 1.0).astype(np.float64)
    green = (x[:, 2] - x[:, 3] > 0.0).astype(np.float64)
    brake = np.maximum(ambulance, 1.0 - green)
    return SyntheticDataset(
        inputs=x,
        concept_labels=np.stack([ambulance, green], axis=1),
        task_labels=brake,
        rule="brake iff ambulance or not green_light",
    )


def surrogate_chain_fixture():
    """Three systems in a row: full dial model, heat-band surrogate, and a
    coarse summary whose dial keeps only the band. Returns
    (original, surrogate, summary, first_translation, second_translation)."""
    original = _thermostat_machine()
    surrogate = _thermostat_human()
    setting = Variable("setting", ("lo", "mid", "hi"))
    summary_sys = VariableSystem((setting, _HEAT, _COMFORT))
    heat_rows = _onehot_rows([0, 1, 2], 3)
    comfort = np.tile([1.0, 0.0], (3, 1))
    comfort[1] = (0.0, 1.0)
    summary = FactoredModel(
        summary_sys,
        parents=((), (0,), (1,)),
        cpds=(np.array([0.25, 0.25, 0.5]), heat_rows, comfort),
    )
    first = _thermostat_translation(_HEAT_OF_DISPLAY)
    second = Translation(
        surrogate.system,
        summary_sys,
        omega=np.array([0, 1, 2]),
        value_maps={
            0: np.array([0, 0, 1, 1, 2, 2, 2, 2]),
            1: np.arange(3),
            2: np.arange(2),
        },
    )
    return original, surrogate, summary, first, second


def corrupted_surrogate_fixture():
    """Same chain as surrogate_chain_fixture, but the first translation
    carries the scrambled display reading: the first link fails, the second
    still holds, and the composition inherits the first defect."""
    original, surrogate, summary, _, second = surrogate_chain_fixture()
    scrambled = [0, 0, 2, 1, 1, 1, 1, 1, 1, 1, 1]
    first = _thermostat_translation(scrambled)
    return original, surrogate, summary, first, second


_BUILTINS = {
    "thermostat_basic": thermostat_basic,
    "thermostat_scrambled": thermostat_scrambled,
    "thermostat_paired": thermostat_paired,
    "thermostat_knobs": thermostat_knobs,
    "thermostat_knobs_small": thermostat_knobs_small,
    "thermostat_mixture": thermostat_mixture,
    "braking": braking,
    "gaussian_unit": gaussian_unit,
}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin(name: str) -> ScenarioFile:
    try:
        builder = _BUILTINS[name]
    except KeyError:
        raise UnknownScenario(
            f"unknown scenario {name!r}; bundled: {', '.join(builtin_names())}"
        ) from None
    return builder()


def resolve(spec: str) -> ScenarioFile:
    """CLI-style reference: 'builtin:NAME' or a path to a scenario file."""
    if spec.startswith("builtin:"):
        return builtin(spec[len("builtin:"):])
    if spec in _BUILTINS:
        return builtin(spec)
    return load(spec)


# -- JSON codec ----------------------------------------------------------------


def _expect(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"{where}.{key}: expected {kind.__name__}")
    return value


def _system_to_list(system: VariableSystem) -> list:
    return [{"name": v.name, "domain": list(v.domain)} for v in system.variables]


def _system_from_list(items, where) -> VariableSystem:
    if not isinstance(items, list) or not items:
        raise ParseError(f"{where}: expected a non-empty list of variables")
    variables = []
    for i, item in enumerate(items):
        name = _expect(item, "name", str, f"{where}[{i}]")
        domain = _expect(item, "domain", list, f"{where}[{i}]")
        try:
            variables.append(Variable(name, tuple(str(d) for d in domain)))
        except ValueError as exc:
            raise ParseError(f"{where}[{i}]: {exc}") from None
    try:
        return VariableSystem(tuple(variables))
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None


def _cpd_to_obj(cpd):
    if isinstance(cpd, RuleCpd):
        return {"rule": {"name": cpd.name, "params": list(cpd.params)}}
    return {"table": np.asarray(cpd).tolist()}


def model_to_dict(model: FactoredModel) -> dict:
    names = model.system.names
    return {
        "variables": _system_to_list(model.system),
        "parents": {names[i]: [names[p] for p in ps]
                    for i, ps in enumerate(model.parents)},
        "cpds": {names[i]: _cpd_to_obj(model.cpds[i]) for i in range(len(names))},
        "parameter_vars": sorted(names[i] for i in model.parameter_vars),
    }


def model_from_dict(obj: dict, where: str) -> FactoredModel:
    system = _system_from_list(_expect(obj, "variables", list, where),
                               f"{where}.variables")
    names = system.names
    parents_obj = _expect(obj, "parents", dict, where)
    cpds_obj = _expect(obj, "cpds", dict, where)
    parents, cpds = [], []
    for i, name in enumerate(names):
        plist = _expect(parents_obj, name, list, f"{where}.parents")
        idx = []
        for p in plist:
            try:
                idx.append(system.index(p))
            except Exception:
                raise ParseError(
                    f"{where}.parents.{name}: unknown variable {p!r}"
                ) from None
        parents.append(tuple(idx))
        spec = _expect(cpds_obj, name, dict, f"{where}.cpds")
        if "table" in spec:
            cpds.append(np.asarray(spec["table"], dtype=np.float64))
        elif "rule" in spec:
            rname = _expect(spec["rule"], "name", str, f"{where}.cpds.{name}.rule")
            params = spec["rule"].get("params", [])
            if rname not in _RULES:
                raise ParseError(f"{where}.cpds.{name}.rule: unknown rule {rname!r}")
            cpds.append(RuleCpd(rname, tuple(params), _RULES[rname](params)))
        else:
            raise ParseError(f"{where}.cpds.{name}: need 'table' or 'rule'")
    pvars = obj.get("parameter_vars", [])
    try:
        pidx = frozenset(system.index(p) for p in pvars)
    except Exception:
        raise ParseError(f"{where}.parameter_vars: unknown variable") from None
    try:
        return FactoredModel(system, tuple(parents), tuple(cpds), pidx)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None


def translation_to_dict(t: Translation) -> dict:
    src, tgt = t.source.names, t.target.names
    maps = {}
    for j in range(len(tgt)):
        block = t.block(j)
        labels = np.array(t.target.domain(j), dtype=object)[t.value_maps[j]]
        maps[tgt[j]] = {"block": [src[i] for i in block],
                        "values": labels.tolist()}
    return {
        "omega": {src[i]: tgt[int(t.omega[i])] for i in range(len(src))},
        "value_maps": maps,
    }


def translation_from_dict(obj: dict, source: VariableSystem,
                          target: VariableSystem, where: str) -> Translation:
    omega_obj = _expect(obj, "omega", dict, where)
    omega = np.zeros(len(source), dtype=np.int64)
    for sname, tname in omega_obj.items():
        try:
            i = source.index(sname)
        except Exception:
            raise ParseError(f"{where}.omega: unknown source variable {sname!r}") from None
        try:
            omega[i] = target.index(tname)
        except Exception:
            raise ParseError(f"{where}.omega: unknown target variable {tname!r}") from None
    if set(omega_obj) != set(source.names):
        missing = sorted(set(source.names) - set(omega_obj))
        raise ParseError(f"{where}.omega: missing source variables {missing}")
    maps_obj = _expect(obj, "value_maps", dict, where)
    value_maps = {}
    for tname, spec in maps_obj.items():
        try:
            j = target.index(tname)
        except Exception:
            raise ParseError(f"{where}.value_maps: unknown target variable {tname!r}") from None
        block = tuple(i for i in range(len(source)) if omega[i] == j)
        declared = _expect(spec, "block", list, f"{where}.value_maps.{tname}")
        if [source.names[i] for i in block] != declared:
            raise ParseError(
                f"{where}.value_maps.{tname}.block: expected "
                f"{[source.names[i] for i in block]} (source order)"
            )
        values = np.array(_expect(spec, "values", list,
                                  f"{where}.value_maps.{tname}"), dtype=object)
        want = source.sizes(block)
        if values.shape != want:
            raise ParseError(
                f"{where}.value_maps.{tname}.values: shape {values.shape},"
                f" expected {want}"
            )
        lookup = {lab: k for k, lab in enumerate(target.domain(j))}
        idx = np.zeros(values.shape, dtype=np.int64)
        for pos, lab in np.ndenumerate(values):
            if lab not in lookup:
                raise ParseError(
                    f"{where}.value_maps.{tname}.values: {lab!r} not in the"
                    f" domain of {tname!r}"
                )
            idx[pos] = lookup[lab]
        value_maps[j] = idx
    missing = sorted(set(range(len(target))) - set(value_maps))
    if missing:
        names = [target.names[j] for j in missing]
        raise ParseError(f"{where}.value_maps: missing target variables {names}")
    try:
        return Translation(source, target, omega, value_maps)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None


def mixture_to_dict(mix: MixtureModel) -> dict:
    shared = mix.shared_system
    names = shared.names
    components = {}
    for label, model in mix.components.items():
        components[label] = {
            "parents": {names[i]: [names[p] for p in ps]
                        for i, ps in enumerate(model.parents)},
            "cpds": {names[i]: _cpd_to_obj(model.cpds[i])
                     for i in range(len(names))},
            "parameter_vars": sorted(names[i] for i in model.parameter_vars),
        }
    return {
        "selector": {"name": mix.selector.name, "domain": list(mix.selector.domain)},
        "prior": np.asarray(mix.selector_prior).tolist(),
        "shared_variables": _system_to_list(shared),
        "components": components,
    }


def mixture_from_dict(obj: dict, where: str) -> MixtureModel:
    sel = _expect(obj, "selector", dict, where)
    selector = Variable(_expect(sel, "name", str, f"{where}.selector"),
                        tuple(str(d) for d in _expect(sel, "domain", list,
                                                      f"{where}.selector")))
    shared = _system_from_list(_expect(obj, "shared_variables", list, where),
                               f"{where}.shared_variables")
    comp_obj = _expect(obj, "components", dict, where)
    components = {}
    for label, body in comp_obj.items():
        merged = {"variables": _system_to_list(shared), **body}
        components[label] = model_from_dict(merged, f"{where}.components.{label}")
    prior = np.asarray(_expect(obj, "prior", list, where), dtype=np.float64)
    try:
        return MixtureModel(selector, components, prior)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None


def scenario_to_dict(scenario: ScenarioFile) -> dict:
    out = {
        "version": SCHEMA_VERSION,
        "name": scenario.name,
        "metadata": scenario.metadata,
        "machine": model_to_dict(scenario.machine),
        "human": model_to_dict(scenario.human),
        "translation": translation_to_dict(scenario.translation),
    }
    if scenario.mixture is not None:
        out["mixture"] = mixture_to_dict(scenario.mixture)
    if scenario.nir is not None:
        out["nir"] = scenario.nir
    return out


def scenario_from_dict(obj: dict) -> ScenarioFile:
    if not isinstance(obj, dict):
        raise ParseError("scenario: expected a JSON object")
    version = obj.get("version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"scenario.version: expected {SCHEMA_VERSION!r}, got {version!r}")
    name = _expect(obj, "name", str, "scenario")
    machine = model_from_dict(_expect(obj, "machine", dict, "scenario"), "machine")
    human = model_from_dict(_expect(obj, "human", dict, "scenario"), "human")
    translation = translation_from_dict(
        _expect(obj, "translation", dict, "scenario"),
        machine.system, human.system, "translation",
    )
    mixture = None
    if obj.get("mixture") is not None:
        mixture = mixture_from_dict(obj["mixture"], "mixture")
    nir = obj.get("nir")
    if nir is not None and not isinstance(nir, dict):
        raise ParseError("scenario.nir: expected an object")
    metadata = obj.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ParseError("scenario.metadata: expected an object")
    return ScenarioFile(name, machine, human, translation, mixture, nir, metadata)


def load(path) -> ScenarioFile:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return scenario_from_dict(obj)


def save(scenario: ScenarioFile, path) -> None:
    Path(path).write_text(dumps(scenario_to_dict(scenario)) + "\n")


# -- validation ----------------------------------------------------------------


def validate(scenario: ScenarioFile, smoke: bool = True) -> list[str]:
    """Semantic checks beyond what parsing enforces. Returns diagnostics;
    empty means the scenario is coherent with its own metadata."""
    out = []
    t = scenario.translation
    if t.source is not scenario.machine.system:
        if (t.source.names != scenario.machine.system.names
                or any(t.source.domain(i) != scenario.machine.system.domain(i)
                       for i in range(len(t.source)))):
            out.append("translation source does not match the machine system")
    if t.target is not scenario.human.system:
        if (t.target.names != scenario.human.system.names
                or any(t.target.domain(i) != scenario.human.system.domain(i)
                       for i in range(len(t.target)))):
            out.append("translation target does not match the human system")
    if scenario.mixture is not None:
        mix = scenario.mixture
        if mix.flat_system.names != scenario.machine.system.names:
            out.append("mixture flat system does not match the machine system")
        else:
            try:
                gap = tv(mixture_joint(mix), joint(flatten(mix)))
                if gap > 1e-9:
                    out.append(f"mixture and flattened machine disagree (tv={gap:.3g})")
            except Exception as exc:
                out.append(f"mixture cannot be flattened: {exc}")
    if scenario.nir is not None:
        for key in ("concepts", "task", "input_dim", "dataset", "train"):
            if key not in scenario.nir:
                out.append(f"nir block missing {key!r}")
        names = set(scenario.machine.system.names)
        for concept in scenario.nir.get("concepts", []):
            if concept not in names:
                out.append(f"nir concept {concept!r} is not a machine variable")
        task = scenario.nir.get("task")
        if task is not None and task not in names:
            out.append(f"nir task {task!r} is not a machine variable")
    if not smoke:
        return out
    claim = scenario.metadata.get("equivariance")
    if claim == "full":
        report = verify_brute(scenario.machine, scenario.human, t,
                              action_family="both", max_compound=1)
        if not report.passed:
            out.append(
                f"claimed full equivariance but single actions reach"
                f" discrepancy {report.max_discrepancy:.3g}"
            )
    elif claim == "region":
        spec = scenario.metadata.get("region", {})
        try:
            region = [compound_from_obj(a, scenario.machine.system,
                                        f"metadata.region.actions[{i}]")
                      for i, a in enumerate(spec.get("actions", []))]
        except ParseError as exc:
            out.append(str(exc))
            return out
        if not region:
            out.append("claimed region equivariance but declared no actions")
        else:
            report = verify_region(scenario.machine, scenario.human, t, region,
                                   tolerance=spec.get("tolerance", 1e-9))
            if not report.passed:
                out.append(
                    f"declared region fails at its own tolerance"
                    f" (max {report.max_discrepancy:.3g})"
                )
    return out


def require_valid(scenario: ScenarioFile, smoke: bool = True) -> None:
    diagnostics = validate(scenario, smoke=smoke)
    if diagnostics:
        raise ValidationError(diagnostics)
