import numpy as np
import pytest
from hypothesis import given, strategies as st

from equivar.errors import (
    StateSpaceTooLarge,
    UnknownSelectorValue,
    ZeroProbabilityEvidence,
)
from equivar.models import apply_action, joint, tv
from equivar.reparam import (
    LOAD_LIMIT,
    MixtureModel,
    active_component,
    cognitive_load,
    flatten,
    mixture_apply_action,
    mixture_joint,
    semantic_reparam,
)
from equivar.scenarios import builtin, make_knob_mixture
from equivar.systems import Action, Variable, do, observe
from equivar.verify import verify_brute

from conftest import random_mixture


@pytest.fixture(scope="module")
def seasonal():
    return builtin("thermostat_mixture")


def test_flatten_preserves_the_joint(seasonal):
    mix = seasonal.mixture
    assert tv(mixture_joint(mix), joint(flatten(mix))) < 1e-12


def test_actions_agree_between_mixture_and_flat(seasonal):
    mix = seasonal.mixture
    flat = flatten(mix)
    fs = mix.flat_system
    probes = [
        observe(fs, mix.selector.name, mix.selector.domain[0]),
        do(fs, mix.selector.name, mix.selector.domain[-1]),
        observe(fs, "temperature", "hot"),
        do(fs, "k1", "off"),
    ]
    for act in probes:
        direct = mixture_apply_action(mix, act)
        via_flat = apply_action(flat, act)
        assert tv(direct, via_flat) < 1e-12, act.describe(fs)


def test_selector_observation_reweights_components(seasonal):
    mix = seasonal.mixture
    label = mix.selector.domain[2]
    dist = mixture_apply_action(mix, observe(mix.flat_system, mix.selector.name, label))
    # all mass sits in the selected slab
    assert dist.weights[2].sum() == pytest.approx(1.0, abs=1e-12)
    assert dist.weights[[s for s in range(len(mix.selector.domain)) if s != 2]].sum() == 0.0


def test_active_component_lookup(seasonal):
    mix = seasonal.mixture
    comp = active_component(mix, mix.selector.domain[0])
    assert comp is mix.components[mix.selector.domain[0]]
    with pytest.raises(UnknownSelectorValue):
        active_component(mix, "june-32nd")


def test_mixture_rejects_mismatched_components(seasonal):
    mix = seasonal.mixture
    with pytest.raises(ValueError, match="one component per selector value"):
        MixtureModel(Variable("sel", ("a", "b")),
                     {"a": mix.component_list()[0]},
                     np.array([0.5, 0.5]))


def test_zero_mass_observation_raises_across_components():
    sys_vars = (Variable("coin", ("h", "t")),)
    from equivar.systems import VariableSystem
    from equivar.models import FactoredModel

    shared = VariableSystem(sys_vars)
    heads = FactoredModel(shared, ((),), (np.array([1.0, 0.0]),))
    mix = MixtureModel(Variable("which", ("a", "b")),
                       {"a": heads, "b": heads}, np.array([0.5, 0.5]))
    with pytest.raises(ZeroProbabilityEvidence, match="under every component"):
        mixture_apply_action(mix, Action("observe", 1, "t"))


def test_knob_monolith_load_exceeds_the_limit():
    monolith = builtin("thermostat_knobs")
    profile = cognitive_load(monolith.machine)
    assert profile.max_load == 101
    assert not profile.within_limit
    assert profile.limit == LOAD_LIMIT


def test_seasonal_mixture_load_stays_small(seasonal):
    profile = cognitive_load(seasonal.mixture)
    assert profile.max_load <= 3
    assert profile.within_limit
    # the full-year version keeps the same per-action story
    year = make_knob_mixture(12)
    assert cognitive_load(year).max_load <= 3


def test_flatten_respects_cpd_cap():
    mix = make_knob_mixture(12)
    with pytest.raises(StateSpaceTooLarge):
        flatten(mix, cap=1000)


def test_semantic_reparam_produces_an_equivariant_pair():
    gaussian = builtin("gaussian_unit")
    m = gaussian.machine
    t = gaussian.translation
    human = semantic_reparam(m, t)
    assert human.system == gaussian.human.system
    assert tv(joint(human), joint(gaussian.human)) < 1e-12
    # the refit target matches on every intervention; only fine-grained
    # observations of the coarsened block can disagree
    report = verify_brute(m, human, t, action_family="do")
    assert report.passed


@given(st.integers(0, 10_000))
def test_random_mixture_routes_agree(seed):
    rng = np.random.default_rng(seed)
    mix = random_mixture(rng)
    flat = flatten(mix)
    assert tv(mixture_joint(mix), joint(flat)) < 1e-12
    fs = mix.flat_system
    i = int(rng.integers(0, len(fs)))
    kind = "do" if rng.random() < 0.5 else "observe"
    value = fs.domain(i)[int(rng.integers(0, len(fs.domain(i))))]
    act = Action(kind, i, value)
    try:
        direct = mixture_apply_action(mix, act)
    except ZeroProbabilityEvidence:
        with pytest.raises(ZeroProbabilityEvidence):
            apply_action(flat, act)
        return
    assert tv(direct, apply_action(flat, act)) < 1e-12
