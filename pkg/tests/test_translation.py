import numpy as np
import pytest
from hypothesis import given, strategies as st

from equivar.errors import AmbiguousTranslation, SystemMismatch
from equivar.models import joint, marginal, tv
from equivar.scenarios import builtin, surrogate_chain_fixture
from equivar.systems import Variable, VariableSystem, do, observe
from equivar.translation import (
    Translation,
    compose_translations,
    identity_translation,
)

from conftest import random_model


@pytest.fixture
def thermostat():
    return builtin("thermostat_basic")


def test_identity_is_relabeling_and_preserves_joint(thermostat):
    m = thermostat.machine
    ident = identity_translation(m.system)
    assert ident.is_relabeling()
    dist = joint(m)
    assert np.array_equal(ident.pushforward(dist).weights, dist.weights)


def test_blocks_partition_the_source(thermostat):
    t = thermostat.translation
    seen = sorted(v for j in range(len(t.target)) for v in t.block(j))
    assert seen == list(range(len(t.source)))


def test_value_maps_accept_dict_keyed_by_target():
    sys_ = VariableSystem.of(("x", ("0", "1")), ("y", ("0", "1")))
    t = Translation(sys_, sys_, (0, 1), {0: [0, 1], 1: [1, 0]})
    assert isinstance(t.value_maps, tuple)
    assert np.array_equal(t.value_maps[1], [1, 0])


def test_value_map_must_cover_target_domain():
    src = VariableSystem.of(("x", ("0", "1", "2")),)
    tgt = VariableSystem.of(("band", ("lo", "hi")),)
    with pytest.raises(SystemMismatch, match="reach every target value"):
        Translation(src, tgt, (0,), ([0, 0, 0],))
    with pytest.raises(SystemMismatch, match="shape"):
        Translation(src, tgt, (0,), ([0, 1],))


def test_omega_validation():
    sys_ = VariableSystem.of(("x", ("0", "1")), ("y", ("0", "1")))
    with pytest.raises(SystemMismatch, match="cover every target"):
        Translation(sys_, sys_, (0, 0), (np.arange(2), np.arange(2)))


def test_translate_actions_on_thermostat(thermostat):
    t = thermostat.translation
    src, tgt = t.source, t.target
    dial = t.translate_action(do(src, "wheel", "6"))
    assert dial == do(tgt, "wheel", "6")
    reading = t.translate_action(observe(src, "display", "2"))
    assert reading == observe(tgt, "heat", "med")
    # output ordered by target variable, not input order
    pair = t.translate_actions([observe(src, "comfort", "yes"),
                                observe(src, "display", "1")])
    assert [a.target for a in pair] == sorted(a.target for a in pair)


def test_underdetermined_pin_is_reported():
    paired = builtin("thermostat_paired")
    t = paired.translation
    with pytest.raises(AmbiguousTranslation, match="display=2"):
        t.translate_action(observe(t.source, "display", "2"))
    # pinning the wheel determines the merged setting
    act = t.translate_action(do(t.source, "wheel", "6"))
    assert act.value == "hi"


def test_mixed_kinds_on_one_block_are_rejected():
    paired = builtin("thermostat_paired")
    t = paired.translation
    with pytest.raises(AmbiguousTranslation, match="mix observe and do"):
        t.translate_actions([observe(t.source, "wheel", "1"),
                             do(t.source, "display", "3")])


def test_pushforward_matches_assignment_map(thermostat):
    t = thermostat.translation
    dist = joint(thermostat.machine)
    pushed = t.pushforward(dist)
    assert abs(pushed.mass - 1.0) < 1e-12
    acc = np.zeros(t.target.sizes())
    for a in t.source.assignments():
        acc[t.translate_assignment(a)] += dist.weights[a]
    assert np.allclose(pushed.weights, acc, atol=1e-15)


def test_pushforward_rejects_wrong_system(thermostat):
    t = thermostat.translation
    with pytest.raises(SystemMismatch):
        t.pushforward(joint(thermostat.human))


def test_translate_labels(thermostat):
    t = thermostat.translation
    assert t.translate_labels(("6", "1", "no")) == ("6", "high", "no")


def test_compose_agrees_with_sequential_pushforward():
    original, _, summary, first, second = surrogate_chain_fixture()
    composed = compose_translations(first, second)
    dist = joint(original)
    assert tv(composed.pushforward(dist),
              second.pushforward(first.pushforward(dist))) == 0.0
    for a in original.system.assignments():
        assert composed.translate_assignment(a) == \
            second.translate_assignment(first.translate_assignment(a))
    assert composed.target == summary.system


def test_compose_requires_chained_systems(thermostat):
    t = thermostat.translation
    with pytest.raises(SystemMismatch, match="do not chain"):
        compose_translations(t, t)


def test_compose_with_identity_is_identity(thermostat):
    t = thermostat.translation
    left = compose_translations(identity_translation(t.source), t)
    right = compose_translations(t, identity_translation(t.target))
    for other in (left, right):
        assert other.omega == t.omega
        for a, b in zip(other.value_maps, t.value_maps):
            assert np.array_equal(a, b)


@given(st.integers(0, 10_000))
def test_pushforward_preserves_mass_under_coarsening(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, max_vars=4)
    n = len(m.system)
    # lump everything onto one coarse variable with a random surjective map
    states = m.system.state_count()
    size = int(rng.integers(2, min(states, 4) + 1))
    vm = np.zeros(m.system.sizes(), dtype=np.int64)
    flat = vm.reshape(-1)
    flat[:size] = np.arange(size)
    flat[size:] = rng.integers(0, size, states - size)
    flat[:] = rng.permutation(flat)
    tgt = VariableSystem.of(("lump", tuple(f"u{i}" for i in range(size))),)
    t = Translation(m.system, tgt, (0,) * n, (vm,))
    pushed = t.pushforward(joint(m))
    assert abs(pushed.mass - 1.0) < 1e-9
    assert np.all(pushed.weights >= 0)
