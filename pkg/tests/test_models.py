import numpy as np
import pytest
from hypothesis import given, strategies as st

from equivar.errors import (
    StateSpaceTooLarge,
    SystemMismatch,
    ZeroProbabilityEvidence,
)
from equivar.models import (
    Distribution,
    FactoredModel,
    apply_action,
    apply_actions,
    ci_test,
    intervene,
    joint,
    marginal,
    marginal_of_model,
    sample,
    tv,
)
from equivar.scenarios import builtin, rule_cpd
from equivar.systems import Variable, VariableSystem, do, observe

from conftest import boolean_chain, random_model
from oracles import dense_joint, max_abs_gap


@pytest.fixture
def thermostat():
    return builtin("thermostat_basic")


def test_joint_sums_to_one(thermostat):
    dist = joint(thermostat.machine)
    assert abs(dist.mass - 1.0) < 1e-12


def test_thermostat_display_marginal(thermostat):
    m = thermostat.machine
    dist = marginal(joint(m), [m.system.index("display")])
    # wheel bands of size 4, 2, 2 out of 8
    expect = np.zeros(11)
    expect[1] = 0.5
    expect[2] = 0.25
    expect[3] = 0.25
    assert np.allclose(dist.weights, expect, atol=1e-15)


def test_condition_pins_variable(thermostat):
    m = thermostat.machine
    d = joint(m).condition(m.system.index("display"), 2)
    w = d.weights
    assert abs(w.sum() - 1.0) < 1e-12
    assert w[:, [0, 1] + list(range(3, 11)), :].sum() == 0.0


def test_condition_zero_mass_raises(thermostat):
    m = thermostat.machine
    with pytest.raises(ZeroProbabilityEvidence, match="display=7"):
        joint(m).condition(m.system.index("display"), 7)


def test_intervene_cuts_parents(thermostat):
    m = thermostat.machine
    disp = m.system.index("display")
    cut = intervene(m, disp, 4)
    assert cut.parents[disp] == ()
    dist = joint(cut)
    # wheel untouched, display forced, comfort follows the forced reading
    wheel = marginal(dist, [0])
    assert np.allclose(wheel.weights, np.full(8, 1 / 8))
    comfort = marginal(dist, [2])
    assert comfort.weights[0] == 1.0  # display 4 is not the comfortable reading


def test_observe_and_do_differ_downstream_vs_upstream(thermostat):
    m = thermostat.machine
    sys_ = m.system
    # acting on a child: observation changes belief about the parent,
    # intervention does not
    seen = apply_action(m, observe(sys_, "display", "3"))
    forced = apply_action(m, do(sys_, "display", "3"))
    wheel_seen = marginal(seen, [0]).weights
    wheel_forced = marginal(forced, [0]).weights
    assert wheel_seen[0] == 0.5  # only wheels 1 and 2 show a 3
    assert np.allclose(wheel_forced, np.full(8, 1 / 8))


def test_compound_actions_mix_kinds(thermostat):
    m = thermostat.machine
    sys_ = m.system
    dist = apply_actions(m, [do(sys_, "wheel", "5"), observe(sys_, "comfort", "no")])
    assert abs(dist.mass - 1.0) < 1e-12
    # wheel pinned by the do, comfort by the observation
    assert marginal(dist, [0]).weights[4] == 1.0


def test_compound_rejects_duplicate_targets(thermostat):
    m = thermostat.machine
    sys_ = m.system
    with pytest.raises(ValueError, match="pairwise distinct"):
        apply_actions(m, [observe(sys_, "wheel", "1"), do(sys_, "wheel", "2")])


def test_rule_backed_factor_matches_explicit_table():
    sys_ = VariableSystem.of(("a", ("0", "1")), ("b", ("0", "1")), ("vote", ("0", "1")))
    prior = np.array([0.5, 0.5])
    ruled = FactoredModel(sys_, ((), (), (0, 1)),
                          (prior, prior, rule_cpd("majority", 2)))
    table = np.zeros((2, 2, 2))
    for a in range(2):
        for b in range(2):
            table[a, b, 1 if a + b >= 2 else 0] = 1.0
    explicit = FactoredModel(sys_, ((), (), (0, 1)), (prior, prior, table))
    assert tv(joint(ruled), joint(explicit)) == 0.0


def test_chain_conditional_independence():
    m = boolean_chain(3)
    assert ci_test(m, 0, [2], [1])
    assert not ci_test(m, 0, [2], [])


def test_marginal_keeps_declaration_order(thermostat):
    dist = joint(thermostat.machine)
    back = marginal(dist, [2, 0])
    assert back.system.names == ("wheel", "comfort")
    again = marginal(dist, [0, 2])
    assert np.array_equal(back.weights, again.weights)


def test_variable_elimination_agrees_with_dense_marginal():
    m = boolean_chain(9)
    dist = joint(m)
    for subset in ([0], [8], [0, 8], [2, 3, 7]):
        fast = marginal_of_model(m, subset)
        slow = marginal(dist, subset)
        assert np.allclose(fast.weights, slow.weights, atol=1e-12)


def test_sampling_is_seed_deterministic(thermostat):
    m = thermostat.machine
    assert sample(m, seed=5, n=20) == sample(m, seed=5, n=20)
    draws = sample(m, seed=5, n=4000)
    freq = sum(1 for row in draws if row[1] == "1") / len(draws)
    assert abs(freq - 0.5) < 0.05  # display 1 covers half the dial


def test_distribution_validation():
    sys_ = VariableSystem.of(("x", ("0", "1")),)
    with pytest.raises(SystemMismatch):
        Distribution(sys_, np.ones((3,)) / 3)
    with pytest.raises(ValueError):
        Distribution(sys_, np.array([1.5, -0.5]))
    with pytest.raises(ValueError):
        Distribution(sys_, np.array([0.9, 0.2]))
    unnorm = Distribution(sys_, np.array([0.9, 0.2]), normalized=False)
    assert abs(unnorm.mass - 1.1) < 1e-12


def test_joint_respects_state_cap():
    m = boolean_chain(6)
    with pytest.raises(StateSpaceTooLarge):
        joint(m, cap=63)


def test_tv_bounds(thermostat):
    a = joint(thermostat.machine)
    b = apply_action(thermostat.machine, do(thermostat.machine.system, "wheel", "1"))
    assert tv(a, a) == 0.0
    assert 0.0 < tv(a, b) <= 1.0


@given(st.integers(0, 10_000))
def test_random_model_joints_normalize(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, max_vars=4, rule_prob=0.3)
    dist = joint(m)
    assert abs(dist.mass - 1.0) < 1e-9
    assert max_abs_gap(dense_joint(m), dist.weights) < 1e-12
