"""Headline acceptance checks, one test per shipped guarantee.

Each test prints a single PASS/FAIL line with the measured numbers, so
`pytest tests/test_acceptance.py -v -s` doubles as a results table. The
wall-clock budget is part of each guarantee and is folded into the verdict.
"""

import time

import numpy as np

from equivar.models import apply_action, apply_actions, ci_test, joint, marginal, tv
from equivar.nir import (
    TrainConfig,
    backward,
    concept_accuracy,
    discretize,
    loss_batch,
    make_nir_model,
    task_accuracy,
    train,
)
from equivar.reparam import cognitive_load, flatten, mixture_joint
from equivar.scenarios import (
    builtin,
    corrupted_surrogate_fixture,
    make_braking_dataset,
    make_knob_mixture,
)
from equivar.systems import do, observe
from equivar.translation import identity_translation
from equivar.turing import make_oracle_script, run_script
from equivar.verify import (
    verify_brute,
    verify_markov_local,
    verify_region,
    verify_surrogate_chain,
)
from equivar.errors import ZeroProbabilityEvidence

import oracles
from conftest import boolean_chain, display_probe_cycle, random_model, random_mixture


def _line(ok: bool, name: str, detail: str) -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


def test_thermostat_forced_wheel_and_faithful_reading():
    t0 = time.monotonic()
    scenario = builtin("thermostat_basic")
    machine = scenario.machine
    comfort = machine.system.index("comfort")
    p_no = float(marginal(
        apply_action(machine, do(machine.system, "wheel", "6")), [comfort]
    ).weights[machine.system.value_index(comfort, "no")])
    p_yes = float(marginal(
        apply_action(machine, do(machine.system, "wheel", "4")), [comfort]
    ).weights[machine.system.value_index(comfort, "yes")])
    report = verify_brute(machine, scenario.human, scenario.translation,
                          tolerance=1e-9)
    elapsed = time.monotonic() - t0
    ok = (p_no == 1.0 and p_yes == 1.0 and report.passed
          and report.max_discrepancy == 0.0 and elapsed < 1.0)
    assert _line(ok, "thermostat trace",
                 f"P(no|do wheel=6)={p_no:g}, P(yes|do wheel=4)={p_yes:g}, "
                 f"max discrepancy {report.max_discrepancy:g}, {elapsed:.2f}s")


def test_identity_translation_is_always_equivariant():
    t0 = time.monotonic()
    rng = np.random.default_rng(2024)
    worst, all_passed = 0.0, True
    for _ in range(100):
        m = random_model(rng, max_vars=6, max_vals=3, onehot_prob=0.2,
                         rule_prob=0.1)
        report = verify_brute(m, m, identity_translation(m.system))
        worst = max(worst, report.max_discrepancy)
        all_passed = all_passed and report.passed
    elapsed = time.monotonic() - t0
    ok = worst == 0.0 and all_passed and elapsed < 30.0
    assert _line(ok, "identity soundness",
                 f"100 random models, worst discrepancy {worst:g} (exact zero "
                 f"required), {elapsed:.1f}s")


def test_inference_agrees_with_the_dense_oracle():
    t0 = time.monotonic()
    rng = np.random.default_rng(77)
    worst = 0.0
    ci_disagreements = 0
    for _ in range(200):
        m = random_model(rng, max_vars=5, max_vals=3, onehot_prob=0.2)
        system = m.system
        n = len(system)
        table = oracles.dense_joint(m)
        worst = max(worst, oracles.max_abs_gap(table, joint(m).weights))

        v = int(rng.integers(0, n))
        label = system.domain(v)[int(rng.integers(0, len(system.domain(v))))]
        x = system.value_index(v, label)
        expected = oracles.dense_condition(table, {v: x})
        try:
            got = apply_actions(m, [observe(system, system.names[v], label)])
        except ZeroProbabilityEvidence:
            got = None
        if (got is None) != (expected is None):
            worst = max(worst, 1.0)
        elif got is not None:
            worst = max(worst, oracles.max_abs_gap(expected, got.weights))

        forced = oracles.dense_apply(m, [("do", v, x)])
        pushed = apply_actions(m, [do(system, system.names[v], label)])
        worst = max(worst, oracles.max_abs_gap(forced, pushed.weights))

        keep = sorted(rng.choice(n, size=int(rng.integers(1, n + 1)),
                                 replace=False).tolist())
        small = marginal(joint(m), keep)
        for key, p in oracles.dense_marginal(table, keep).items():
            worst = max(worst, abs(p - float(small.weights[key])))

        if n >= 2:
            a = int(rng.integers(0, n))
            rest = [i for i in range(n) if i != a]
            rng.shuffle(rest)
            b = [rest[0]]
            s = rest[1:1 + int(rng.integers(0, len(rest)))]
            lib = ci_test(m, a, b, s, eps=1e-9)
            ref = oracles.dense_ci_violation(table, a, b, s) <= 1e-9
            ci_disagreements += lib != ref
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-12 and ci_disagreements == 0 and elapsed < 60.0
    assert _line(ok, "oracle equivalence",
                 f"200 random models, max elementwise gap {worst:.2e}, "
                 f"{ci_disagreements} independence disagreements, {elapsed:.1f}s")


def test_local_checks_scale_linearly_while_brute_explodes():
    t0 = time.monotonic()
    ns = np.array([4, 8, 16, 32], dtype=float)
    local = np.array([
        float(verify_markov_local(c, c, identity_translation(c.system)).cost)
        for c in (boolean_chain(int(n)) for n in ns)
    ])
    coeffs = np.polyfit(ns, local, 1)
    residual = local - np.polyval(coeffs, ns)
    r2 = 1.0 - float(residual @ residual) / float(
        ((local - local.mean()) ** 2).sum())

    brute = []
    for n in range(4, 13):
        chain = boolean_chain(n)
        brute.append(verify_brute(chain, chain, identity_translation(chain.system),
                                  action_family="observe", max_compound=n).cost)
    ratios = [brute[i + 1] / brute[i] for i in range(len(brute) - 1)]
    elapsed = time.monotonic() - t0
    ok = r2 >= 0.99 and min(ratios) >= 3.0 and elapsed < 120.0
    assert _line(ok, "cost separation",
                 f"local fit R^2={r2:.4f} (slope {coeffs[0]:.1f}), brute "
                 f"growth factor per extra variable >= {min(ratios):.2f}, "
                 f"{elapsed:.1f}s")


def test_mixture_semantics_and_cognitive_load():
    t0 = time.monotonic()
    rng = np.random.default_rng(31)
    worst = max(
        tv(mixture_joint(mix), joint(flatten(mix)))
        for mix in (random_mixture(rng) for _ in range(100))
    )
    seasonal = cognitive_load(make_knob_mixture(12)).max_load
    monolith = cognitive_load(builtin("thermostat_knobs").machine).max_load
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-12 and seasonal <= 3 and monolith == 101 and elapsed < 60.0
    assert _line(ok, "mixture equivalence",
                 f"100 mixtures, worst flatten TV {worst:.2e}, load "
                 f"{seasonal} per query vs {monolith} for the monolith, "
                 f"{elapsed:.1f}s")


def test_braking_nir_trains_discretizes_and_differentiates():
    t0 = time.monotonic()
    scenario = builtin("braking")
    cfg = scenario.nir
    dataset = make_braking_dataset(cfg["dataset"]["size"], cfg["dataset"]["seed"],
                                   cfg["input_dim"])
    trainset, evalset = dataset.split(cfg["dataset"]["train_fraction"])
    model = make_nir_model(cfg["input_dim"], cfg["concepts"],
                           tuple(cfg["hidden"]), seed=cfg["train"]["seed"])
    model, _ = train(model, trainset, TrainConfig(
        learning_rate=cfg["train"]["learning_rate"],
        epochs=cfg["train"]["epochs"],
        batch_size=cfg["train"]["batch_size"],
        concept_weight=cfg["train"]["concept_weight"],
        seed=cfg["train"]["seed"],
    ))
    task = task_accuracy(model, evalset)
    concepts = concept_accuracy(model, evalset)

    disc = discretize(model, dataset, task_name=cfg["task"])
    region = verify_region(disc.model, scenario.human,
                           identity_translation(disc.model.system),
                           disc.region_actions(),
                           tolerance=cfg["region_tolerance"])

    X = trainset.inputs[:10]
    y = trainset.task_labels[:10]
    labels = trainset.concept_labels[:10]
    exact = backward(model, X, y, labels, cfg["train"]["concept_weight"])
    fd = oracles.finite_difference(
        lambda: loss_batch(model, X, y, labels, cfg["train"]["concept_weight"])[0],
        model.parameters())
    grad_err = max(
        oracles.relative_error(fd[name], exact[name].reshape(-1).tolist())
        for name in exact
    )
    elapsed = time.monotonic() - t0
    ok = (task >= 0.95 and float(concepts.min()) >= 0.90 and region.passed
          and grad_err <= 1e-4 and elapsed < 120.0)
    assert _line(ok, "braking end to end",
                 f"task acc {task:.3f}, concept acc {float(concepts.min()):.3f}, "
                 f"region {region.checked} cells "
                 f"{'pass' if region.passed else 'fail'}, gradient rel err "
                 f"{grad_err:.1e}, {elapsed:.1f}s")


def test_turing_sessions_separate_faithful_from_scrambled():
    t0 = time.monotonic()
    verdicts = {}
    for name in ("thermostat_basic", "thermostat_scrambled"):
        scenario = builtin(name)
        probes = display_probe_cycle(scenario.machine.system, n=20)
        script = make_oracle_script(scenario, "comfort", probes, seed=99)
        verdicts[name] = run_script(scenario, script).verdict()
    good = verdicts["thermostat_basic"]
    bad = verdicts["thermostat_scrambled"]
    elapsed = time.monotonic() - t0
    ok = (good.mean_score == 1.0 and good.sufficient and good.interpretable
          and bad.mean_score < 0.5 and bad.sufficient and not bad.interpretable
          and elapsed < 10.0)
    assert _line(ok, "turing discrimination",
                 f"faithful scores {good.mean_score:.4f} "
                 f"(interpretable={good.interpretable}), scrambled scores "
                 f"{bad.mean_score:.4f} (interpretable={bad.interpretable}), "
                 f"20 rounds each, {elapsed:.1f}s")


def test_corrupted_surrogate_breaks_exactly_one_link():
    t0 = time.monotonic()
    original, surrogate, summary, first, second = corrupted_surrogate_fixture()
    report = verify_surrogate_chain(original, surrogate, summary, first, second)
    elapsed = time.monotonic() - t0
    ok = (not report.first_link.passed and report.second_link.passed
          and not report.composed.passed and not report.passed
          and elapsed < 10.0)
    assert _line(ok, "surrogate chain",
                 f"first link {'pass' if report.first_link.passed else 'fail'}, "
                 f"second link {'pass' if report.second_link.passed else 'fail'}, "
                 f"composed {'pass' if report.composed.passed else 'fail'}, "
                 f"{elapsed:.1f}s")
