"""Turn the wheel, read the display, ask about comfort.

The machine is a three-variable chain (wheel -> display -> comfort). The
human never sees the raw display; they read heat bands (low/med/high)
through a value map. If the reading is faithful, forecasting through the
human picture agrees with querying the machine on every action, so we can
check that exhaustively and watch it break when the reading is scrambled.
"""

from equivar.models import apply_action, marginal
from equivar.scenarios import builtin
from equivar.systems import do, observe
from equivar.translation import translate_action
from equivar.verify import verify_brute


def forced_wheel(scenario, value):
    machine = scenario.machine
    dist = apply_action(machine, do(machine.system, "wheel", value))
    comfort = machine.system.index("comfort")
    out = marginal(dist, [comfort])
    return {label: float(out.weights[i])
            for i, label in enumerate(machine.system.domain(comfort))}


def main():
    scenario = builtin("thermostat_basic")
    system = scenario.machine.system
    print("machine variables:")
    for v in system.variables:
        print(f"  {v.name}: {', '.join(v.domain)}")
    print("human variables:")
    for v in scenario.human.system.variables:
        print(f"  {v.name}: {', '.join(v.domain)}")
    print()

    for wheel, expect in (("6", "no"), ("4", "yes")):
        probs = forced_wheel(scenario, wheel)
        print(f"do(wheel={wheel}) -> P(comfort) = {probs}   (expect {expect})")
    print()

    probe = observe(system, "display", "2")
    translated = scenario.translation.translate_actions((probe,))
    shown = ", ".join(a.describe(scenario.human.system) for a in translated)
    print(f"{probe.describe(system)} translates to {shown}")
    probe = do(system, "wheel", "6")
    translated = translate_action(probe, scenario.translation)
    print(f"{probe.describe(system)} translates to "
          f"{translated.describe(scenario.human.system)}")
    print()

    report = verify_brute(scenario.machine, scenario.human, scenario.translation)
    print(f"faithful reading: checked {report.checked} actions, "
          f"{report.undefined} undefined (zero-mass displays), "
          f"max discrepancy {report.max_discrepancy:g} -> "
          f"{'PASS' if report.passed else 'FAIL'}")

    bad = builtin("thermostat_scrambled")
    report = verify_brute(bad.machine, bad.human, bad.translation)
    print(f"scrambled reading: max discrepancy {report.max_discrepancy:g} -> "
          f"{'PASS' if report.passed else 'FAIL'}")
    worst = report.counterexamples[0]
    print(f"  e.g. {worst.action}: assignment {worst.assignment} has mass "
          f"{worst.lhs:g} through the reading but {worst.rhs:g} natively")


if __name__ == "__main__":
    main()
