"""Partial transparency, stated honestly.

The gaussian_unit scenario coarsens a nine-bin output into three tails.
That reading supports every action on the mean and the noise knob, and
every intervention on the output, exactly; what it cannot support is
conditioning on the coarse output, because three tails no longer pin down
the posterior over the mean. A full brute check fails loudly. Declaring
the supported region and verifying exactly that passes at machine
precision: the claim shipped with the scenario is the claim that holds.
"""

from equivar.scenarios import builtin
from equivar.serialize import compound_from_obj
from equivar.verify import verify_brute, verify_region


def main():
    scenario = builtin("gaussian_unit")
    full = verify_brute(scenario.machine, scenario.human, scenario.translation)
    print(f"all actions: max discrepancy {full.max_discrepancy:.3f} -> "
          f"{'PASS' if full.passed else 'FAIL'}")
    failing = [a for a in full.per_action if a.verdict == "fail"]
    for entry in failing[:3]:
        print(f"  {entry.action}: discrepancy {entry.discrepancy:.3f}")
    print(f"  ({len(failing)} failing actions, all of them observations of V2)")
    print()

    declared = scenario.metadata["region"]
    region = [compound_from_obj(a, scenario.machine.system)
              for a in declared["actions"]]
    report = verify_region(scenario.machine, scenario.human,
                           scenario.translation, region,
                           tolerance=declared["tolerance"])
    print(f"declared region ({report.checked} actions, V1/sigma/do-V2): "
          f"max discrepancy {report.max_discrepancy:g} -> "
          f"{'PASS' if report.passed else 'FAIL'}")
    print()
    print("the noise knob stays editable through the coarse reading:")
    for entry in report.per_action:
        if "sigma" in entry.action and entry.action.startswith("do"):
            print(f"  {entry.action}: discrepancy {entry.discrepancy:g}")


if __name__ == "__main__":
    main()
