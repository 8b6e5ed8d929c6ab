"""Interpreting through a stand-in needs two checks, not one.

When a human reads a complex model through a simpler surrogate, the
surrogate must be faithful to the original AND the human reading must be
faithful to the surrogate; composing the two translations checks the end
to end story. Corrupting only the first translation shows why the links
are verified separately: the second link still passes while the
composition inherits the defect.
"""

from equivar.scenarios import corrupted_surrogate_fixture, surrogate_chain_fixture
from equivar.verify import verify_surrogate_chain


def show(label, fixture):
    report = verify_surrogate_chain(*fixture)
    print(f"{label}:")
    print(f"  original -> surrogate: "
          f"{'PASS' if report.first_link.passed else 'FAIL'} "
          f"(max {report.first_link.max_discrepancy:g})")
    print(f"  surrogate -> summary:  "
          f"{'PASS' if report.second_link.passed else 'FAIL'} "
          f"(max {report.second_link.max_discrepancy:g})")
    print(f"  composed end to end:   "
          f"{'PASS' if report.composed.passed else 'FAIL'} "
          f"(max {report.composed.max_discrepancy:g})")
    print(f"  verdict: {'PASS' if report.passed else 'FAIL'}")
    print()


def main():
    show("clean chain", surrogate_chain_fixture())
    show("corrupted first translation", corrupted_surrogate_fixture())


if __name__ == "__main__":
    main()
