"""A knob panel nobody can read becomes twelve panels anyone can.

A monolithic thermostat with one knob per day couples every knob to the
temperature, so any single query drags the whole panel into view. Gating
the same joint distribution on a selector ("which day is it") leaves each
component with one relevant knob: identical semantics, bounded attention.
"""

from collections import Counter

from equivar.errors import StateSpaceTooLarge
from equivar.models import joint, sample, tv
from equivar.reparam import active_component, cognitive_load, flatten, mixture_joint
from equivar.scenarios import builtin, make_knob_mixture


def main():
    mix = make_knob_mixture(12, n_knobs=4)
    flat = flatten(mix)
    gap = tv(mixture_joint(mix), joint(flat))
    print(f"12-day mixture vs its flattened monolith: TV = {gap:g}")

    monolith = builtin("thermostat_knobs").machine
    load_mono = cognitive_load(monolith)
    load_mix = cognitive_load(mix)
    print(f"100-knob monolith: {load_mono.max_load} variables per query "
          f"(limit {load_mono.limit})")
    print(f"12-day mixture:    {load_mix.max_load} variables per query")
    print()

    big = make_knob_mixture(365)
    print(f"365-day mixture, one knob per day: "
          f"{cognitive_load(big).max_load} variables per query, still")
    try:
        flatten(big)
    except StateSpaceTooLarge as err:
        print(f"flattening it is out of the question: {err}")
    print()

    # the active day's knob drives the temperature; yesterday's knob is noise
    for day, seed in (("d17", 3), ("d200", 4)):
        comp = active_component(big, day)
        idx = comp.system.index(f"k{day[1:]}")
        temp = comp.system.index("temperature")
        other = comp.system.index("k5")
        draws = sample(comp, seed, 400)
        active = Counter(d[idx] == ("on" if d[temp] == "hot" else "off")
                         for d in draws)
        bystander = Counter(d[other] == ("on" if d[temp] == "hot" else "off")
                            for d in draws)
        print(f"{day}: active knob matches temperature in "
              f"{active[True]}/400 draws, knob k5 in {bystander[True]}/400")


if __name__ == "__main__":
    main()
