"""Score a forecaster who trusts the reading.

Twenty rounds of "I set the display to d; how comfortable is the room?"
played by an oracle that translates each probe into the human picture and
reports that marginal. With the faithful reading the oracle never misses.
With the scrambled one it keeps predicting the wrong band, and the score
says so: the session is a measurement of the translation, not the model.
"""

from equivar.scenarios import builtin
from equivar.systems import do
from equivar.turing import make_oracle_script, run_script
from equivar.verify import describe_compound


def play(name, rounds=20, seed=11):
    scenario = builtin(name)
    system = scenario.machine.system
    probes = [do(system, "display", ("2", "3", "4", "1")[i % 4])
              for i in range(rounds)]
    script = make_oracle_script(scenario, "comfort", probes, seed=seed)
    session = run_script(scenario, script)
    print(f"--- {name} ---")
    for r in session.rounds[:6]:
        guess = max(r.forecast, key=r.forecast.get)
        print(f"round {r.index}: {describe_compound(system, r.action)} -> "
              f"forecast {guess}, truth {r.truth}, score {r.score:.1f}")
    print("    ...")
    verdict = session.verdict()
    print(f"mean score {verdict.mean_score:.4f} over {verdict.rounds} rounds "
          f"-> {'interpretable' if verdict.interpretable else 'not interpretable'}")
    print()


def main():
    play("thermostat_basic")
    play("thermostat_scrambled")


if __name__ == "__main__":
    main()
