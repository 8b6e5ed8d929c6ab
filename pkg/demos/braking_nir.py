"""Train the braking network, read its reasoning, then edit it.

A small generator network looks at six sensor values and produces two
named concepts (ambulance, green_light) plus the weights of a linear rule
over them; the rule, not the network, makes the braking decision. That
split is what lets us print the decision as a sum of named terms, zero out
a weight to ask "and without the ambulance?", and distill the realized
concept cells into a discrete model we can verify against the rule a
driving instructor would state.
"""

from equivar.nir import (
    TrainConfig,
    concept_accuracy,
    contributions,
    discretize,
    functional_intervention,
    make_nir_model,
    task_accuracy,
    train,
)
from equivar.scenarios import builtin, make_braking_dataset
from equivar.translation import identity_translation
from equivar.verify import verify_region


def main():
    scenario = builtin("braking")
    cfg = scenario.nir
    dataset = make_braking_dataset(cfg["dataset"]["size"], cfg["dataset"]["seed"],
                                   cfg["input_dim"])
    trainset, evalset = dataset.split(cfg["dataset"]["train_fraction"])
    model = make_nir_model(cfg["input_dim"], cfg["concepts"],
                           tuple(cfg["hidden"]), seed=cfg["train"]["seed"])
    model, trace = train(model, trainset, TrainConfig(
        learning_rate=cfg["train"]["learning_rate"],
        epochs=cfg["train"]["epochs"],
        batch_size=cfg["train"]["batch_size"],
        concept_weight=cfg["train"]["concept_weight"],
        seed=cfg["train"]["seed"],
    ))
    print(f"trained {cfg['train']['epochs']} epochs: "
          f"task accuracy {task_accuracy(model, evalset):.3f}, "
          f"concept accuracies "
          f"{[round(float(a), 3) for a in concept_accuracy(model, evalset)]}")
    print()

    x = [1.0, 0.8, 0.9, 0.1, 0.0, 0.0]   # ambulance approaching, light green
    c = contributions(model, x)
    print(f"input {x}")
    for name in cfg["concepts"]:
        print(f"  {name}: activation {c['concepts'][name]:.3f} x "
              f"weight {c['weights'][name]:+.3f} = {c['terms'][name]:+.3f}")
    print(f"  bias {c['bias']:+.3f}")
    print(f"  -> P(brake) = {c['y_hat']:.3f}")
    muted = functional_intervention(model, (0, 0.0), x)
    print(f"  with the ambulance weight forced to zero: P(brake) = {muted:.3f}")
    print()

    disc = discretize(model, dataset, task_name=cfg["task"])
    print(f"discretized into {len(disc.cells)} realized concept cells "
          f"({len(disc.empty_cells)} never seen)")
    report = verify_region(disc.model, scenario.human,
                           identity_translation(disc.model.system),
                           disc.region_actions(),
                           tolerance=cfg["region_tolerance"])
    print(f"distilled model vs the stated rule on those cells: "
          f"max discrepancy {report.max_discrepancy:.4f} "
          f"(tolerance {cfg['region_tolerance']}) -> "
          f"{'PASS' if report.passed else 'FAIL'}")


if __name__ == "__main__":
    main()
