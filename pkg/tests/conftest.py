import numpy as np
import pytest
from hypothesis import settings

from equivar.models import FactoredModel
from equivar.nir import TrainConfig, discretize, make_nir_model, train
from equivar.reparam import MixtureModel
from equivar.scenarios import builtin, make_braking_dataset, rule_cpd
from equivar.systems import Variable, VariableSystem

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")


def random_system(rng, max_vars=5, max_vals=3, prefix="V"):
    n = int(rng.integers(2, max_vars + 1))
    variables = []
    for i in range(n):
        size = int(rng.integers(2, max_vals + 1))
        variables.append(Variable(f"{prefix}{i}", tuple(f"v{j}" for j in range(size))))
    return VariableSystem(tuple(variables))


def random_model(rng, max_vars=5, max_vals=3, onehot_prob=0.15, rule_prob=0.0):
    """Random DAG over a random system; parents only among earlier variables.

    onehot_prob makes whole rows deterministic so zero-mass evidence shows up;
    rule_prob occasionally swaps a binary variable's table for a threshold rule.
    """
    system = random_system(rng, max_vars, max_vals)
    n = len(system)
    parents, cpds = [], []
    for i in range(n):
        pool = list(range(i))
        rng.shuffle(pool)
        k = int(rng.integers(0, min(len(pool), 2) + 1))
        pa = tuple(sorted(pool[:k]))
        parents.append(pa)
        size = len(system.domain(i))
        if pa and size == 2 and rng.random() < rule_prob:
            threshold = int(rng.integers(0, len(pa) + 1))
            cpds.append(rule_cpd("majority", threshold))
            continue
        shape = tuple(len(system.domain(p)) for p in pa) + (size,)
        table = rng.dirichlet(np.ones(size), size=shape[:-1]).reshape(shape)
        if rng.random() < onehot_prob:
            flat = table.reshape(-1, size)
            hot = rng.integers(0, size, size=flat.shape[0])
            flat[:] = np.eye(size)[hot]
        cpds.append(table)
    return FactoredModel(system, tuple(parents), tuple(cpds))


def random_mixture(rng, max_components=4, max_shared=3, max_vals=3):
    n_comp = int(rng.integers(2, max_components + 1))
    selector = Variable("regime", tuple(f"r{c}" for c in range(n_comp)))
    shared = random_system(rng, max_shared, max_vals, prefix="S")
    components = {}
    for label in selector.domain:
        parents, cpds = [], []
        for i in range(len(shared)):
            pool = list(range(i))
            rng.shuffle(pool)
            k = int(rng.integers(0, min(len(pool), 2) + 1))
            pa = tuple(sorted(pool[:k]))
            parents.append(pa)
            size = len(shared.domain(i))
            shape = tuple(len(shared.domain(p)) for p in pa) + (size,)
            cpds.append(rng.dirichlet(np.ones(size), size=shape[:-1]).reshape(shape))
        components[label] = FactoredModel(shared, tuple(parents), tuple(cpds))
    prior = rng.dirichlet(np.ones(n_comp))
    return MixtureModel(selector, components, prior)


def display_probe_cycle(system, n=20):
    """Forced display readings. These travel through the display-to-heat
    value map, so a scrambled reading corrupts the forecast while the
    sampled ground truth stays on the machine side."""
    from equivar.systems import do

    return [do(system, "display", ("2", "3", "4", "1")[i % 4]) for i in range(n)]


def boolean_chain(n, flip=(0.8, 0.3), head=0.6):
    """X0 -> X1 -> ... -> X{n-1}, all binary."""
    system = VariableSystem(tuple(Variable(f"X{i}", ("0", "1")) for i in range(n)))
    parents = [()]
    cpds = [np.array([head, 1.0 - head])]
    stay, move = flip
    for i in range(1, n):
        parents.append((i - 1,))
        cpds.append(np.array([[stay, 1.0 - stay], [move, 1.0 - move]]))
    return FactoredModel(system, tuple(parents), tuple(cpds))


@pytest.fixture(scope="session")
def braking():
    return builtin("braking")


@pytest.fixture(scope="session")
def braking_dataset(braking):
    d = braking.nir["dataset"]
    return make_braking_dataset(d["size"], d["seed"], braking.nir["input_dim"])


@pytest.fixture(scope="session")
def trained_braking(braking, braking_dataset):
    """The shipped braking model trained once per test run (a few seconds)."""
    cfg = braking.nir
    model = make_nir_model(cfg["input_dim"], cfg["concepts"], tuple(cfg["hidden"]),
                           seed=cfg["train"]["seed"])
    tc = TrainConfig(
        learning_rate=cfg["train"]["learning_rate"],
        epochs=cfg["train"]["epochs"],
        batch_size=cfg["train"]["batch_size"],
        concept_weight=cfg["train"]["concept_weight"],
        seed=cfg["train"]["seed"],
    )
    trainset, evalset = braking_dataset.split(cfg["dataset"]["train_fraction"])
    model, trace = train(model, trainset, tc)
    return model, trainset, evalset, trace


@pytest.fixture(scope="session")
def braking_discretized(braking, trained_braking, braking_dataset):
    model = trained_braking[0]
    return discretize(model, braking_dataset, task_name=braking.nir["task"])
