"""Neural generator with a transparent execution head.

The generator is a small tanh MLP with two linear heads: one emits k
concept logits (squashed to activations in (0,1)), the other emits k+1
reals — per-concept weights plus a bias. Execution is fixed and visible:
y_hat = logistic(sum_j w_j * c_j + w_0). Nothing nonlinear sits between
concepts and output, so the decision can be read off as per-concept
contributions, weights can be edited after generation, and the trained
model can be discretized into a factored model for equivariance checks.

Training is plain SGD with exact reverse-mode gradients, fully
deterministic given the config seed. Losses use the logit formulation of
binary cross-entropy for stability.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    Divergence,
    EmptyCell,
    IndexOutOfRange,
    ParseError,
)
from .models import FactoredModel
from .systems import Variable, VariableSystem

CHECKPOINT_VERSION = "nir-checkpoint/1"


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _softplus(z):
    return np.logaddexp(0.0, z)


@dataclass(eq=False)
class Mlp:
    """Dense trunk, tanh at every layer. weights[l] has shape (out, in)."""

    weights: list
    biases: list

    def __post_init__(self):
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape[0] != b.shape[0]:
                raise ValueError(f"trunk layer {l}: weight/bias shapes disagree")
            if l > 0 and w.shape[1] != self.weights[l - 1].shape[0]:
                raise ValueError(f"trunk layer {l}: input size breaks the chain")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ValueError(f"trunk layer {l}: non-finite parameters")

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    def forward(self, X: np.ndarray):
        hs = [X]
        for w, b in zip(self.weights, self.biases):
            hs.append(np.tanh(hs[-1] @ w.T + b))
        return hs


@dataclass(eq=False)
class NIRModel:
    trunk: Mlp
    concept_w: np.ndarray  # (k, h)
    concept_b: np.ndarray  # (k,)
    weight_w: np.ndarray   # (k+1, h)
    weight_b: np.ndarray   # (k+1,)
    concept_names: tuple[str, ...]
    execution: str = "linear-sigmoid"

    def __post_init__(self):
        k = len(self.concept_names)
        h = self.trunk.output_dim
        if self.concept_w.shape != (k, h) or self.concept_b.shape != (k,):
            raise ValueError("concept head shape does not match trunk/concepts")
        if self.weight_w.shape != (k + 1, h) or self.weight_b.shape != (k + 1,):
            raise ValueError("weight head must emit k+1 values (weights plus bias)")
        if self.execution != "linear-sigmoid":
            raise ValueError(f"unknown execution family {self.execution!r}")

    @property
    def n_concepts(self) -> int:
        return len(self.concept_names)

    @property
    def input_dim(self) -> int:
        return self.trunk.input_dim

    def parameters(self) -> dict[str, np.ndarray]:
        out = {}
        for l, (w, b) in enumerate(zip(self.trunk.weights, self.trunk.biases)):
            out[f"trunk.w{l}"] = w
            out[f"trunk.b{l}"] = b
        out["concept.w"] = self.concept_w
        out["concept.b"] = self.concept_b
        out["weight.w"] = self.weight_w
        out["weight.b"] = self.weight_b
        return out

    def copy(self) -> "NIRModel":
        return NIRModel(
            Mlp([w.copy() for w in self.trunk.weights],
                [b.copy() for b in self.trunk.biases]),
            self.concept_w.copy(), self.concept_b.copy(),
            self.weight_w.copy(), self.weight_b.copy(),
            self.concept_names, self.execution,
        )


def make_nir_model(
    input_dim: int,
    concept_names,
    hidden=(16, 16),
    seed: int = 0,
) -> NIRModel:
    """Random init, scaled by fan-in; fully determined by seed."""
    rng = np.random.default_rng(seed)
    k = len(concept_names)
    sizes = [input_dim] + list(hidden)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        weights.append(rng.normal(0.0, 1.0 / np.sqrt(fan_in), (fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    h = sizes[-1]
    return NIRModel(
        Mlp(weights, biases),
        rng.normal(0.0, 1.0 / np.sqrt(h), (k, h)), np.zeros(k),
        rng.normal(0.0, 1.0 / np.sqrt(h), (k + 1, h)), np.zeros(k + 1),
        tuple(concept_names),
    )


# -- forward ---------------------------------------------------------------


def _forward_batch(model: NIRModel, X: np.ndarray):
    hs = model.trunk.forward(X)
    h = hs[-1]
    zc = h @ model.concept_w.T + model.concept_b
    c = _sigmoid(zc)
    w = h @ model.weight_w.T + model.weight_b
    k = model.n_concepts
    s = (c * w[:, :k]).sum(axis=1) + w[:, k]
    return hs, zc, c, w, s, _sigmoid(s)


def forward_batch(model: NIRModel, X: np.ndarray):
    """(concepts, weights, y_hat) for an (n, d) input matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise DimensionMismatch(
            f"inputs must be (n, {model.input_dim}), got {X.shape}"
        )
    _, _, c, w, _, y = _forward_batch(model, X)
    return c, w, y


def forward(model: NIRModel, x) -> tuple[np.ndarray, np.ndarray, float]:
    """Concept activations, generated weights [w_1..w_k, w_0], and the
    executed probability for one input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.input_dim,):
        raise DimensionMismatch(
            f"input must have dimension {model.input_dim}, got shape {x.shape}"
        )
    c, w, y = forward_batch(model, x[None, :])
    return c[0], w[0], float(y[0])


def contributions(model: NIRModel, x) -> dict:
    """Per-concept additive contributions to the decision logit."""
    c, w, y = forward(model, x)
    k = model.n_concepts
    return {
        "concepts": {name: float(c[j]) for j, name in enumerate(model.concept_names)},
        "weights": {name: float(w[j]) for j, name in enumerate(model.concept_names)},
        "bias": float(w[k]),
        "terms": {name: float(w[j] * c[j]) for j, name in enumerate(model.concept_names)},
        "logit": float((w[:k] * c).sum() + w[k]),
        "y_hat": y,
    }


def execute_edited(model: NIRModel, x, edits: dict):
    """Forward pass with some concept weights overridden after generation;
    the generated concepts are untouched. Returns (c, w, y_hat)."""
    c, w, _ = forward(model, x)
    w = w.copy()
    k = model.n_concepts
    for j, v in edits.items():
        if not 0 <= j < k:
            raise IndexOutOfRange(f"concept index {j} outside 0..{k - 1}")
        w[j] = float(v)
    return c, w, float(_sigmoid((w[:k] * c).sum() + w[k]))


def functional_intervention(model: NIRModel, edit: tuple[int, float], x) -> float:
    """Execute with concept weight j overridden after generation."""
    j, v = edit
    return execute_edited(model, x, {j: v})[2]


# -- loss and gradients ------------------------------------------------------


def loss_batch(model: NIRModel, X, y, concept_labels, concept_weight: float):
    _, zc, c, w, s, _ = _forward_batch(model, X)
    task = float(np.mean(_softplus(s) - y * s))
    concept = float(np.mean((_softplus(zc) - concept_labels * zc).sum(axis=1)))
    return task + concept_weight * concept, task, concept


def backward(model: NIRModel, X, y, concept_labels, concept_weight: float):
    """Exact gradients of mean task BCE + weight * mean summed concept BCE."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n == 0:
        raise ValueError("batch must be nonempty")
    hs, zc, c, w, s, y_hat = _forward_batch(model, X)
    h = hs[-1]
    k = model.n_concepts
    grads: dict[str, np.ndarray] = {}

    ds = (y_hat - y) / n
    dw = np.empty_like(w)
    dw[:, :k] = ds[:, None] * c
    dw[:, k] = ds
    dc = ds[:, None] * w[:, :k]
    dzc = dc * c * (1.0 - c) + (concept_weight / n) * (c - concept_labels)

    grads["concept.w"] = dzc.T @ h
    grads["concept.b"] = dzc.sum(axis=0)
    grads["weight.w"] = dw.T @ h
    grads["weight.b"] = dw.sum(axis=0)

    dh = dzc @ model.concept_w + dw @ model.weight_w
    for l in range(len(model.trunk.weights) - 1, -1, -1):
        dz = dh * (1.0 - hs[l + 1] ** 2)
        grads[f"trunk.w{l}"] = dz.T @ hs[l]
        grads[f"trunk.b{l}"] = dz.sum(axis=0)
        dh = dz @ model.trunk.weights[l]
    return grads


# -- training ----------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 300
    batch_size: int = 32
    concept_weight: float = 1.0
    seed: int = 13

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("learning rate, epochs, and batch size must be positive")
        if self.concept_weight < 0:
            raise ValueError("concept loss weight must be nonnegative")


@dataclass(frozen=True)
class SyntheticDataset:
    inputs: np.ndarray          # (n, d)
    concept_labels: np.ndarray  # (n, k) in {0,1}
    task_labels: np.ndarray     # (n,) in {0,1}
    rule: str

    def __post_init__(self):
        n = self.inputs.shape[0]
        if self.concept_labels.shape[0] != n or self.task_labels.shape != (n,):
            raise ValueError("label row counts must match inputs")

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    def split(self, train_fraction: float = 0.75):
        cut = int(round(len(self) * train_fraction))
        a = SyntheticDataset(self.inputs[:cut], self.concept_labels[:cut],
                             self.task_labels[:cut], self.rule)
        b = SyntheticDataset(self.inputs[cut:], self.concept_labels[cut:],
                             self.task_labels[cut:], self.rule)
        return a, b


def train(model: NIRModel, dataset: SyntheticDataset, config: TrainConfig):
    """SGD over shuffled mini-batches. Returns (trained copy, trace) where
    trace rows are (epoch, task_loss, concept_loss), averaged per epoch.
    Raises Divergence (with the partial trace attached) on non-finite loss.
    """
    m = model.copy()
    rng = np.random.default_rng(config.seed)
    X = np.asarray(dataset.inputs, dtype=np.float64)
    y = np.asarray(dataset.task_labels, dtype=np.float64)
    t = np.asarray(dataset.concept_labels, dtype=np.float64)
    n = len(dataset)
    params = m.parameters()
    trace: list[tuple[int, float, float]] = []
    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        task_sum = concept_sum = 0.0
        steps = 0
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            grads = backward(m, X[idx], y[idx], t[idx], config.concept_weight)
            for name, g in grads.items():
                params[name] -= config.learning_rate * g
            _, task, concept = loss_batch(m, X[idx], y[idx], t[idx],
                                          config.concept_weight)
            task_sum += task
            concept_sum += concept
            steps += 1
        row = (epoch, task_sum / steps, concept_sum / steps)
        trace.append(row)
        if not (np.isfinite(row[1]) and np.isfinite(row[2])):
            raise Divergence(f"non-finite loss at epoch {epoch}", trace=trace)
    return m, trace


def loss_trace_csv(trace) -> str:
    lines = ["epoch,task_loss,concept_loss"]
    for epoch, task, concept in trace:
        lines.append(f"{epoch},{task:.10g},{concept:.10g}")
    return "\n".join(lines) + "\n"


def task_accuracy(model: NIRModel, dataset: SyntheticDataset) -> float:
    _, _, y = forward_batch(model, dataset.inputs)
    return float(np.mean((y >= 0.5) == (dataset.task_labels >= 0.5)))


def concept_accuracy(model: NIRModel, dataset: SyntheticDataset) -> np.ndarray:
    c, _, _ = forward_batch(model, dataset.inputs)
    return ((c >= 0.5) == (dataset.concept_labels >= 0.5)).mean(axis=0)


# -- discretization -----------------------------------------------------------


@dataclass(frozen=True)
class ConceptCell:
    cell: tuple[int, ...]
    count: int
    centroid_c: np.ndarray
    centroid_w: np.ndarray
    y_hat: float


@dataclass(eq=False)
class NIRDiscretization:
    """Discrete system over (C_1..C_k, Y) distilled from a trained model.

    Concept variables carry the empirical cell distribution (chain
    factorization, which is exact); Y's row at each realized cell is the
    execution head evaluated at the cell's empirical (c, w) centroid.
    Cells never realized in the dataset are listed and excluded from
    verification regions.
    """

    model: FactoredModel
    cells: dict[tuple[int, ...], ConceptCell]
    empty_cells: tuple[tuple[int, ...], ...]
    concept_names: tuple[str, ...]

    def cell_info(self, cell: tuple[int, ...]) -> ConceptCell:
        if cell not in self.cells:
            raise EmptyCell(f"concept cell {cell} never realized in the dataset")
        return self.cells[cell]

    def region_actions(self):
        """One observe-compound per realized cell, pinning every concept."""
        from .systems import Action

        out = []
        for cell in sorted(self.cells):
            out.append(tuple(
                Action("observe", j, str(bit)) for j, bit in enumerate(cell)
            ))
        return out


def discretize(model: NIRModel, dataset: SyntheticDataset,
               threshold: float = 0.5, task_name: str = "Y") -> NIRDiscretization:
    c, w, _ = forward_batch(model, dataset.inputs)
    k = model.n_concepts
    bits = (c >= threshold).astype(np.int64)
    cells: dict[tuple[int, ...], ConceptCell] = {}
    keys, inverse, counts = np.unique(bits, axis=0, return_inverse=True,
                                      return_counts=True)
    for idx, key in enumerate(keys):
        sel = inverse == idx
        cc = c[sel].mean(axis=0)
        cw = w[sel].mean(axis=0)
        y_cell = float(_sigmoid((cw[:k] * cc).sum() + cw[k]))
        cells[tuple(int(b) for b in key)] = ConceptCell(
            tuple(int(b) for b in key), int(counts[idx]), cc, cw, y_cell
        )
    total = float(len(dataset))
    variables = [Variable(name, ("0", "1")) for name in model.concept_names]
    variables.append(Variable(task_name, ("0", "1")))
    system = VariableSystem(tuple(variables))
    parents: list[tuple[int, ...]] = []
    cpds: list[np.ndarray] = []
    # chain factorization of the empirical cell distribution (exact)
    freq = np.zeros((2,) * k)
    for cell, info in cells.items():
        freq[cell] = info.count / total
    for j in range(k):
        parents.append(tuple(range(j)))
        ahead = tuple(range(j + 1, k))
        table = freq.sum(axis=ahead) if ahead else freq
        sums = table.sum(axis=-1, keepdims=True)
        cpds.append(np.where(sums > 0, table / np.where(sums > 0, sums, 1.0), 0.5))
    y_table = np.full((2,) * k + (2,), 0.5)
    empty = []
    for cell in np.ndindex(*(2,) * k):
        if cell in cells:
            y = cells[cell].y_hat
            y_table[cell] = (1.0 - y, y)
        else:
            empty.append(tuple(cell))
    parents.append(tuple(range(k)))
    cpds.append(y_table)
    discrete = FactoredModel(system, tuple(parents), tuple(cpds))
    return NIRDiscretization(discrete, cells, tuple(empty), model.concept_names)


# -- checkpoints ---------------------------------------------------------------


def save_nir(model: NIRModel, path, meta: dict | None = None) -> None:
    doc = {
        "version": CHECKPOINT_VERSION,
        "concept_names": list(model.concept_names),
        "execution": model.execution,
        "trunk": {
            "weights": [w.tolist() for w in model.trunk.weights],
            "biases": [b.tolist() for b in model.trunk.biases],
        },
        "concept_head": {"w": model.concept_w.tolist(), "b": model.concept_b.tolist()},
        "weight_head": {"w": model.weight_w.tolist(), "b": model.weight_b.tolist()},
        "meta": meta or {},
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_nir(path) -> tuple[NIRModel, dict]:
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ParseError(f"unsupported checkpoint version {doc.get('version')!r}")
    trunk = Mlp(
        [np.asarray(w, dtype=np.float64) for w in doc["trunk"]["weights"]],
        [np.asarray(b, dtype=np.float64) for b in doc["trunk"]["biases"]],
    )
    model = NIRModel(
        trunk,
        np.asarray(doc["concept_head"]["w"], dtype=np.float64),
        np.asarray(doc["concept_head"]["b"], dtype=np.float64),
        np.asarray(doc["weight_head"]["w"], dtype=np.float64),
        np.asarray(doc["weight_head"]["b"], dtype=np.float64),
        tuple(doc["concept_names"]),
        doc.get("execution", "linear-sigmoid"),
    )
    return model, doc.get("meta", {})
