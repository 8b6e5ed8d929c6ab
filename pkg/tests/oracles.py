"""Reference implementations used to cross-check the library.

Everything here works on plain dicts keyed by full assignment tuples and
multiplies Python floats one assignment at a time. Deliberately slow and
deliberately structured nothing like the package internals: the only shared
inputs are the stored CPD tables themselves.
"""

import itertools
import math


def _factor_value(model, i, assignment):
    """P(V_i = assignment[i] | parents at assignment), read off the raw table."""
    pa = tuple(assignment[p] for p in model.parents[i])
    cpd = model.cpds[i]
    if hasattr(cpd, "row"):
        row = cpd.row(pa, len(model.system.domain(i)))
        return float(row[assignment[i]])
    entry = cpd
    for v in pa:
        entry = entry[v]
    return float(entry[assignment[i]])


def dense_joint(model, do_map=None):
    """Joint as a dict, with variables in do_map forced to a point mass."""
    do_map = do_map or {}
    sizes = model.system.sizes()
    out = {}
    for a in itertools.product(*(range(s) for s in sizes)):
        p = 1.0
        for i in range(len(sizes)):
            if i in do_map:
                p *= 1.0 if a[i] == do_map[i] else 0.0
            else:
                p *= _factor_value(model, i, a)
        out[a] = p
    return out


def dense_condition(table, pins):
    """Renormalize onto the rows matching pins ({var: value_idx}); the pinned
    variables stay in the key. None when the evidence has mass zero."""
    mass = 0.0
    for a, p in table.items():
        if all(a[v] == x for v, x in pins.items()):
            mass += p
    if mass <= 0.0:
        return None
    out = {}
    for a, p in table.items():
        keep = all(a[v] == x for v, x in pins.items())
        out[a] = p / mass if keep else 0.0
    return out


def dense_apply(model, actions):
    """Interventions rewrite factors, observations condition the result.

    actions: iterable of (kind, var_index, value_index). Returns None when an
    observation lands on mass zero.
    """
    do_map = {v: x for kind, v, x in actions if kind == "do"}
    table = dense_joint(model, do_map)
    pins = {v: x for kind, v, x in actions if kind == "observe"}
    if pins:
        return dense_condition(table, pins)
    return table


def dense_marginal(table, keep):
    keep = sorted(set(keep))
    out = {}
    for a, p in table.items():
        key = tuple(a[v] for v in keep)
        out[key] = out.get(key, 0.0) + p
    return out


def dense_ci_violation(table, a, b, s):
    """max_z max_{x,y} |P(a=x, b=y | s=z) - P(a=x | s=z) P(b=y | s=z)|
    over conditioning assignments z with positive mass."""
    b = sorted(set(b))
    s = sorted(set(s))
    groups = {}
    for asg, p in table.items():
        z = tuple(asg[v] for v in s)
        groups.setdefault(z, []).append((asg, p))
    worst = 0.0
    for z, rows in groups.items():
        mass = sum(p for _, p in rows)
        if mass <= 0.0:
            continue
        pab, pa, pb = {}, {}, {}
        for asg, p in rows:
            x = asg[a]
            y = tuple(asg[v] for v in b)
            q = p / mass
            pab[(x, y)] = pab.get((x, y), 0.0) + q
            pa[x] = pa.get(x, 0.0) + q
            pb[y] = pb.get(y, 0.0) + q
        for x in pa:
            for y in pb:
                gap = abs(pab.get((x, y), 0.0) - pa[x] * pb[y])
                worst = max(worst, gap)
    return worst


def dense_tv(table_a, table_b):
    keys = set(table_a) | set(table_b)
    return 0.5 * sum(abs(table_a.get(k, 0.0) - table_b.get(k, 0.0)) for k in keys)


def max_abs_gap(table, weights):
    """Largest elementwise |dict - ndarray| over the full state space."""
    worst = 0.0
    for a, p in table.items():
        worst = max(worst, abs(p - float(weights[a])))
    return worst


def finite_difference(fn, params, step=1e-5):
    """Central finite differences of a scalar function of named tensors.

    fn() re-reads the tensors, so perturbation happens in place and is
    reverted entry by entry. Returns {name: gradient array (nested lists)}.
    """
    grads = {}
    for name, tensor in params.items():
        flat = tensor.reshape(-1)
        g = [0.0] * flat.size
        for idx in range(flat.size):
            orig = float(flat[idx])
            flat[idx] = orig + step
            hi = fn()
            flat[idx] = orig - step
            lo = fn()
            flat[idx] = orig
            g[idx] = (hi - lo) / (2.0 * step)
        grads[name] = g
    return grads


def relative_error(approx, exact):
    """||approx - exact|| / max(||exact||, tiny), both flat sequences."""
    num = math.sqrt(sum((a - e) ** 2 for a, e in zip(approx, exact)))
    den = math.sqrt(sum(e * e for e in exact))
    return num / max(den, 1e-12)
