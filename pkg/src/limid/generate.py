"""Seeded random LIMIDs for the test and acceptance suites.

Variable ids follow a topological order. With ``soluble=True`` the result
is a no-forgetting influence diagram: every decision observes all earlier
decisions and a growing set of earlier chance variables. Otherwise each
decision gets a small arbitrary set of earlier parents.
"""
import numpy as np

from limid.model import ChanceNode, DecisionNode, Limid, ValueNode, Variable
from limid.tables import Table

MAX_STRATEGY_BITS = 14


class GeneratorError(ValueError):
    kind = "infeasible-parameters"


def _cpt(rng, n_rows, card, zeros):
    vals = rng.random((n_rows, card)) + 0.05
    if zeros:
        mask = rng.random((n_rows, card)) < zeros
        mask[np.arange(n_rows), rng.integers(0, card, n_rows)] = False
        vals[mask] = 0.0
    return vals / vals.sum(axis=1, keepdims=True)


def _strategy_bits(parent_counts):
    return sum(2 ** c for c in parent_counts)


def random_limid(seed, n_vars=6, n_decisions=2, n_values=2, soluble=True,
                 max_parents=2, zeros=0.1, card=2):
    """Random LIMID with ``n_vars`` variables (decisions included) and binary-by-default states."""
    if not (1 <= n_decisions <= n_vars) or n_values < 0 or max_parents < 0 or card < 1:
        raise GeneratorError(
            f"infeasible parameters: vars={n_vars} decisions={n_decisions} values={n_values}")
    rng = np.random.default_rng(seed)
    # decisions at random topological positions; keep position 0 chance when possible
    slots = np.arange(1 if n_vars > n_decisions else 0, n_vars)
    dec_pos = sorted(int(x) for x in rng.choice(slots, size=n_decisions, replace=False))
    is_dec = [v in dec_pos for v in range(n_vars)]
    parents = [()] * n_vars
    observed = []
    bits_used = 0
    for v in range(n_vars):
        earlier = list(range(v))
        if not is_dec[v]:
            k = int(rng.integers(0, min(max_parents, v) + 1))
            parents[v] = tuple(sorted(int(x) for x in rng.choice(earlier, size=k, replace=False))) if k else ()
            continue
        prev_dec = [u for u in earlier if is_dec[u]]
        if soluble:
            fresh = [u for u in earlier if not is_dec[u] and u not in observed]
            rng.shuffle(fresh)
            remaining = dec_pos.index(v)
            for u in fresh:
                if rng.random() < 0.5:
                    trial = len(prev_dec) + len(observed) + 1
                    later = [trial + j for j in range(1, n_decisions - remaining)]
                    if bits_used + _strategy_bits([trial] + later) <= MAX_STRATEGY_BITS:
                        observed.append(u)
            pa = sorted(prev_dec + observed)
            bits_used += 2 ** len(pa)
            parents[v] = tuple(pa)
        else:
            k = int(rng.integers(0, min(max_parents, v) + 1))
            parents[v] = tuple(sorted(int(x) for x in rng.choice(earlier, size=k, replace=False))) if k else ()
    variables = tuple(
        Variable(v, f"d{dec_pos.index(v) + 1}" if is_dec[v] else f"x{v}", card) for v in range(n_vars))
    nodes = []
    for v in range(n_vars):
        if is_dec[v]:
            nodes.append(DecisionNode(v, parents[v]))
        else:
            fam = parents[v] + (v,)
            n_rows = card ** len(parents[v])
            nodes.append(ChanceNode(v, parents[v], Table(fam, [card] * len(fam), _cpt(rng, n_rows, card, zeros))))
    values = []
    for j in range(n_values):
        k = int(rng.integers(1, min(3, n_vars) + 1))
        pa = tuple(sorted(int(x) for x in rng.choice(n_vars, size=k, replace=False)))
        util = np.round(rng.uniform(-10.0, 10.0, card ** k), 4)
        values.append(ValueNode(f"u{j + 1}", pa, Table(pa, [card] * k, util)))
    return Limid(tuple(variables), tuple(nodes), tuple(values), tuple(dec_pos))
