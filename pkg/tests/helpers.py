"""Fixture builders shared by the test modules."""
from pathlib import Path

import numpy as np

from limid.arch_lp import DecomposedPotential, Factor
from limid.arch_ss import PairedPotential
from limid.model import (
    ChanceNode, DecisionNode, Limid, Policy, ValueNode, Variable,
)
from limid.tables import Table

DATA = Path(__file__).resolve().parents[1] / "src" / "limid" / "data"
RECONSTRUCTED_L = DATA / "reconstructed_l.json"


def rand_table(rng, domain, cards=None, low=0.1, high=1.0):
    cards = cards or [2] * len(domain)
    return Table(domain, cards, rng.uniform(low, high, int(np.prod(cards, dtype=np.int64))))


def cond_table(rng, parents, child, card=2):
    """Random CPT over ``parents + (child,)``, rows normalized over the child."""
    n_rows = card ** len(parents)
    vals = rng.uniform(0.1, 1.0, (n_rows, card))
    vals /= vals.sum(axis=1, keepdims=True)
    return Table(tuple(parents) + (child,), [card] * (len(parents) + 1), vals)


def rand_pair(rng, domain, positive=True):
    low = 0.1 if positive else 0.0
    return PairedPotential(rand_table(rng, domain, low=low), rand_table(rng, domain, low=-5, high=5))


def random_stochastic_strategy(rng, limid):
    policies = {}
    for d in limid.decisions:
        fam = limid.family(d)
        card = limid.card(d)
        vals = rng.uniform(0.1, 1.0, (int(np.prod(limid.cards(fam[:-1]), dtype=np.int64)), card))
        vals /= vals.sum(axis=1, keepdims=True)
        policies[d] = Policy(d, Table(fam, limid.cards(fam), vals))
    return policies


def build_limid(names, parents, decisions, utilities, rng, card=2):
    """Binary LIMID from name-level structure; ``decisions`` gives the temporal order."""
    idx = {n: i for i, n in enumerate(names)}
    variables = tuple(Variable(i, n, card) for i, n in enumerate(names))
    nodes = []
    for n in names:
        pa = tuple(idx[p] for p in parents.get(n, ()))
        if n in decisions:
            nodes.append(DecisionNode(idx[n], pa))
        else:
            nodes.append(ChanceNode(idx[n], pa, cond_table(rng, pa, idx[n], card)))
    values = []
    for name, pa_names in utilities:
        pa = tuple(idx[p] for p in pa_names)
        values.append(ValueNode(name, pa, Table(pa, [card] * len(pa), rng.uniform(-10, 10, card ** len(pa)))))
    return Limid(variables, tuple(nodes), tuple(values), tuple(idx[d] for d in decisions))


def chain_limid(seed=0):
    """Five-clique chain a-b-c-e-f; d1 sits near the start, d2 at the far end."""
    names = ["a", "b", "d1", "c", "e", "f", "d2"]
    parents = {"b": ["a"], "d1": ["b"], "c": ["b", "d1"], "e": ["c"], "f": ["e"], "d2": ["d1", "f"]}
    return build_limid(names, parents, ["d1", "d2"], [("u1", ["b", "d1"]), ("u2", ["f", "d2"])],
                       np.random.default_rng(seed))


# --- clique-3 neighbourhood (reconstructed from the factor list of the LP message) -------------
# ids: r1=0, r2=1, d2=2, d4=3, x=4 (the extra variable of clique 2)
R1, R2, D2, D4, X = 0, 1, 2, 3, 4
CLIQUE3 = (R1, R2, D2, D4)
SEP32 = (R1, D2)


def clique3_factors(seed=0):
    rng = np.random.default_rng(seed)
    return {
        "p_r2": cond_table(rng, (R1,), R2),
        "psi_d2_r2": Table((D2, R2), [2, 2], rng.uniform(-5, 5, 4)),
        "phi_d4": Table((R2, D2, D4), [2, 2, 2], np.tile([1.0, 0.0], 4)),
        "psi_r2_d4": Table((R2, D4), [2, 2], rng.uniform(-5, 5, 4)),
        "psi_d4_r1_d2": Table((D4, R1, D2), [2, 2, 2], rng.uniform(-5, 5, 8)),
    }


def clique3_lp(seed=0):
    """Clique potential plus inbound messages 1->3, 4->3, 5->3 as decomposed potentials."""
    f = clique3_factors(seed)
    pi3 = DecomposedPotential((Factor(f["p_r2"], "probability", R2),), (Factor(f["psi_d2_r2"], "utility"),))
    pi13 = DecomposedPotential((Factor(f["phi_d4"], "policy", D4),), (Factor(f["psi_r2_d4"], "utility"),))
    pi43 = DecomposedPotential((), (Factor(f["psi_d4_r1_d2"], "utility"),))
    pi53 = DecomposedPotential()
    return pi3, pi13, pi43, pi53


def _expand(t, domain):
    return t.expand(domain, [2] * len(domain))


def clique3_ss(seed=0):
    """The same neighbourhood as paired potentials (clique potential over all of clique 3)."""
    f = clique3_factors(seed)
    pi3 = PairedPotential(_expand(f["p_r2"], CLIQUE3), _expand(f["psi_d2_r2"], CLIQUE3))
    pi13 = PairedPotential(f["phi_d4"], _expand(f["psi_r2_d4"], (R2, D2, D4)))
    pi43 = PairedPotential(Table.filled((D4, R1, D2), [2, 2, 2], 1.0), f["psi_d4_r1_d2"])
    pi53 = PairedPotential.vacuous((R1,), (2,))
    return pi3, pi13, pi43, pi53
