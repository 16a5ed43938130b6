"""Shafer-Shenoy architecture over paired (probability, utility) potentials."""
from limid.engine import Engine
from limid.tables import (
    Table, t_add, t_divide, t_multiply, t_sum_all, t_sum_out,
)


class PairedPotential:
    """``(p, u)`` over one domain; ``u`` is stored in ``p``'s variable order."""

    __slots__ = ("p", "u")

    def __init__(self, p, u):
        if sorted(p.domain) != sorted(u.domain):
            u = u.expand(p.domain, p.cards)
        self.p = p
        self.u = u.reorder(p.domain)

    @classmethod
    def vacuous(cls, domain=(), cards=()):
        return cls(Table.filled(domain, cards, 1.0), Table.filled(domain, cards, 0.0))

    @classmethod
    def from_probability(cls, t):
        return cls(t, Table.filled(t.domain, t.cards, 0.0))

    @classmethod
    def from_utility(cls, t):
        return cls(Table.filled(t.domain, t.cards, 1.0), t)

    @property
    def domain(self):
        return self.p.domain

    def is_vacuous(self):
        return bool((self.p.values == 1.0).all() and (self.u.values == 0.0).all())

    def allclose(self, other, rtol=1e-9, atol=1e-12):
        return self.p.allclose(other.p, rtol, atol) and self.u.allclose(other.u, rtol, atol)

    def __repr__(self):
        return f"PairedPotential(p={self.p!r}, u={self.u!r})"


def ss_combine(a, b, ctr):
    return PairedPotential(t_multiply(a.p, b.p, ctr), t_add(a.u, b.u, ctr))


def ss_marginalize(pi, keep, ctr):
    """Sum the probability part; utility becomes the p-weighted average (0/0 = 0)."""
    keep = set(keep)
    drop = [v for v in pi.domain if v not in keep]
    if not drop:
        return pi
    p = t_sum_out(pi.p, drop, ctr)
    weighted = t_sum_out(t_multiply(pi.p, pi.u, ctr), drop, ctr)
    return PairedPotential(p, t_divide(weighted, p, ctr))


def ss_contract(pi, ctr):
    return t_multiply(pi.p, pi.u, ctr)


def _accumulate(engine, a, ctr, exclude=None, skip_policy=None):
    """Vacuous(A) combined with A's potential, stored policies and inbound messages."""
    c = engine.jt.cliques[a]
    acc = ss_combine(PairedPotential.vacuous(c, engine.limid.cards(c)), engine.potentials[a], ctr)
    for d in engine.jt.decisions[a]:
        if d in engine.policies and d != skip_policy:
            acc = ss_combine(acc, PairedPotential.from_probability(engine.policies[d].table), ctr)
    for msg in engine.inbound(a, exclude):
        acc = ss_combine(acc, msg, ctr)
    return acc


def ss_message(engine, a, b, ctr):
    acc = _accumulate(engine, a, ctr, exclude=b)
    msg = ss_marginalize(acc, engine.jt.separator(a, b), ctr)
    engine.mail[(a, b)] = msg
    return msg


class ShaferShenoy(Engine):
    """Clique potentials stay fixed; policies are kept as separate factors."""

    name = "ss"

    def initialize(self):
        ctr = self.counters["init"]
        self.potentials = []
        for i, c in enumerate(self.jt.cliques):
            p = self.clique_table(i, 1.0)
            u = self.clique_table(i, 0.0)
            for r in self.jt.chance[i]:
                p = t_multiply(p, self.limid.nodes[r].cpt, ctr)
            for j in self.jt.values[i]:
                u = t_add(u, self.limid.values[j].utility, ctr)
            self.potentials.append(PairedPotential(p, u))

    def send(self, a, b):
        ss_message(self, a, b, self.counters["messages"])

    def local_table(self, d):
        ctr = self.counters["optimize"]
        acc = _accumulate(self, self.home(d), ctr, skip_policy=d)
        fam = self.limid.family(d)
        c = ss_contract(ss_marginalize(acc, fam, ctr), ctr)
        return c.reorder(fam)

    def install(self, d, policy):
        self.policies[d] = policy
        self.invalidate_from(self.home(d))

    def retract(self, d):
        if self.policies.pop(d, None) is not None:
            self.invalidate_from(self.home(d))

    def expected_utility(self, root):
        ctr = self.counters["readout"]
        acc = _accumulate(self, root, ctr)
        return t_sum_all(ss_contract(ss_marginalize(acc, (), ctr), ctr), ctr).item()
