"""HUGIN architecture: clique potentials absorb messages, separators hold the last one.

Installing a policy multiplies it into the probability part of its home
clique, which cannot be undone; ``retract`` therefore raises.
"""
from limid.arch_ss import PairedPotential, ss_combine, ss_marginalize
from limid.engine import Engine, HuginCannotRetractError
from limid.tables import DivideByZeroError, t_add, t_divide, t_multiply, t_subtract, t_sum_all, t_sum_out


def hugin_divide(a, b, ctr):
    return PairedPotential(t_divide(a.p, b.p, ctr), t_subtract(a.u, b.u, ctr))


def hugin_contract(pi, ctr):
    return t_multiply(pi.p, pi.u, ctr)


def hugin_pass(engine, a, s, b, ctr):
    """Absorb ``a`` into ``b`` through separator key ``s``."""
    new = ss_marginalize(engine.potentials[a], engine.jt.separator(a, b), ctr)
    try:
        ratio = hugin_divide(new, engine.separators[s], ctr)
    except DivideByZeroError as exc:
        exc.args = (f"{exc.args[0]} at separator {a}-{b}",)
        raise
    engine.potentials[b] = ss_combine(engine.potentials[b], ratio, ctr)
    engine.separators[s] = new


def _key(a, b):
    return (a, b) if a < b else (b, a)


class Hugin(Engine):
    name = "hugin"
    can_retract = False

    def initialize(self):
        ctr = self.counters["init"]
        self.potentials = []
        for i in range(len(self.jt.cliques)):
            p = self.clique_table(i, 1.0)
            u = self.clique_table(i, 0.0)
            for r in self.jt.chance[i]:
                p = t_multiply(p, self.limid.nodes[r].cpt, ctr)
            for j in self.jt.values[i]:
                u = t_add(u, self.limid.values[j].utility, ctr)
            self.potentials.append(PairedPotential(p, u))
        self.separators = {
            _key(a, b): PairedPotential.vacuous(s, self.limid.cards(s)) for a, b, s in self.jt.edges
        }

    def send(self, a, b):
        self.mail[(a, b)] = True
        hugin_pass(self, a, _key(a, b), b, self.counters["messages"])

    def local_table(self, d):
        ctr = self.counters["optimize"]
        r = self.home(d)
        fam = self.limid.family(d)
        c = hugin_contract(self.potentials[r], ctr)
        return t_sum_out(c, [v for v in c.domain if v not in fam], ctr).reorder(fam)

    def install(self, d, policy):
        if d in self.policies:
            raise HuginCannotRetractError("hugin-cannot-retract: policy already installed")
        r = self.home(d)
        pot = self.potentials[r]
        self.potentials[r] = PairedPotential(t_multiply(pot.p, policy.table, self.counters["optimize"]), pot.u)
        self.policies[d] = policy
        self.invalidate_from(r)

    def retract(self, d):
        raise HuginCannotRetractError("hugin-cannot-retract: policies are multiplied into clique potentials")

    def expected_utility(self, root):
        ctr = self.counters["readout"]
        return t_sum_all(hugin_contract(self.potentials[root], ctr), ctr).item()
