"""Lazy Propagation: potentials are sets of factors, marginalized one variable at a time.

Probability and policy factors remember their head (the child of a CPT or
the decision of a policy). Derived factors are headless; a headless factor
ties its whole domain together, so none of its variables can be barren.
"""
import itertools
from dataclasses import dataclass

from limid.engine import Engine
from limid.tables import Table, t_add, t_divide, t_multiply, t_sum_out

VACUOUS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Factor:
    table: Table
    kind: str  # "probability" | "policy" | "utility"
    head: int = None

    @property
    def domain(self):
        return self.table.domain

    def __repr__(self):
        h = "" if self.head is None else f"|{self.head}"
        return f"{self.kind[0]}{self.domain}{h}"


@dataclass(frozen=True)
class DecomposedPotential:
    phi: tuple = ()
    psi: tuple = ()

    @property
    def domain(self):
        seen = []
        for f in self.phi + self.psi:
            seen.extend(v for v in f.domain if v not in seen)
        return tuple(seen)

    def is_vacuous(self):
        return not self.phi and not self.psi

    def card_map(self):
        out = {}
        for f in self.phi + self.psi:
            out.update(f.table.card_map())
        return out


def lp_combine(a, b):
    return DecomposedPotential(a.phi + b.phi, a.psi + b.psi)


def _graph(pi):
    """Children (via headed factors) and variables touched by headless probability factors."""
    children = {v: set() for v in pi.domain}
    tied = set()
    for f in pi.phi:
        if f.head is None:
            tied.update(f.domain)
        else:
            for v in f.domain:
                if v != f.head:
                    children[v].add(f.head)
    return children, tied


def _closed_subset(candidates, children):
    """Largest subset S of ``candidates`` with children(v) ⊆ S for every v in S."""
    s = set(candidates)
    changed = True
    while changed:
        changed = False
        for v in sorted(s):
            if not children[v] <= s:
                s.discard(v)
                changed = True
    return s


def find_barren(pi, keep):
    """``(barren, probabilistic_barren)`` variables of ``pi`` relative to target set ``keep``."""
    keep = set(keep)
    children, tied = _graph(pi)
    in_psi = {v for f in pi.psi for v in f.domain}
    base = [v for v in pi.domain if v not in keep and v not in tied]
    prob = _closed_subset(base, children)
    barren = _closed_subset([v for v in prob if v not in in_psi], children)
    return barren, prob


def _product(tables, ctr, combine):
    out = None
    for t in tables:
        out = t if out is None else combine(out, t, ctr)
    return out


def _is_unit(t):
    return bool(abs(t.values - 1.0).max(initial=0.0) <= VACUOUS_TOL)


def _classify(pi, n, keep):
    """Barren shortcuts apply only to childless variables; otherwise eliminate normally."""
    children, _ = _graph(pi)
    if children[n]:
        return "normal"
    barren, prob = find_barren(pi, keep)
    if n in barren:
        return "barren"
    if n in prob and sum(1 for f in pi.phi if n in f.domain) <= 1:
        return "probabilistic-barren"
    return "normal"


def lp_eliminate_var(pi, n, ctr, keep=None, kind=None):
    """Sum ``n`` out of the factors that mention it.

    ``kind`` (barren / probabilistic-barren / normal) is derived from
    ``keep`` (default: every other variable of ``pi``) when not given.
    """
    if n not in pi.domain:
        raise ValueError(f"variable {n} not in potential domain {pi.domain}")
    if kind is None:
        keep = [v for v in pi.domain if v != n] if keep is None else keep
        kind = _classify(pi, n, keep)
    phi_n = [f for f in pi.phi if n in f.domain]
    psi_n = [f for f in pi.psi if n in f.domain]
    phi = tuple(f for f in pi.phi if n not in f.domain)
    psi = tuple(f for f in pi.psi if n not in f.domain)
    if kind == "barren":
        return DecomposedPotential(phi, psi)
    prod = _product([f.table for f in phi_n], ctr, t_multiply)
    phi_star = None
    if kind == "normal":
        phi_star = t_sum_out(prod, [n], ctr)
        if not _is_unit(phi_star):
            phi = phi + (Factor(phi_star, "probability"),)
    if psi_n:
        total = _product([f.table for f in psi_n], ctr, t_add)
        weighted = total if prod is None else t_multiply(prod, total, ctr)
        psi_star = t_sum_out(weighted, [n], ctr)
        if phi_star is not None:
            psi_star = t_divide(psi_star, phi_star, ctr)
        elif not phi_n:
            # no factor on n left: average under an implicit uniform weight
            card = dict(zip(weighted.domain, weighted.cards))[n]
            psi_star = t_divide(psi_star, Table.scalar(card), ctr)
        psi = psi + (Factor(psi_star, "utility"),)
    return DecomposedPotential(phi, psi)


def _fill(adj, v, alive):
    nb = sorted(w for w in adj[v] if w in alive)
    return sum(1 for a, b in itertools.combinations(nb, 2) if b not in adj[a])


def next_variable(pi, keep):
    """On-line choice: barren, then probabilistic-barren (childless first), then min-fill; ties by id."""
    keep = set(keep)
    todo = [v for v in pi.domain if v not in keep]
    if not todo:
        return None
    children, _ = _graph(pi)
    barren, prob = find_barren(pi, keep)
    for group in (barren, prob):
        leaves = [v for v in group if not children[v]]
        if leaves:
            return min(leaves)
    adj = {v: set() for v in pi.domain}
    for f in pi.phi + pi.psi:
        for a, b in itertools.combinations(f.domain, 2):
            adj[a].add(b)
            adj[b].add(a)
    alive = set(pi.domain)
    return min(todo, key=lambda v: (_fill(adj, v, alive), v))


def lp_marginalize(pi, keep, ctr, trace=None):
    """Eliminate every variable outside ``keep``; appends the order to ``trace`` if given."""
    keep = set(keep)
    while True:
        n = next_variable(pi, keep)
        if n is None:
            return pi
        if trace is not None:
            trace.append(n)
        pi = lp_eliminate_var(pi, n, ctr, kind=_classify(pi, n, keep))


def lp_contract(pi, ctr):
    prod = _product([f.table for f in pi.phi], ctr, t_multiply)
    total = _product([f.table for f in pi.psi], ctr, t_add)
    if total is None:
        dom = prod.domain if prod is not None else ()
        cards = prod.cards if prod is not None else ()
        return Table.filled(dom, cards, 0.0)
    if prod is None:
        return total
    return t_multiply(prod, total, ctr)


def _combined(engine, a, exclude=None, skip_policy=None):
    pi = engine.potentials[a]
    for d in engine.jt.decisions[a]:
        if d in engine.policies and d != skip_policy:
            pi = lp_combine(pi, DecomposedPotential((Factor(engine.policies[d].table, "policy", d),)))
    for msg in engine.inbound(a, exclude):
        pi = lp_combine(pi, msg)
    return pi


def lp_message(engine, a, b, ctr):
    msg = lp_marginalize(_combined(engine, a, exclude=b), engine.jt.separator(a, b), ctr)
    engine.mail[(a, b)] = msg
    return msg


class LazyPropagation(Engine):
    name = "lp"

    def initialize(self):
        self.potentials = []
        for i in range(len(self.jt.cliques)):
            phi = tuple(Factor(self.limid.nodes[r].cpt, "probability", r) for r in self.jt.chance[i])
            psi = tuple(Factor(self.limid.values[j].utility, "utility") for j in self.jt.values[i])
            self.potentials.append(DecomposedPotential(phi, psi))

    def send(self, a, b):
        lp_message(self, a, b, self.counters["messages"])

    def local_table(self, d):
        ctr = self.counters["optimize"]
        fam = self.limid.family(d)
        m = lp_marginalize(_combined(self, self.home(d), skip_policy=d), fam, ctr)
        return lp_contract(m, ctr).expand(fam, self.limid.cards(fam))

    def install(self, d, policy):
        self.policies[d] = policy
        self.invalidate_from(self.home(d))

    def retract(self, d):
        if self.policies.pop(d, None) is not None:
            self.invalidate_from(self.home(d))

    def expected_utility(self, root):
        ctr = self.counters["readout"]
        m = lp_marginalize(_combined(self, root), (), ctr)
        return lp_contract(m, ctr).item()
