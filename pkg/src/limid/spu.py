"""Single Policy Updating over a compiled junction tree.

``solve_soluble`` makes one reverse-order pass (one full collect, then a
partial collect per further decision). ``spu_general`` repeats
retract / optimize / replace cycles until no policy changes.
"""
from dataclasses import dataclass, field

import numpy as np

from limid.arch_hugin import Hugin
from limid.arch_lp import LazyPropagation
from limid.arch_ss import ShaferShenoy
from limid.compile import check_soluble, compile_limid
from limid.engine import HuginCannotRetractError, collect_schedule, edges_leaving
from limid.model import LimidError, Policy, Strategy
from limid.tables import Table

ARCHITECTURES = {"ss": ShaferShenoy, "hugin": Hugin, "lp": LazyPropagation}
ARCH_LABELS = {"ss": "S-S", "hugin": "HUGIN", "lp": "LP"}
TIE_TOL = 1e-10


class NotConvergedError(LimidError):
    kind = "not-converged"


@dataclass(frozen=True)
class SolvePlan:
    roots: tuple  # ((decision, clique), ...) in update order d_k .. d_1
    steps: tuple  # message list per root

    @property
    def message_count(self):
        return sum(len(s) for s in self.steps)


@dataclass
class SolveResult:
    strategy: Strategy
    eu: float
    arch: str
    counters: dict = field(default_factory=dict)  # phase -> OpCounter
    iterations: int = 1
    messages: int = 0
    updates: list = field(default_factory=list)  # (decision, Strategy) after each Replace

    @property
    def report_counter(self):
        """Message passing plus local optimization; initialization and readout excluded."""
        return self.counters["messages"] + self.counters["optimize"]


def _engine_class(arch):
    try:
        return ARCHITECTURES[arch]
    except KeyError:
        raise ValueError(f"unknown architecture {arch!r}; choose from {sorted(ARCHITECTURES)}") from None


def plan_roots(jt, limid, partial=True):
    """Roots for d_k .. d_1 and the messages each collect will send."""
    roots, steps = [], []
    valid = set()
    for d in reversed(limid.decisions):
        r = jt.decision_home(d)
        if not partial:
            valid = set()
        sched = collect_schedule(jt, r, valid)
        valid.update(sched)
        roots.append((d, r))
        steps.append(tuple(sched))
        for e in edges_leaving(jt, r):
            valid.discard(e)
    return SolvePlan(tuple(roots), tuple(steps))


def argmax_policy(limid, d, table, current=None):
    """Degenerate policy maximizing ``table`` (over fa(d)), smallest action on ties.

    Values within ``TIE_TOL`` (relative to the table's largest magnitude) of
    a row maximum count as ties, so rounding noise cannot make architectures
    disagree. ``current`` actions are kept wherever they still tie.
    """
    fam = limid.family(d)
    table = table.reorder(fam)
    card = limid.card(d)
    rows = table.flat.reshape(-1, card)
    scale = max(1.0, float(np.abs(rows).max(initial=0.0)))
    close = rows >= rows.max(axis=1, keepdims=True) - TIE_TOL * scale
    actions = close.argmax(axis=1)
    if current is not None:
        cur = current.table.reorder(fam).flat.reshape(-1, card).argmax(axis=1)
        actions = np.where(close[np.arange(len(rows)), cur], cur, actions)
    vals = np.zeros_like(rows)
    vals[np.arange(len(rows)), actions] = 1.0
    return Policy(d, Table(fam, limid.cards(fam), vals))


def optimize_policy(engine, d, current=None):
    """Local optimization at d's home clique; the tree must already be collected there."""
    return argmax_policy(engine.limid, d, engine.local_table(d), current)


def lift_policy(original, policy):
    """Broadcast a policy over reduced parents to the decision's original parent set."""
    d = policy.decision
    fam = original.family(d)
    return Policy(d, policy.table.expand(fam, original.cards(fam)))


def _lift(original, policies):
    return Strategy({d: lift_policy(original, policies[d]) for d in original.decisions})


def _result(original, engine, arch, iterations, updates):
    r1 = engine.home(original.decisions[0]) if original.decisions else 0
    engine.collect(r1)
    eu = engine.expected_utility(r1)
    return SolveResult(
        strategy=_lift(original, engine.policies), eu=eu, arch=arch,
        counters={k: v.copy() for k, v in engine.counters.items()},
        iterations=iterations, messages=engine.messages_sent, updates=updates,
    )


def prepare(limid, arch, reduced=True):
    work, jt = compile_limid(limid, reduced=reduced)
    engine = _engine_class(arch)(work, jt)
    engine.initialize()
    return engine


def solve_soluble(limid, arch="lp", partial=True, check=True, track=False):
    """One reverse-order SPU pass; globally optimal on soluble diagrams."""
    if check:
        check_soluble(limid)
    engine = prepare(limid, arch)
    updates = []
    for d in reversed(limid.decisions):
        if not partial:
            engine.invalidate_all()
        engine.collect(engine.home(d))
        engine.install(d, optimize_policy(engine, d))
        if track:
            updates.append((d, dict(engine.policies)))
    return _result(limid, engine, arch, 1, updates)


def spu_general(limid, arch="lp", max_cycles=100, track=False):
    """Iterate SPU from uniform policies until a full cycle changes nothing.

    A policy is only replaced when the new one is strictly better somewhere,
    which rules out cycling between tied optima.
    """
    engine_cls = _engine_class(arch)
    if not engine_cls.can_retract:
        raise HuginCannotRetractError("hugin-cannot-retract: general LIMIDs need policy retraction")
    engine = prepare(limid, arch)
    updates = []
    for cycle in range(1, max_cycles + 1):
        changed = False
        for d in reversed(limid.decisions):
            current = engine.policies.get(d)
            engine.retract(d)
            engine.collect(engine.home(d))
            new = optimize_policy(engine, d, current)
            if current is None or not np.array_equal(new.table.values, current.table.values):
                changed = True
            engine.install(d, new)
            if track:
                updates.append((d, dict(engine.policies)))
        if not changed:
            # the final, unchanged cycle only confirms convergence
            return _result(limid, engine, arch, cycle - 1, updates)
    raise NotConvergedError(f"not-converged after {max_cycles} cycles")


def solve(limid, arch="lp", general=False, **kw):
    return spu_general(limid, arch, **kw) if general else solve_soluble(limid, arch, **kw)
