"""Brute-force reference computations over the full joint state space.

Deliberately naive: every quantity is computed on a dense array with one
axis per variable (axis ``v`` is variable ``v``). Nothing here uses the
table algebra or the junction tree.
"""
import numpy as np

from limid import _backend
from limid.model import LimidError, Policy, Strategy
from limid.tables import Table

DEFAULT_CELL_CAP = 1 << 20
DEFAULT_STRATEGY_CAP = 1 << 16
TIE_TOL = 1e-12
POLICY_TIE_TOL = 1e-10


class TooLargeError(LimidError):
    kind = "too-large"


def _check_cap(limid, cap):
    size = 1
    for v in range(limid.n):
        size *= limid.card(v)
    if size > cap:
        raise TooLargeError(f"too-large: joint has {size} cells (cap {cap})")
    return size


def _broadcast(limid, domain, values):
    """Lay ``values`` (shaped by ``domain``) onto the full joint axes."""
    arr = np.asarray(values, dtype=np.float64).reshape([limid.card(v) for v in domain])
    order = sorted(range(len(domain)), key=lambda i: domain[i])
    arr = np.transpose(arr, order)
    shape = [1] * limid.n
    for v in domain:
        shape[v] = limid.card(v)
    return arr.reshape(shape)


def _uniform(limid, d):
    shape = [1] * limid.n
    shape[d] = limid.card(d)
    return np.full(shape, 1.0 / limid.card(d))


def _policy_array(limid, policy):
    return _broadcast(limid, policy.table.domain, policy.table.values)


def _chance_product(limid):
    joint = np.ones([limid.card(v) for v in range(limid.n)])
    for r in limid.chance:
        cpt = limid.nodes[r].cpt
        joint = joint * _broadcast(limid, cpt.domain, cpt.values)
    return joint


def total_utility(limid):
    util = np.zeros([limid.card(v) for v in range(limid.n)])
    for vn in limid.values:
        util = util + _broadcast(limid, vn.utility.domain, vn.utility.values)
    return util


def joint_distribution(limid, strategy, cap=DEFAULT_CELL_CAP):
    """Product of all CPTs and policies; decisions missing from ``strategy`` get uniform policies."""
    _check_cap(limid, cap)
    policies = strategy.policies if isinstance(strategy, Strategy) else dict(strategy)
    joint = _chance_product(limid)
    for d in limid.decisions:
        joint = joint * (_policy_array(limid, policies[d]) if d in policies else _uniform(limid, d))
    return joint


def brute_eu(limid, strategy, cap=DEFAULT_CELL_CAP):
    return float((joint_distribution(limid, strategy, cap) * total_utility(limid)).sum())


def _degenerate(limid, d, actions):
    fam = limid.family(d)
    card = limid.card(d)
    actions = np.asarray(actions, dtype=np.int64).reshape(-1)
    vals = np.zeros((actions.size, card))
    vals[np.arange(actions.size), actions] = 1.0
    return Policy(d, Table(fam, limid.cards(fam), vals))


def _first_argmax(rows):
    """Smallest index within ``POLICY_TIE_TOL`` (relative to the largest magnitude) of each row's max."""
    scale = max(1.0, float(np.abs(rows).max(initial=0.0)))
    close = rows >= rows.max(axis=1, keepdims=True) - POLICY_TIE_TOL * scale
    return close.argmax(axis=1)


def brute_policy_update(limid, partial, d, cap=DEFAULT_CELL_CAP):
    """Optimal degenerate policy for ``d`` given the policies in ``partial``.

    Decisions absent from ``partial`` contribute no factor at all; their
    (uniform) policies only rescale the objective.
    """
    _check_cap(limid, cap)
    policies = partial.policies if isinstance(partial, Strategy) else dict(partial)
    weight = _chance_product(limid)
    for e, pol in policies.items():
        if e != d:
            weight = weight * _policy_array(limid, pol)
    obj = weight * total_utility(limid)
    fam = limid.family(d)
    drop = tuple(v for v in range(limid.n) if v not in fam)
    marg = obj.sum(axis=drop)  # remaining axes ascending by id
    kept = sorted(fam)
    marg = np.transpose(marg, [kept.index(v) for v in fam])
    rows = marg.reshape(-1, limid.card(d))
    return _degenerate(limid, d, _first_argmax(rows))


def strategy_space(limid):
    """Number of deterministic strategies."""
    total = 1
    for d in limid.decisions:
        n_cfg = 1
        for p in limid.parents(d):
            n_cfg *= limid.card(p)
        total *= limid.card(d) ** n_cfg
    return total


def brute_optimal(limid, cap=DEFAULT_CELL_CAP, strategy_cap=DEFAULT_STRATEGY_CAP):
    """Exhaustive search over deterministic strategies.

    Strategies are enumerated lexicographically over (decision in temporal
    order, parent configuration, action); the first one reaching the maximum
    (up to a relative 1e-12) is returned with its expected utility.
    """
    size = _check_cap(limid, cap)
    n_strat = strategy_space(limid)
    if n_strat > strategy_cap:
        raise TooLargeError(f"too-large: {n_strat} strategies (cap {strategy_cap})")
    weights = (_chance_product(limid) * total_utility(limid)).reshape(-1)
    grids = np.indices([limid.card(v) for v in range(limid.n)]).reshape(limid.n, size)
    slots, targets, radices = [], [], []
    offset = 0
    for d in limid.decisions:
        cfg = np.zeros(size, dtype=np.int64)
        n_cfg = 1
        for p in limid.parents(d):
            cfg = cfg * limid.card(p) + grids[p]
            n_cfg *= limid.card(p)
        slots.append(offset + cfg)
        targets.append(grids[d].astype(np.int64))
        radices.extend([limid.card(d)] * n_cfg)
        offset += n_cfg
    if not limid.decisions:
        return Strategy({}), float(weights.sum())
    digits, best, _ = _backend.kernels.strategy_search(
        np.ascontiguousarray(weights), np.array(slots), np.array(targets), np.array(radices, dtype=np.int64),
        TIE_TOL)
    policies = {}
    offset = 0
    for d in limid.decisions:
        n_cfg = 1
        for p in limid.parents(d):
            n_cfg *= limid.card(p)
        policies[d] = _degenerate(limid, d, digits[offset:offset + n_cfg])
        offset += n_cfg
    return Strategy(policies), float(best)


def single_deviations(limid, strategy, cap=DEFAULT_CELL_CAP):
    """Best EU gain from changing one policy while the others stay fixed."""
    base = brute_eu(limid, strategy, cap)
    gains = {}
    for d in limid.decisions:
        others = {e: p for e, p in strategy.policies.items() if e != d}
        best = brute_policy_update(limid, others, d, cap)
        gains[d] = brute_eu(limid, Strategy({**others, d: best}), cap) - base
    return gains
