"""Dense tables over discrete variables, with operation counting.

A :class:`Table` is a real function over an ordered tuple of variable ids.
Values are stored row-major with the last variable varying fastest. Every
arithmetic helper takes an :class:`OpCounter` and ticks it once per scalar
operation executed:

* ``t_multiply`` / ``t_add`` / ``t_subtract`` / ``t_divide`` cost one op per
  cell of the result;
* ``t_sum_out`` costs ``(k - 1)`` additions per result cell when ``k``
  configurations are summed together;
* reordering and broadcasting are free.
"""
from dataclasses import dataclass, fields

import numpy as np

from limid import _backend

MUL, ADD, SUB, DIV = 0, 1, 2, 3


class TableError(Exception):
    """Base class for table algebra failures."""

    kind = "table-error"


class DivideByZeroError(TableError):
    """A nonzero cell was divided by a zero cell."""

    kind = "divide-nonzero-by-zero"

    def __init__(self, cell, domain=()):
        self.cell = cell
        self.domain = tuple(domain)
        super().__init__(f"divide-nonzero-by-zero at cell {cell} (domain {self.domain})")


class UnknownVariableError(TableError):
    kind = "unknown-variable"

    def __init__(self, variables, domain):
        self.variables = tuple(variables)
        super().__init__(f"unknown-variable {self.variables} not in domain {tuple(domain)}")


@dataclass
class OpCounter:
    """Scalar operation tallies, in the column order of the comparison reports."""

    sums: int = 0
    mults: int = 0
    divs: int = 0
    subs: int = 0

    @property
    def total(self):
        return self.sums + self.mults + self.divs + self.subs

    def as_tuple(self):
        return (self.sums, self.mults, self.divs, self.subs)

    def copy(self):
        return OpCounter(*self.as_tuple())

    def __add__(self, other):
        return OpCounter(*(a + b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def __sub__(self, other):
        return OpCounter(*(a - b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def __iadd__(self, other):
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self


def _null_counter():
    return OpCounter()


class Table:
    """Real-valued function on the joint states of ``domain``.

    ``values`` has shape ``cards`` (one axis per variable, in domain order).
    Tables are treated as immutable; the value array is marked read-only.
    """

    __slots__ = ("domain", "cards", "values")

    def __init__(self, domain, cards, values):
        domain = tuple(int(v) for v in domain)
        cards = tuple(int(c) for c in cards)
        if len(set(domain)) != len(domain):
            raise ValueError(f"duplicate variables in domain {domain}")
        if len(cards) != len(domain):
            raise ValueError("domain and cards differ in length")
        if any(c < 1 for c in cards):
            raise ValueError(f"cardinalities must be positive: {cards}")
        arr = np.array(values, dtype=np.float64).reshape(cards)
        arr.flags.writeable = False
        self.domain = domain
        self.cards = cards
        self.values = arr

    @classmethod
    def scalar(cls, value):
        return cls((), (), [value])

    @classmethod
    def filled(cls, domain, cards, value):
        return cls(domain, cards, np.full(int(np.prod(cards, dtype=np.int64)), value, dtype=np.float64))

    @property
    def size(self):
        return self.values.size

    @property
    def flat(self):
        return self.values.reshape(-1)

    def card_map(self):
        return dict(zip(self.domain, self.cards))

    def item(self):
        if self.size != 1:
            raise ValueError("table has more than one cell")
        return float(self.flat[0])

    def reorder(self, domain):
        """Same function with the variables permuted into ``domain`` order."""
        domain = tuple(domain)
        if domain == self.domain:
            return self
        if sorted(domain) != sorted(self.domain):
            raise UnknownVariableError(set(domain) ^ set(self.domain), self.domain)
        perm = [self.domain.index(v) for v in domain]
        cards = [self.cards[i] for i in perm]
        return Table(domain, cards, np.ascontiguousarray(np.transpose(self.values, perm)))

    def expand(self, domain, cards):
        """Broadcast onto a superset domain (no arithmetic)."""
        domain = tuple(domain)
        cmap = dict(zip(domain, cards))
        missing = [v for v in self.domain if v not in cmap]
        if missing:
            raise UnknownVariableError(missing, domain)
        strides = _strides_in(self, domain)
        full = np.broadcast_to(np.lib.stride_tricks.as_strided(
            self.flat, shape=tuple(cmap[v] for v in domain),
            strides=tuple(int(s) * 8 for s in strides)), tuple(cmap[v] for v in domain))
        return Table(domain, [cmap[v] for v in domain], np.ascontiguousarray(full))

    def allclose(self, other, rtol=1e-9, atol=1e-12):
        if sorted(self.domain) != sorted(other.domain):
            return False
        return bool(np.allclose(self.values, other.reorder(self.domain).values, rtol=rtol, atol=atol))

    def __repr__(self):
        return f"Table(domain={self.domain}, cards={self.cards}, values={self.flat.tolist()})"


def _c_strides(cards):
    strides = [0] * len(cards)
    step = 1
    for i in range(len(cards) - 1, -1, -1):
        strides[i] = step
        step *= cards[i]
    return strides


def _strides_in(t, domain):
    own = dict(zip(t.domain, _c_strides(t.cards)))
    return np.array([own.get(v, 0) for v in domain], dtype=np.int64)


def union_domain(a, b):
    """Left operand's variables in order, then the right operand's new ones."""
    amap = a.card_map()
    domain = list(a.domain)
    cards = list(a.cards)
    for v, c in zip(b.domain, b.cards):
        if v in amap:
            if amap[v] != c:
                raise ValueError(f"variable {v} has cardinality {amap[v]} and {c}")
        else:
            domain.append(v)
            cards.append(c)
    return tuple(domain), tuple(cards)


def _binary(op, a, b):
    domain, cards = union_domain(a, b)
    shape = np.array(cards, dtype=np.int64)
    out, bad = _backend.kernels.binop(
        op, a.flat, _strides_in(a, domain), b.flat, _strides_in(b, domain), shape)
    if bad >= 0:
        raise DivideByZeroError(bad, domain)
    return Table(domain, cards, out)


def t_multiply(a, b, ctr):
    out = _binary(MUL, a, b)
    ctr.mults += out.size
    return out


def t_add(a, b, ctr):
    out = _binary(ADD, a, b)
    ctr.sums += out.size
    return out


def t_subtract(a, b, ctr):
    out = _binary(SUB, a, b)
    ctr.subs += out.size
    return out


def t_divide(a, b, ctr):
    """Cellwise ``a / b`` with ``0/0 = 0``; a nonzero over zero raises."""
    out = _binary(DIV, a, b)
    ctr.divs += out.size
    return out


def t_sum_out(t, variables, ctr):
    variables = set(variables)
    unknown = variables - set(t.domain)
    if unknown:
        raise UnknownVariableError(sorted(unknown), t.domain)
    if not variables:
        return t
    axes = [i for i, v in enumerate(t.domain) if v in variables]
    keep = [i for i, v in enumerate(t.domain) if v not in variables]
    out = _backend.kernels.sum_out(t.flat, np.array(t.cards, dtype=np.int64), axes)
    result = Table([t.domain[i] for i in keep], [t.cards[i] for i in keep], out)
    ctr.sums += t.size - result.size
    return result


def t_sum_all(t, ctr):
    return t_sum_out(t, t.domain, ctr)


def t_argmax_over(t, d):
    """Index of the best state of ``d`` for every configuration of the rest.

    Ties go to the smallest index. The result is a table over
    ``domain minus {d}`` (original order) whose cells hold integer indices.
    """
    if d not in t.domain:
        raise UnknownVariableError([d], t.domain)
    rest = tuple(v for v in t.domain if v != d)
    moved = t.reorder(rest + (d,))
    card = moved.cards[-1]
    rows = moved.size // card
    idx = _backend.kernels.argmax_rows(moved.flat, rows, card)
    return Table(rest, moved.cards[:-1], idx.astype(np.float64))
