"""Shared junction-tree bookkeeping for the three architectures.

An engine owns one compiled tree for one solve: clique potentials, the
directed mailboxes with validity flags, installed policies, and one
:class:`OpCounter` per phase (``init``, ``messages``, ``optimize``,
``readout``).
"""
from limid.model import LimidError
from limid.tables import OpCounter, Table

PHASES = ("init", "messages", "optimize", "readout")


class MissingInboundMessageError(LimidError):
    kind = "missing-inbound-message"


class HuginCannotRetractError(LimidError):
    kind = "hugin-cannot-retract"


def collect_schedule(jt, root, valid):
    """Directed edges to compute, leaves first, so that ``root`` has every inbound message.

    ``valid`` is the set of directed edges whose mailbox is current; it is
    not modified.
    """
    out = []

    def need(a, b):
        if (a, b) in valid:
            return
        for c in jt.neighbors(a):
            if c != b:
                need(c, a)
        out.append((a, b))

    for c in jt.neighbors(root):
        need(c, root)
    return out


def edges_leaving(jt, clique):
    """Directed edges whose message depends on the contents of ``clique``."""
    out = []
    for a, b, _ in jt.edges:
        for x, y in ((a, b), (b, a)):
            if clique in jt.side(x, y):
                out.append((x, y))
    return out


class Engine:
    """Base class; subclasses provide the potential algebra."""

    name = "base"
    can_retract = True

    def __init__(self, limid, jt):
        self.limid = limid
        self.jt = jt
        self.counters = {p: OpCounter() for p in PHASES}
        self.valid = set()
        self.mail = {}
        self.policies = {}  # decision -> Policy
        self.messages_sent = 0

    # -- bookkeeping ---------------------------------------------------------

    def clique_cards(self, i):
        return self.limid.cards(self.jt.cliques[i])

    def clique_table(self, i, value):
        c = self.jt.cliques[i]
        return Table.filled(c, self.limid.cards(c), value)

    def home(self, d):
        return self.jt.decision_home(d)

    def invalidate_from(self, clique):
        for e in edges_leaving(self.jt, clique):
            self.valid.discard(e)

    def invalidate_all(self):
        self.valid.clear()

    def inbound(self, a, exclude=None):
        msgs = []
        for c in self.jt.neighbors(a):
            if c == exclude:
                continue
            if (c, a) not in self.valid:
                raise MissingInboundMessageError(f"missing-inbound-message {c}->{a}")
            msgs.append(self.mail[(c, a)])
        return msgs

    def collect(self, root):
        sched = collect_schedule(self.jt, root, self.valid)
        for a, b in sched:
            self.send(a, b)
            self.valid.add((a, b))
            self.messages_sent += 1
        return sched

    # -- architecture hooks ----------------------------------------------------

    def initialize(self):
        raise NotImplementedError

    def send(self, a, b):
        raise NotImplementedError

    def local_table(self, d):
        """Contraction marginal over ``fa(d)`` (parents then ``d``), with ``d``'s own policy absent."""
        raise NotImplementedError

    def install(self, d, policy):
        raise NotImplementedError

    def retract(self, d):
        raise NotImplementedError

    def expected_utility(self, root):
        raise NotImplementedError
