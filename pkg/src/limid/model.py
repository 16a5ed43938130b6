"""LIMID data model, structural validation and the JSON file format.

Variables (chance and decision nodes) have dense integer ids. Value nodes
have no id; they live in a separate list and are addressed by position.
Tables follow the row-major convention of :mod:`limid.tables`: a CPT is over
``parents + (node,)``, a utility over its parents, both in declared order.

The order in which decision nodes are declared is their temporal order.
"""
import json
from dataclasses import dataclass, field, replace

import numpy as np

from limid.tables import Table

FORMAT_VERSION = "limid/1"
NORMALIZATION_TOL = 1e-9


class LimidError(Exception):
    kind = "limid-error"


class LimidSyntaxError(LimidError):
    kind = "syntax-error"

    def __init__(self, message, position=None):
        self.position = position
        where = f" at {position}" if position is not None else ""
        super().__init__(f"syntax-error{where}: {message}")


class LimidSemanticError(LimidError):
    kind = "semantic-error"

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("semantic-error: " + "; ".join(str(d) for d in self.diagnostics))


class UnknownDecisionError(LimidError):
    kind = "unknown-decision"


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    cardinality: int


@dataclass(frozen=True)
class ValueRef:
    """Reference to the value node at ``index``; only valid as a parent in malformed input."""

    index: int


@dataclass(frozen=True)
class ChanceNode:
    id: int
    parents: tuple
    cpt: Table

    kind = "chance"


@dataclass(frozen=True)
class DecisionNode:
    id: int
    parents: tuple

    kind = "decision"


@dataclass(frozen=True)
class ValueNode:
    name: str
    parents: tuple
    utility: Table

    kind = "value"


@dataclass(frozen=True)
class Diagnostic:
    node: object
    rule: str
    message: str = ""

    def __str__(self):
        return f"{self.rule} [{self.node}]" + (f": {self.message}" if self.message else "")


@dataclass(frozen=True)
class Policy:
    """Conditional distribution of a decision given its parents.

    ``table`` is over ``parents + (decision,)``.
    """

    decision: int
    table: Table

    @property
    def parents(self):
        return self.table.domain[:-1]

    def is_degenerate(self):
        v = self.table.values
        return bool(np.all((v == 0.0) | (v == 1.0)))

    def actions(self):
        """Chosen action per parent configuration (row-major); requires a degenerate policy."""
        card = self.table.cards[-1]
        return np.argmax(self.table.flat.reshape(-1, card), axis=1)


@dataclass(frozen=True)
class Limid:
    variables: tuple
    nodes: tuple  # ChanceNode | DecisionNode, indexed by variable id
    values: tuple = ()
    decision_order: tuple = None  # defaults to decision ids ascending

    def __post_init__(self):
        if self.decision_order is None:
            order = tuple(n.id for n in self.nodes if n.kind == "decision")
            object.__setattr__(self, "decision_order", order)

    @property
    def n(self):
        return len(self.variables)

    def card(self, v):
        return self.variables[v].cardinality

    def cards(self, vs):
        return tuple(self.variables[v].cardinality for v in vs)

    def name(self, v):
        return self.variables[v].name

    @property
    def chance(self):
        return tuple(n.id for n in self.nodes if n.kind == "chance")

    @property
    def decisions(self):
        """Decision ids in temporal (declaration) order."""
        return self.decision_order

    def parents(self, v):
        return self.nodes[v].parents

    def family(self, v):
        return tuple(self.nodes[v].parents) + (v,)

    def children(self, v):
        return tuple(n.id for n in self.nodes if v in n.parents)

    def with_parents(self, new_parents):
        """Copy with decision parent sets replaced (``{decision: parents}``)."""
        nodes = tuple(
            DecisionNode(node.id, tuple(new_parents[node.id]))
            if node.kind == "decision" and node.id in new_parents else node
            for node in self.nodes
        )
        return replace(self, nodes=nodes)


@dataclass(frozen=True)
class Strategy:
    policies: dict = field(default_factory=dict)

    def __getitem__(self, d):
        return self.policies[d]

    def __contains__(self, d):
        return d in self.policies

    def decisions(self):
        return tuple(self.policies)


def _is_var_ref(p, n):
    return isinstance(p, (int, np.integer)) and not isinstance(p, bool) and 0 <= p < n


def validate(limid):
    """Structural and numeric well-formedness checks; returns a list of diagnostics."""
    out = []
    n = len(limid.variables)
    for i, var in enumerate(limid.variables):
        if var.id != i:
            out.append(Diagnostic(var.id, "ids-not-dense", f"variable at position {i} has id {var.id}"))
        if var.cardinality < 1:
            out.append(Diagnostic(var.id, "bad-cardinality", str(var.cardinality)))
    if out:
        return out
    if len(limid.nodes) != n:
        out.append(Diagnostic(None, "node-count", f"{len(limid.nodes)} nodes for {n} variables"))
        return out
    seen = set()
    for i, node in enumerate(limid.nodes):
        if node.id != i or node.id in seen:
            out.append(Diagnostic(node.id, "ids-not-dense"))
        seen.add(node.id)
    all_parents = [(node.id, node.parents) for node in limid.nodes]
    all_parents += [(f"value:{vn.name}", vn.parents) for vn in limid.values]
    for owner, parents in all_parents:
        if len(set(map(repr, parents))) != len(parents):
            out.append(Diagnostic(owner, "duplicate-parent"))
        for p in parents:
            if isinstance(p, ValueRef):
                out.append(Diagnostic(owner, "value-node-has-child",
                                      f"value node {p.index} is a parent of {owner}"))
            elif not _is_var_ref(p, n):
                out.append(Diagnostic(owner, "unknown-parent", repr(p)))
    if out:
        return out
    if _has_cycle(limid):
        out.append(Diagnostic(None, "cycle", "graph is not acyclic"))
    declared = sorted(n.id for n in limid.nodes if n.kind == "decision")
    if sorted(limid.decision_order) != declared:
        out.append(Diagnostic(None, "decision-order", f"{limid.decision_order} is not a permutation of {declared}"))
    for node in limid.nodes:
        if node.kind != "chance":
            continue
        fam = tuple(node.parents) + (node.id,)
        if node.cpt.domain != fam or node.cpt.cards != limid.cards(fam):
            out.append(Diagnostic(node.id, "cpt-shape", f"cpt domain {node.cpt.domain} != {fam}"))
            continue
        vals = node.cpt.values.reshape(-1, limid.card(node.id))
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            out.append(Diagnostic(node.id, "cpt-negative"))
        sums = vals.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > NORMALIZATION_TOL):
            bad = int(np.flatnonzero(np.abs(sums - 1.0) > NORMALIZATION_TOL)[0])
            out.append(Diagnostic(node.id, "cpt-not-normalized",
                                  f"parent configuration {bad} sums to {sums[bad]!r}"))
    for j, vn in enumerate(limid.values):
        if vn.utility.domain != tuple(vn.parents) or vn.utility.cards != limid.cards(vn.parents):
            out.append(Diagnostic(f"value:{vn.name}", "utility-shape"))
        elif not np.all(np.isfinite(vn.utility.values)):
            out.append(Diagnostic(f"value:{vn.name}", "utility-not-finite"))
    return out


def _has_cycle(limid):
    state = {}

    def visit(v):
        state[v] = 1
        for c in limid.children(v):
            s = state.get(c, 0)
            if s == 1 or (s == 0 and visit(c)):
                return True
        state[v] = 2
        return False

    return any(state.get(v, 0) == 0 and visit(v) for v in range(limid.n))


def topological_order(limid):
    """Variables in a topological order, smallest id first among ready nodes."""
    indeg = {v: len(limid.parents(v)) for v in range(limid.n)}
    ready = sorted(v for v, k in indeg.items() if k == 0)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for c in limid.children(v):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
                ready.sort()
    return order


def uniform_policy(limid, d):
    if not (0 <= d < limid.n) or limid.nodes[d].kind != "decision":
        raise UnknownDecisionError(f"unknown-decision: {d} is not a decision node")
    fam = limid.family(d)
    return Policy(d, Table.filled(fam, limid.cards(fam), 1.0 / limid.card(d)))


def degenerate_policy(limid, d, actions, parents=None):
    """Policy choosing ``actions[i]`` at parent configuration ``i``."""
    parents = tuple(limid.parents(d) if parents is None else parents)
    card = limid.card(d)
    actions = np.asarray(actions, dtype=np.int64).reshape(-1)
    vals = np.zeros((actions.size, card))
    vals[np.arange(actions.size), actions] = 1.0
    return Policy(d, Table(parents + (d,), limid.cards(parents) + (card,), vals))


# --- file format ------------------------------------------------------------


def _floats(obj, where):
    if not isinstance(obj, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
        raise LimidSyntaxError("expected a list of numbers", where)
    return [float(x) for x in obj]


def _int_list(obj, where):
    if not isinstance(obj, list):
        raise LimidSyntaxError("expected a list", where)
    return obj


def parse_limid(text):
    """Parse the JSON LIMID format; raises syntax/semantic errors."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LimidSyntaxError(exc.msg, exc.pos) from None
    if not isinstance(doc, dict):
        raise LimidSyntaxError("top level must be an object", 0)
    if doc.get("format") != FORMAT_VERSION:
        raise LimidSyntaxError(f"unsupported format {doc.get('format')!r}", "format")
    for key in ("variables", "nodes"):
        if not isinstance(doc.get(key), list):
            raise LimidSyntaxError(f"missing list {key!r}", key)
    raw_values = doc.get("values", [])
    if not isinstance(raw_values, list):
        raise LimidSyntaxError("'values' must be a list", "values")

    variables = []
    for i, v in enumerate(doc["variables"]):
        where = f"variables[{i}]"
        try:
            vid, name, card = v["id"], v["name"], v["cardinality"]
        except (KeyError, TypeError):
            raise LimidSyntaxError("variable needs id, name, cardinality", where) from None
        if not isinstance(vid, int) or not isinstance(card, int) or not isinstance(name, str):
            raise LimidSyntaxError("bad variable field types", where)
        variables.append(Variable(vid, name, card))
    variables.sort(key=lambda v: v.id)
    cards = {v.id: v.cardinality for v in variables}
    names = {v.name: v.id for v in variables}
    value_names = {}
    for j, vn in enumerate(raw_values):
        if isinstance(vn, dict) and isinstance(vn.get("name"), str):
            value_names.setdefault(vn["name"], j)

    def resolve(p, where):
        if isinstance(p, bool):
            raise LimidSyntaxError("parent must be an id or a name", where)
        if isinstance(p, int):
            return p
        if isinstance(p, str):
            if p in names:
                return names[p]
            if p in value_names:
                return ValueRef(value_names[p])
            return p
        raise LimidSyntaxError("parent must be an id or a name", where)

    def table(domain, vals, where):
        if not all(isinstance(p, int) and p in cards for p in domain):
            return None
        shape = [cards[p] for p in domain]
        if len(vals) != int(np.prod(shape, dtype=np.int64)):
            raise LimidSyntaxError(f"expected {int(np.prod(shape))} numbers, got {len(vals)}", where)
        return Table(domain, shape, vals)

    by_id = {}
    order = []
    for i, nd in enumerate(doc["nodes"]):
        where = f"nodes[{i}]"
        if not isinstance(nd, dict):
            raise LimidSyntaxError("node must be an object", where)
        kind = nd.get("kind")
        if kind not in ("chance", "decision"):
            raise LimidSyntaxError(f"unknown node kind {kind!r}", where)
        nid = nd.get("id")
        if not isinstance(nid, int):
            raise LimidSyntaxError("node id must be an integer", where)
        parents = tuple(resolve(p, where) for p in _int_list(nd.get("parents", []), where))
        if kind == "chance":
            if "cpt" not in nd:
                raise LimidSyntaxError("chance node needs 'cpt'", where)
            vals = _floats(nd["cpt"], where + ".cpt")
            t = table(parents + (nid,), vals, where + ".cpt")
            if t is None:
                t = Table((), (), [0.0])
            node = ChanceNode(nid, parents, t)
        else:
            if "cpt" in nd:
                raise LimidSyntaxError("decision node cannot carry 'cpt'", where)
            node = DecisionNode(nid, parents)
        if nid in by_id:
            raise LimidSemanticError([Diagnostic(nid, "duplicate-id")])
        by_id[nid] = node
        order.append(nid)
    values = []
    for j, vn in enumerate(raw_values):
        where = f"values[{j}]"
        if not isinstance(vn, dict) or not isinstance(vn.get("name"), str) or "utility" not in vn:
            raise LimidSyntaxError("value node needs name, parents, utility", where)
        parents = tuple(resolve(p, where) for p in _int_list(vn.get("parents", []), where))
        vals = _floats(vn["utility"], where + ".utility")
        t = table(parents, vals, where + ".utility") or Table((), (), [0.0])
        values.append(ValueNode(vn["name"], parents, t))
    if sorted(by_id) != [v.id for v in variables]:
        raise LimidSemanticError([Diagnostic(None, "node-count", "nodes and variables do not match")])
    decision_order = tuple(nid for nid in order if by_id[nid].kind == "decision")
    limid = Limid(tuple(variables), tuple(by_id[v.id] for v in variables), tuple(values), decision_order)
    diags = validate(limid)
    if diags:
        raise LimidSemanticError(diags)
    return limid


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2 ** 53 else x


def to_document(limid):
    node_entries = {}
    for node in limid.nodes:
        entry = {"id": node.id, "kind": node.kind, "parents": list(node.parents)}
        if node.kind == "chance":
            entry["cpt"] = [_num(x) for x in node.cpt.flat]
        node_entries[node.id] = entry
    # chance nodes in id order; decisions keep their temporal order relative to each other
    ordered = []
    dq = list(limid.decisions)
    for node in limid.nodes:
        if node.kind == "chance":
            ordered.append(node.id)
        else:
            ordered.append(dq.pop(0))
    return {
        "format": FORMAT_VERSION,
        "variables": [{"id": v.id, "name": v.name, "cardinality": v.cardinality} for v in limid.variables],
        "nodes": [node_entries[i] for i in ordered],
        "values": [
            {"name": vn.name, "parents": list(vn.parents), "utility": [_num(x) for x in vn.utility.flat]}
            for vn in limid.values
        ],
    }


def serialize_limid(limid):
    """Canonical JSON text for ``limid`` (deterministic; floats round-trip exactly)."""
    doc = to_document(limid)
    lines = ["{", f'  "format": {json.dumps(doc["format"])},']
    for i, key in enumerate(("variables", "nodes", "values")):
        entries = [f"    {json.dumps(e)}" for e in doc[key]]
        tail = "," if i < 2 else ""
        if entries:
            lines.append(f'  "{key}": [')
            lines.append(",\n".join(entries))
            lines.append(f"  ]{tail}")
        else:
            lines.append(f'  "{key}": []{tail}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_limid(path):
    with open(path, "rb") as fh:
        return parse_limid(fh.read())
