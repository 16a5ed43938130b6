"""Compile a LIMID into a junction tree.

Pipeline: requisite-arc reduction, moralization, min-fill triangulation,
maximal cliques joined by a maximum-weight spanning tree, and assignment of
each CPT / utility / decision family to its lowest-indexed covering clique.
"""
import itertools
from dataclasses import dataclass, field

from limid.model import LimidError


class CompileError(LimidError):
    kind = "compile-error"


class NotChordalError(CompileError):
    kind = "not-chordal"


class NoQualifyingCliqueError(CompileError):
    kind = "no-qualifying-clique"


class NotSolubleError(LimidError):
    kind = "not-soluble"


# --- directed-graph helpers (value nodes are keyed ("u", index)) -------------


def _digraph(limid):
    parents = {v: tuple(limid.parents(v)) for v in range(limid.n)}
    for j, vn in enumerate(limid.values):
        parents[("u", j)] = tuple(vn.parents)
    return parents


def _children_map(parents):
    children = {v: [] for v in parents}
    for v, ps in parents.items():
        for p in ps:
            children[p].append(v)
    return children


def descendants(parents, v):
    children = _children_map(parents)
    seen, stack = set(), [v]
    while stack:
        for c in children[stack.pop()]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return seen


def ancestors(parents, nodes):
    seen, stack = set(nodes), list(nodes)
    while stack:
        for p in parents[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def d_separated(parents, xs, ys, zs):
    """True when ``xs`` and ``ys`` are d-separated given ``zs``.

    Uses the moralized ancestral graph: restrict to ancestors of all three
    sets, marry co-parents, drop directions, delete ``zs`` and test
    reachability.
    """
    xs, ys, zs = set(xs), set(ys), set(zs)
    if not xs or not ys:
        return True
    if xs & ys:
        return False
    keep = ancestors(parents, xs | ys | zs)
    adj = {v: set() for v in keep}
    for v in keep:
        ps = [p for p in parents[v] if p in keep]
        for p in ps:
            adj[v].add(p)
            adj[p].add(v)
        for a, b in itertools.combinations(ps, 2):
            adj[a].add(b)
            adj[b].add(a)
    seen = set(xs - zs)
    stack = list(seen)
    while stack:
        v = stack.pop()
        if v in ys:
            return False
        for w in adj[v]:
            if w not in zs and w not in seen:
                seen.add(w)
                stack.append(w)
    return True


# --- reduction ----------------------------------------------------------------


def _value_descendants(parents, d):
    return {v for v in descendants(parents, d) if isinstance(v, tuple)}


def non_requisite(parents, d):
    """First parent of ``d`` (declared order) that is d-separated from d's utility descendants."""
    util = _value_descendants(parents, d)
    fam = set(parents[d]) | {d}
    for n in parents[d]:
        if not util or d_separated(parents, {n}, util, fam - {n}):
            return n
    return None


def reduce(limid):
    """Remove non-requisite informational arcs, decisions in reverse order, to a fixpoint."""
    parents = dict(_digraph(limid))
    changed = True
    while changed:
        changed = False
        for d in reversed(limid.decisions):
            while True:
                n = non_requisite(parents, d)
                if n is None:
                    break
                parents[d] = tuple(p for p in parents[d] if p != n)
                changed = True
    new = {d: parents[d] for d in limid.decisions if parents[d] != tuple(limid.parents(d))}
    return limid.with_parents(new) if new else limid


def check_soluble(limid):
    """Raise :class:`NotSolubleError` unless one reverse-order pass is globally optimal.

    Two checks: the declared decision order must agree with the arcs, and
    each decision, given its family, must be d-separated from the policies
    of all earlier decisions as seen by its utility descendants.
    """
    parents = _digraph(limid)
    order = list(limid.decisions)
    pos = {d: i for i, d in enumerate(order)}
    for d in order:
        for e in descendants(parents, d):
            if e in pos and pos[e] < pos[d]:
                raise NotSolubleError(
                    f"not-soluble: decision {limid.name(e)} is downstream of {limid.name(d)} "
                    "but declared before it")
    augmented = dict(parents)
    for d in order:
        augmented[d] = tuple(parents[d]) + (("policy", d),)
        augmented[("policy", d)] = ()
    for i in range(len(order) - 1, -1, -1):
        d = order[i]
        util = _value_descendants(parents, d)
        earlier = {("policy", e) for e in order[:i]}
        if not d_separated(augmented, earlier, util, set(limid.family(d))):
            raise NotSolubleError(
                f"not-soluble: optimal policy for {limid.name(d)} depends on earlier policies")


# --- undirected graphs ----------------------------------------------------------


@dataclass(frozen=True)
class UndirectedGraph:
    nodes: tuple
    edges: frozenset  # frozenset of (a, b) with a < b

    @classmethod
    def from_edges(cls, nodes, edges):
        return cls(tuple(sorted(nodes)), frozenset((min(a, b), max(a, b)) for a, b in edges if a != b))

    def adjacency(self):
        adj = {v: set() for v in self.nodes}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def has_edge(self, a, b):
        return (min(a, b), max(a, b)) in self.edges


def moralize(limid):
    """Undirected moral graph over the chance and decision variables."""
    edges = set()
    for v in range(limid.n):
        ps = limid.parents(v)
        edges.update((p, v) for p in ps)
        edges.update(itertools.combinations(ps, 2))
    for vn in limid.values:
        edges.update(itertools.combinations(vn.parents, 2))
    return UndirectedGraph.from_edges(range(limid.n), edges)


def _fill_in(adj, v, alive):
    nbrs = sorted(w for w in adj[v] if w in alive)
    return [(a, b) for a, b in itertools.combinations(nbrs, 2) if b not in adj[a]]


def triangulate(g, order=None):
    """Min-fill triangulation (ties to the smaller id). Returns ``(chordal, order)``.

    With an explicit ``order`` the graph is filled along it instead.
    """
    adj = {v: set(ws) for v, ws in g.adjacency().items()}
    alive = set(g.nodes)
    edges = set(g.edges)
    chosen = []
    explicit = list(order) if order is not None else None
    while alive:
        if explicit is not None:
            v = explicit[len(chosen)]
        else:
            v = min(alive, key=lambda x: (len(_fill_in(adj, x, alive)), x))
        for a, b in _fill_in(adj, v, alive):
            adj[a].add(b)
            adj[b].add(a)
            edges.add((min(a, b), max(a, b)))
        alive.discard(v)
        chosen.append(v)
    return UndirectedGraph(g.nodes, frozenset(edges)), tuple(chosen)


def is_perfect_elimination_order(g, order):
    adj = g.adjacency()
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [w for w in adj[v] if pos[w] > pos[v]]
        for a, b in itertools.combinations(later, 2):
            if b not in adj[a]:
                return False
    return True


def maximum_cardinality_order(g):
    """Reverse of a maximum cardinality search; perfect iff ``g`` is chordal."""
    adj = g.adjacency()
    weight = {v: 0 for v in g.nodes}
    visited = []
    left = set(g.nodes)
    while left:
        v = min(left, key=lambda x: (-weight[x], x))
        visited.append(v)
        left.discard(v)
        for w in adj[v]:
            if w in left:
                weight[w] += 1
    return tuple(reversed(visited))


# --- junction tree ------------------------------------------------------------------


@dataclass(frozen=True)
class JunctionTree:
    """Cliques (sorted id tuples), tree edges with separators, and function assignments.

    ``chance``, ``decisions`` and ``values`` list, per clique, the chance ids,
    decision ids and value-node indices whose functions live there.
    """

    cliques: tuple
    edges: tuple  # (i, j, separator) with i < j
    chance: tuple = ()
    decisions: tuple = ()
    values: tuple = ()
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def neighbors(self, i):
        nb = self._cache.get("nb")
        if nb is None:
            nb = {k: [] for k in range(len(self.cliques))}
            for a, b, _ in self.edges:
                nb[a].append(b)
                nb[b].append(a)
            nb = {k: tuple(sorted(v)) for k, v in nb.items()}
            self._cache["nb"] = nb
        return nb[i]

    def separator(self, a, b):
        seps = self._cache.get("sep")
        if seps is None:
            seps = {}
            for i, j, s in self.edges:
                seps[(i, j)] = seps[(j, i)] = s
            self._cache["sep"] = seps
        return seps[(a, b)]

    def side(self, a, b):
        """Cliques reachable from ``a`` without crossing the edge to ``b``."""
        key = ("side", a, b)
        if key not in self._cache:
            seen, stack = {a}, [a]
            while stack:
                x = stack.pop()
                for y in self.neighbors(x):
                    if y not in seen and not (x == a and y == b):
                        seen.add(y)
                        stack.append(y)
            self._cache[key] = frozenset(seen)
        return self._cache[key]

    def path(self, src, dst):
        """Clique indices from ``src`` to ``dst`` inclusive."""
        prev = {src: None}
        stack = [src]
        while stack:
            x = stack.pop()
            for y in self.neighbors(x):
                if y not in prev:
                    prev[y] = x
                    stack.append(y)
        out = [dst]
        while out[-1] != src:
            out.append(prev[out[-1]])
        return tuple(reversed(out))

    def home(self, variables):
        """Lowest-indexed clique containing ``variables``."""
        need = set(variables)
        for i, c in enumerate(self.cliques):
            if need <= set(c):
                return i
        raise NoQualifyingCliqueError(f"no-qualifying-clique for {sorted(need)}")

    def decision_home(self, d):
        for i, ds in enumerate(self.decisions):
            if d in ds:
                return i
        raise NoQualifyingCliqueError(f"decision {d} has no home clique")


def build_junction_tree(chordal, order=None):
    """Maximal cliques of a chordal graph joined by a maximum-weight spanning tree."""
    if order is None:
        order = maximum_cardinality_order(chordal)
    if not is_perfect_elimination_order(chordal, order):
        raise NotChordalError("not-chordal: elimination order is not perfect")
    adj = chordal.adjacency()
    pos = {v: i for i, v in enumerate(order)}
    candidates = []
    for v in order:
        candidates.append(frozenset([v] + [w for w in adj[v] if pos[w] > pos[v]]))
    cliques = []
    for c in candidates:
        if any(c < other for other in candidates) or c in cliques:
            continue
        cliques.append(c)
    weighted = sorted(
        ((len(a & b), i, j) for (i, a), (j, b) in itertools.combinations(enumerate(cliques), 2)),
        key=lambda t: (-t[0], t[1], t[2]),
    )
    root = list(range(len(cliques)))

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    edges = []
    for _, i, j in weighted:
        ri, rj = find(i), find(j)
        if ri != rj:
            root[ri] = rj
            edges.append((i, j, tuple(sorted(cliques[i] & cliques[j]))))
    return JunctionTree(tuple(tuple(sorted(c)) for c in cliques), tuple(edges))


def assign_functions(limid, jt):
    """Place every CPT, decision family and utility in its lowest covering clique."""
    chance = [[] for _ in jt.cliques]
    decisions = [[] for _ in jt.cliques]
    values = [[] for _ in jt.cliques]
    for r in limid.chance:
        chance[jt.home(limid.family(r))].append(r)
    for d in limid.decisions:
        decisions[jt.home(limid.family(d))].append(d)
    for j, vn in enumerate(limid.values):
        values[jt.home(vn.parents)].append(j)
    return JunctionTree(
        jt.cliques, jt.edges,
        tuple(map(tuple, chance)), tuple(map(tuple, decisions)), tuple(map(tuple, values)),
    )


def running_intersection_holds(jt):
    for a, b in itertools.combinations(range(len(jt.cliques)), 2):
        common = set(jt.cliques[a]) & set(jt.cliques[b])
        if any(not common <= set(jt.cliques[c]) for c in jt.path(a, b)):
            return False
    return True


def compile_limid(limid, reduced=True):
    """Reduce (optionally) and compile; returns ``(limid_used, junction_tree)``."""
    work = reduce(limid) if reduced else limid
    chordal, order = triangulate(moralize(work))
    jt = build_junction_tree(chordal, order)
    return work, assign_functions(work, jt)


def strong_elimination_order(limid, g):
    """Elimination order respecting the temporal partial order (last-observed first).

    Used only to compare clique sizes with the unconstrained triangulation.
    """
    observed = []
    seen = set()
    for d in limid.decisions:
        block = [p for p in limid.parents(d) if limid.nodes[p].kind == "chance" and p not in seen]
        seen.update(block)
        observed.append(block)
    rest = [v for v in limid.chance if v not in seen]
    blocks = [rest]
    for d, block in zip(reversed(limid.decisions), reversed(observed)):
        blocks.append([d])
        blocks.append(block)
    adj = {v: set(ws) for v, ws in g.adjacency().items()}
    alive = set(g.nodes)
    order = []
    for block in blocks:
        block = set(block)
        while block:
            v = min(block, key=lambda x: (len(_fill_in(adj, x, alive)), x))
            for a, b in _fill_in(adj, v, alive):
                adj[a].add(b)
                adj[b].add(a)
            alive.discard(v)
            block.discard(v)
            order.append(v)
    return tuple(order)


def total_clique_size(limid, jt):
    total = 0
    for c in jt.cliques:
        size = 1
        for v in c:
            size *= limid.card(v)
        total += size
    return total
