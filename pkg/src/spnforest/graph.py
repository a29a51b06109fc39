"""Arena-based sum-product network graphs.

Nodes live in a flat arena indexed by integer ids. A graph is a rooted DAG
over sum, product, and Bernoulli leaf nodes; scopes are cached per node at
construction time. All probability parameters are stored in linear space,
evaluation happens in log space (see inference.py).
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

MARG = -1  # evidence value marking a marginalized variable

WEIGHT_TOL = 1e-9
LEAF_EPS = 1e-12


class SumNode:
    kind = "sum"
    __slots__ = ("children", "weights")

    def __init__(self, children, weights):
        self.children = list(children)
        self.weights = np.asarray(weights, dtype=float)


class ProductNode:
    kind = "product"
    __slots__ = ("children",)

    def __init__(self, children):
        self.children = list(children)


class LeafNode:
    """Bernoulli leaf over a single binary variable."""

    kind = "leaf"
    __slots__ = ("var", "p")
    children = ()

    def __init__(self, var, p):
        self.var = int(var)
        self.p = float(p)


def clamp_leaf_p(p):
    return float(min(max(p, LEAF_EPS), 1.0 - LEAF_EPS))


@dataclass
class ValidityReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def add(self, msg):
        self.violations.append(msg)

    def __str__(self):
        return "valid" if self.ok else "; ".join(self.violations)


@dataclass
class StructureStats:
    n_nodes: int
    n_edges: int
    n_layers: int
    n_sum: int
    n_product: int
    n_leaf: int


class SpnGraph:
    """Node arena with a designated root.

    Mutation (adding nodes, changing weights) must not overlap with
    evaluation; concurrent read-only queries are safe.
    """

    def __init__(self, n_vars):
        if n_vars < 1:
            raise ValueError("n_vars must be >= 1")
        self.n_vars = int(n_vars)
        self.nodes = []
        self.scopes = []
        self.slices = {}
        self.root = None
        self._version = 0
        self._topo_cache = None

    def __len__(self):
        return len(self.nodes)

    def touch(self):
        self._version += 1
        self._topo_cache = None

    def add_leaf(self, var, p, rows=None):
        if not 0 <= var < self.n_vars:
            raise ValueError(f"variable {var} outside universe [0, {self.n_vars})")
        self.nodes.append(LeafNode(var, clamp_leaf_p(p)))
        self.scopes.append(frozenset((int(var),)))
        return self._register(rows)

    def add_product(self, children, rows=None):
        if not children:
            raise ValueError("product node needs at least one child")
        scope = frozenset().union(*(self.scopes[c] for c in children))
        self.nodes.append(ProductNode(children))
        self.scopes.append(scope)
        return self._register(rows)

    def add_sum(self, children, weights, rows=None):
        if not children:
            raise ValueError("sum node needs at least one child")
        if len(children) != len(weights):
            raise ValueError("children/weights length mismatch")
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if total <= 0:
            raise ValueError("sum-node weights must have positive total")
        self.nodes.append(SumNode(children, w / total))
        self.scopes.append(frozenset(self.scopes[children[0]]))
        return self._register(rows)

    def _register(self, rows):
        nid = len(self.nodes) - 1
        if rows is not None:
            self.slices[nid] = np.asarray(rows, dtype=np.int64)
        self.touch()
        return nid

    def set_root(self, nid):
        if not 0 <= nid < len(self.nodes):
            raise ValueError(f"root id {nid} out of range")
        self.root = nid
        self.touch()

    def set_sum_weights(self, nid, weights):
        """Replace a sum node's weights, renormalizing to the simplex."""
        node = self.nodes[nid]
        if node.kind != "sum":
            raise ValueError(f"node {nid} is not a sum node")
        w = np.asarray(weights, dtype=float)
        if len(w) != len(node.children):
            raise ValueError("weight count mismatch")
        node.weights = w / w.sum()
        self.touch()

    def add_sum_child(self, nid, child, weight):
        """Append a child to a sum node; existing weights are rescaled."""
        node = self.nodes[nid]
        if node.kind != "sum":
            raise ValueError(f"node {nid} is not a sum node")
        node.children.append(child)
        node.weights = np.append(node.weights * (1.0 - weight), weight)
        node.weights /= node.weights.sum()
        self.touch()

    def topological_order(self, root=None):
        """Post-order over nodes reachable from `root` (children first).

        Raises ValueError on a cycle.
        """
        if root is None:
            root = self.root
        if root is None:
            raise ValueError("graph has no root")
        if root == self.root and self._topo_cache is not None:
            return self._topo_cache
        order = []
        state = {}  # 1 = on stack, 2 = done
        stack = [(root, False)]
        while stack:
            nid, expanded = stack.pop()
            if expanded:
                state[nid] = 2
                order.append(nid)
                continue
            st = state.get(nid)
            if st == 2:
                continue
            if st == 1:
                raise ValueError("graph contains a cycle")
            state[nid] = 1
            stack.append((nid, True))
            for c in self.nodes[nid].children:
                if state.get(c) != 2:
                    stack.append((c, False))
        if root == self.root:
            self._topo_cache = order
        return order

    def bfs_order(self, root=None):
        """Breadth-first node order from `root`, children in stored order."""
        if root is None:
            root = self.root
        seen = {root}
        order = []
        queue = deque([root])
        while queue:
            nid = queue.popleft()
            order.append(nid)
            for c in self.nodes[nid].children:
                if c not in seen:
                    seen.add(c)
                    queue.append(c)
        return order

    def copy(self):
        g = SpnGraph(self.n_vars)
        for node in self.nodes:
            if node.kind == "sum":
                g.nodes.append(SumNode(node.children, node.weights.copy()))
            elif node.kind == "product":
                g.nodes.append(ProductNode(node.children))
            else:
                g.nodes.append(LeafNode(node.var, node.p))
        g.scopes = list(self.scopes)
        g.slices = {k: v.copy() for k, v in self.slices.items()}
        g.root = self.root
        return g


def validate(graph, require_full_scope=False):
    """Check structural validity; every violation becomes a report entry."""
    report = ValidityReport()
    if not graph.nodes:
        report.add("graph is empty")
        return report
    if graph.root is None:
        report.add("no root designated")
        return report
    try:
        order = graph.topological_order()
    except ValueError:
        report.add("acyclicity: graph contains a cycle")
        return report
    for nid in order:
        node = graph.nodes[nid]
        scope = graph.scopes[nid]
        if not scope:
            report.add(f"node {nid}: empty scope")
        if not scope <= frozenset(range(graph.n_vars)):
            report.add(f"node {nid}: scope outside universe")
        if node.kind == "leaf":
            if not LEAF_EPS <= node.p <= 1.0 - LEAF_EPS:
                report.add(f"leaf {nid}: p={node.p} outside [{LEAF_EPS}, 1-{LEAF_EPS}]")
            if scope != frozenset((node.var,)):
                report.add(f"leaf {nid}: cached scope does not match its variable")
            continue
        if not node.children:
            report.add(f"node {nid}: no children")
            continue
        child_scopes = [graph.scopes[c] for c in node.children]
        if node.kind == "sum":
            if np.any(node.weights < 0):
                report.add(f"sum {nid}: negative weight")
            if abs(node.weights.sum() - 1.0) > WEIGHT_TOL:
                report.add(f"sum {nid}: weights sum to {node.weights.sum()!r}, not 1")
            if any(cs != child_scopes[0] for cs in child_scopes[1:]):
                report.add(f"sum {nid}: completeness violation (child scopes differ)")
            if scope != child_scopes[0]:
                report.add(f"sum {nid}: cached scope does not match children")
        else:
            union = frozenset().union(*child_scopes)
            if sum(len(cs) for cs in child_scopes) != len(union):
                report.add(f"product {nid}: decomposability violation (overlapping child scopes)")
            if scope != union:
                report.add(f"product {nid}: cached scope does not match children")
    if require_full_scope and graph.scopes[graph.root] != frozenset(range(graph.n_vars)):
        report.add("root scope does not cover the full universe")
    return report


def structure_stats(graph):
    """Node/edge/depth counts over the part reachable from the root."""
    order = graph.topological_order()
    n_sum = n_product = n_leaf = n_edges = 0
    depth = {}
    for nid in order:
        node = graph.nodes[nid]
        if node.kind == "sum":
            n_sum += 1
        elif node.kind == "product":
            n_product += 1
        else:
            n_leaf += 1
        n_edges += len(node.children)
        depth[nid] = 1 + max((depth[c] for c in node.children), default=0)
    return StructureStats(
        n_nodes=len(order),
        n_edges=n_edges,
        n_layers=depth[graph.root],
        n_sum=n_sum,
        n_product=n_product,
        n_leaf=n_leaf,
    )


def merge_graphs(graphs):
    """Concatenate arenas into one graph (no root); returns (graph, remaps).

    remaps[i] maps node ids of graphs[i] to ids in the merged arena.
    """
    if not graphs:
        raise ValueError("nothing to merge")
    n_vars = graphs[0].n_vars
    if any(g.n_vars != n_vars for g in graphs):
        raise ValueError("universe size mismatch across graphs")
    merged = SpnGraph(n_vars)
    remaps = []
    offset = 0
    for g in graphs:
        remaps.append(np.arange(len(g.nodes), dtype=np.int64) + offset)
        for node in g.nodes:
            if node.kind == "sum":
                merged.nodes.append(
                    SumNode([c + offset for c in node.children], node.weights.copy())
                )
            elif node.kind == "product":
                merged.nodes.append(ProductNode([c + offset for c in node.children]))
            else:
                merged.nodes.append(LeafNode(node.var, node.p))
        merged.scopes.extend(g.scopes)
        for nid, rows in g.slices.items():
            merged.slices[nid + offset] = rows.copy()
        offset += len(g.nodes)
    merged.touch()
    return merged, remaps


def collapse_unary(graph):
    """Copy of the reachable graph with single-child sums/products removed.

    Intermediate learners may emit degenerate one-child inner nodes; this
    pass redirects every reference to such a node to its child.
    """
    order = graph.topological_order()
    target = {}
    out = SpnGraph(graph.n_vars)
    for nid in order:
        node = graph.nodes[nid]
        if node.kind != "leaf" and len(node.children) == 1:
            target[nid] = target[node.children[0]]
            continue
        rows = graph.slices.get(nid)
        if node.kind == "leaf":
            target[nid] = out.add_leaf(node.var, node.p, rows=rows)
        elif node.kind == "product":
            target[nid] = out.add_product([target[c] for c in node.children], rows=rows)
        else:
            new_id = out.add_sum(
                [target[c] for c in node.children], node.weights, rows=rows
            )
            # keep weights bit-exact; add_sum renormalizes
            out.nodes[new_id].weights = node.weights.copy()
            target[nid] = new_id
    out.set_root(target[graph.root])
    return out
