"""Graph edit distance between morphology graphs.

Two engines share one cost model: an exact best-first search over partial
node assignments (admissible lower bound, so the first settled answer is
optimal) and a fast assignment-based upper bound for graphs the exact search
cannot afford.  Both report what they did: the result carries an exactness
flag and the number of explored states.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .morphology import MorphNode, RobotMorphology
from .taxonomy import Taxonomy

LABEL_CONCEPT = "concept-only"
LABEL_CONCEPT_DESCRIPTORS = "concept+descriptors"
LABEL_CONCEPT_DESCRIPTORS_MULTIPLICITY = "concept+descriptors+multiplicity"

_LABEL_MODES = (
    LABEL_CONCEPT,
    LABEL_CONCEPT_DESCRIPTORS,
    LABEL_CONCEPT_DESCRIPTORS_MULTIPLICITY,
)

# Local-search refinement of the assignment bound is quadratic per pass; skip
# it for graphs where the exact search would never run anyway.
_REFINE_NODE_LIMIT = 48


@dataclass(frozen=True)
class CostModel:
    """Edit operation costs.

    With no taxonomy, substitution is 0 when the node labels agree under
    ``label_equality`` and 1 otherwise.  With a taxonomy, substitution is
    1 - concept_similarity plus ``descriptor_penalty`` per descriptor token
    the two nodes do not share.  Edges are unlabeled, so they only ever cost
    their insertion or deletion.
    """

    node_insert: float = 1.0
    node_delete: float = 1.0
    edge_insert: float = 1.0
    edge_delete: float = 1.0
    label_equality: str = LABEL_CONCEPT
    taxonomy: Taxonomy | None = None
    descriptor_penalty: float = 0.0

    def __post_init__(self):
        for name in ("node_insert", "node_delete", "edge_insert", "edge_delete",
                     "descriptor_penalty"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.label_equality not in _LABEL_MODES:
            raise ValueError(f"unknown label equality mode {self.label_equality!r}")

    @property
    def symmetric(self) -> bool:
        return self.node_insert == self.node_delete and self.edge_insert == self.edge_delete

    def ensure_metric(self) -> None:
        if not self.symmetric:
            raise ValueError(
                "metric mode needs insert and delete costs to match "
                f"(nodes {self.node_insert}/{self.node_delete}, "
                f"edges {self.edge_insert}/{self.edge_delete})"
            )

    def label(self, node: MorphNode):
        if self.label_equality == LABEL_CONCEPT:
            return (node.concept,)
        if self.label_equality == LABEL_CONCEPT_DESCRIPTORS:
            return (node.concept, node.descriptor_tokens())
        return (node.concept, node.descriptor_tokens(), node.multiplicity)

    def node_substitute(self, a: MorphNode, b: MorphNode) -> float:
        if self.taxonomy is None:
            return 0.0 if self.label(a) == self.label(b) else 1.0
        similarity = self.taxonomy.concept_similarity(a.concept, b.concept)
        mismatch = len(set(a.descriptor_tokens()) ^ set(b.descriptor_tokens()))
        return (1.0 - similarity) + self.descriptor_penalty * mismatch


@dataclass(frozen=True)
class SearchBudget:
    max_nodes: int = 12
    max_states: int = 5_000_000

    def __post_init__(self):
        if self.max_nodes < 1 or self.max_states < 1:
            raise ValueError("budget limits must be positive")


@dataclass(frozen=True)
class EditOp:
    kind: str  # substitute-node | delete-node | insert-node | delete-edge | insert-edge
    source: str | tuple[str, str] | None
    target: str | tuple[str, str] | None
    cost: float


@dataclass(frozen=True)
class EditPath:
    ops: tuple[EditOp, ...]
    total_cost: float


@dataclass(frozen=True)
class DistanceResult:
    value: float
    exact: bool
    path: EditPath | None = None
    explored_states: int = 0
    budget_exceeded: bool = False


def _edge_sets(m: RobotMorphology) -> set[frozenset[str]]:
    return {frozenset(e) for e in m.edges}


def path_from_mapping(
    a: RobotMorphology,
    b: RobotMorphology,
    mapping: dict[str, str | None],
    cost: CostModel,
) -> EditPath:
    """Spell out the edit operations a complete node mapping implies.

    Operation order is chosen so the path can be replayed mechanically:
    node substitutions first (they define the relabelling), then edge
    deletions, node deletions, node insertions, and edge insertions.
    """
    b_nodes = {n.id: n for n in b.nodes}
    inverse = {t: s for s, t in mapping.items() if t is not None}
    a_edges = _edge_sets(a)
    b_edges = _edge_sets(b)

    ops: list[EditOp] = []
    for node in a.nodes:
        target = mapping[node.id]
        if target is not None:
            sub = cost.node_substitute(node, b_nodes[target])
            # A free self-substitution is a no-op; leaving it out keeps the
            # identity path empty.
            if target != node.id or sub != 0.0:
                ops.append(EditOp("substitute-node", node.id, target, sub))
    for edge in sorted(a_edges, key=sorted):
        u, v = sorted(edge)
        mu, mv = mapping[u], mapping[v]
        if mu is None or mv is None or frozenset((mu, mv)) not in b_edges:
            ops.append(EditOp("delete-edge", (u, v), None, cost.edge_delete))
    for node in a.nodes:
        if mapping[node.id] is None:
            ops.append(EditOp("delete-node", node.id, None, cost.node_delete))
    for node in b.nodes:
        if node.id not in inverse:
            ops.append(EditOp("insert-node", None, node.id, cost.node_insert))
    for edge in sorted(b_edges, key=sorted):
        p, q = sorted(edge)
        sp, sq = inverse.get(p), inverse.get(q)
        if sp is None or sq is None or frozenset((sp, sq)) not in a_edges:
            ops.append(EditOp("insert-edge", None, (p, q), cost.edge_insert))
    return EditPath(ops=tuple(ops), total_cost=sum(op.cost for op in ops))


# --- exact search -----------------------------------------------------------


class _Side:
    """Index-based view of one graph, in a fixed deterministic node order."""

    def __init__(self, m: RobotMorphology, order: list[str]):
        self.ids = order
        self.index = {nid: i for i, nid in enumerate(order)}
        by_id = {n.id: n for n in m.nodes}
        self.nodes = [by_id[nid] for nid in order]
        self.adj: list[set[int]] = [set() for _ in order]
        for u, v in m.edges:
            ui, vi = self.index[u], self.index[v]
            self.adj[ui].add(vi)
            self.adj[vi].add(ui)
        self.edge_count = len({frozenset(e) for e in m.edges})

    def twin_classes(self, labels: list) -> list[int]:
        """Group interchangeable nodes: same label, same neighbourhood.

        Twins may be adjacent (closed neighbourhoods match) or not (open
        neighbourhoods match); either way swapping them is an automorphism,
        so the search only needs to try one representative.
        """
        n = len(self.ids)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)

        open_key: dict = {}
        closed_key: dict = {}
        for i in range(n):
            ko = (labels[i], frozenset(self.adj[i]))
            kc = (labels[i], frozenset(self.adj[i] | {i}))
            if ko in open_key:
                union(i, open_key[ko])
            else:
                open_key[ko] = i
            if kc in closed_key:
                union(i, closed_key[kc])
            else:
                closed_key[kc] = i
        return [find(i) for i in range(n)]


def _bfs_order(m: RobotMorphology) -> list[str]:
    """Deterministic traversal: start at the highest-degree node, expand
    neighbours by descending degree.  Keeps early search levels informative."""
    adj = m.adjacency()
    degree = {nid: len(neigh) for nid, neigh in adj.items()}
    remaining = set(adj)
    order: list[str] = []
    while remaining:
        start = min(remaining, key=lambda nid: (-degree[nid], nid))
        queue = [start]
        remaining.discard(start)
        while queue:
            current = queue.pop(0)
            order.append(current)
            neighbours = sorted(
                (n for n in adj[current] if n in remaining),
                key=lambda nid: (-degree[nid], nid),
            )
            for n in neighbours:
                remaining.discard(n)
                queue.append(n)
    return order


def ged_exact(
    a: RobotMorphology,
    b: RobotMorphology,
    cost: CostModel | None = None,
    budget: SearchBudget | None = None,
) -> DistanceResult:
    """Optimal edit distance via best-first search over node assignments.

    Falls back to the assignment upper bound (exact=False, budget_exceeded
    set) when either graph exceeds the node budget or the state budget runs
    out mid-search.  Frontier ties break on (bound, assigned count, insertion
    order), so results and paths are reproducible.
    """
    cost = cost or CostModel()
    budget = budget or SearchBudget()

    if max(len(a.nodes), len(b.nodes)) > budget.max_nodes:
        bound = ged_upper_bound(a, b, cost)
        return DistanceResult(
            value=bound.value, exact=False, path=bound.path,
            explored_states=0, budget_exceeded=True,
        )

    A = _Side(a, _bfs_order(a))
    B = _Side(b, [n.id for n in b.nodes])
    n, m = len(A.ids), len(B.ids)

    a_labels = [cost.label(node) for node in A.nodes]
    b_labels = [cost.label(node) for node in B.nodes]
    sub_cost = [[cost.node_substitute(A.nodes[i], B.nodes[j]) for j in range(m)]
                for i in range(n)]

    b_twin = B.twin_classes(b_labels)
    a_twin = A.twin_classes(a_labels)
    # Earlier search-order nodes in the same A twin class: the image order of
    # a twin group can be fixed without losing any distinct solution.
    a_twin_prior = [[j for j in range(i) if a_twin[j] == a_twin[i]] for i in range(n)]

    # Edges incident to node i whose other endpoint comes earlier in the order:
    # their fate is decided the moment i is assigned.
    earlier_adj = [sorted(j for j in A.adj[i] if j < i) for i in range(n)]
    # a_remaining_edges[i] = edges with at least one endpoint at position >= i;
    # every edge is counted once, at its later endpoint.
    a_remaining_edges = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        a_remaining_edges[i] = a_remaining_edges[i + 1] + len(earlier_adj[i])

    min_edge = min(cost.edge_delete, cost.edge_insert)
    min_node = min(cost.node_insert, cost.node_delete)
    unit_labels = cost.taxonomy is None

    def lower_bound(next_i: int, used: frozenset[int], used_b_edges: int) -> float:
        rem_a = n - next_i
        rem_b = m - len(used)
        if unit_labels:
            counts: dict = {}
            for i in range(next_i, n):
                counts[a_labels[i]] = counts.get(a_labels[i], 0) + 1
            overlap = 0
            for j in range(m):
                if j not in used:
                    have = counts.get(b_labels[j], 0)
                    if have > 0:
                        counts[b_labels[j]] = have - 1
                        overlap += 1
            node_lb = (max(rem_a, rem_b) - overlap) * min(
                1.0, cost.node_insert, cost.node_delete
            )
        else:
            node_lb = abs(rem_a - rem_b) * min_node
        edge_lb = abs(a_remaining_edges[next_i] - (B.edge_count - used_b_edges)) * min_edge
        return node_lb + edge_lb

    incumbent = ged_upper_bound(a, b, cost)
    best_value = incumbent.value
    best_mapping: dict[str, str | None] | None = None

    def finish(mapping_indices: tuple[int, ...], g: float) -> None:
        """Complete a full A assignment with the forced B insertions."""
        nonlocal best_value, best_mapping
        used = set(x for x in mapping_indices if x >= 0)
        total = g + cost.node_insert * (m - len(used))
        for p in range(m):
            for q in B.adj[p]:
                if q < p:
                    continue
                if p in used and q in used:
                    continue
                total += cost.edge_insert
        if total < best_value - 1e-12:
            best_value = total
            best_mapping = {
                A.ids[i]: (B.ids[j] if j >= 0 else None)
                for i, j in enumerate(mapping_indices)
            }

    explored = 0
    counter = itertools.count()

    if n == 0:
        finish((), 0.0)
        path = path_from_mapping(a, b, best_mapping or {}, cost)
        return DistanceResult(value=path.total_cost, exact=True, path=path,
                              explored_states=0)

    # Heap entries: (f, lower bound, assigned count, sequence, g, mapping,
    # used-B frozenset, matched/inserted B edge count so far).
    start_lb = lower_bound(0, frozenset(), 0)
    heap = [(start_lb, start_lb, 0, next(counter), 0.0, (), frozenset(), 0)]
    exceeded = False

    while heap:
        f, lb, depth, _, g, mapping, used, used_b_edges = heapq.heappop(heap)
        if f >= best_value - 1e-12:
            # Everything left in the frontier is at least as expensive as the
            # incumbent, which is achievable: the incumbent is optimal.
            break
        explored += 1
        if explored > budget.max_states:
            exceeded = True
            break
        i = depth

        candidates: list[tuple[float, int, int]] = []  # (delta_g, j, b_edges_touched)

        # Deletion branch.
        delete_delta = cost.node_delete + cost.edge_delete * len(earlier_adj[i])
        candidates.append((delete_delta, -1, 0))

        floor = -1
        blocked = False
        for j in a_twin_prior[i]:
            image = mapping[j]
            if image < 0:
                blocked = True  # an earlier twin was deleted; so must this one be
            else:
                floor = max(floor, image)
        if not blocked:
            seen_classes: set[int] = set()
            for j in range(m):
                if j in used or j <= floor:
                    continue
                if b_twin[j] in seen_classes:
                    continue
                seen_classes.add(b_twin[j])
                delta = sub_cost[i][j]
                touched = 0
                for k in earlier_adj[i]:
                    image = mapping[k]
                    if image >= 0 and image in B.adj[j]:
                        touched += 1
                    else:
                        delta += cost.edge_delete
                # Edges in B between j and already-used nodes that are NOT
                # matched by an A edge must be inserted.
                for q in B.adj[j]:
                    if q in used:
                        pre = mapping.index(q)
                        if pre not in A.adj[i]:
                            delta += cost.edge_insert
                            touched += 1
                candidates.append((delta, j, touched))

        for delta, j, touched in candidates:
            new_mapping = mapping + (j,)
            new_used = used | {j} if j >= 0 else used
            new_g = g + delta
            new_edges = used_b_edges + touched
            if i + 1 == n:
                finish(new_mapping, new_g)
                continue
            new_lb = lower_bound(i + 1, new_used, new_edges)
            new_f = new_g + new_lb
            if new_f >= best_value - 1e-12:
                continue
            heapq.heappush(
                heap,
                (new_f, new_lb, i + 1, next(counter), new_g, new_mapping,
                 new_used, new_edges),
            )

    if exceeded:
        return DistanceResult(
            value=best_value,
            exact=False,
            path=path_from_mapping(a, b, best_mapping, cost) if best_mapping else incumbent.path,
            explored_states=explored,
            budget_exceeded=True,
        )

    if best_mapping is not None:
        path = path_from_mapping(a, b, best_mapping, cost)
        value = path.total_cost
    else:
        path = incumbent.path
        value = incumbent.value
    return DistanceResult(value=value, exact=True, path=path, explored_states=explored)


# --- assignment upper bound ---------------------------------------------------


def _induced_value(a, b, mapping, cost) -> float:
    b_nodes = {n.id: n for n in b.nodes}
    inverse = {t: s for s, t in mapping.items() if t is not None}
    a_edges = _edge_sets(a)
    b_edges = _edge_sets(b)
    total = 0.0
    for node in a.nodes:
        target = mapping[node.id]
        total += cost.node_delete if target is None else cost.node_substitute(node, b_nodes[target])
    total += cost.node_insert * sum(1 for x in b.nodes if x.id not in inverse)
    for edge in a_edges:
        u, v = tuple(edge)
        mu, mv = mapping[u], mapping[v]
        if mu is None or mv is None or frozenset((mu, mv)) not in b_edges:
            total += cost.edge_delete
    for edge in b_edges:
        p, q = tuple(edge)
        if p not in inverse or q not in inverse or frozenset((inverse[p], inverse[q])) not in a_edges:
            total += cost.edge_insert
    return total


def _refine_mapping(a, b, mapping, cost) -> dict[str, str | None]:
    """Greedy pairwise improvement of an assignment.

    Swaps images of two source nodes, or retargets one source to an unmatched
    destination, while the induced cost keeps dropping.  Deterministic: scans
    in node order, applies the first improving move, bounded pass count.
    """
    a_ids = [n.id for n in a.nodes]
    current = dict(mapping)
    value = _induced_value(a, b, current, cost)
    for _ in range(8):
        improved = False
        unmatched = [x.id for x in b.nodes if x.id not in set(current.values())]
        for idx, u in enumerate(a_ids):
            for v in a_ids[idx + 1:]:
                if current[u] == current[v]:
                    continue
                trial = dict(current)
                trial[u], trial[v] = trial[v], trial[u]
                trial_value = _induced_value(a, b, trial, cost)
                if trial_value < value - 1e-12:
                    current, value = trial, trial_value
                    improved = True
            for fresh in unmatched:
                trial = dict(current)
                trial[u] = fresh
                trial_value = _induced_value(a, b, trial, cost)
                if trial_value < value - 1e-12:
                    current, value = trial, trial_value
                    unmatched = [x.id for x in b.nodes if x.id not in set(current.values())]
                    improved = True
        if not improved:
            break
    return current


def ged_upper_bound(
    a: RobotMorphology, b: RobotMorphology, cost: CostModel | None = None
) -> DistanceResult:
    """Assignment-based upper bound on the edit distance.

    Builds the square (n+m) cost matrix with delete/insert dummies (dummy
    cost = node removal plus half the incident edge work), solves it with the
    Hungarian method, then returns the true induced cost of that mapping.
    An identity mapping (when node ids coincide) seeds the candidate pool, so
    comparing a graph with itself reports zero.
    """
    cost = cost or CostModel()
    n, m = len(a.nodes), len(b.nodes)
    if n == 0 and m == 0:
        return DistanceResult(value=0.0, exact=False,
                              path=EditPath(ops=(), total_cost=0.0))

    deg_a = {nid: len(neigh) for nid, neigh in a.adjacency().items()}
    deg_b = {nid: len(neigh) for nid, neigh in b.adjacency().items()}
    big = (
        (n + m)
        * (1.0 + max(cost.node_insert, cost.node_delete, cost.edge_insert,
                     cost.edge_delete, 1.0))
        * (1 + max([*deg_a.values(), *deg_b.values()], default=1))
    )

    matrix = np.full((n + m, n + m), big, dtype=float)
    for i, na in enumerate(a.nodes):
        for j, nb in enumerate(b.nodes):
            da, db = deg_a[na.id], deg_b[nb.id]
            edge_estimate = 0.5 * (
                max(0, da - db) * cost.edge_delete + max(0, db - da) * cost.edge_insert
            )
            matrix[i, j] = cost.node_substitute(na, nb) + edge_estimate
        matrix[i, m + i] = cost.node_delete + 0.5 * deg_a[na.id] * cost.edge_delete
    for j, nb in enumerate(b.nodes):
        matrix[n + j, j] = cost.node_insert + 0.5 * deg_b[nb.id] * cost.edge_insert
    matrix[n:, m:] = 0.0

    rows, cols = linear_sum_assignment(matrix)
    mapping: dict[str, str | None] = {}
    for r, c in zip(rows, cols):
        if r < n:
            mapping[a.nodes[r].id] = b.nodes[c].id if c < m else None

    candidates = [mapping]
    a_ids = {x.id for x in a.nodes}
    b_ids = {x.id for x in b.nodes}
    if a_ids == b_ids:
        candidates.append({nid: nid for nid in a_ids})

    best = min(candidates, key=lambda mp: _induced_value(a, b, mp, cost))
    if n + m <= _REFINE_NODE_LIMIT:
        best = _refine_mapping(a, b, best, cost)

    path = path_from_mapping(a, b, best, cost)
    return DistanceResult(value=path.total_cost, exact=False, path=path)
