"""Bayesian networks, d-separation and classification of side information.

Graphs are small, immutable DAGs over string node ids.  ``d_separated`` uses
the reachability ("Bayes ball") algorithm; ``enumerate_trails`` plus
``trail_blocked`` give an independent brute-force check.

Graph text format, one statement per line (``#`` starts a comment)::

    node X
    edge A B      # directed edge A -> B
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable


class GraphError(ValueError):
    """Invalid graph, unknown node or malformed query."""


class BayesNet:
    """Directed acyclic graph with optional human-readable node names."""

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable[tuple[str, str]] = (),
                 names: dict[str, str] | None = None):
        order: list[str] = []
        seen = set()
        for node in nodes:
            if node not in seen:
                seen.add(node)
                order.append(node)
        edge_list = []
        for a, b in edges:
            if a == b:
                raise GraphError(f"self-loop on {a!r}")
            if (a, b) in edge_list:
                raise GraphError(f"duplicate edge {a!r} -> {b!r}")
            edge_list.append((a, b))
            for v in (a, b):
                if v not in seen:
                    seen.add(v)
                    order.append(v)
        self._nodes = tuple(order)
        self._edges = tuple(edge_list)
        self._parents = {v: [] for v in order}
        self._children = {v: [] for v in order}
        for a, b in edge_list:
            self._children[a].append(b)
            self._parents[b].append(a)
        self.names = dict(names or {})
        self._topo = self._toposort()

    def _toposort(self) -> tuple[str, ...]:
        indeg = {v: len(p) for v, p in self._parents.items()}
        queue = deque(v for v in self._nodes if indeg[v] == 0)
        out = []
        while queue:
            v = queue.popleft()
            out.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if len(out) != len(self._nodes):
            cyclic = sorted(v for v in self._nodes if indeg[v] > 0)
            raise GraphError(f"graph has a directed cycle through {cyclic}")
        return tuple(out)

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return self._edges

    def __contains__(self, node) -> bool:
        return node in self._parents

    def __repr__(self):
        return f"BayesNet(nodes={list(self._nodes)}, edges={list(self._edges)})"

    def parents(self, node: str) -> tuple[str, ...]:
        return tuple(self._parents[node])

    def children(self, node: str) -> tuple[str, ...]:
        return tuple(self._children[node])

    def has_edge(self, a: str, b: str) -> bool:
        return b in self._children.get(a, ())

    def neighbors(self, node: str) -> tuple[str, ...]:
        return tuple(self._parents[node]) + tuple(self._children[node])

    def descendants(self, node: str) -> set[str]:
        """Strict descendants of ``node``."""
        out: set[str] = set()
        stack = list(self._children[node])
        while stack:
            v = stack.pop()
            if v not in out:
                out.add(v)
                stack.extend(self._children[v])
        return out

    def ancestors(self, nodes: Iterable[str]) -> set[str]:
        """``nodes`` together with all their ancestors."""
        out: set[str] = set()
        stack = list(nodes)
        while stack:
            v = stack.pop()
            if v not in out:
                out.add(v)
                stack.extend(self._parents[v])
        return out

    def with_edges(self, extra: Iterable[tuple[str, str]]) -> "BayesNet":
        return BayesNet(self._nodes, list(self._edges) + list(extra), self.names)

    # text I/O

    @classmethod
    def from_text(cls, text: str) -> "BayesNet":
        nodes, edges = [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "node" and len(parts) == 2:
                nodes.append(parts[1])
            elif parts[0] == "edge" and len(parts) == 3:
                edges.append((parts[1], parts[2]))
            else:
                raise GraphError(f"line {lineno}: cannot parse {raw!r}")
        return cls(nodes, edges)

    @classmethod
    def read(cls, path) -> "BayesNet":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        lines = [f"node {v}" for v in self._nodes]
        lines += [f"edge {a} {b}" for a, b in self._edges]
        return "\n".join(lines) + "\n"


def _node_set(bn: BayesNet, nodes, what: str) -> frozenset:
    if isinstance(nodes, str):
        nodes = (nodes,)
    nodes = frozenset(nodes)
    unknown = [v for v in nodes if v not in bn]
    if unknown:
        raise GraphError(f"unknown {what} node(s): {sorted(unknown)}")
    return nodes


def _check_query(bn, x, y, z):
    x = _node_set(bn, x, "source")
    y = _node_set(bn, y, "target")
    z = _node_set(bn, z, "conditioning")
    if x & y or x & z or y & z:
        raise GraphError("query node sets must be pairwise disjoint")
    return x, y, z


def d_connected_nodes(bn: BayesNet, x, z) -> set[str]:
    """Nodes reachable from ``x`` along a trail that is active given ``z``."""
    x = _node_set(bn, x, "source")
    z = _node_set(bn, z, "conditioning")
    anc_z = bn.ancestors(z)
    # direction "up": entered from a child; "down": entered from a parent
    queue = deque((v, "up") for v in x)
    visited = set()
    reachable = set()
    while queue:
        v, d = queue.popleft()
        if (v, d) in visited:
            continue
        visited.add((v, d))
        if v not in z:
            reachable.add(v)
        if d == "up" and v not in z:
            queue.extend((p, "up") for p in bn.parents(v))
            queue.extend((c, "down") for c in bn.children(v))
        elif d == "down":
            if v not in z:
                queue.extend((c, "down") for c in bn.children(v))
            if v in anc_z:
                queue.extend((p, "up") for p in bn.parents(v))
    return reachable - set(x)


def d_separated(bn: BayesNet, x, y, z=()) -> bool:
    """Whether node sets ``x`` and ``y`` are d-separated given ``z``."""
    x, y, z = _check_query(bn, x, y, z)
    return not (d_connected_nodes(bn, x, z) & y)


def enumerate_trails(bn: BayesNet, x: str, y: str) -> list[tuple[str, ...]]:
    """All simple paths between ``x`` and ``y`` in the skeleton of ``bn``."""
    _node_set(bn, (x, y), "trail endpoint")
    if x == y:
        return []
    out = []
    path = [x]
    on_path = {x}

    def walk(v):
        for w in sorted(set(bn.neighbors(v))):
            if w in on_path:
                continue
            if w == y:
                out.append(tuple(path) + (y,))
                continue
            path.append(w)
            on_path.add(w)
            walk(w)
            path.pop()
            on_path.discard(w)

    walk(x)
    return out


def is_collider(bn: BayesNet, a: str, c: str, b: str) -> bool:
    return bn.has_edge(a, c) and bn.has_edge(b, c)


def trail_blocked(bn: BayesNet, trail, z) -> bool:
    """Apply the triplet rules to every interior node of ``trail``."""
    z = frozenset(z)
    for a, c, b in zip(trail, trail[1:], trail[2:]):
        if is_collider(bn, a, c, b):
            if c not in z and not (bn.descendants(c) & z):
                return True
        elif c in z:
            return True
    return False


def d_separated_bruteforce(bn: BayesNet, x, y, z=()) -> bool:
    """Trail-enumeration oracle for ``d_separated``."""
    x, y, z = _check_query(bn, x, y, z)
    return all(trail_blocked(bn, t, z) for a in x for b in y for t in enumerate_trails(bn, a, b))


def format_trail(bn: BayesNet, trail) -> str:
    """Render a trail with its arrow directions, e.g. ``beta -> H <- Xi``."""
    parts = [trail[0]]
    for a, b in zip(trail, trail[1:]):
        parts.append("->" if bn.has_edge(a, b) else "<-")
        parts.append(b)
    return " ".join(parts)


# --------------------------------------------------------------------------
# side information


class SideInfoClass(enum.Enum):
    STRUCTURE_PRESERVING = "StructurePreserving"
    DIRECT_INFERENCE = "DirectInference"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SideInfoRoles:
    """Which nodes play the phase, parameter, channel and side-information roles.

    ``observed`` lists nodes conditioned on in addition to ``xi`` and ``z``.
    """

    beta: str = "beta"
    xi: str = "Xi"
    h: str = "H"
    z: str = "z"
    observed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "observed", frozenset(self.observed))
        ids = (self.beta, self.xi, self.h, self.z)
        if len(set(ids)) != 4:
            raise GraphError(f"role nodes must be distinct, got {ids}")

    def validate(self, bn: BayesNet):
        _node_set(bn, (self.beta, self.xi, self.h, self.z), "role")
        _node_set(bn, self.observed, "observed")
        if self.h in self.observed:
            raise GraphError("the channel node must not be observed")
        if self.beta in self.observed:
            raise GraphError("the phase node must not be observed")


@dataclass
class Classification:
    kind: SideInfoClass
    trails: list[str]

    def __str__(self):
        return "\n".join([str(self.kind)] + self.trails)


def classify_side_info(bn: BayesNet, roles: SideInfoRoles) -> Classification:
    """Decide whether side information preserves the zero-mean/Toeplitz structure.

    The structure is preserved when the phases are d-separated from the joint
    (parameters, side information) given the remaining observed nodes, since
    then the phases stay uniformly distributed after conditioning.  Otherwise
    the active trails are returned: for each of ``xi`` and ``z``, the trails to
    the phase node that are unblocked when the other one is observed too.
    """
    roles.validate(bn)
    targets = (roles.xi, roles.z)
    rest = roles.observed - set(targets)
    if d_separated(bn, {roles.beta}, set(targets), rest):
        return Classification(SideInfoClass.STRUCTURE_PRESERVING, [])
    trails = []
    for t in targets:
        given = rest | (set(targets) - {t})
        for trail in enumerate_trails(bn, roles.beta, t):
            if not trail_blocked(bn, trail, given):
                trails.append(format_trail(bn, trail))
    return Classification(SideInfoClass.DIRECT_INFERENCE, trails)


def collider_graph() -> BayesNet:
    """``A -> C <- B``, ``C -> D``."""
    return BayesNet(edges=[("A", "C"), ("B", "C"), ("C", "D")])


def sensing_graph() -> BayesNet:
    """Side information informs the parameters and the channel but does not observe it."""
    return BayesNet(edges=[("z", "Xi"), ("z", "H"), ("Xi", "H"), ("beta", "H")])


def direct_inference_graph() -> BayesNet:
    """Side information is an observation of the channel."""
    return BayesNet(edges=[("Xi", "H"), ("beta", "H"), ("H", "z")])
