"""Undirected graphs: construction, mutations, centrality, and the
decomposition of arbitrary graphs into prime components with complete
separators.

Nodes are labelled 1..p in every public signature and file format; the
internal adjacency matrix is 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Graph",
    "Decomposition",
    "new_graph",
    "flip_edge",
    "degree_sequence",
    "betweenness",
    "prime_components",
    "read_edge_list",
    "write_edge_list",
]


class Graph:
    """Immutable simple undirected graph on ``p`` labelled nodes.

    Stores a symmetric 0/1 adjacency matrix with zero diagonal.  Instances
    hash and compare by content, so they can key caches directly.
    """

    __slots__ = ("p", "_adj")

    def __init__(self, adjacency):
        adj = np.asarray(adjacency)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if adj.shape[0] < 1:
            raise ValueError("graph needs at least one node")
        adj = (adj != 0).astype(np.uint8)
        if np.any(np.diagonal(adj)):
            raise ValueError("adjacency diagonal must be zero (no self-loops)")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        adj.setflags(write=False)
        object.__setattr__(self, "p", int(adj.shape[0]))
        object.__setattr__(self, "_adj", adj)

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("Graph is immutable")

    @classmethod
    def _from_valid(cls, adj: np.ndarray) -> "Graph":
        """Wrap an adjacency matrix already known to be valid (hot paths)."""
        g = object.__new__(cls)
        adj = adj.copy()
        adj.setflags(write=False)
        object.__setattr__(g, "p", int(adj.shape[0]))
        object.__setattr__(g, "_adj", adj)
        return g

    @property
    def adjacency(self) -> np.ndarray:
        """Read-only p x p uint8 adjacency matrix."""
        return self._adj

    @property
    def edge_count(self) -> int:
        return int(self._adj.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Edges as 1-based (i, j) pairs with i < j."""
        ii, jj = np.nonzero(np.triu(self._adj, 1))
        return [(int(i) + 1, int(j) + 1) for i, j in zip(ii, jj)]

    def has_edge(self, i: int, j: int) -> bool:
        a, b = _check_pair(self.p, i, j)
        return bool(self._adj[a, b])

    def key(self) -> bytes:
        """Canonical byte encoding, suitable as a cache key."""
        return self._adj.tobytes()

    def __eq__(self, other):
        return isinstance(other, Graph) and self.p == other.p and np.array_equal(self._adj, other._adj)

    def __hash__(self):
        return hash((self.p, self._adj.tobytes()))

    def __repr__(self):
        return f"Graph(p={self.p}, edges={self.edge_count})"


def _check_pair(p: int, i: int, j: int) -> tuple[int, int]:
    if not (1 <= i <= p and 1 <= j <= p):
        raise ValueError(f"node index out of range: ({i}, {j}) with p={p}")
    if i == j:
        raise ValueError(f"self-loop ({i}, {i}) is not allowed")
    return i - 1, j - 1


def new_graph(p: int, edges=()) -> Graph:
    """Build a graph on ``p`` nodes from 1-based edge pairs.

    Duplicate pairs are idempotent; (i, j) and (j, i) denote the same edge.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    adj = np.zeros((p, p), dtype=np.uint8)
    for i, j in edges:
        a, b = _check_pair(p, int(i), int(j))
        adj[a, b] = adj[b, a] = 1
    return Graph(adj)


def flip_edge(g: Graph, i: int, j: int) -> Graph:
    """Return a copy of ``g`` with the (i, j) edge toggled."""
    a, b = _check_pair(g.p, i, j)
    adj = g.adjacency.copy()
    adj[a, b] = adj[b, a] = 1 - adj[a, b]
    return Graph(adj)


def degree_sequence(g: Graph) -> np.ndarray:
    """Node degrees, indexed by node label order."""
    return g.adjacency.sum(axis=1).astype(np.int64)


def betweenness(g: Graph) -> np.ndarray:
    """Shortest-path betweenness centrality, normalized to [0, 1].

    Brandes' accumulation over BFS trees; the raw pair counts are divided
    by (p-1)(p-2)/2.  Graphs with p < 3 have no interior nodes and return
    all zeros.
    """
    p = g.p
    if p < 3:
        return np.zeros(p)
    adj = g.adjacency
    neighbors = [np.flatnonzero(adj[v]) for v in range(p)]
    cb = np.zeros(p)
    for s in range(p):
        sigma = np.zeros(p)
        sigma[s] = 1.0
        dist = np.full(p, -1)
        dist[s] = 0
        preds: list[list[int]] = [[] for _ in range(p)]
        order = []
        queue = [s]
        head = 0
        while head < len(queue):
            v = queue[head]
            head += 1
            order.append(v)
            for w in neighbors[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = np.zeros(p)
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                cb[w] += delta[w]
    # each unordered pair is seen from both endpoints
    cb /= 2.0
    return cb / ((p - 1) * (p - 2) / 2.0)


@dataclass(frozen=True)
class Decomposition:
    """Perfect sequence of prime components with their separators.

    ``components[l]`` for l >= 1 intersects the union of earlier components
    exactly in ``separators[l-1]``, which always induces a complete subgraph.
    Node labels are 1-based.  ``complete[l]`` flags components that are
    themselves complete.
    """

    components: tuple[tuple[int, ...], ...]
    separators: tuple[tuple[int, ...], ...]
    complete: tuple[bool, ...]

    def __post_init__(self):
        if len(self.separators) != len(self.components) - 1:
            raise ValueError("need exactly one separator per component after the first")


def _bits(mask: int):
    """Iterate set bit positions of an int mask."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _adj_masks(adj: np.ndarray) -> list[int]:
    """Neighbor bitmask per vertex."""
    n = adj.shape[0]
    out = []
    for i in range(n):
        m = 0
        for j in np.flatnonzero(adj[i]):
            m |= 1 << int(j)
        out.append(m)
    return out


def _mcs_m(nb: list[int], verts: list[int]) -> tuple[list[int], dict[int, int], dict[int, int]]:
    """Minimal triangulation by MCS-M on the vertices ``verts``.

    Returns the visit order from first-eliminated to last, the number
    assigned to each vertex (a perfect elimination order of the
    triangulated graph), and the triangulated neighbor masks.
    """
    n = len(verts)
    weight = {v: 0 for v in verts}
    number = {v: 0 for v in verts}
    tri_nb = {v: nb[v] for v in verts}
    unnumbered = 0
    for v in verts:
        unnumbered |= 1 << v
    big = n + 2
    for num in range(n, 0, -1):
        x = max((v for v in verts if number[v] == 0), key=lambda v: (weight[v], -v))
        unnumbered ^= 1 << x
        # minimax internal weight of paths from x through unnumbered vertices
        cost = {v: big for v in _bits(unnumbered)}
        for v in _bits(nb[x] & unnumbered):
            cost[v] = -1
        done = set()
        while True:
            v = None
            best = big
            for u, c in cost.items():
                if u not in done and c < best:
                    best, v = c, u
            if v is None or best >= big:
                break
            done.add(v)
            through = max(best, weight[v])
            for w in _bits(nb[v] & unnumbered):
                if through < cost[w]:
                    cost[w] = through
        for y, c in cost.items():
            if c < weight[y]:
                weight[y] += 1
                if not (nb[x] >> y) & 1:
                    tri_nb[x] |= 1 << y
                    tri_nb[y] |= 1 << x
        number[x] = num
    order = sorted(verts, key=lambda v: number[v])
    return order, number, tri_nb


def _component_bits(nb: list[int], start: int, allowed: int) -> int:
    """Connected component of ``start`` within the ``allowed`` vertex mask."""
    comp = 1 << start
    frontier = comp
    while frontier:
        new = 0
        for v in _bits(frontier):
            new |= nb[v] & allowed
        new &= ~comp
        comp |= new
        frontier = new
    return comp


def _is_clique_bits(nb: list[int], mask: int) -> bool:
    for v in _bits(mask):
        if (nb[v] | (1 << v)) & mask != mask:
            return False
    return True


def _atom_sequence(nb: list[int], verts: list[int]) -> tuple[list[int], list[int]]:
    """Perfect sequence of atoms for a connected vertex set, as bitmasks.

    Splits off atoms at clique minimal separators found as the
    higher-numbered triangulated neighborhoods along an MCS-M order, then
    reverses the splitting order, which makes every separator a subset of
    the union of earlier components.
    """
    order, number, tri_nb = _mcs_m(nb, verts)
    higher = {}
    for v in verts:
        m = 0
        for u in verts:
            if number[u] > number[v]:
                m |= 1 << u
        higher[v] = m
    remaining = 0
    for v in verts:
        remaining |= 1 << v
    atoms: list[int] = []
    seps: list[int] = []
    for x in order:
        if not (remaining >> x) & 1:
            continue
        sep = tri_nb[x] & remaining & higher[x]
        if not _is_clique_bits(nb, sep):
            continue
        comp = _component_bits(nb, x, remaining & ~sep)
        piece = comp | sep
        if piece != remaining:
            atoms.append(piece)
            seps.append(sep)
            remaining &= ~comp
    atoms.append(remaining)
    return atoms[::-1], seps[::-1]


def prime_components(g: Graph) -> Decomposition:
    """Decompose ``g`` into a perfect sequence of prime components.

    Connected components are processed independently and joined with empty
    separators; every non-trivial separator is a clique minimal separator
    of the input graph.
    """
    adj = g.adjacency
    p = g.p
    nb = _adj_masks(adj)
    unassigned = (1 << p) - 1
    components: list[tuple[int, ...]] = []
    separators: list[tuple[int, ...]] = []
    while unassigned:
        start = (unassigned & -unassigned).bit_length() - 1
        comp_mask = _component_bits(nb, start, unassigned)
        unassigned &= ~comp_mask
        verts = list(_bits(comp_mask))
        atoms, seps = _atom_sequence(nb, verts)
        first_of_block = len(components)
        for atom in atoms:
            components.append(tuple(v + 1 for v in _bits(atom)))
        block_seps = [tuple(v + 1 for v in _bits(s)) for s in seps]
        if first_of_block > 0:
            separators.append(())
        separators.extend(block_seps)
    complete = []
    for comp in components:
        mask = 0
        for v in comp:
            mask |= 1 << (v - 1)
        complete.append(_is_clique_bits(nb, mask))
    return Decomposition(tuple(components), tuple(separators), tuple(complete))


def read_edge_list(path, p: int) -> Graph:
    """Read the 1-based ``i j`` per-line edge format."""
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'i j', got {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
    return new_graph(p, edges)


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in g.edges():
            fh.write(f"{i} {j}\n")
