"""Graph representation, structure analysis and subcubic reductions.

Vertices are dense integers 0..n-1.  Adjacency is kept both as sorted
neighbour tuples and (for n <= 64) as per-vertex bitmasks, which is what the
exact enumeration engines operate on.  Everything here is immutable after
construction and safe to share across threads.

The reduction machinery (`reduce_subcubic`) turns a connected subcubic graph
into a tree of constructions whose leaves are cubic graphs, recording vertex
maps so that colourings of the leaves can be pulled back mechanically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence


class GraphError(ValueError):
    """Malformed graph input or violated structural precondition."""


class GuardExceeded(RuntimeError):
    """A configured size guard was exceeded (desk-scale limits)."""


class Graph:
    """Immutable simple undirected graph on vertices 0..n-1."""

    __slots__ = ("n", "edges", "adj", "adj_mask", "_hash")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 0:
            raise GraphError("vertex count must be nonnegative")
        self.n = n
        seen = set()
        canon = []
        for e in edges:
            u, v = e
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"vertex index out of range in edge {e!r}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise GraphError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            canon.append((u, v))
        canon.sort()
        self.edges = tuple(canon)
        lists: list[list[int]] = [[] for _ in range(n)]
        for u, v in canon:
            lists[u].append(v)
            lists[v].append(u)
        self.adj = tuple(tuple(sorted(l)) for l in lists)
        if n <= 64:
            masks = [0] * n
            for u, v in canon:
                masks[u] |= 1 << v
                masks[v] |= 1 << u
            self.adj_mask = tuple(masks)
        else:
            self.adj_mask = None
        self._hash = hash((n, self.edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adj)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


# ---------------------------------------------------------------------------
# Text formats


def parse_edge_list(text: str) -> Graph:
    """Parse the plain edge-list format: first line ``n m``, then m lines ``u v``.

    Blank lines and lines starting with ``#`` are ignored.  Errors carry the
    1-based line number of the offending input line.
    """
    lines = text.splitlines()
    header = None
    header_no = 0
    rows: list[tuple[int, str]] = []
    for i, raw in enumerate(lines, start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        if header is None:
            header = s
            header_no = i
        else:
            rows.append((i, s))
    if header is None:
        raise GraphError("empty edge-list text")
    parts = header.split()
    if len(parts) != 2:
        raise GraphError(f"line {header_no}: header must be 'n m'")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphError(f"line {header_no}: header must be two integers") from None
    if n < 0 or m < 0:
        raise GraphError(f"line {header_no}: negative count in header")
    if len(rows) != m:
        raise GraphError(f"expected {m} edge lines, found {len(rows)}")
    edges = []
    seen = set()
    for lineno, s in rows:
        toks = s.split()
        if len(toks) != 2:
            raise GraphError(f"line {lineno}: expected two integers")
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError:
            raise GraphError(f"line {lineno}: expected two integers") from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"line {lineno}: vertex index out of range")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"line {lineno}: duplicate edge")
        seen.add(key)
        edges.append(key)
    return Graph(n, edges)


def to_edge_list_text(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(out) + "\n"


def parse_graph6(text: str) -> Graph:
    """Decode one graph in graph6 format (short form, n <= 62)."""
    s = text.strip()
    if s.startswith(">>graph6<<"):
        s = s[len(">>graph6<<"):]
    if not s:
        raise GraphError("empty graph6 text")
    data = s.encode("ascii", errors="strict") if isinstance(s, str) else s
    first = data[0] - 63
    if data[0] == 0x7E:  # '~' introduces the long form
        raise GraphError("graph6 long form (n > 62) not supported")
    if not (0 <= first <= 62):
        raise GraphError(f"bad graph6 header byte {data[0]!r}")
    n = first
    nbits = n * (n - 1) // 2
    nbytes = (nbits + 5) // 6
    body = data[1:]
    if len(body) < nbytes:
        raise GraphError("truncated graph6 bit field")
    if len(body) > nbytes:
        raise GraphError("trailing data after graph6 bit field")
    bits = []
    for b in body:
        x = b - 63
        if not (0 <= x <= 63):
            raise GraphError(f"bad graph6 data byte {b!r}")
        for k in range(5, -1, -1):
            bits.append((x >> k) & 1)
    edges = []
    idx = 0
    for j in range(1, n):
        for i in range(j):
            if bits[idx]:
                edges.append((i, j))
            idx += 1
    return Graph(n, edges)


def encode_graph6(g: Graph) -> str:
    """Encode in graph6 short form (requires n <= 62)."""
    if g.n > 62:
        raise GraphError("graph6 short form supports n <= 62 only")
    bits = []
    for j in range(1, g.n):
        for i in range(j):
            bits.append(1 if g.has_edge(i, j) else 0)
    while len(bits) % 6:
        bits.append(0)
    out = [chr(g.n + 63)]
    for k in range(0, len(bits), 6):
        x = 0
        for b in bits[k : k + 6]:
            x = (x << 1) | b
        out.append(chr(x + 63))
    return "".join(out)


# ---------------------------------------------------------------------------
# Structure analysis


@dataclass(frozen=True)
class StructureReport:
    """Validation flags plus witnesses, JSON-serializable."""

    n: int
    m: int
    is_connected: bool
    is_subcubic: bool
    is_cubic: bool
    is_triangle_free: bool
    is_bridgeless: bool
    triangle_witness: Optional[tuple[int, int, int]]
    bridge_list: tuple[tuple[int, int], ...]
    block_decomposition: tuple[tuple[int, ...], ...]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "is_connected": self.is_connected,
            "is_subcubic": self.is_subcubic,
            "is_cubic": self.is_cubic,
            "is_triangle_free": self.is_triangle_free,
            "is_bridgeless": self.is_bridgeless,
            "triangle_witness": list(self.triangle_witness)
            if self.triangle_witness
            else None,
            "bridge_list": [list(e) for e in self.bridge_list],
            "block_decomposition": [list(b) for b in self.block_decomposition],
        }


def _components(g: Graph) -> list[list[int]]:
    seen = [False] * g.n
    comps = []
    for start in range(g.n):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        stack = [start]
        while stack:
            u = stack.pop()
            for w in g.adj[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def _find_triangle(g: Graph) -> Optional[tuple[int, int, int]]:
    for u, v in g.edges:
        nu = set(g.adj[u])
        for w in g.adj[v]:
            if w != u and w in nu:
                return tuple(sorted((u, v, w)))  # type: ignore[return-value]
    return None


def _blocks_and_bridges(
    g: Graph,
) -> tuple[list[tuple[int, ...]], list[tuple[int, int]]]:
    """Iterative biconnected-component decomposition (Hopcroft–Tarjan)."""
    n = g.n
    disc = [-1] * n
    low = [0] * n
    timer = 0
    edge_stack: list[tuple[int, int]] = []
    blocks: list[tuple[int, ...]] = []
    bridges: list[tuple[int, int]] = []

    for root in range(n):
        if disc[root] != -1:
            continue
        if not g.adj[root]:  # isolated vertex: a trivial block of its own
            disc[root] = timer
            timer += 1
            blocks.append((root,))
            continue
        # Frame: [vertex, parent, next-neighbour index, parent edge skipped?]
        stack: list[list] = [[root, -1, 0, False]]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            frame = stack[-1]
            u = frame[0]
            if frame[2] < len(g.adj[u]):
                w = g.adj[u][frame[2]]
                frame[2] += 1
                if w == frame[1] and not frame[3]:
                    frame[3] = True  # skip the single tree edge to the parent
                    continue
                if disc[w] == -1:
                    edge_stack.append((u, w))
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append([w, u, 0, False])
                elif disc[w] < disc[u]:
                    edge_stack.append((u, w))
                    if disc[w] < low[u]:
                        low[u] = disc[w]
            else:
                stack.pop()
                if not stack:
                    break
                p = stack[-1][0]
                if low[u] < low[p]:
                    low[p] = low[u]
                if low[u] >= disc[p]:
                    # p closes a block: pop up to and including tree edge (p,u).
                    verts: set[int] = set()
                    nedges = 0
                    while True:
                        a, b = edge_stack.pop()
                        nedges += 1
                        verts.add(a)
                        verts.add(b)
                        if (a, b) == (p, u):
                            break
                    blocks.append(tuple(sorted(verts)))
                    if nedges == 1:
                        bridges.append((min(p, u), max(p, u)))
    blocks.sort()
    bridges.sort()
    return blocks, bridges


def analyze(g: Graph) -> StructureReport:
    """Compute all class flags, bridges and blocks for ``g``."""
    degs = g.degrees()
    is_subcubic = all(d <= 3 for d in degs)
    is_cubic = g.n > 0 and all(d == 3 for d in degs)
    witness = _find_triangle(g)
    blocks, bridges = _blocks_and_bridges(g)
    return StructureReport(
        n=g.n,
        m=g.m,
        is_connected=len(_components(g)) <= 1,
        is_subcubic=is_subcubic,
        is_cubic=is_cubic,
        is_triangle_free=witness is None,
        is_bridgeless=not bridges,
        triangle_witness=witness,
        bridge_list=tuple(bridges),
        block_decomposition=tuple(blocks),
    )


def boundary(g: Graph, X: Iterable[int]) -> tuple[tuple[int, int], ...]:
    """Edges with exactly one endvertex in X, sorted canonically."""
    xs = set(X)
    for v in xs:
        if not (0 <= v < g.n):
            raise GraphError(f"vertex {v} out of range")
    return tuple(e for e in g.edges if (e[0] in xs) != (e[1] in xs))


# ---------------------------------------------------------------------------
# Subcubic reductions


@dataclass(frozen=True)
class ReductionStep:
    """One node of the reduction tree.

    kind:
      - ``none``: leaf; ``detail['leaf']`` is one of ``cubic-bridgeless``,
        ``one-bridge`` (the doubled single-degree-2 construction, which keeps
        its connecting edge) or ``trivial`` (n <= 3).
      - ``bridge-split``: two children, the sides of a bridge.
      - ``degree2-double``: one child, two copies joined at degree-2 copies.
      - ``degree2-single``: one child, two copies joined at the unique
        degree-2 vertex.

    ``child_maps[i][v]`` is the parent vertex that child vertex ``v``
    projects to.
    """

    kind: str
    graph: Graph
    children: tuple["ReductionStep", ...] = ()
    child_maps: tuple[tuple[int, ...], ...] = ()
    detail: dict = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return self.kind == "none"

    def leaves(self) -> Iterator["ReductionStep"]:
        if self.is_leaf:
            yield self
        else:
            for c in self.children:
                yield from c.leaves()


def _double_graph(g: Graph, link_vertices: Sequence[int]) -> Graph:
    """Two disjoint copies of g plus an edge between the copies of each
    vertex in ``link_vertices`` (copy ids: v and n+v)."""
    n = g.n
    edges = list(g.edges)
    edges += [(u + n, v + n) for u, v in g.edges]
    edges += [(v, v + n) for v in link_vertices]
    return Graph(2 * n, edges)


def suppress_vertex(g: Graph, v0: int) -> tuple[Graph, tuple[int, ...]]:
    """Remove a degree-2 vertex and join its two neighbours by an edge.

    Returns the smaller graph and a map new-id -> old-id.  Requires the
    neighbours to be non-adjacent (guaranteed for triangle-free input).
    """
    if g.degree(v0) != 2:
        raise GraphError(f"vertex {v0} does not have degree 2")
    a, b = g.adj[v0]
    if g.has_edge(a, b):
        raise GraphError("suppression would create a multi-edge")
    old_ids = [v for v in range(g.n) if v != v0]
    new_of = {old: new for new, old in enumerate(old_ids)}
    edges = [
        (new_of[u], new_of[v]) for u, v in g.edges if v0 not in (u, v)
    ]
    edges.append((new_of[a], new_of[b]))
    return Graph(g.n - 1, edges), tuple(old_ids)


def _split_bridge(g: Graph, bridges: list[tuple[int, int]]):
    """Pick a bridge one side of which contains no further bridge."""
    bridge_set = set(bridges)
    for x1, x2 in bridges:
        # component of g - bridge containing x1
        seen = {x1}
        stack = [x1]
        while stack:
            u = stack.pop()
            for w in g.adj[u]:
                if (min(u, w), max(u, w)) == (min(x1, x2), max(x1, x2)):
                    continue
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        side_edges = {
            (u, v) for u, v in g.edges if u in seen and v in seen
        }
        if not (side_edges & bridge_set):
            return (x1, x2), sorted(seen)
    raise GraphError("no bridge with a bridge-free side (impossible)")


def _induced(g: Graph, verts: list[int]) -> tuple[Graph, tuple[int, ...]]:
    new_of = {old: new for new, old in enumerate(verts)}
    edges = [
        (new_of[u], new_of[v])
        for u, v in g.edges
        if u in new_of and v in new_of
    ]
    return Graph(len(verts), edges), tuple(verts)


def reduce_subcubic(g: Graph) -> ReductionStep:
    """Reduction tree for a connected subcubic graph.

    Applies, in order: (a) split at a bridge whose one side is bridge-free;
    (b) if at least two degree-2 vertices exist, join two copies at all of
    them; (c) if exactly one degree-2 vertex exists, join two copies at it
    (the resulting leaf keeps that single connecting edge and is flagged
    ``one-bridge``).  Graphs on at most 3 vertices are trivial leaves.
    """
    report = analyze(g)
    if not report.is_connected:
        raise GraphError("reduce_subcubic requires a connected graph")
    if not report.is_subcubic:
        raise GraphError("reduce_subcubic requires a subcubic graph")

    if g.n <= 3:
        return ReductionStep("none", g, detail={"leaf": "trivial"})

    if report.bridge_list:
        (x1, x2), side = _split_bridge(g, list(report.bridge_list))
        other = sorted(set(range(g.n)) - set(side))
        g1, map1 = _induced(g, side)
        g2, map2 = _induced(g, other)
        child1 = reduce_subcubic(g1)
        child2 = reduce_subcubic(g2)
        return ReductionStep(
            "bridge-split",
            g,
            children=(child1, child2),
            child_maps=(map1, map2),
            detail={"bridge": (x1, x2)},
        )

    deg2 = [v for v in range(g.n) if g.degree(v) == 2]
    if len(deg2) >= 2:
        child_graph = _double_graph(g, deg2)
        child = reduce_subcubic(child_graph)
        cmap = tuple(list(range(g.n)) + list(range(g.n)))
        return ReductionStep(
            "degree2-double",
            g,
            children=(child,),
            child_maps=(cmap,),
            detail={"linked": tuple(deg2)},
        )

    if len(deg2) == 1:
        v0 = deg2[0]
        child_graph = _double_graph(g, [v0])
        # The child keeps its connecting edge; it is terminal by construction
        # (its two-factor is supplied by the pipeline, not re-selected).
        child = ReductionStep(
            "none",
            child_graph,
            detail={"leaf": "one-bridge", "bridge": (v0, v0 + g.n)},
        )
        cmap = tuple(list(range(g.n)) + list(range(g.n)))
        return ReductionStep(
            "degree2-single",
            g,
            children=(child,),
            child_maps=(cmap,),
            detail={"v0": v0, "v0_neighbours": tuple(g.adj[v0])},
        )

    # No bridge, no degree-2 vertex, connected, n >= 4: cubic.
    return ReductionStep("none", g, detail={"leaf": "cubic-bridgeless"})
