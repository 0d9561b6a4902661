"""Two-factor selection, certification and cycle navigation.

A two-factor F is a spanning collection of disjoint cycles; its complement M
(in a cubic graph) is a perfect matching.  The selection rule implemented by
`select_two_factor` keeps only two-factors whose edges meet every
inclusionwise minimal edge-cut of size 3 or 4, and among those maximizes the
number of cycles (ties broken by lexicographically smallest matching).

Everything downstream navigates cycles through `TwoFactor`: mates (matching
partners), signed steps along a cycle, forward distances and subpaths.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .graph_core import Graph, GraphError, GuardExceeded


class TwoFactorError(ValueError):
    """Structurally invalid two-factor data."""


class NoQualifyingTwoFactor(RuntimeError):
    """No enumerated two-factor meets the cut condition (bad input class)."""


class TwoFactor:
    """Immutable two-factor with its complementary perfect matching.

    Cycles are stored in canonical orientation: each cycle starts at its
    minimum vertex and proceeds toward the larger-id of that vertex's two
    cycle neighbours; cycles are sorted by their starting vertex.
    """

    __slots__ = (
        "graph",
        "cycles",
        "mate",
        "cycle_of",
        "pos",
        "f_edges",
        "m_edges",
        "_hash",
    )

    def __init__(
        self,
        g: Graph,
        cycles: Iterable[Sequence[int]],
        matching: Iterable[tuple[int, int]],
    ):
        self.graph = g
        n = g.n

        mate = [-1] * n
        m_edges = set()
        for u, v in matching:
            if not g.has_edge(u, v):
                raise TwoFactorError(f"matching edge ({u}, {v}) not in graph")
            if mate[u] != -1 or mate[v] != -1 or u == v:
                raise TwoFactorError(f"matching is not a matching at ({u}, {v})")
            mate[u], mate[v] = v, u
            m_edges.add((min(u, v), max(u, v)))
        if any(x == -1 for x in mate):
            missing = mate.index(-1)
            raise TwoFactorError(f"matching is not perfect (vertex {missing})")

        canon_cycles = []
        covered = [False] * n
        f_edges = set()
        for cyc in cycles:
            cyc = list(cyc)
            if len(cyc) < 3:
                raise TwoFactorError("cycle shorter than 3")
            for i, u in enumerate(cyc):
                v = cyc[(i + 1) % len(cyc)]
                if not g.has_edge(u, v):
                    raise TwoFactorError(f"cycle edge ({u}, {v}) not in graph")
                e = (min(u, v), max(u, v))
                if e in f_edges:
                    raise TwoFactorError(f"cycle edge ({u}, {v}) repeated")
                f_edges.add(e)
                if covered[u]:
                    raise TwoFactorError(f"vertex {u} on two cycles")
                covered[u] = True
            canon_cycles.append(self._canonicalize(cyc))
        if not all(covered):
            raise TwoFactorError(
                f"cycles do not span all vertices (vertex {covered.index(False)})"
            )
        if f_edges & m_edges:
            e = min(f_edges & m_edges)
            raise TwoFactorError(f"edge {e} in both cycle set and matching")
        if len(f_edges) + len(m_edges) != g.m:
            raise TwoFactorError("cycles plus matching do not cover all edges")

        canon_cycles.sort(key=lambda c: c[0])
        self.cycles = tuple(canon_cycles)
        self.mate = tuple(mate)
        cycle_of = [-1] * n
        pos = [-1] * n
        for ci, cyc in enumerate(self.cycles):
            for i, u in enumerate(cyc):
                cycle_of[u] = ci
                pos[u] = i
        self.cycle_of = tuple(cycle_of)
        self.pos = tuple(pos)
        self.f_edges = frozenset(f_edges)
        self.m_edges = frozenset(m_edges)
        self._hash = hash((g, self.cycles, self.mate))

    @staticmethod
    def _canonicalize(cyc: list[int]) -> tuple[int, ...]:
        k = cyc.index(min(cyc))
        rot = cyc[k:] + cyc[:k]
        # orient toward the larger of the start's two cycle neighbours
        if rot[1] < rot[-1]:
            rot = [rot[0]] + rot[:0:-1]
        return tuple(rot)

    # -- navigation helpers --------------------------------------------------

    def cycle_len(self, u: int) -> int:
        return len(self.cycles[self.cycle_of[u]])

    def step(self, u: int, k: int) -> int:
        cyc = self.cycles[self.cycle_of[u]]
        return cyc[(self.pos[u] + k) % len(cyc)]

    def forward_dist(self, x: int, y: int) -> int:
        """Number of cycle edges from x forward to y (same cycle required)."""
        if self.cycle_of[x] != self.cycle_of[y]:
            raise TwoFactorError(f"{x} and {y} lie on different cycles")
        L = len(self.cycles[self.cycle_of[x]])
        return (self.pos[y] - self.pos[x]) % L

    def forward_path(self, x: int, y: int) -> tuple[int, ...]:
        """Vertices from x forward to y inclusive (whole cycle when x == y
        is *not* implied: x == y yields the single vertex)."""
        d = self.forward_dist(x, y)
        cyc = self.cycles[self.cycle_of[x]]
        L = len(cyc)
        p = self.pos[x]
        return tuple(cyc[(p + i) % L] for i in range(d + 1))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TwoFactor)
            and self.graph == other.graph
            and self.cycles == other.cycles
            and self.mate == other.mate
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"TwoFactor(cycles={[len(c) for c in self.cycles]})"


def navigate(tf: TwoFactor, u: int, k: int) -> int:
    """Vertex reached from u by k signed steps along its cycle."""
    return tf.step(u, k)


def two_factor_from_matching(g: Graph, matching: Iterable[tuple[int, int]]) -> TwoFactor:
    """Build the two-factor complementary to a perfect matching of a cubic graph."""
    m_set = {(min(u, v), max(u, v)) for u, v in matching}
    f_adj: list[list[int]] = [[] for _ in range(g.n)]
    for u, v in g.edges:
        if (u, v) not in m_set:
            f_adj[u].append(v)
            f_adj[v].append(u)
    if any(len(a) != 2 for a in f_adj):
        bad = next(v for v in range(g.n) if len(f_adj[v]) != 2)
        raise TwoFactorError(
            f"complement of matching is not 2-regular at vertex {bad}"
        )
    cycles = []
    seen = [False] * g.n
    for start in range(g.n):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        prev, cur = -1, start
        while True:
            nxt = f_adj[cur][0] if f_adj[cur][0] != prev else f_adj[cur][1]
            if nxt == start:
                break
            cyc.append(nxt)
            seen[nxt] = True
            prev, cur = cur, nxt
        cycles.append(cyc)
    return TwoFactor(g, cycles, sorted(m_set))


# ---------------------------------------------------------------------------
# Matching enumeration


def enumerate_perfect_matchings(
    g: Graph, limit: Optional[int] = None
) -> list[tuple[tuple[int, int], ...]]:
    """All perfect matchings as sorted edge tuples, by backtracking on the
    lowest unmatched vertex.  `limit` caps the number returned."""
    n = g.n
    if n % 2:
        return []
    out: list[tuple[tuple[int, int], ...]] = []
    matched = [False] * n
    cur: list[tuple[int, int]] = []

    def rec() -> bool:
        if limit is not None and len(out) >= limit:
            return False
        u = next((v for v in range(n) if not matched[v]), None)
        if u is None:
            out.append(tuple(sorted(cur)))
            return limit is None or len(out) < limit
        matched[u] = True
        for w in g.adj[u]:
            if matched[w]:
                continue
            matched[w] = True
            cur.append((min(u, w), max(u, w)))
            keep_going = rec()
            cur.pop()
            matched[w] = False
            if not keep_going:
                matched[u] = False
                return False
        matched[u] = False
        return True

    rec()
    return out


# ---------------------------------------------------------------------------
# Small minimal cuts


@dataclass(frozen=True)
class EdgeCut:
    edges: tuple[tuple[int, int], ...]
    side: tuple[int, ...]  # component of vertex min(V) after removal
    minimal: bool


def _connected_after_removal(g: Graph, removed: frozenset) -> Optional[list[int]]:
    """Component of vertex 0 in g minus `removed`; None means still connected."""
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in g.adj[u]:
            if (min(u, w), max(u, w)) in removed:
                continue
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) == g.n:
        return None
    return sorted(seen)


def minimal_small_cuts(g: Graph) -> list[EdgeCut]:
    """All inclusionwise minimal edge-cuts of size 3 or 4, by definition:
    enumerate 3- and 4-subsets of E, test disconnection, then test that no
    proper subset already disconnects."""
    if g.n > 64:
        raise GuardExceeded("minimal_small_cuts guard: n <= 64")
    if g.n and _connected_after_removal(g, frozenset()) is not None:
        raise GraphError("minimal_small_cuts requires a connected graph")
    cuts: list[EdgeCut] = []
    for size in (3, 4):
        for combo in itertools.combinations(g.edges, size):
            removed = frozenset(combo)
            side = _connected_after_removal(g, removed)
            if side is None:
                continue
            minimal = True
            for k in range(1, size):
                for sub in itertools.combinations(combo, k):
                    if _connected_after_removal(g, frozenset(sub)) is not None:
                        minimal = False
                        break
                if not minimal:
                    break
            if minimal:
                cuts.append(EdgeCut(edges=combo, side=tuple(side), minimal=True))
    return cuts


def satisfies_ks_condition(g: Graph, tf: TwoFactor) -> bool:
    """True iff the cycle edges meet every minimal edge-cut of size 3 or 4."""
    m_edges = tf.m_edges
    for cut in minimal_small_cuts(g):
        if all(e in m_edges for e in cut.edges):
            return False
    return True


# ---------------------------------------------------------------------------
# Selection


def select_two_factor(g: Graph, first_qualifying: bool = False) -> TwoFactor:
    """Exhaustively pick a qualifying two-factor with the maximum number of
    cycles; ties go to the lexicographically smallest matching edge set.

    With ``first_qualifying`` the scan stops at the first qualifying matching
    in enumeration order (cheaper; the maximal-components property and the
    invariants that rest on it are then not guaranteed).
    """
    rep_degrees = g.degrees()
    if not (g.n and all(d == 3 for d in rep_degrees)):
        raise GraphError("select_two_factor requires a cubic graph")
    if g.n > 64:
        raise GuardExceeded("select_two_factor guard: n <= 64")
    cuts = minimal_small_cuts(g)
    cut_edge_sets = [frozenset(c.edges) for c in cuts]

    def qualifies(m_set: frozenset) -> bool:
        return not any(ce <= m_set for ce in cut_edge_sets)

    def cycle_count(m_set: frozenset) -> int:
        f_adj = [[] for _ in range(g.n)]
        for u, v in g.edges:
            if (u, v) not in m_set:
                f_adj[u].append(v)
                f_adj[v].append(u)
        count = 0
        seen = [False] * g.n
        for s in range(g.n):
            if seen[s]:
                continue
            count += 1
            prev, cur = -1, s
            while not seen[cur]:
                seen[cur] = True
                nxt = f_adj[cur][0] if f_adj[cur][0] != prev else f_adj[cur][1]
                prev, cur = cur, nxt
        return count

    best: Optional[tuple[int, tuple]] = None
    for matching in enumerate_perfect_matchings(g):
        m_set = frozenset(matching)
        if not qualifies(m_set):
            continue
        if first_qualifying:
            return two_factor_from_matching(g, matching)
        key = (-cycle_count(m_set), matching)
        if best is None or key < best:
            best = key
    if best is None:
        raise NoQualifyingTwoFactor(
            "no two-factor meets the minimal-cut condition"
        )
    return two_factor_from_matching(g, best[1])


# ---------------------------------------------------------------------------
# Split-cycle check


@dataclass(frozen=True)
class SplitCycleVerdict:
    crossing: int
    bounds_ok: bool  # 2 <= crossing <= 4
    five_ok: bool  # crossing <= 3 whenever either part has length 5
    ok: bool


def check_split_cycle(
    g: Graph,
    tf: Optional[TwoFactor],
    C: Sequence[int],
    D1: Sequence[int],
    D2: Sequence[int],
) -> SplitCycleVerdict:
    """Report the crossing-edge count between two vertex-disjoint cycles
    covering V(C) and whether both split-cycle bounds hold.

    If ``tf`` is given, C must be one of its cycles.  D1 and D2 are vertex
    sequences that must each form a cycle of g and partition V(C).
    """
    cset = set(C)
    if tf is not None and tuple(TwoFactor._canonicalize(list(C))) not in tf.cycles:
        raise TwoFactorError("C is not a cycle of the given two-factor")
    s1, s2 = set(D1), set(D2)
    if s1 & s2 or (s1 | s2) != cset or not s1 or not s2:
        raise TwoFactorError("D1, D2 do not partition V(C)")
    for D in (D1, D2):
        if len(D) < 3:
            raise TwoFactorError("split parts must be cycles (length >= 3)")
        for i, u in enumerate(D):
            if not g.has_edge(u, D[(i + 1) % len(D)]):
                raise TwoFactorError("split part is not a cycle of g")
    crossing = sum(1 for u, v in g.edges if (u in s1) != (v in s1) and u in cset and v in cset)
    bounds_ok = 2 <= crossing <= 4
    five_ok = not (
        (len(D1) == 5 or len(D2) == 5) and crossing > 3
    )
    return SplitCycleVerdict(
        crossing=crossing, bounds_ok=bounds_ok, five_ok=five_ok, ok=bounds_ok and five_ok
    )


# ---------------------------------------------------------------------------
# JSON round trip


def two_factor_to_json_dict(tf: TwoFactor) -> dict:
    return {
        "cycles": [list(c) for c in tf.cycles],
        "matching": sorted([min(u, v), max(u, v)] for u, v in enumerate(tf.mate) if u < v),
    }


def two_factor_from_json_dict(g: Graph, data: dict) -> TwoFactor:
    try:
        cycles = [list(map(int, c)) for c in data["cycles"]]
        matching = [(int(u), int(v)) for u, v in data["matching"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise TwoFactorError(f"malformed two-factor JSON: {exc}") from None
    return TwoFactor(g, cycles, matching)
