"""Exact fractional chromatic numbers and multiset certificates.

The fractional chromatic number is the optimum of the covering LP over
independent sets.  This module enumerates the maximal independent sets
(the only columns an optimal solution needs), solves the LP in exact
rational arithmetic, and converts between the three equivalent shapes a
fractional colouring comes in: a weighting of independent sets, a
distribution with all vertex marginals at least 1/k, and a multiset of
kN independent sets covering every vertex exactly N times.

``chi_f_upper_subcubic`` assembles a 32/11-sized certificate for any
triangle-free subcubic graph by walking the reduction tree from
``graph_core.reduce_subcubic``: cubic bridgeless leaves get their
certificate from the sampled five-phase law, doubled constructions
restrict the double's certificate back to one copy, and bridge joins
align two certificates on a common N and re-index one side so the bridge
endpoints never share a set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .augment import exact_phase5_distribution
from .graph_core import Graph, GraphError, GuardExceeded, analyze, reduce_subcubic, suppress_vertex
from .sampler import Distribution, IndependentSet, is_independent
from .two_factor import (
    NoQualifyingTwoFactor,
    TwoFactor,
    enumerate_perfect_matchings,
    minimal_small_cuts,
    two_factor_from_matching,
)

__all__ = [
    "ColouringError", "MergeFailure",
    "FractionalColouring", "MultisetCertificate", "CertificateVerdict",
    "TARGET_BOUND",
    "maximal_independent_sets", "chi_f_exact",
    "distribution_to_weighting", "weighting_to_multiset",
    "verify_certificate", "certificate_from_json_dict",
    "chi_f_upper_subcubic",
]

TARGET_BOUND = Fraction(32, 11)

DEFAULT_MAX_N = 40
DEFAULT_MAX_MULTISET = 2 * 10**6


class ColouringError(ValueError):
    """Raised when a conversion's input is not a fractional colouring."""


class MergeFailure(RuntimeError):
    """No re-indexing can separate the bridge endpoints (needs k < 2)."""


# -- column enumeration ----------------------------------------------------------


def _mis_masks(g: Graph) -> list[int]:
    """Bitmasks of all maximal independent sets, pivoting recursion."""
    n = g.n
    if n == 0:
        return [0]
    full = (1 << n) - 1
    # non-neighbour masks: BK cliques over the complement give our sets
    nonadj = [full & ~(g.adj_mask[v] | (1 << v)) for v in range(n)]
    out: list[int] = []

    def expand(r: int, p: int, x: int) -> None:
        if not p and not x:
            out.append(r)
            return
        both = p | x
        pivot, best = -1, -1
        scan = both
        while scan:
            v = (scan & -scan).bit_length() - 1
            cnt = (p & nonadj[v]).bit_count()
            if cnt > best:
                pivot, best = v, cnt
            scan &= scan - 1
        cand = p & ~nonadj[pivot]
        while cand:
            bit = cand & -cand
            v = bit.bit_length() - 1
            expand(r | bit, p & nonadj[v], x & nonadj[v])
            p &= ~bit
            x |= bit
            cand &= ~bit

    expand(0, full, 0)
    out.sort()
    return out


def maximal_independent_sets(g: Graph, max_n: int = DEFAULT_MAX_N) -> list[frozenset]:
    """All maximal independent sets, ascending by vertex bitmask."""
    if g.n > max_n:
        raise GuardExceeded(
            f"maximal_independent_sets guard: n = {g.n} > {max_n}"
        )
    return [frozenset(_bits(m)) for m in _mis_masks(g)]


def _bits(mask: int):
    while mask:
        bit = mask & -mask
        yield bit.bit_length() - 1
        mask &= mask - 1


# -- the covering LP --------------------------------------------------------------


@dataclass(frozen=True)
class FractionalColouring:
    """A weighting of independent sets.

    ``weights`` maps frozensets to nonnegative rationals.  It is a
    fractional colouring when every vertex gathers weight at least 1;
    its size is then an upper bound on the fractional chromatic number.
    """

    graph: Graph
    weights: dict

    @property
    def size(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def vertex_weight(self, v: int) -> Fraction:
        return sum((w for s, w in self.weights.items() if v in s), Fraction(0))

    def is_valid(self) -> bool:
        return (all(w >= 0 for w in self.weights.values())
                and all(is_independent(self.graph, s) for s in self.weights)
                and all(self.vertex_weight(v) >= 1 for v in range(self.graph.n)))

    def to_json_dict(self) -> dict:
        return {
            "size": str(self.size),
            "weights": [
                {"set": sorted(s), "weight": str(w)}
                for s, w in sorted(self.weights.items(), key=lambda kv: sorted(kv[0]))
            ],
        }


def chi_f_exact(g: Graph, max_n: int = DEFAULT_MAX_N):
    """Exact fractional chromatic number with both certificates.

    Returns ``(value, primal, dual)``: the optimum as a Fraction, an
    optimal ``FractionalColouring``, and the optimal dual vertex weights
    (a maximum fractional clique).  Both certificates are re-verified
    against each other before returning: equal objectives, feasibility
    on both sides, and complementary slackness.
    """
    if g.n == 0:
        return Fraction(0), FractionalColouring(g, {}), {}
    cols = maximal_independent_sets(g, max_n=max_n)
    value, y, x = _solve_covering_lp(g.n, cols)

    primal = FractionalColouring(
        g, {cols[i]: x[i] for i in range(len(cols)) if x[i] > 0})
    dual = {v: y[v] for v in range(g.n)}

    # cross-examination: anything wrong here is an internal defect
    if not primal.is_valid():
        raise RuntimeError("optimal weighting fails the covering constraints")
    if primal.size != value or sum(dual.values(), Fraction(0)) != value:
        raise RuntimeError("primal and dual objectives disagree")
    for s in cols:
        if sum((dual[v] for v in s), Fraction(0)) > 1:
            raise RuntimeError("dual exceeds 1 on an independent set")
    for s, w in primal.weights.items():
        if w > 0 and sum((dual[v] for v in s), Fraction(0)) != 1:
            raise RuntimeError("slack set carries weight")
    for v in range(g.n):
        if dual[v] > 0 and primal.vertex_weight(v) != 1:
            raise RuntimeError("overcovered vertex carries dual weight")
    return value, primal, dual


def _solve_covering_lp(n: int, cols: list[frozenset]):
    """Solve min Σx : Σ_{I∋v} x_I ≥ 1, x ≥ 0 through its dual.

    The dual — maximize Σy over Σ_{v∈I} y_v ≤ 1, y ≥ 0 — starts feasible
    at the slack basis, so a single-phase simplex with Bland's rule
    suffices; the primal optimum is read off the slack reduced costs.
    """
    m = len(cols)
    width = n + m + 1
    # tableau rows: one per independent set; objective row last
    rows = []
    for s in cols:
        row = [Fraction(0)] * width
        for v in s:
            row[v] = Fraction(1)
        rows.append(row)
    for i in range(m):
        rows[i][n + i] = Fraction(1)
        rows[i][-1] = Fraction(1)
    obj = [Fraction(1)] * n + [Fraction(0)] * m + [Fraction(0)]
    basis = list(range(n, n + m))

    while True:
        enter = next((j for j in range(n + m) if obj[j] > 0), None)
        if enter is None:
            break
        leave, ratio = None, None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                r = rows[i][-1] / a
                if (ratio is None or r < ratio
                        or (r == ratio and basis[i] < basis[leave])):
                    leave, ratio = i, r
        if leave is None:
            raise RuntimeError("unbounded dual: the graph has no vertices?")
        piv = rows[leave][enter]
        rows[leave] = [a / piv for a in rows[leave]]
        for i in range(m):
            if i != leave and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[leave])]
        if obj[enter] != 0:
            f = obj[enter]
            obj = [a - f * b for a, b in zip(obj, rows[leave])]
        basis[leave] = enter

    value = -obj[-1]
    y = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            y[b] = rows[i][-1]
    x = [-obj[n + i] for i in range(m)]
    return value, y, x


# -- the three shapes of a colouring ---------------------------------------------


def distribution_to_weighting(g: Graph, dist: Distribution, k: Fraction) -> FractionalColouring:
    """Scale an independent-set law into a size-k fractional colouring.

    Requires every vertex marginal to be at least 1/k, exactly.
    """
    k = Fraction(k)
    if k <= 0:
        raise ColouringError("the target size k must be positive")
    for v in range(g.n):
        if dist.marginal(v) < 1 / k:
            raise ColouringError(
                f"vertex {v} has marginal {dist.marginal(v)} < 1/k = {1 / k}"
            )
    weights: dict = {}
    for J, p in dist.pmf.items():
        s = frozenset(J.members)
        weights[s] = weights.get(s, Fraction(0)) + k * p
    return FractionalColouring(g, weights)


@dataclass(frozen=True)
class MultisetCertificate:
    """kN independent sets covering every vertex exactly N times."""

    n_vertices: int
    N: int
    sets: tuple

    @property
    def k(self) -> Fraction:
        return Fraction(len(self.sets), self.N)

    def to_json_dict(self) -> dict:
        return {
            "k": str(self.k),
            "N": self.N,
            "sets": [sorted(s) for s in self.sets],
        }


def certificate_from_json_dict(data: dict, n_vertices: int) -> MultisetCertificate:
    cert = MultisetCertificate(
        n_vertices=n_vertices,
        N=int(data["N"]),
        sets=tuple(frozenset(s) for s in data["sets"]),
    )
    if str(cert.k) != data["k"]:
        raise ColouringError(
            f"certificate claims k = {data['k']} but holds {cert.k}"
        )
    return cert


def weighting_to_multiset(w: FractionalColouring,
                          max_sets: int = DEFAULT_MAX_MULTISET) -> MultisetCertificate:
    """Clear denominators and trim overcoverage down to exactly N.

    N is the least common denominator of the weights; each set enters
    with multiplicity N·w(I), and any vertex covered more than N times
    is removed from the surplus copies (subsets of independent sets stay
    independent, so the certificate remains sound).
    """
    g = w.graph
    N = 1
    for q in w.weights.values():
        if q < 0:
            raise ColouringError("negative weight")
        N = math.lcm(N, q.denominator)
    total = sum(int(q * N) for q in w.weights.values() if q > 0)
    if total > max_sets:
        raise GuardExceeded(
            f"certificate would hold {total} sets (> {max_sets})"
        )
    copies: list[set] = []
    for s in sorted(w.weights, key=sorted):
        q = w.weights[s]
        if q > 0:
            copies.extend(set(s) for _ in range(int(q * N)))
    for v in range(g.n):
        cover = sum(1 for s in copies if v in s)
        if cover < N:
            raise ColouringError(
                f"vertex {v} gathers weight {Fraction(cover, N)} < 1"
            )
        excess = cover - N
        for s in copies:
            if not excess:
                break
            if v in s:
                s.discard(v)
                excess -= 1
    return MultisetCertificate(g.n, N, tuple(frozenset(s) for s in copies))


@dataclass(frozen=True)
class CertificateVerdict:
    ok: bool
    problems: tuple

    def __bool__(self) -> bool:
        return self.ok


def verify_certificate(g: Graph, cert: MultisetCertificate) -> CertificateVerdict:
    """Recount everything; trusts nothing about the producer."""
    problems = []
    if cert.n_vertices != g.n:
        problems.append(f"certificate is for {cert.n_vertices} vertices, graph has {g.n}")
    for idx, s in enumerate(cert.sets):
        for u in s:
            if not (0 <= u < g.n):
                problems.append(f"set {idx} mentions foreign vertex {u}")
        for u in s:
            for v in s:
                if u < v and g.has_edge(u, v):
                    problems.append(f"set {idx} contains edge ({u}, {v})")
    count = [0] * g.n
    for s in cert.sets:
        for u in s:
            if 0 <= u < g.n:
                count[u] += 1
    for v in range(g.n):
        if count[v] != cert.N:
            problems.append(
                f"vertex {v} is covered {count[v]} times, not N = {cert.N}"
            )
    return CertificateVerdict(not problems, tuple(problems))


# -- 32/11 certificates for subcubic graphs ---------------------------------------


def _replicate(cert: MultisetCertificate, factor: int) -> MultisetCertificate:
    if factor == 1:
        return cert
    return MultisetCertificate(
        cert.n_vertices, cert.N * factor, cert.sets * factor)


def _pad(cert: MultisetCertificate, count: int) -> MultisetCertificate:
    if count <= len(cert.sets):
        return cert
    empty = (frozenset(),) * (count - len(cert.sets))
    return MultisetCertificate(cert.n_vertices, cert.N, cert.sets + empty)


def _relabel(cert: MultisetCertificate, n: int, vmap) -> MultisetCertificate:
    """Push a child certificate through child-vertex -> parent-vertex map."""
    return MultisetCertificate(
        n, cert.N, tuple(frozenset(vmap[v] for v in s) for s in cert.sets))


def _restrict(cert: MultisetCertificate, n: int) -> MultisetCertificate:
    """Keep only the vertices below n (the first copy of a doubled graph)."""
    return MultisetCertificate(
        n, cert.N, tuple(frozenset(v for v in s if v < n) for s in cert.sets))


def _merge_on_bridge(n: int, a: MultisetCertificate, b: MultisetCertificate,
                     x1: int, x2: int) -> MultisetCertificate:
    """Combine certificates of the two sides of a bridge (x1, x2).

    Both are first brought to a common N and a common set count; then
    b's sets are re-indexed so that no set holding x2 lands on an index
    whose a-set holds x1.  Unions along indices are then independent.
    """
    N = math.lcm(a.N, b.N)
    a = _replicate(a, N // a.N)
    b = _replicate(b, N // b.N)
    count = max(len(a.sets), len(b.sets), 2 * N)
    a = _pad(a, count)
    b = _pad(b, count)

    blocked = {i for i, s in enumerate(a.sets) if x1 in s}
    movers = [i for i, s in enumerate(b.sets) if x2 in s]
    free = [i for i in range(count) if i not in blocked]
    if len(movers) > len(free):
        raise MergeFailure(
            f"cannot separate bridge ({x1}, {x2}): {len(movers)} sets to "
            f"place, {len(free)} indices available"
        )
    perm = [-1] * count
    free_for_movers = [i for i in free if i not in movers]
    stay = [i for i in movers if i not in blocked]
    # keep movers already standing on free indices, relocate the rest
    for i in stay:
        perm[i] = i
    pool = iter(i for i in free_for_movers if i not in stay)
    for i in movers:
        if perm[i] == -1:
            perm[i] = next(pool)
    used = {p for p in perm if p != -1}
    rest = iter(i for i in range(count) if i not in used)
    for i in range(count):
        if perm[i] == -1:
            perm[i] = next(rest)

    merged = [None] * count
    for i in range(count):
        merged[perm[i]] = b.sets[i]
    sets = tuple(a.sets[i] | merged[i] for i in range(count))
    return MultisetCertificate(n, N, sets)


def _two_colour_certificate(g: Graph) -> MultisetCertificate:
    """N = 1 certificate from a proper 2-colouring (bipartite inputs)."""
    colour = [-1] * g.n
    for s in range(g.n):
        if colour[s] != -1:
            continue
        colour[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for v in g.adj[u]:
                if colour[v] == -1:
                    colour[v] = 1 - colour[u]
                    stack.append(v)
                elif colour[v] == colour[u]:
                    raise GraphError("graph is not bipartite")
    sides = (frozenset(v for v in range(g.n) if colour[v] == 0),
             frozenset(v for v in range(g.n) if colour[v] == 1))
    sets = tuple(s for s in sides if s) or (frozenset(),)
    return MultisetCertificate(g.n, 1, sets)


def _ks_two_factor_through(g: Graph, required: tuple[int, int]) -> TwoFactor:
    """A qualifying two-factor whose cycles contain the required edge.

    Mirrors select_two_factor's preferences (most cycles, then smallest
    matching) over the matchings that leave the required edge out.
    """
    cuts = [frozenset(c.edges) for c in minimal_small_cuts(g)]
    req = (min(required), max(required))
    best = None
    for matching in enumerate_perfect_matchings(g):
        m_set = frozenset(matching)
        if req in m_set or any(ce <= m_set for ce in cuts):
            continue
        tf = two_factor_from_matching(g, matching)
        key = (-len(tf.cycles), matching)
        if best is None or key < best[0]:
            best = (key, tf)
    if best is None:
        raise NoQualifyingTwoFactor(
            f"no qualifying two-factor keeps edge {req} on its cycles"
        )
    return best[1]


def _one_bridge_leaf_two_factor(leaf: Graph, host: Graph, v0: int) -> TwoFactor:
    """Two-factor for the double of a host with a single degree-2 vertex.

    The host is suppressed at v0, a qualifying two-factor of the cubic
    result is chosen with the replacement edge on a cycle, and that
    cycle is re-routed through v0 in both copies; the bridge between the
    copies of v0 becomes a matching edge.
    """
    g0, old_ids = suppress_vertex(host, v0)
    a, b = host.adj[v0]
    back = {old: new for new, old in enumerate(old_ids)}
    tf0 = _ks_two_factor_through(g0, (back[a], back[b]))

    n = host.n
    cycles = []
    for cyc in tf0.cycles:
        mapped = [old_ids[u] for u in cyc]
        L = len(mapped)
        spliced = None
        for i in range(L):
            pair = {mapped[i], mapped[(i + 1) % L]}
            if pair == {a, b}:
                spliced = mapped[:i + 1] + [v0] + mapped[i + 1:]
                break
        cycles.append(spliced if spliced is not None else mapped)
    both = cycles + [[u + n for u in cyc] for cyc in cycles]
    matching = [(old_ids[u], old_ids[v]) for u, v in tf0.m_edges]
    matching += [(u + n, v + n) for u, v in matching]
    matching.append((v0, v0 + n))
    return TwoFactor(leaf, both, matching)


def _leaf_certificate(step, host=None, **enum_kw) -> MultisetCertificate:
    g = step.graph
    leaf = step.detail["leaf"]
    if leaf == "trivial":
        return _two_colour_certificate(g)
    if leaf == "cubic-bridgeless":
        from .two_factor import select_two_factor
        tf = select_two_factor(g)
    elif leaf == "one-bridge":
        tf = _one_bridge_leaf_two_factor(g, host, step.detail["bridge"][0])
    else:  # pragma: no cover - reduce_subcubic emits no other kinds
        raise GraphError(f"unknown leaf kind {leaf!r}")
    _, result = exact_phase5_distribution(g, tf, **enum_kw)
    w = distribution_to_weighting(g, result.distribution, TARGET_BOUND)
    return weighting_to_multiset(w)


def _certificate_for(step, **enum_kw) -> MultisetCertificate:
    if step.is_leaf:
        return _leaf_certificate(step, **enum_kw)
    if step.kind == "bridge-split":
        (c1, c2), (m1, m2) = step.children, step.child_maps
        a = _relabel(_certificate_for(c1, **enum_kw), step.graph.n, m1)
        b = _relabel(_certificate_for(c2, **enum_kw), step.graph.n, m2)
        x1, x2 = step.detail["bridge"]
        if x1 not in {m1[v] for v in range(c1.graph.n)}:
            a, b = b, a
            x1, x2 = x2, x1
        return _merge_on_bridge(step.graph.n, a, b, x1, x2)
    if step.kind == "degree2-double":
        child = _certificate_for(step.children[0], **enum_kw)
        return _restrict(child, step.graph.n)
    if step.kind == "degree2-single":
        leaf = step.children[0]
        cert = _leaf_certificate(leaf, host=step.graph, **enum_kw)
        return _restrict(cert, step.graph.n)
    raise GraphError(f"unknown reduction kind {step.kind!r}")  # pragma: no cover


def chi_f_upper_subcubic(g: Graph, **enum_kw):
    """A verified multiset certificate of size at most 32/11.

    Accepts any connected triangle-free subcubic graph whose reduction
    leaves fit the exact enumeration; returns ``(32/11, certificate)``.
    """
    report = analyze(g)
    if not report.is_subcubic:
        raise GraphError("certificate pipeline requires a subcubic graph")
    if not report.is_triangle_free:
        raise GraphError(
            f"triangle {report.triangle_witness} present: the 32/11 bound does not apply"
        )
    if not report.is_connected:
        raise GraphError("certificate pipeline requires a connected graph")
    cert = _certificate_for(reduce_subcubic(g), **enum_kw)
    if cert.k > TARGET_BOUND:
        raise RuntimeError(f"assembled certificate has size {cert.k} > 32/11")
    verdict = verify_certificate(g, cert)
    if not verdict:
        raise RuntimeError(
            "assembled certificate fails verification: " + "; ".join(verdict.problems)
        )
    return TARGET_BOUND, cert
