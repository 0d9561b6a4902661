"""Exhaustive corpus of connected bridgeless cubic triangle-free graphs.

Any such graph splits into a two-factor (a cycle system with all cycle
lengths at least 4, since shorter cycles would be triangles) plus a
perfect matching on the same vertices.  So: enumerate cycle systems by
partition shape, enumerate matchings that keep the graph simple and
triangle-free, keep one matching per orbit of the cycle-system symmetry
group, and finally dedup isomorphic results (WL-hash buckets refined by
VF2 via networkx, which is independent of the package's own code).

Run as a script to regenerate ``corpus/`` and the deficiency search
report:  python3 tests/corpus_gen.py [max_n]
"""

import itertools
import json
import sys
from pathlib import Path

import networkx as nx

from fracchrom.augment import deficiency_report
from fracchrom.graph_core import Graph, analyze, encode_graph6
from fracchrom.two_factor import NoQualifyingTwoFactor, select_two_factor


def partitions_min4(n):
    """Partitions of n into parts >= 4, descending, largest first."""

    def rec(left, cap):
        if left == 0:
            yield ()
            return
        for p in range(min(left, cap), 3, -1):
            if left - p == 0 or left - p >= 4:
                for rest in rec(left - p, p):
                    yield (p,) + rest

    yield from rec(n, n)


def cycle_ranges(parts):
    """Vertex id ranges for each cycle when laid out consecutively."""
    ranges = []
    start = 0
    for L in parts:
        ranges.append(range(start, start + L))
        start += L
    return ranges


def cycle_edges(parts):
    edges = []
    for rng in cycle_ranges(parts):
        vs = list(rng)
        edges.extend(
            (vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs)))
    return [(min(u, v), max(u, v)) for u, v in edges]


def system_group(parts):
    """All vertex permutations preserving the cycle system.

    Per-cycle dihedral symmetries composed with permutations of
    equal-length cycles, built directly as vertex maps.
    """
    ranges = cycle_ranges(parts)
    k = len(parts)
    dihedrals = []
    for rng in ranges:
        vs = list(rng)
        L = len(vs)
        maps = []
        for shift in range(L):
            rot = vs[shift:] + vs[:shift]
            maps.append(rot)
            maps.append(rot[::-1])
        dihedrals.append(maps)

    by_len = {}
    for i, L in enumerate(parts):
        by_len.setdefault(L, []).append(i)
    block_perms = [[]]
    for L, idxs in by_len.items():
        block_perms = [
            acc + list(zip(idxs, perm))
            for acc in block_perms
            for perm in itertools.permutations(idxs)
        ]

    group = []
    for blocks in block_perms:
        dest = [None] * k
        for src, dst in blocks:
            dest[src] = dst
        for choice in itertools.product(*(dihedrals[dest[i]] for i in range(k))):
            perm = [None] * sum(parts)
            for i in range(k):
                src_vs = list(ranges[i])
                img = choice[i]
                for a, b in zip(src_vs, img):
                    perm[a] = b
            group.append(tuple(perm))
    return group


def _matchings(n, allowed):
    """Perfect matchings by backtracking on the lowest unmatched vertex."""
    cur = []
    used = [False] * n

    def rec(lo):
        while lo < n and used[lo]:
            lo += 1
        if lo == n:
            yield tuple(cur)
            return
        used[lo] = True
        for v in allowed[lo]:
            if not used[v]:
                used[v] = True
                cur.append((lo, v))
                yield from rec(lo + 1)
                cur.pop()
                used[v] = False
        used[lo] = False

    yield from rec(0)


def _canonical_in_orbit(m_edges, group):
    for perm in group:
        mapped = sorted(
            (perm[u], perm[v]) if perm[u] < perm[v] else (perm[v], perm[u])
            for u, v in m_edges
        )
        if tuple(mapped) < m_edges:
            return False
    return True


def _to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def generate_cubic_triangle_free_bridgeless(n):
    """All such connected graphs on n vertices, one per isomorphism class."""
    if n % 2 or n < 6:
        return []
    found = []  # (wl_hash, nx graph, Graph)
    for parts in partitions_min4(n):
        f_edges = set(cycle_edges(parts))
        pos = {}
        for ci, rng in enumerate(cycle_ranges(parts)):
            for i, v in enumerate(rng):
                pos[v] = (ci, i, len(rng))
        allowed = [[] for _ in range(n)]
        for u in range(n):
            for v in range(u + 1, n):
                if (u, v) in f_edges:
                    continue
                cu, iu, Lu = pos[u]
                cv, iv, Lv = pos[v]
                if cu == cv:
                    d = min((iu - iv) % Lu, (iv - iu) % Lu)
                    if d <= 2:  # chord at distance 2 closes a triangle
                        continue
                allowed[u].append(v)
        group = system_group(parts)
        for m in _matchings(n, allowed):
            m_sorted = tuple(sorted(m))
            if not _canonical_in_orbit(m_sorted, group):
                continue
            g = Graph(n, sorted(f_edges) + list(m_sorted))
            report = analyze(g)
            if not (report.is_connected and report.is_bridgeless):
                continue
            gx = _to_nx(g)
            h = nx.weisfeiler_lehman_graph_hash(gx, iterations=4)
            if any(
                h == h2 and nx.is_isomorphic(gx, gx2)
                for h2, gx2, _ in found
            ):
                continue
            found.append((h, gx, g))
    return [g for _, _, g in found]


def search_deficient(graphs):
    """Which graphs have deficient vertices under the selected two-factor?"""
    rows = []
    for g in graphs:
        row = {"graph6": encode_graph6(g), "n": g.n}
        try:
            tf = select_two_factor(g)
        except NoQualifyingTwoFactor:
            row["selected_two_factor"] = None
            rows.append(row)
            continue
        row["selected_two_factor"] = [list(c) for c in tf.cycles]
        recs = deficiency_report(g, tf)
        row["deficient"] = [
            {"vertex": r.vertex, "type": r.dtype, "epsilon": str(r.epsilon)}
            for r in recs
            if r.deficient
        ]
        rows.append(row)
    return rows


def main(max_n):
    root = Path(__file__).resolve().parent.parent
    out_dir = root / "corpus"
    out_dir.mkdir(exist_ok=True)
    report = {"max_n": max_n, "counts": {}, "graphs": []}
    for n in range(6, max_n + 1, 2):
        graphs = generate_cubic_triangle_free_bridgeless(n)
        report["counts"][str(n)] = len(graphs)
        path = out_dir / f"cubic_tf_bridgeless_n{n}.g6"
        path.write_text(
            "".join(encode_graph6(g) + "\n" for g in graphs))
        rows = search_deficient(graphs)
        report["graphs"].extend(rows)
        hits = [r for r in rows if r.get("deficient")]
        none_qual = [r for r in rows if r["selected_two_factor"] is None]
        print(
            f"n={n}: {len(graphs)} graphs, "
            f"{len(hits)} with deficient vertices, "
            f"{len(none_qual)} without a qualifying two-factor",
            flush=True,
        )
        for r in hits:
            print(f"  {r['graph6'].strip()}  deficient: {r['deficient']}")
    (out_dir / "deficiency_search.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 14)
