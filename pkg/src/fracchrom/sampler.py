"""The four-phase random independent-set construction and its two engines.

Given a cubic graph with a fixed two-factor, the construction orients the
complementary perfect matching uniformly at random, selects alternating
sets inside the runs of matching-heads (phase 1), promotes isolated heads
(phase 2), repeats the run selection on the still-eligible "feasible"
vertices (phase 3) and promotes isolated feasible vertices (phase 4).

Two execution backends are provided.  ``enumerate_distribution`` walks
every orientation and every selection branch, producing the exact
rational law of the output set together with per-vertex inclusion
probabilities; the per-situation records it caches also answer event
queries (``event_probability``, ``forces``, ``admissible``, ``exact_q``).
``monte_carlo`` estimates the marginals with a seeded, reproducible
sampler backed by a compiled kernel when one is available.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .graph_core import Graph, GraphError, GuardExceeded
from .templates import Template, validate_in
from .two_factor import TwoFactor, TwoFactorError

__all__ = [
    "ExplosionGuard", "SplitMix64", "trial_stream",
    "Orientation", "orientation_from_heads", "Situation", "IndependentSet",
    "Distribution", "EnumerationResult", "MonteCarloReport",
    "is_independent", "phi_outcomes", "active_runs", "run_phases_1_4",
    "enumerate_distribution", "enumerate_situations", "event_probability",
    "forces", "admissible", "exact_q", "monte_carlo", "kernel_backend",
    "DEFAULT_MAX_ORIENTATIONS", "DEFAULT_MAX_BRANCHES", "PHASE4_MODES",
]

DEFAULT_MAX_ORIENTATIONS = 1 << 16
DEFAULT_MAX_BRANCHES = 1 << 20
PHASE4_MODES = ("start", "recompute")


class ExplosionGuard(GuardExceeded):
    """Raised when an exact enumeration would exceed its configured size."""


# ---------------------------------------------------------------------------
# deterministic bit source

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Small deterministic 64-bit generator with splittable substreams."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def getrandbits(self, k: int) -> int:
        if not 1 <= k <= 64:
            raise ValueError("k must be in 1..64")
        return self.next_u64() >> (64 - k)


def trial_stream(seed: int, index: int) -> SplitMix64:
    """The independent bit stream used for trial number ``index``."""
    return SplitMix64((seed + (index + 1) * _GAMMA) & _MASK64)


# ---------------------------------------------------------------------------
# value types


class Orientation:
    """A direction for every matching edge; heads are the active vertices."""

    __slots__ = ("arcs", "heads", "_hash")

    def __init__(self, arcs):
        arc_list = sorted((int(t), int(h)) for t, h in arcs)
        seen = set()
        for tail, head in arc_list:
            edge = (tail, head) if tail < head else (head, tail)
            if edge in seen:
                raise GraphError("edge %r oriented twice" % (edge,))
            seen.add(edge)
        self.arcs = tuple(arc_list)
        self.heads = frozenset(h for _, h in arc_list)
        self._hash = hash(self.arcs)

    def active(self, v: int) -> bool:
        return v in self.heads

    def __eq__(self, other):
        if not isinstance(other, Orientation):
            return NotImplemented
        return self.arcs == other.arcs

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Orientation(%r)" % (list(self.arcs),)


def orientation_from_heads(tf: TwoFactor, heads) -> Orientation:
    """Build the orientation of ``tf``'s matching with the given head set."""
    heads = frozenset(heads)
    arcs = []
    for a, b in tf.m_edges:
        in_a, in_b = a in heads, b in heads
        if in_a == in_b:
            raise GraphError(
                "edge (%d, %d) needs exactly one endpoint among heads" % (a, b))
        arcs.append((a, b) if in_b else (b, a))
    stray = heads - {h for _, h in arcs}
    if stray:
        raise GraphError("heads %r not matched vertices" % sorted(stray))
    return Orientation(arcs)


@dataclass(frozen=True)
class IndependentSet:
    """Output value of the construction: a set of mutually non-adjacent vertices."""

    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))

    def __contains__(self, v):
        return v in self.members

    def __len__(self):
        return len(self.members)

    def to_json_list(self):
        return sorted(self.members)


@dataclass(frozen=True)
class Situation:
    """The random choices of one run: orientation plus both selection sets."""

    orientation: Orientation
    s1: frozenset
    s3: frozenset
    prob: Fraction

    def __post_init__(self):
        object.__setattr__(self, "s1", frozenset(self.s1))
        object.__setattr__(self, "s3", frozenset(self.s3))
        if not 0 < self.prob <= 1:
            raise GraphError("situation probability %s out of range" % self.prob)


class Distribution:
    """Exact probability law over output independent sets."""

    __slots__ = ("pmf",)

    def __init__(self, pmf):
        self.pmf = dict(pmf)
        total = Fraction(0)
        for iset, prob in self.pmf.items():
            if prob <= 0:
                raise GraphError("non-positive probability for %r" % (iset,))
            total += prob
        if total != 1:
            raise GraphError("distribution sums to %s, expected 1" % total)

    def __len__(self):
        return len(self.pmf)

    def __getitem__(self, iset):
        return self.pmf[iset]

    def items(self):
        return self.pmf.items()

    def support(self):
        return self.pmf.keys()

    def marginal(self, v: int) -> Fraction:
        return sum((p for s, p in self.pmf.items() if v in s), Fraction(0))

    def to_json_dict(self):
        rows = sorted(
            (s.to_json_list(), str(p)) for s, p in self.pmf.items())
        return {"outcomes": [{"set": s, "prob": p} for s, p in rows]}


class EnumerationResult:
    """Exact law plus per-vertex inclusion probabilities."""

    __slots__ = ("distribution", "marginals")

    def __init__(self, distribution, marginals):
        self.distribution = distribution
        self.marginals = dict(marginals)

    def to_json_dict(self):
        d = self.distribution.to_json_dict()
        d["marginals"] = {str(v): str(p)
                          for v, p in sorted(self.marginals.items())}
        return d


def is_independent(g: Graph, members) -> bool:
    members = set(members)
    for v in members:
        for w in g.adj[v]:
            if w in members:
                return False
    return True


# ---------------------------------------------------------------------------
# run decomposition and the selection law (single source of truth for the
# branch order shared by the enumerator, the reference sampler and the
# compiled kernels)


def _mask_of(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def _mask_runs(cycles, mask: int):
    """Maximal stretches of mask-vertices along each cycle, in fixed order.

    Yields ``(is_cycle, seq)`` where ``seq`` is the stretch in forward
    cycle order; a fully covered cycle is one cyclic run.
    """
    runs = []
    for cycle in cycles:
        length = len(cycle)
        hits = [(mask >> v) & 1 for v in cycle]
        if all(hits):
            runs.append((True, cycle))
            continue
        for p in range(length):
            if hits[p] and not hits[p - 1]:
                seq = [cycle[p]]
                q = (p + 1) % length
                while hits[q]:
                    seq.append(cycle[q])
                    q = (q + 1) % length
                runs.append((False, tuple(seq)))
    return runs


def _run_branches(tf: TwoFactor, is_cycle: bool, seq):
    """All selection outcomes for one run, as (mask, probability) pairs.

    The order is significant: samplers map their random bits to indices
    in this list (paths and even cycles use one bit for index 0/1, odd
    cycles draw a uniform index by rejection).
    """
    length = len(seq)
    evens = _mask_of(seq[0::2])
    odds = _mask_of(seq[1::2])
    half = Fraction(1, 2)
    if not is_cycle:
        if length % 2 == 1:
            return [(evens, half), (odds, half)]
        if tf.pos[seq[0]] < tf.pos[seq[-1]]:
            return [(evens, half), (odds, half)]
        return [(odds, half), (evens, half)]
    if length % 2 == 0:
        return [(evens, half), (odds, half)]
    p = Fraction(1, length)
    picks = (length - 1) // 2
    return [
        (_mask_of(seq[(i + 2 * j) % length] for j in range(picks)), p)
        for i in range(length)
    ]


def _sample_selection(tf: TwoFactor, mask: int, rng):
    """Draw one outcome of the selection step on ``mask``; returns
    ``(selected_mask, probability)``."""
    selected = 0
    prob = Fraction(1)
    for is_cycle, seq in _mask_runs(tf.cycles, mask):
        branches = _run_branches(tf, is_cycle, seq)
        if len(branches) == 2:
            idx = 0 if rng.getrandbits(1) else 1
        else:
            length = len(seq)
            k = length.bit_length()
            while True:
                idx = rng.getrandbits(k)
                if idx < length:
                    break
        pick, p = branches[idx]
        selected |= pick
        prob *= p
    return selected, prob


def phi_outcomes(X, tf: TwoFactor):
    """Full law of the run-selection operation applied to vertex set ``X``.

    Returns all (subset, probability) outcomes; per run, a path yields its
    canonical alternating set or the complement (half each), an even cycle
    its two alternating sets (half each) and an odd cycle each of its
    maximum independent sets uniformly.
    """
    members = set()
    n = tf.graph.n
    for v in X:
        if not (0 <= v < n):
            raise GraphError("vertex %r out of range" % (v,))
        members.add(v)
    outcomes = [(0, Fraction(1))]
    for is_cycle, seq in _mask_runs(tf.cycles, _mask_of(members)):
        branches = _run_branches(tf, is_cycle, seq)
        outcomes = [(acc | pick, ap * p)
                    for acc, ap in outcomes for pick, p in branches]
    return [(frozenset(_mask_vertices(m)), p) for m, p in outcomes]


def _mask_vertices(mask: int):
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


def active_runs(o: Orientation, tf: TwoFactor):
    """Maximal stretches of active (head) vertices along the two-factor."""
    edges = {tuple(sorted(a)) for a in o.arcs}
    if edges != set(tf.m_edges):
        raise GraphError("orientation does not orient this matching")
    return [frozenset(seq)
            for _, seq in _mask_runs(tf.cycles, _mask_of(o.heads))]


# ---------------------------------------------------------------------------
# the four phases


def _phase_2(adj_mask, active: int) -> int:
    added = 0
    rest = active
    while rest:
        v = (rest & -rest).bit_length() - 1
        rest &= rest - 1
        if not adj_mask[v] & active:
            added |= 1 << v
    return added


def _feasible_mask(n, adj_mask, covered: int) -> int:
    feas = 0
    for v in range(n):
        if not (covered >> v) & 1 and not adj_mask[v] & covered:
            feas |= 1 << v
    return feas


def _phase_4(adj_mask, feasible: int) -> int:
    added = 0
    rest = feasible
    while rest:
        v = (rest & -rest).bit_length() - 1
        rest &= rest - 1
        if not adj_mask[v] & feasible:
            added |= 1 << v
    return added


def _adj_masks(g: Graph):
    if g.adj_mask is not None:
        return g.adj_mask
    return [_mask_of(g.adj[v]) for v in range(g.n)]


def _check_phase4(phase4):
    if phase4 not in PHASE4_MODES:
        raise GraphError("phase4 must be one of %r, got %r"
                         % (PHASE4_MODES, phase4))


def run_phases_1_4(g: Graph, tf: TwoFactor, rng, phase4: str = "start"):
    """Run the construction once, driving all choices from ``rng``.

    ``rng`` needs a ``getrandbits`` method.  Returns the full record of
    random choices and the output set.
    """
    _check_phase4(phase4)
    if tf.graph != g:
        raise TwoFactorError("two-factor belongs to a different graph")
    adj_mask = _adj_masks(g)

    m_edges = sorted(tf.m_edges)
    heads = 0
    for a, b in m_edges:
        heads |= (1 << b) if rng.getrandbits(1) else (1 << a)
    prob = Fraction(1, 1 << len(m_edges))

    s1, p1 = _sample_selection(tf, heads, rng)
    covered = s1 | _phase_2(adj_mask, heads)
    feasible = _feasible_mask(g.n, adj_mask, covered)
    s3, p3 = _sample_selection(tf, feasible, rng)
    covered |= s3
    if phase4 == "start":
        covered |= _phase_4(adj_mask, feasible)
    else:
        feas2 = _feasible_mask(g.n, adj_mask, covered)
        covered |= _phase_4(adj_mask, feas2)

    members = frozenset(_mask_vertices(covered))
    assert is_independent(g, members)
    situation = Situation(
        orientation_from_heads(tf, _mask_vertices(heads)),
        frozenset(_mask_vertices(s1)),
        frozenset(_mask_vertices(s3)),
        prob * p1 * p3,
    )
    return situation, IndependentSet(members)


# ---------------------------------------------------------------------------
# exact enumeration


class _SitRec:
    __slots__ = ("heads", "s1", "feasible", "s3", "out", "prob")

    def __init__(self, heads, s1, feasible, s3, out, prob):
        self.heads = heads
        self.s1 = s1
        self.feasible = feasible
        self.s3 = s3
        self.out = out
        self.prob = prob


class _Law:
    __slots__ = ("recs", "result")

    def __init__(self, recs, result):
        self.recs = recs
        self.result = result


_LAW_CACHE = {}


def _branch_products(tf, mask):
    """Cartesian product of the per-run selection branches on ``mask``."""
    outcomes = [(0, Fraction(1))]
    for is_cycle, seq in _mask_runs(tf.cycles, mask):
        branches = _run_branches(tf, is_cycle, seq)
        outcomes = [(acc | pick, ap * p)
                    for acc, ap in outcomes for pick, p in branches]
    return outcomes


def _compute_law(g, tf, phase4, max_orientations, max_branches):
    m = len(tf.m_edges)
    if (1 << m) > max_orientations:
        raise ExplosionGuard(
            "2^%d matching orientations exceed the limit of %d"
            % (m, max_orientations))
    adj_mask = _adj_masks(g)
    m_edges = sorted(tf.m_edges)
    recs = []
    branch_count = 0
    base = Fraction(1, 1 << m)
    for bits in range(1 << m):
        heads = 0
        for i, (a, b) in enumerate(m_edges):
            heads |= (1 << b) if (bits >> i) & 1 else (1 << a)
        for s1, p1 in _branch_products(tf, heads):
            covered1 = s1 | _phase_2(adj_mask, heads)
            feasible = _feasible_mask(g.n, adj_mask, covered1)
            for s3, p3 in _branch_products(tf, feasible):
                branch_count += 1
                if branch_count > max_branches:
                    raise ExplosionGuard(
                        "situation count passed the limit of %d branches"
                        % max_branches)
                covered = covered1 | s3
                if phase4 == "start":
                    covered |= _phase_4(adj_mask, feasible)
                else:
                    feas2 = _feasible_mask(g.n, adj_mask, covered)
                    covered |= _phase_4(adj_mask, feas2)
                recs.append(_SitRec(heads, s1, feasible, s3, covered,
                                    base * p1 * p3))

    pmf_masks = {}
    marginals = {v: Fraction(0) for v in range(g.n)}
    for rec in recs:
        pmf_masks[rec.out] = pmf_masks.get(rec.out, Fraction(0)) + rec.prob
        out = rec.out
        v = 0
        while out:
            if out & 1:
                marginals[v] += rec.prob
            out >>= 1
            v += 1
    pmf = {}
    for mask, prob in pmf_masks.items():
        members = frozenset(_mask_vertices(mask))
        assert is_independent(g, members)
        pmf[IndependentSet(members)] = prob
    result = EnumerationResult(Distribution(pmf), marginals)
    return _Law(recs, result)


def _law(g, tf, phase4="start", max_orientations=None, max_branches=None):
    _check_phase4(phase4)
    if tf.graph != g:
        raise TwoFactorError("two-factor belongs to a different graph")
    key = (g, tf, phase4)
    law = _LAW_CACHE.get(key)
    if law is None:
        law = _compute_law(
            g, tf, phase4,
            DEFAULT_MAX_ORIENTATIONS if max_orientations is None else max_orientations,
            DEFAULT_MAX_BRANCHES if max_branches is None else max_branches)
        _LAW_CACHE[key] = law
    return law


def enumerate_distribution(g: Graph, tf: TwoFactor, *, phase4: str = "start",
                           max_orientations: int = None,
                           max_branches: int = None) -> EnumerationResult:
    """Exact law of the output set, plus per-vertex inclusion probabilities."""
    return _law(g, tf, phase4, max_orientations, max_branches).result


def enumerate_situations(g: Graph, tf: TwoFactor, *, phase4: str = "start",
                         max_orientations: int = None,
                         max_branches: int = None):
    """Every situation with positive probability, with its output set."""
    law = _law(g, tf, phase4, max_orientations, max_branches)
    out = []
    for rec in law.recs:
        sit = Situation(
            orientation_from_heads(tf, _mask_vertices(rec.heads)),
            frozenset(_mask_vertices(rec.s1)),
            frozenset(_mask_vertices(rec.s3)),
            rec.prob,
        )
        out.append((sit, IndependentSet(frozenset(_mask_vertices(rec.out)))))
    return out


# ---------------------------------------------------------------------------
# template events against the exact law


def _template_masks(t: Template, tf: TwoFactor):
    validate_in(t, tf)
    return (_mask_of(t.heads), _mask_of(t.d1), _mask_of(t.d1bar),
            _mask_of(t.d3), _mask_of(t.d3bar))


def _weakly_conforms(rec, heads, d1, d1bar):
    return (rec.heads & heads == heads
            and rec.s1 & d1 == d1
            and not rec.s1 & d1bar)


def event_probability(t: Template, g: Graph, tf: TwoFactor, *,
                      phase4: str = "start", max_orientations: int = None,
                      max_branches: int = None) -> Fraction:
    """Exact probability that a random situation conforms to ``t``."""
    heads, d1, d1bar, d3, d3bar = _template_masks(t, tf)
    total = Fraction(0)
    for rec in _law(g, tf, phase4, max_orientations, max_branches).recs:
        if (_weakly_conforms(rec, heads, d1, d1bar)
                and rec.s3 & d3 == d3 and not rec.s3 & d3bar):
            total += rec.prob
    return total


def forces(t: Template, u: int, g: Graph, tf: TwoFactor, *,
           phase4: str = "start", max_orientations: int = None,
           max_branches: int = None) -> bool:
    """True when every situation conforming to ``t`` outputs ``u``."""
    heads, d1, d1bar, d3, d3bar = _template_masks(t, tf)
    bit = 1 << u
    for rec in _law(g, tf, phase4, max_orientations, max_branches).recs:
        if (_weakly_conforms(rec, heads, d1, d1bar)
                and rec.s3 & d3 == d3 and not rec.s3 & d3bar):
            if not rec.out & bit:
                return False
    return True


def admissible(t: Template, g: Graph, tf: TwoFactor, *,
               phase4: str = "start", max_orientations: int = None,
               max_branches: int = None) -> bool:
    """Phase-3 constraints limited to the focus, and the focus is feasible
    whenever the orientation and phase-1 constraints are met."""
    constrained = t.d3 | t.d3bar
    if not constrained:
        return True
    if t.focus is None or constrained != {t.focus}:
        return False
    heads, d1, d1bar, _, _ = _template_masks(t, tf)
    bit = 1 << t.focus
    for rec in _law(g, tf, phase4, max_orientations, max_branches).recs:
        if _weakly_conforms(rec, heads, d1, d1bar):
            if not rec.feasible & bit:
                return False
    return True


def exact_q(t: Template, g: Graph, tf: TwoFactor, *,
            phase4: str = "start", max_orientations: int = None,
            max_branches: int = None) -> Fraction:
    """Exact conditional probability that the focus's whole cycle is
    feasible, given that the situation conforms to ``t``; zero when the
    template carries no phase-3 requirement on the focus or the cycle is
    even."""
    if t.focus is None or t.focus not in t.d3:
        return Fraction(0)
    cycle = tf.cycles[tf.cycle_of[t.focus]]
    if len(cycle) % 2 == 0:
        return Fraction(0)
    cycle_mask = _mask_of(cycle)
    heads, d1, d1bar, d3, d3bar = _template_masks(t, tf)
    hit = Fraction(0)
    total = Fraction(0)
    for rec in _law(g, tf, phase4, max_orientations, max_branches).recs:
        if (_weakly_conforms(rec, heads, d1, d1bar)
                and rec.s3 & d3 == d3 and not rec.s3 & d3bar):
            total += rec.prob
            if rec.feasible & cycle_mask == cycle_mask:
                hit += rec.prob
    if total == 0:
        return Fraction(0)
    return hit / total


# ---------------------------------------------------------------------------
# Monte Carlo

try:  # compiled kernel is optional
    from . import _mcphases as _kernel
except ImportError:  # pragma: no cover - depends on build environment
    from . import _mcphases_py as _kernel


def kernel_backend() -> str:
    """Name of the trial kernel in use ("compiled" or "pure-python")."""
    return _kernel.backend_name()


@dataclass(frozen=True)
class MonteCarloReport:
    """Sampled inclusion counts with exact frequencies and standard errors.

    ``violations`` counts trials whose output failed the independence
    check; it is asserted to be useful for external audits and should
    always be zero.
    """

    n: int
    trials: int
    seed: int
    phase4: str
    backend: str
    counts: tuple
    violations: int

    def frequency(self, v: int) -> Fraction:
        return Fraction(self.counts[v], self.trials)

    def stderr(self, v: int) -> float:
        f = self.counts[v] / self.trials
        return math.sqrt(f * (1.0 - f) / self.trials)

    def to_json_dict(self):
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "phase4": self.phase4,
            "backend": self.backend,
            "violations": self.violations,
            "counts": list(self.counts),
            "frequencies": [str(self.frequency(v)) for v in range(self.n)],
            "stderr": [self.stderr(v) for v in range(self.n)],
        }


def _kernel_args(g: Graph, tf: TwoFactor):
    m_edges = sorted(tf.m_edges)
    edges_a = [a for a, _ in m_edges]
    edges_b = [b for _, b in m_edges]
    cycle_starts = [0]
    cycle_verts = []
    for cycle in tf.cycles:
        cycle_verts.extend(cycle)
        cycle_starts.append(len(cycle_verts))
    return edges_a, edges_b, cycle_starts, cycle_verts, list(_adj_masks(g))


def default_workers() -> int:
    env = os.environ.get("FRACCHROM_THREADS", "")
    try:
        value = int(env)
    except ValueError:
        return 1
    return max(1, value)


def monte_carlo(g: Graph, tf: TwoFactor, trials: int, seed: int, *,
                phase4: str = "start", workers: int = None) -> MonteCarloReport:
    """Estimate inclusion frequencies over ``trials`` independent runs.

    Fully deterministic for a given seed: every trial draws from its own
    seed-derived stream, so neither the worker count nor the scheduling
    changes the result.
    """
    _check_phase4(phase4)
    if tf.graph != g:
        raise TwoFactorError("two-factor belongs to a different graph")
    if not isinstance(trials, int) or trials < 1:
        raise GraphError("trials must be a positive integer")
    if workers is None:
        workers = default_workers()
    workers = max(1, min(workers, trials))

    if g.n > 64:
        counts = [0] * g.n
        violations = 0
        for t in range(trials):
            _, iset = run_phases_1_4(g, tf, trial_stream(seed, t), phase4)
            if not is_independent(g, iset.members):
                violations += 1
            for v in iset.members:
                counts[v] += 1
        return MonteCarloReport(g.n, trials, seed, phase4, "reference",
                                tuple(counts), violations)

    edges_a, edges_b, cycle_starts, cycle_verts, adj_mask = _kernel_args(g, tf)
    recompute = phase4 == "recompute"

    def run_chunk(first, count):
        return _kernel.run_trials(
            g.n, edges_a, edges_b, cycle_starts, cycle_verts, adj_mask,
            count, seed, first, recompute)

    if workers == 1:
        counts, violations = run_chunk(0, trials)
    else:
        chunk = (trials + workers - 1) // workers
        jobs = [(first, min(chunk, trials - first))
                for first in range(0, trials, chunk)]
        counts = [0] * g.n
        violations = 0
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part, bad in pool.map(lambda job: run_chunk(*job), jobs):
                violations += bad
                for v in range(g.n):
                    counts[v] += part[v]
    return MonteCarloReport(g.n, trials, seed, phase4,
                            _kernel.backend_name(), tuple(counts),
                            violations)
