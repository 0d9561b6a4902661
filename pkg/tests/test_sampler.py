"""Tests for the four-phase construction: exact law, events, Monte Carlo."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracchrom.graph_core import Graph, GraphError
from fracchrom.two_factor import TwoFactorError, two_factor_from_matching
from fracchrom import sampler as S
from fracchrom import templates as T

from sweeps import check_lemma4_rows, collect_candidates, lemma4_sweep
from util_graphs import circular_ladder, gp72, k33, moebius_ladder, petersen


def petersen_tf():
    g = petersen()
    return g, two_factor_from_matching(g, [(i, 5 + i) for i in range(5)])


def k33_tf():
    g = k33()
    return g, two_factor_from_matching(g, [(0, 3), (1, 4), (2, 5)])


def gp72_tf():
    g = gp72()
    return g, two_factor_from_matching(g, [(i, 7 + i) for i in range(7)])


def cl_tf(k):
    g = circular_ladder(k)
    return g, two_factor_from_matching(g, [(i, k + i) for i in range(k)])


def tri2sq_tf():
    # two triangles and a square; the square hosts the mates of 1 and 2 at
    # distance two from each other, which lets the whole triangle (0,1,2)
    # stay feasible with positive probability
    g = Graph(10, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3),
                   (6, 7), (7, 8), (8, 9), (9, 6),
                   (0, 3), (1, 6), (2, 8), (4, 7), (5, 9)])
    return g, two_factor_from_matching(
        g, [(0, 3), (1, 6), (2, 8), (4, 7), (5, 9)])


def is_maximal_independent(g, members):
    members = set(members)
    if not S.is_independent(g, members):
        return False
    for v in range(g.n):
        if v not in members and not members.intersection(g.adj[v]):
            return False
    return True


# ---------------------------------------------------------------------------
# bit source


class TestSplitMix64:
    def test_reference_vectors(self):
        # published outputs of the standard splitmix64 for seed 0
        rng = S.SplitMix64(0)
        assert [rng.next_u64() for _ in range(3)] == [
            0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]

    def test_getrandbits_takes_top_bits(self):
        a = S.SplitMix64(12345)
        b = S.SplitMix64(12345)
        full = a.next_u64()
        assert b.getrandbits(7) == full >> 57

    def test_getrandbits_range(self):
        rng = S.SplitMix64(1)
        with pytest.raises(ValueError):
            rng.getrandbits(0)
        with pytest.raises(ValueError):
            rng.getrandbits(65)
        assert 0 <= rng.getrandbits(1) <= 1

    def test_trial_streams_are_affine_jumps(self):
        seed = 999
        s0 = S.trial_stream(seed, 0)
        manual = S.SplitMix64(seed + 0x9E3779B97F4A7C15)
        assert s0.next_u64() == manual.next_u64()
        # distinct trials give distinct streams
        outs = {S.trial_stream(seed, t).next_u64() for t in range(50)}
        assert len(outs) == 50


# ---------------------------------------------------------------------------
# orientations


class TestOrientation:
    def test_from_heads_roundtrip(self):
        g, tf = petersen_tf()
        o = S.orientation_from_heads(tf, range(5))
        assert o.heads == frozenset(range(5))
        assert o.arcs == tuple((5 + i, i) for i in range(5))
        assert o.active(0) and not o.active(5)

    def test_from_heads_needs_one_endpoint_per_edge(self):
        g, tf = petersen_tf()
        with pytest.raises(GraphError):
            S.orientation_from_heads(tf, [0, 5, 1, 2, 3, 4])  # both of a spoke
        with pytest.raises(GraphError):
            S.orientation_from_heads(tf, [0, 1, 2, 3])  # spoke 4-9 unset

    def test_value_semantics(self):
        a = S.Orientation([(5, 0), (6, 1)])
        b = S.Orientation([(6, 1), (5, 0)])
        assert a == b and hash(a) == hash(b)
        assert a.arcs == ((5, 0), (6, 1))

    def test_double_orientation_rejected(self):
        with pytest.raises(GraphError):
            S.Orientation([(5, 0), (0, 5)])


# ---------------------------------------------------------------------------
# the run-selection law


class TestPhiOutcomes:
    def test_singleton(self):
        g, tf = petersen_tf()
        law = dict(S.phi_outcomes({0}, tf))
        assert law == {frozenset({0}): Fraction(1, 2),
                       frozenset(): Fraction(1, 2)}

    def test_three_path(self):
        g, tf = petersen_tf()
        # outer cycle is (0, 4, 3, 2, 1); {0,4,3} is a path run
        law = dict(S.phi_outcomes({0, 4, 3}, tf))
        assert law == {frozenset({0, 3}): Fraction(1, 2),
                       frozenset({4}): Fraction(1, 2)}

    def test_even_path_canonical_branch_holds_smaller_position(self):
        g, tf = petersen_tf()
        # run (0, 4): positions 0 and 1 -> canonical branch is {0}
        out = S.phi_outcomes({0, 4}, tf)
        assert out[0] == (frozenset({0}), Fraction(1, 2))
        assert out[1] == (frozenset({4}), Fraction(1, 2))
        # run (1, 0) wraps: positions 4 and 0 -> canonical branch is {0}
        out = S.phi_outcomes({1, 0}, tf)
        assert out[0] == (frozenset({0}), Fraction(1, 2))
        assert out[1] == (frozenset({1}), Fraction(1, 2))

    def test_full_odd_cycle_uniform_over_maximum_sets(self):
        g, tf = petersen_tf()
        law = dict(S.phi_outcomes({0, 1, 2, 3, 4}, tf))
        assert len(law) == 5
        for members, p in law.items():
            assert p == Fraction(1, 5)
            assert len(members) == 2
            assert S.is_independent(g, members)

    def test_full_even_cycle_two_alternating_sets(self):
        g, tf = k33_tf()
        # the whole two-factor is the 6-cycle (0, 5, 1, 3, 2, 4)
        law = dict(S.phi_outcomes(range(6), tf))
        assert law == {frozenset({0, 1, 2}): Fraction(1, 2),
                       frozenset({5, 3, 4}): Fraction(1, 2)}

    def test_disconnected_parts_multiply(self):
        g, tf = petersen_tf()
        law = dict(S.phi_outcomes({0, 3, 5}, tf))  # two runs: {0,3} apart? ...
        # 0 and 3 are non-adjacent on the outer cycle, 5 is inner: three
        # singleton runs -> eight outcomes collapsing to 2^3 products
        assert sum(law.values()) == 1
        assert max(len(s) for s in law) == 3
        assert law[frozenset({0, 3, 5})] == Fraction(1, 8)
        assert law[frozenset()] == Fraction(1, 8)

    def test_out_of_range_vertex(self):
        g, tf = petersen_tf()
        with pytest.raises(GraphError):
            S.phi_outcomes({0, 99}, tf)

    @settings(max_examples=40, deadline=None)
    @given(st.sets(st.integers(min_value=0, max_value=9)))
    def test_law_properties(self, xs):
        g, tf = petersen_tf()
        law = S.phi_outcomes(xs, tf)
        assert sum(p for _, p in law) == 1
        for members, p in law:
            assert members <= xs
            assert p > 0
            # no two chosen vertices adjacent along the two-factor
            for v in members:
                assert tf.step(v, 1) not in members
                assert tf.step(v, -1) not in members


class TestActiveRuns:
    def test_all_outward(self):
        g, tf = petersen_tf()
        o = S.orientation_from_heads(tf, range(5))
        assert S.active_runs(o, tf) == [frozenset(range(5))]

    def test_mixed(self):
        g, tf = petersen_tf()
        o = S.orientation_from_heads(tf, [0, 6, 7, 8, 9])
        assert S.active_runs(o, tf) == [frozenset({0}),
                                        frozenset({6, 7, 8, 9})]

    def test_foreign_orientation(self):
        g, tf = petersen_tf()
        o = S.Orientation([(5, 0)])
        with pytest.raises(GraphError):
            S.active_runs(o, tf)


# ---------------------------------------------------------------------------
# single runs of the construction


class TestRunPhases:
    def test_deterministic_per_stream(self):
        g, tf = petersen_tf()
        a = S.run_phases_1_4(g, tf, S.trial_stream(7, 0))
        b = S.run_phases_1_4(g, tf, S.trial_stream(7, 0))
        assert a == b

    def test_situation_invariants(self):
        g, tf = petersen_tf()
        for t in range(200):
            sit, iset = S.run_phases_1_4(g, tf, S.trial_stream(11, t))
            assert 0 < sit.prob <= 1
            assert sit.s1 <= sit.orientation.heads
            assert not sit.s3 & sit.orientation.heads  # feasible = inactive
            assert sit.s1 | sit.s3 <= iset.members
            assert is_maximal_independent(g, iset.members)

    def test_phase2_rule(self):
        g, tf = petersen_tf()
        for t in range(200):
            sit, iset = S.run_phases_1_4(g, tf, S.trial_stream(13, t))
            heads = sit.orientation.heads
            for v in heads:
                if not heads.intersection(g.adj[v]):
                    assert v in iset.members

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2**63))
    def test_output_always_maximal_independent(self, seed):
        g, tf = cl_tf(5)
        _, iset = S.run_phases_1_4(g, tf, S.SplitMix64(seed))
        assert is_maximal_independent(g, iset.members)

    def test_rejects_foreign_two_factor(self):
        g, tf = petersen_tf()
        h = k33()
        with pytest.raises(TwoFactorError):
            S.run_phases_1_4(h, tf, S.SplitMix64(0))

    def test_rejects_bad_phase4(self):
        g, tf = petersen_tf()
        with pytest.raises(GraphError):
            S.run_phases_1_4(g, tf, S.SplitMix64(0), phase4="never")


# ---------------------------------------------------------------------------
# exact enumeration


class TestEnumerate:
    def test_petersen_law(self):
        g, tf = petersen_tf()
        res = S.enumerate_distribution(g, tf)
        assert len(res.distribution) == 15
        assert set(res.marginals.values()) == {Fraction(117, 320)}
        for iset, p in res.distribution.items():
            assert p > 0
            assert is_maximal_independent(g, iset.members)

    def test_k33_law_is_the_two_sides(self):
        # hand-derived: every orientation of the three matching edges ends
        # in one of the two sides.  E.g. heads {0,1,2} are three singleton
        # runs on the 6-cycle (0,5,1,3,2,4), phase 2 adds all of them and
        # blocks everything else; heads {0,5,1} form one run (0,5,1) whose
        # two branches {0,1} / {5} are completed to a full side by phases
        # 3 and 4.  Symmetry gives sides with probability 1/2 each.
        g, tf = k33_tf()
        res = S.enumerate_distribution(g, tf)
        law = {frozenset(s.members): p for s, p in res.distribution.items()}
        assert law == {frozenset({0, 1, 2}): Fraction(1, 2),
                       frozenset({3, 4, 5}): Fraction(1, 2)}
        assert set(res.marginals.values()) == {Fraction(1, 2)}

    def test_prism_uniform(self):
        g, tf = cl_tf(3)
        res = S.enumerate_distribution(g, tf)
        assert set(res.marginals.values()) == {Fraction(1, 3)}

    def test_cl5_uniform(self):
        g, tf = cl_tf(5)
        res = S.enumerate_distribution(g, tf)
        assert set(res.marginals.values()) == {Fraction(2, 5)}

    def test_gp72_minimum_marginal(self):
        g, tf = gp72_tf()
        res = S.enumerate_distribution(g, tf)
        assert min(res.marginals.values()) == Fraction(1259, 3584)

    def test_marginals_match_distribution(self):
        g, tf = petersen_tf()
        res = S.enumerate_distribution(g, tf)
        for v in range(g.n):
            assert res.marginals[v] == res.distribution.marginal(v)

    def test_phase4_readings_coincide_per_situation(self):
        # the two feasibility readings of the last phase provably select
        # the same vertices (the leftover singleton runs); lock that in
        for g, tf in (petersen_tf(), cl_tf(5), tri2sq_tf()):
            a = S.enumerate_situations(g, tf, phase4="start")
            b = S.enumerate_situations(g, tf, phase4="recompute")
            assert a == b

    def test_cache_returns_same_object(self):
        g, tf = petersen_tf()
        r1 = S.enumerate_distribution(g, tf)
        r2 = S.enumerate_distribution(g, tf)
        assert r1 is r2

    def test_situations_consistent(self):
        g, tf = petersen_tf()
        sits = S.enumerate_situations(g, tf)
        assert sum(s.prob for s, _ in sits) == 1
        for sit, iset in sits:
            assert sit.s1 <= sit.orientation.heads
            assert not sit.s3 & sit.orientation.heads
            assert sit.s1 | sit.s3 <= iset.members

    def test_default_orientation_guard(self):
        g, tf = cl_tf(17)  # 2^17 orientations
        with pytest.raises(S.ExplosionGuard):
            S.enumerate_distribution(g, tf)

    def test_explicit_guards(self):
        g = moebius_ladder(5)
        tf = two_factor_from_matching(g, [(i, 5 + i) for i in range(5)])
        with pytest.raises(S.ExplosionGuard):
            S.enumerate_distribution(g, tf, max_orientations=4)
        with pytest.raises(S.ExplosionGuard):
            S.enumerate_distribution(g, tf, max_branches=10)

    def test_guard_is_a_guard_exceeded(self):
        from fracchrom.graph_core import GuardExceeded
        assert issubclass(S.ExplosionGuard, GuardExceeded)

    def test_distribution_validates(self):
        one = S.IndependentSet(frozenset({0}))
        with pytest.raises(GraphError):
            S.Distribution({one: Fraction(1, 2)})
        with pytest.raises(GraphError):
            S.Distribution({one: Fraction(0)})


# ---------------------------------------------------------------------------
# template events against the exact law


def conforms(sit, t):
    """Public-semantics conformance: orientation extends the template's
    arcs, phase-1 and phase-3 requirements all hold."""
    return (t.heads <= sit.orientation.heads
            and t.d1 <= sit.s1 and not t.d1bar & sit.s1
            and t.d3 <= sit.s3 and not t.d3bar & sit.s3)


class TestEvents:
    def test_forcing_family_exact_probabilities(self):
        g, tf = petersen_tf()
        expected = {"E0": Fraction(1, 8), "E-": Fraction(1, 16),
                    "E+": Fraction(1, 16), "E+-": Fraction(19, 320)}
        for name, want in expected.items():
            t = T.builtin(name, tf, 0)
            assert S.event_probability(t, g, tf) == want

    def test_forcing_family_partitions_active_success(self):
        g, tf = petersen_tf()
        sits = S.enumerate_situations(g, tf)
        templates = [T.builtin(n, tf, 0) for n in T.FORCING_NAMES]
        direct = sum((sit.prob for sit, iset in sits
                      if 0 in sit.orientation.heads and 0 in iset),
                     Fraction(0))
        total = sum((S.event_probability(t, g, tf) for t in templates),
                    Fraction(0))
        assert total == direct
        for sit, _ in sits:
            assert sum(1 for t in templates if conforms(sit, t)) <= 1

    def test_event_probability_agrees_with_situation_filter(self):
        g, tf = petersen_tf()
        sits = S.enumerate_situations(g, tf)
        for name in ("E0", "B", "C1", "D-"):
            t = T.builtin(name, tf, 0)
            want = sum((sit.prob for sit, _ in sits if conforms(sit, t)),
                       Fraction(0))
            assert S.event_probability(t, g, tf) == want

    def test_focus_only_template_is_the_sure_event(self):
        g, tf = petersen_tf()
        t = T.parse_template_dsl("focus 0", tf)
        assert S.event_probability(t, g, tf) == 1
        assert not S.forces(t, 0, g, tf)

    def test_forcing_family_forces(self):
        g, tf = petersen_tf()
        for name in T.FORCING_NAMES:
            assert S.forces(T.builtin(name, tf, 0), 0, g, tf)

    def test_phase3_requirement_forces_trivially(self):
        g, tf = petersen_tf()
        # any template demanding u in the phase-3 selection forces u
        assert S.forces(T.builtin("B", tf, 0), 0, g, tf)

    def test_admissibility(self):
        g, tf = petersen_tf()
        for name in T.FORCING_NAMES:
            assert S.admissible(T.builtin(name, tf, 0), g, tf)
        # standalone right-hand templates constrain the focus's phase-3
        # state without protecting it, so some weakly conforming
        # situation leaves the focus infeasible
        assert not S.admissible(T.builtin("B", tf, 0), g, tf)
        assert not S.admissible(T.builtin("C1", tf, 0), g, tf)

    def test_library_members_force_and_are_admissible(self):
        g, tf = petersen_tf()
        members = [(n, t) for n, t in T.sigma_library(tf, 0)
                   if t is not T.INVALID]
        assert members
        for name, t in members:
            assert S.admissible(t, g, tf), name
            assert S.forces(t, 0, g, tf), name

    def test_library_union_probability(self):
        g, tf = petersen_tf()
        members = [t for _, t in T.sigma_library(tf, 0) if t is not T.INVALID]
        sits = S.enumerate_situations(g, tf)
        union = sum((sit.prob for sit, _ in sits
                     if any(conforms(sit, t) for t in members)), Fraction(0))
        assert union == Fraction(67, 1280)
        assert union >= Fraction(8, 256)

    def test_lemma4_sweep_petersen_and_k33(self):
        for g, tf in (petersen_tf(), k33_tf()):
            rows = lemma4_sweep(g, tf, 0)
            checked, bad = check_lemma4_rows(rows)
            assert not bad, bad
            assert checked >= 4  # at least the four forcing templates

    def test_exact_q_zero_on_two_cycle_factors(self):
        g, tf = petersen_tf()
        b = T.builtin("B", tf, 0)
        assert T.q_upper(b, g, tf) == Fraction(1, 8)
        assert S.exact_q(b, g, tf) == 0
        assert S.event_probability(b, g, tf) == Fraction(37, 1280)

    def test_exact_q_positive_fixture(self):
        g, tf = tri2sq_tf()
        b = T.builtin("B", tf, 0)
        q = S.exact_q(b, g, tf)
        assert q == Fraction(2, 9)
        assert q <= T.q_upper(b, g, tf) == Fraction(1, 2)

    def test_exact_q_needs_phase3_focus(self):
        g, tf = petersen_tf()
        assert S.exact_q(T.builtin("E0", tf, 0), g, tf) == 0
        assert S.exact_q(T.parse_template_dsl("focus 0", tf), g, tf) == 0

    def test_foreign_template_rejected(self):
        g, tf = petersen_tf()
        _, tfk = k33_tf()
        t = T.builtin("B", tfk, 0)
        with pytest.raises(T.TemplateError):
            S.event_probability(t, g, tf)


# ---------------------------------------------------------------------------
# Monte Carlo


class TestMonteCarlo:
    def test_matches_exact_marginals_within_4_sigma(self):
        g, tf = petersen_tf()
        exact = S.enumerate_distribution(g, tf).marginals
        rep = S.monte_carlo(g, tf, 100_000, seed=2024)
        assert rep.violations == 0
        for v in range(g.n):
            freq = rep.counts[v] / rep.trials
            assert abs(freq - float(exact[v])) <= 4 * rep.stderr(v)

    def test_deterministic_and_worker_independent(self):
        g, tf = gp72_tf()
        a = S.monte_carlo(g, tf, 20_000, seed=5, workers=1)
        b = S.monte_carlo(g, tf, 20_000, seed=5, workers=3)
        assert a.counts == b.counts
        assert a.violations == b.violations == 0

    def test_seed_matters(self):
        g, tf = petersen_tf()
        a = S.monte_carlo(g, tf, 5_000, seed=1)
        b = S.monte_carlo(g, tf, 5_000, seed=2)
        assert a.counts != b.counts

    def test_report_fields(self):
        g, tf = petersen_tf()
        rep = S.monte_carlo(g, tf, 1_000, seed=0)
        assert rep.n == 10 and rep.trials == 1_000 and rep.seed == 0
        assert rep.backend in ("compiled", "pure-python")
        assert rep.frequency(0) == Fraction(rep.counts[0], 1_000)
        assert 0.0 <= rep.stderr(0) < 1.0
        d = rep.to_json_dict()
        assert set(d) == {"n", "trials", "seed", "phase4", "backend",
                          "violations", "counts", "frequencies", "stderr"}

    def test_large_graph_uses_reference_path(self):
        k = 33  # 66 vertices, beyond the one-word kernels
        g = circular_ladder(k)
        tf = two_factor_from_matching(g, [(i, k + i) for i in range(k)])
        rep = S.monte_carlo(g, tf, 60, seed=8)
        assert rep.backend == "reference"
        assert rep.violations == 0
        assert len(rep.counts) == 66
        again = S.monte_carlo(g, tf, 60, seed=8)
        assert rep.counts == again.counts

    def test_input_validation(self):
        g, tf = petersen_tf()
        with pytest.raises(GraphError):
            S.monte_carlo(g, tf, 0, seed=1)
        with pytest.raises(GraphError):
            S.monte_carlo(g, tf, 100, seed=1, phase4="other")
        h = k33()
        with pytest.raises(TwoFactorError):
            S.monte_carlo(h, tf, 10, seed=1)

    def test_kernel_backend_reports(self):
        assert S.kernel_backend() in ("compiled", "pure-python")


class TestIndependentSetType:
    def test_coercion_and_protocol(self):
        s = S.IndependentSet({3, 1})
        assert isinstance(s.members, frozenset)
        assert 1 in s and 2 not in s
        assert len(s) == 2
        assert s.to_json_list() == [1, 3]
        assert s == S.IndependentSet(frozenset({1, 3}))

    def test_situation_probability_range(self):
        o = S.Orientation([(5, 0)])
        with pytest.raises(GraphError):
            S.Situation(o, frozenset(), frozenset(), Fraction(2))
