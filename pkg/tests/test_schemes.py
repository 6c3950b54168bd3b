import dataclasses
import math

import numpy as np
import pytest

from zetachain import hypgeo, schemes
from zetachain.errors import (
    BelowLengthThreshold,
    IsometricCirclesOverlap,
    NonpositiveLength,
    TriangleConditionViolated,
)
from zetachain.hypgeo import Disk, compose, displacement_length
from zetachain.schemes import (
    asymptotic_radii_table,
    build_bowen_series,
    build_flow_adapted,
    scheme_from_json,
    scheme_to_json,
    solve_flow_radii,
    solve_generator_param,
    validate_scheme,
)


def symmetric_r13(ell):
    """Closed form for the outer radii of the (1,1,1) family."""
    return 8.0 / (math.cosh(ell / 2.0) + 1.0)


def bisect_middle_radius(r1, ell, n1=1):
    """1-d bisection oracle for r2 from the pair-(1,2) trace equation."""
    target = math.cosh(n1 * ell / 2.0)

    def f(r2):
        return (4.0 - r1 - r2) / (2.0 * math.sqrt(r1 * r2)) - target

    lo, hi = 1e-300, 1.0
    assert f(lo) > 0 > f(hi)
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-18 * hi:
            break
    return 0.5 * (lo + hi)


class TestGeneratorParam:
    def test_trace_condition_holds(self):
        a = solve_generator_param(2.0, 2.0, 2.0)
        rhs = 2.0 * (math.cosh(1) ** 2 + math.cosh(1)) / math.sinh(1) ** 2
        assert a + 1.0 / a == pytest.approx(rhs, abs=1e-12)
        S1, S2 = schemes.generator_pair(2.0, 2.0, 2.0)
        tr = compose(S1, S2.inverse()).trace_stored()
        assert tr == pytest.approx(-2.0 * math.cosh(1.0), abs=1e-12)

    def test_symmetric_in_first_two_lengths(self):
        assert solve_generator_param(1.4, 2.6, 2.0) == solve_generator_param(2.6, 1.4, 2.0)

    def test_always_above_one(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            l1, l2, l3 = rng.uniform(0.2, 15.0, size=3)
            assert solve_generator_param(l1, l2, l3) > 1.0

    def test_nonpositive_rejected(self):
        with pytest.raises(NonpositiveLength):
            solve_generator_param(0.0, 1.0, 1.0)


class TestBowenSeries:
    def test_single_letter_word_has_funnel_length(self):
        s = build_bowen_series(12.0, 12.0, 12.0)
        assert displacement_length(s.edge(1, 1).full) == pytest.approx(12.0, abs=1e-10)
        assert displacement_length(s.edge(2, 2).full) == pytest.approx(12.0, abs=1e-10)

    def test_adjacency_forbidden_entries(self):
        s = build_bowen_series(12.0, 12.0, 12.0)
        zeros = [(i, j) for i in range(1, 5) for j in range(1, 5)
                 if not s.adjacency[i - 1, j - 1]]
        assert zeros == [(1, 3), (2, 4), (3, 1), (4, 2)]

    def test_overlap_for_extreme_ratios(self):
        # two long funnels against a very short one squeeze the S1 and S2
        # isometric circles into each other
        with pytest.raises(IsometricCirclesOverlap):
            build_bowen_series(30.0, 30.0, 0.01)

    def test_short_symmetric_lengths_stay_disjoint(self):
        # the disjointness margin shrinks like l/4 but stays positive
        rep = validate_scheme(build_bowen_series(0.1, 0.1, 0.1))
        assert rep.passed

    def test_validates(self):
        rep = validate_scheme(build_bowen_series(12.0, 12.0, 12.0))
        assert rep.passed
        assert rep.contraction_theta < 1.0


class TestFlowRadii:
    def test_symmetric_closed_form(self):
        r1, r2, r3 = solve_flow_radii((1, 1, 1), 10.0)
        ref = symmetric_r13(10.0)
        assert r1 == pytest.approx(ref, rel=1e-12)
        assert r3 == pytest.approx(ref, rel=1e-12)

    def test_middle_radius_against_bisection(self):
        r1, r2, _ = solve_flow_radii((1, 1, 1), 10.0)
        assert r2 == pytest.approx(bisect_middle_radius(symmetric_r13(10.0), 10.0), rel=1e-12)

    def test_trace_equation_residuals(self):
        sep_sq = (4.0, 4.0, 16.0)
        for n in ((1, 1, 1), (4, 4, 5), (4, 5, 6)):
            for ell in (8.0, 10.0, 12.0, 14.0):
                r = solve_flow_radii(n, ell)
                for k, (i, j) in enumerate(((0, 1), (1, 2), (0, 2))):
                    lhs = (sep_sq[k] - r[i] - r[j]) / (2.0 * math.sqrt(r[i] * r[j]))
                    assert lhs == pytest.approx(math.cosh(n[k] * ell / 2.0), rel=1e-12)

    def test_relabeling_permutes_radii(self):
        # swapping n1 and n2 reads the disk row backwards; the pinned pair
        # separations (4, 4, 16) are invariant under that relabeling
        ell = 12.0
        fwd = solve_flow_radii((4, 5, 6), ell)
        rev = solve_flow_radii((5, 4, 6), ell)
        np.testing.assert_allclose(rev, fwd[::-1], rtol=1e-12)

    def test_triangle_violation(self):
        with pytest.raises(TriangleConditionViolated):
            solve_flow_radii((1, 1, 3), 10.0)


class TestFlowBuilder:
    def test_below_threshold(self):
        with pytest.raises(BelowLengthThreshold):
            build_flow_adapted((1, 1, 1), 6.0)

    def test_pair_displacements(self):
        for n in ((1, 1, 1), (4, 4, 5), (4, 5, 6)):
            for ell in (8.0, 10.0, 12.0, 14.0):
                s = build_flow_adapted(n, ell)
                words = {0: (1, 5, 1), 1: (2, 6, 2), 2: (1, 6, 1)}
                for k, w in words.items():
                    m = compose(s.edge(w[1], w[2]).full, s.edge(w[0], w[1]).full)
                    assert displacement_length(m) == pytest.approx(
                        n[k] * ell, abs=1e-9 * (1 + n[k] * ell)
                    )

    def test_disk_centers_pinned(self):
        s = build_flow_adapted((4, 4, 5), 8.0)
        for j, d in enumerate(s.disks):
            assert d.center == 2.0 * j

    def test_weight_table_symmetric(self):
        s = build_flow_adapted((4, 5, 6), 8.0)
        for (i, j), em in s.edges.items():
            assert em.weight == s.edge(j, i).weight
        assert s.edge(1, 5).weight == 4
        assert s.edge(2, 6).weight == 5
        assert s.edge(3, 4).weight == 6

    def test_kappa_edge_identity(self):
        s = build_flow_adapted((4, 5, 6), 8.0)
        kap = list(s.kappa) + list(s.kappa)
        for (i, j), em in s.edges.items():
            assert kap[i - 1] + kap[j - 1] == em.weight  # integer halves are exact

    def test_validates(self):
        rep = validate_scheme(build_flow_adapted((1, 1, 1), 10.0))
        assert rep.passed
        assert rep.contraction_theta < 1.0

    def test_inflated_radius_flagged(self):
        s = build_flow_adapted((1, 1, 1), 10.0)
        fat = dataclasses.replace(
            s, disks=(s.disks[0], Disk(2.0, 10.0 * s.disks[1].radius)) + s.disks[2:]
        )
        rep = validate_scheme(fat)
        assert not rep.passed
        assert any("overlap" in f or "escapes" in f or "hits" in f for f in rep.failures)


class TestAsymptotics:
    def test_kappa_values(self):
        t = asymptotic_radii_table((4, 4, 5), [8.0])
        assert t.kappa == (2.5, 1.5, 2.5)

    def test_kappa_positive_under_triangle(self):
        for n in ((1, 1, 1), (4, 4, 5), (4, 5, 6), (2, 3, 4)):
            t = asymptotic_radii_table(n, [10.0])
            assert min(t.kappa) > 0

    def test_symmetric_product_tends_to_16(self):
        t = asymptotic_radii_table((1, 1, 1), [8.0, 10.0, 12.0, 14.0])
        col = t.products[:, 0]
        ref = [8.0 * math.exp(e / 2) / (math.cosh(e / 2) + 1.0) for e in t.ells]
        np.testing.assert_allclose(col, ref, rtol=1e-11)
        diffs = np.abs(np.diff(col))
        assert np.all(np.diff(diffs) < 0)
        assert col[-1] == pytest.approx(16.0, rel=0.01)


class TestJsonRoundTrip:
    @pytest.mark.parametrize("build", [
        lambda: build_flow_adapted((1, 1, 1), 10.0),
        lambda: build_bowen_series(12.0, 12.0, 12.0),
    ])
    def test_bit_exact(self, build):
        s = build()
        text = scheme_to_json(s)
        s2 = scheme_from_json(text)
        assert scheme_to_json(s2) == text
        for key in s.edges:
            u = 0.37 + 0.21j
            assert s2.edge(*key).full(u) == pytest.approx(s.edge(*key).full(u), rel=1e-15)
