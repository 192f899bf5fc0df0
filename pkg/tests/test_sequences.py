import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pebms import (
    AnalyticSpace,
    DomainError,
    PointSequence,
    SelfMap,
    cauchy_tail,
    converges_to,
    gen_space,
    orbit,
    zero_cauchy_tail,
)


@pytest.fixture
def quarter_map():
    return SelfMap.from_expression("x/4", (0.0, 1.0))


class TestSelfMap:
    def test_analytic_orbit(self, quarter_map):
        seq = orbit(quarter_map, 1.0, 3)
        assert seq.terms == (1.0, 0.25, 0.0625, 0.015625)

    def test_identity_orbit(self):
        ident = SelfMap.from_expression("x", (0.0, 1.0))
        assert orbit(ident, 0.7, 5).terms == (0.7,) * 6

    def test_finite_constant_map(self, ebm_235):
        to_zero = SelfMap.from_table([0, 0, 0])
        assert orbit(to_zero, 2, 2).terms == (2, 0, 0)

    def test_orbit_length(self, quarter_map):
        assert len(orbit(quarter_map, 1.0, 0)) == 1
        with pytest.raises(ValueError):
            orbit(quarter_map, 1.0, -1)

    def test_table_validation(self):
        with pytest.raises(ValueError, match="outside"):
            SelfMap.from_table([0, 3])

    def test_escape_detected_at_construction(self):
        with pytest.raises(ValueError, match="leaves"):
            SelfMap.from_expression("x + 1", (0.0, 1.0))

    def test_escape_detected_during_orbit_names_step(self):
        # a bump too narrow for the 33 construction samples, centered off-grid
        mp = SelfMap.from_expression("x + 0.7*max(0, 1 - 200*abs(x - 1/3))", (0.0, 1.0))
        with pytest.raises(DomainError, match="step 1"):
            orbit(mp, 1.0 / 3.0, 10)

    def test_start_outside_domain(self, quarter_map):
        with pytest.raises(DomainError):
            orbit(quarter_map, 2.0, 1)

    def test_orbit_deterministic(self, quarter_map):
        a = orbit(quarter_map, 0.9, 30)
        b = orbit(quarter_map, 0.9, 30)
        assert a.terms == b.terms


class TestConvergesTo:
    def test_one_over_n_converges_to_zero(self, max_space):
        seq = PointSequence(tuple(1.0 / n for n in range(1, 1001)), generator="1/n")
        verdict = converges_to(max_space, seq, 0.0, tol=1e-2)
        assert verdict.converged
        assert verdict.final_discrepancy == 1e-3  # max(1/1000, 0) - 0
        assert verdict.limit_self_distance == 0.0

    def test_constant_sequence(self, max_space):
        seq = PointSequence((0.4,) * 50)
        verdict = converges_to(max_space, seq, 0.4, tol=1e-12)
        assert verdict.converged and verdict.final_discrepancy == 0.0

    def test_non_unique_limit_phenomenon(self, max_space):
        # p(1/n, 1/2) = 1/2 = p(1/2, 1/2): the candidate 1/2 also passes
        seq = PointSequence(tuple(1.0 / n for n in range(1, 1001)))
        verdict = converges_to(max_space, seq, 0.5, tol=1e-2)
        assert verdict.converged
        assert verdict.final_discrepancy == 0.0
        assert verdict.limit_self_distance == 0.5

    def test_oscillation_rejected_by_monotone_guard(self, max_space):
        seq = PointSequence(tuple(0.0 if i % 2 else 1.0 for i in range(100)))
        verdict = converges_to(max_space, seq, 0.0, tol=2.0)
        assert not verdict.converged
        assert not verdict.tail_monotone

    def test_finite_space_sequence(self, ebm_235):
        seq = PointSequence((0, 1, 2, 2, 2))
        verdict = converges_to(ebm_235, seq, 2, tol=1e-9)
        assert verdict.converged and verdict.final_discrepancy == 0.0

    def test_validation(self, max_space):
        with pytest.raises(ValueError):
            converges_to(max_space, PointSequence(()), 0.0, tol=1e-2)
        with pytest.raises(ValueError):
            converges_to(max_space, PointSequence((0.5,)), 0.0, tol=0.0)


class TestCauchyTails:
    def test_inverse_squares_zero_cauchy(self, min_space):
        seq = PointSequence(tuple(1.0 / n**2 for n in range(1, 2001)), generator="1/n^2")
        tail = zero_cauchy_tail(min_space, seq, window=100)
        assert tail == 1.0 / 1901**2  # |x-y| + min collapses to max on the tail
        assert tail <= 2.0 / 1901**2

    def test_constant_zero(self, max_space):
        seq = PointSequence((0.0,) * 10)
        assert zero_cauchy_tail(max_space, seq, window=5) == 0.0

    def test_cauchy_but_not_zero_cauchy(self, max_space):
        seq = PointSequence((1.0,) * 40)
        assert zero_cauchy_tail(max_space, seq, window=10) == 1.0
        est, spread = cauchy_tail(max_space, seq, window=10)
        assert est == 1.0 and spread == 0.0

    def test_alternating_not_cauchy(self, max_space):
        seq = PointSequence(tuple(0.0 if i % 2 else 1.0 for i in range(30)))
        est, spread = cauchy_tail(max_space, seq, window=10)
        assert spread == 1.0

    def test_inverse_squares_settle(self, min_space):
        seq = PointSequence(tuple(1.0 / n**2 for n in range(1, 2001)))
        est, spread = cauchy_tail(min_space, seq, window=100)
        assert est < 1e-6 and spread < 1e-6

    def test_window_validation(self, max_space):
        seq = PointSequence((0.1, 0.2, 0.3))
        with pytest.raises(ValueError, match="window"):
            zero_cauchy_tail(max_space, seq, window=1)
        with pytest.raises(ValueError, match="exceeds"):
            zero_cauchy_tail(max_space, seq, window=4)

    def test_zero_cauchy_implies_cauchy_bound(self, min_space):
        # spread of the tail block can never exceed twice its max value
        seq = PointSequence(tuple(1.0 / n**2 for n in range(1, 301)))
        tail = zero_cauchy_tail(min_space, seq, window=40)
        _, spread = cauchy_tail(min_space, seq, window=40)
        assert spread <= 2 * tail

    def test_finite_space_tail(self, ebm_235):
        seq = PointSequence((0, 1, 0, 1, 0, 1))
        assert zero_cauchy_tail(ebm_235, seq, window=4) == 20.0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 6), start=st.integers(0, 5))
def test_self_distance_below_step_distance_along_orbits(seed, n, start):
    # consequence of the small-self-distance axiom on generated valid spaces
    space = gen_space(n, seed)
    rng = np.random.default_rng(seed + 1)
    table = rng.integers(0, n, size=n)
    seq = orbit(SelfMap.from_table(table), start % n, 12)
    for a, b in zip(seq.terms, seq.terms[1:]):
        assert space.P[a, a] <= space.P[a, b]
