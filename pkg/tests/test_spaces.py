import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pebms import (
    AnalyticSpace,
    AxiomProfile,
    ConfigurationError,
    DomainError,
    FiniteSpace,
    check_axioms,
    eval_p,
    eval_theta,
    gen_space,
    induced_ebm,
    sample_grid,
)
from pebms.spaces import dumps_space, loads_space, pairwise_p


class TestAxiomProfile:
    def test_tags(self):
        assert AxiomProfile.pebm().tag == "pebm"
        assert AxiomProfile.pbm(4.0).s == 4.0
        assert AxiomProfile.b_metric(2.0).label() == "b_metric(s=2)"

    def test_coefficient_required(self):
        with pytest.raises(ValueError):
            AxiomProfile("pbm")
        with pytest.raises(ValueError):
            AxiomProfile("b_metric", 0.5)
        with pytest.raises(ValueError):
            AxiomProfile("pebm", 2.0)
        with pytest.raises(ValueError):
            AxiomProfile("nonsense")

    def test_partial_and_theta_flags(self):
        assert AxiomProfile.pebm().is_partial and AxiomProfile.pebm().uses_theta_matrix
        assert AxiomProfile.ebm().uses_theta_matrix and not AxiomProfile.ebm().is_partial
        assert AxiomProfile.partial_metric().constant_theta == 1.0
        assert AxiomProfile.pbm(3.0).constant_theta == 3.0
        assert AxiomProfile.pebm().constant_theta is None


class TestFiniteSpace:
    def test_eval_by_label(self, ebm_235):
        assert ebm_235.eval_p(2, 3) == 20.0
        assert ebm_235.eval_theta(2, 3) == 6.0
        assert ebm_235.eval_theta(2, 4) == 7.0
        assert eval_p(ebm_235, 3, 3) == 0.0

    def test_unknown_label(self, ebm_235):
        with pytest.raises(DomainError, match="5"):
            ebm_235.eval_p(2, 5)

    def test_index_access(self, ebm_235):
        assert ebm_235.p(0, 1) == 20.0
        assert ebm_235.theta(0, 2) == 7.0
        with pytest.raises(DomainError):
            ebm_235.p(0, 3)
        with pytest.raises(DomainError):
            ebm_235.p(-1, 0)

    def test_construction_validation(self):
        with pytest.raises(ValueError, match="negative"):
            FiniteSpace((0, 1), [[0.0, -1.0], [-1.0, 0.0]])
        with pytest.raises(ValueError, match="below 1"):
            FiniteSpace((0, 1), [[0.0, 1.0], [1.0, 0.0]], [[1.0, 0.5], [0.5, 1.0]])
        with pytest.raises(ValueError, match="square"):
            FiniteSpace((0, 1), [[0.0, 1.0]])
        with pytest.raises(ValueError, match="labels"):
            FiniteSpace((0,), [[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(ValueError, match="finite"):
            FiniteSpace((0, 1), [[0.0, np.inf], [np.inf, 0.0]])

    def test_matrices_immutable(self, ebm_235):
        with pytest.raises(ValueError):
            ebm_235.P[0, 0] = 5.0

    def test_theta_fallbacks(self):
        pbm = FiniteSpace((0, 1), [[0.1, 1.0], [1.0, 0.2]], declared_kind=AxiomProfile.pbm(3.0))
        assert pbm.theta(0, 1) == 3.0
        bare = FiniteSpace((0, 1), [[0.0, 1.0], [1.0, 0.0]], declared_kind=AxiomProfile.metric())
        assert bare.theta(0, 1) == 1.0
        missing = FiniteSpace((0, 1), [[0.1, 1.0], [1.0, 0.2]])
        with pytest.raises(ConfigurationError):
            missing.theta(0, 1)

    def test_json_round_trip_bit_exact(self, ebm_235):
        # awkward binary fractions survive serialization untouched
        P = np.array([[0.1, 0.1 + 0.2], [0.1 + 0.2, 0.3]])
        sp = FiniteSpace(("a", "b"), P, [[1.0, 1.7], [1.7, 1.0]], AxiomProfile.pebm())
        back = loads_space(dumps_space(sp))
        assert back == sp
        assert back.eval_p("a", "b") == sp.eval_p("a", "b")
        assert back.eval_theta("a", "b") == sp.eval_theta("a", "b")
        again = loads_space(dumps_space(ebm_235))
        assert again == ebm_235

    def test_json_profile_coefficient(self):
        sp = FiniteSpace((0, 1), [[0.0, 2.0], [2.0, 0.0]], declared_kind=AxiomProfile.b_metric(2.5))
        doc = sp.to_json_dict()
        assert doc["s"] == 2.5 and doc["profile"] == "b_metric"
        assert loads_space(json.dumps(doc)).declared_kind == AxiomProfile.b_metric(2.5)


class TestAnalyticSpace:
    def test_eval(self, absx_space, max_space):
        # |0.25 - 0.75| + 0.25, computed directly
        assert absx_space.eval_p(0.25, 0.75) == 0.75
        assert max_space.eval_p(0.3, 0.3) == 0.3
        assert max_space.eval_theta(0.25, 0.5) == 1.75

    def test_theta_constant_one(self):
        sp = AnalyticSpace((0.0, 1.0), "abs(x - y) + x", "1")
        for x, y in ((0.0, 1.0), (0.5, 0.25)):
            assert sp.eval_theta(x, y) == 1.0

    def test_kannan_control_value(self):
        sp = AnalyticSpace((0.0, 10.0), "max(x, y)", "1 + x*y/(1 + x + y)")
        assert sp.eval_theta(0.0, 5.0) == 1.0  # 1 + 0*5/(1+0+5)

    def test_domain_errors_name_coordinate(self, max_space):
        with pytest.raises(DomainError, match="x="):
            max_space.eval_p(1.5, 0.5)
        with pytest.raises(DomainError, match="y="):
            max_space.eval_p(0.5, -0.1)

    def test_invalid_forms_rejected_at_construction(self):
        with pytest.raises(ValueError, match="distance form"):
            AnalyticSpace((-1.0, 1.0), "x + y", "1")  # negative at (-1, -1)
        with pytest.raises(ValueError, match="control form"):
            AnalyticSpace((0.0, 1.0), "max(x, y)", "x + y")  # below 1 at (0, 0)
        with pytest.raises(ValueError, match="unbound"):
            AnalyticSpace((0.0, 1.0), "max(x, y)**b", "1")

    def test_json_round_trip(self, min_space):
        back = loads_space(dumps_space(min_space))
        assert back.domain == min_space.domain
        assert back.p_expr == min_space.p_expr
        assert back.eval_p(0.3, 1.7) == min_space.eval_p(0.3, 1.7)


class TestSampleGrid:
    def test_endpoints_and_shape(self, max_space):
        g = sample_grid(max_space, 3)
        assert g.labels == (0.0, 0.5, 1.0)
        assert g.P[0, 1] == 0.5  # max(0, 0.5)
        assert g.Theta[1, 2] == 2.5

    def test_two_points(self, max_space):
        g = sample_grid(max_space, 2)
        assert g.labels == (0.0, 1.0)

    def test_rejects_degenerate_grid(self, max_space):
        with pytest.raises(ValueError):
            sample_grid(max_space, 1)

    def test_power_form_values(self):
        sp = AnalyticSpace((0.5, 2.5), "max(x, y)**b + abs(x - y)**b", "2**b", params={"b": 2.0})
        g = sample_grid(sp, 5)
        for i, a in enumerate(g.labels):
            for j, b in enumerate(g.labels):
                assert g.P[i, j] == max(a, b) ** 2 + abs(a - b) ** 2

    def test_deterministic_bit_identical(self, min_space):
        g1 = sample_grid(min_space, 17)
        g2 = sample_grid(min_space, 17)
        assert np.array_equal(g1.P, g2.P) and np.array_equal(g1.Theta, g2.Theta)

    def test_pairwise_matches_grid(self, max_space):
        pts = max_space.grid(5)
        assert np.array_equal(pairwise_p(max_space, pts), sample_grid(max_space, 5).P)


class TestInducedEbm:
    def test_zero_diagonal_copy_off_diagonal(self, max_space):
        g = sample_grid(max_space, 11)
        d = induced_ebm(g)
        assert np.all(np.diag(d.P) == 0.0)
        off = ~np.eye(11, dtype=bool)
        assert np.array_equal(d.P[off], g.P[off])
        assert d.declared_kind == AxiomProfile.ebm()
        assert d.labels == g.labels
        assert np.array_equal(d.Theta, g.Theta)

    def test_fuzzed_space_induces_valid_ebm(self):
        sp = gen_space(6, seed=42)
        rep = check_axioms(induced_ebm(sp), AxiomProfile.ebm())
        assert rep.passed

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1), n=st.integers(min_value=2, max_value=7))
    def test_induced_always_passes_ebm(self, seed, n):
        sp = gen_space(n, seed)
        assert check_axioms(induced_ebm(sp), AxiomProfile.ebm()).passed
