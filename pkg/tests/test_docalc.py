import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twinbayes.docalc import (
    RuleQuery,
    identify,
    interventional_marginal,
    rule1_applies,
    rule2_applies,
    rule3_applies,
    truncated_product,
)
from twinbayes.errors import DimensionMismatch, OverlappingSets, SizeError, UnknownNode
from twinbayes.graph import CausalGraph, Intervention
from twinbayes.model import Cpt, cpts_from_tables, joint

from conftest import FIG1_DO_Y1, FIG1_TABLES, fig1_graph
from oracles import enumerate_joint, marginal, positive_tables, random_dag


def fig1_plus(edge):
    return CausalGraph.from_edges("ZTYW", [("Z", "T"), ("Z", "Y"), ("T", "Y")] + ([edge] if edge else []))


class TestRules:
    def test_rule1_disconnected(self):
        assert rule1_applies(fig1_plus(None), RuleQuery({"Y"}, "T", {"Z"}, {"W"}))

    def test_rule1_direct_edge(self):
        assert not rule1_applies(fig1_plus(("W", "Y")), RuleQuery({"Y"}, "T", {"Z"}, {"W"}))

    def test_rule1_blocked_by_z(self):
        assert rule1_applies(fig1_plus(("W", "Z")), RuleQuery({"Y"}, "T", {"Z"}, {"W"}))

    def test_rule2(self, fig1):
        assert rule2_applies(fig1, RuleQuery({"Y"}, "T", {"Z"}))
        assert not rule2_applies(fig1, RuleQuery({"Y"}, "T", set()))
        assert rule2_applies(CausalGraph.from_edges("TY"), RuleQuery({"Y"}, "T"))

    def test_rule3(self, fig1):
        assert not rule3_applies(fig1, RuleQuery({"Y"}, "T", {"Z"}))
        assert rule3_applies(CausalGraph.from_edges("ZT", [("Z", "T")]), RuleQuery({"Z"}, "T"))
        assert not rule3_applies(fig1, RuleQuery({"Z"}, "T", {"Y"}))

    def test_query_validation(self, fig1):
        with pytest.raises(OverlappingSets):
            RuleQuery({"Y"}, "Y")
        with pytest.raises(OverlappingSets):
            RuleQuery({"Y"}, "T", {"Z"}, {"Z"})
        with pytest.raises(UnknownNode):
            rule2_applies(fig1, RuleQuery({"Q"}, "T"))

    def test_identify_reports(self, fig1):
        rep = identify(fig1, RuleQuery({"Y"}, "T", {"Z"}))
        assert rep["identified"] and rep["summary"] == "identified by Rule 2"
        rep = identify(fig1, RuleQuery({"Y"}, "T"))
        assert not rep["identified"] and rep["summary"] == "not identified by Rules 1-3"
        rep = identify(CausalGraph.from_edges("TY"), RuleQuery({"Y"}, "T"))
        assert rep["rules"][2].applies


class TestTruncatedProduct:
    def test_fig1_factorisation(self, fig1, fig1_cpts, do_t1):
        d = truncated_product(fig1, fig1_cpts, do_t1)
        assert d.scope == ("Z", "Y")
        want = FIG1_TABLES["Z"][:, None] * FIG1_TABLES["Y"][:, 1, :]
        np.testing.assert_allclose(d.table, want, atol=1e-15)
        assert abs(d.table.sum() - 1) < 1e-12

    def test_fig1_041(self, fig1, fig1_cpts, do_t1):
        # brute-force enumeration oracle
        full = enumerate_joint(fig1, FIG1_TABLES, clamp=("T", 1))
        oracle = marginal(fig1.nodes, full, ["Y"])[1]
        assert oracle == pytest.approx(0.41, abs=1e-12)
        assert FIG1_DO_Y1 == pytest.approx(0.41, abs=1e-12)
        d = interventional_marginal(fig1, fig1_cpts, do_t1, "Y")
        assert d[1] == pytest.approx(oracle, abs=1e-12)

    def test_childless_source(self):
        g = CausalGraph.from_edges("ABC", [("A", "B")])
        tabs = positive_tables(g, np.random.default_rng(0))
        d = truncated_product(g, cpts_from_tables(g, tabs), Intervention("C", 1))
        np.testing.assert_allclose(d.table, joint(g, tabs).marginal(("A", "B")).table, atol=1e-15)

    def test_source_marginal_is_prior_row(self, fig1, fig1_cpts, do_t1):
        d = interventional_marginal(fig1, fig1_cpts, do_t1, "Z")
        np.testing.assert_allclose(d.table, FIG1_TABLES["Z"], atol=1e-15)

    def test_deterministic_cpts(self, fig1, do_t1):
        tabs = {
            "Z": np.array([0.0, 1.0]),
            "T": np.array([[1.0, 0.0], [0.0, 1.0]]),
            "Y": np.array([[[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]]]),
        }
        d = interventional_marginal(fig1, cpts_from_tables(fig1, tabs), do_t1, "Y")
        np.testing.assert_array_equal(d.table, [1.0, 0.0])

    def test_dimension_mismatch(self, fig1, do_t1):
        cpts = cpts_from_tables(fig1, FIG1_TABLES)
        cpts["Y"] = Cpt("Y", ("Z", "T"), table=np.full((2, 2, 3), 1 / 3))
        with pytest.raises(DimensionMismatch):
            truncated_product(fig1, cpts, do_t1)
        cpts = cpts_from_tables(fig1, FIG1_TABLES)
        del cpts["Z"]
        with pytest.raises(DimensionMismatch):
            truncated_product(fig1, cpts, do_t1)

    def test_target_as_query_rejected(self, fig1, fig1_cpts, do_t1):
        with pytest.raises(OverlappingSets):
            interventional_marginal(fig1, fig1_cpts, do_t1, "T")

    def test_size_error(self):
        g = CausalGraph.from_edges([f"V{i}" for i in range(21)])
        tabs = {v: np.array([0.5, 0.5]) for v in g.nodes}
        with pytest.raises(SizeError):
            joint(g, tabs)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_truncated_product_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    g = random_dag(rng, 1, 5)
    tabs = positive_tables(g, rng)
    t = g.nodes[int(rng.integers(len(g.nodes)))]
    iv = Intervention(t, int(rng.integers(g.card(t))))
    cpts = cpts_from_tables(g, tabs)
    d = truncated_product(g, cpts, iv)
    assert abs(d.table.sum() - 1) < 1e-12
    full = enumerate_joint(g, tabs, clamp=(t, iv.value))
    np.testing.assert_allclose(d.table, np.take(full, iv.value, axis=g.index(t)), atol=1e-14)
    for y in d.scope:
        # two code paths: contract straight to y vs marginalise the joint
        direct = interventional_marginal(g, cpts, iv, y)
        np.testing.assert_allclose(direct.table, d.marginal(y).table, atol=1e-12)
