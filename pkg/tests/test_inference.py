from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twinbayes.data import MISSING, Dataset, GroundTruthModel, forward_sample, hide_columns
from twinbayes.errors import (
    BadSampleCount,
    LatentNodePresent,
    MissingColumn,
    MissingValueInObservedColumn,
    NoLatentNodes,
    NonPositivePrior,
)
from twinbayes.graph import CausalGraph, Intervention
from twinbayes.inference import (
    fit_counts,
    latent_posterior_predictive,
    max_gap,
    mc_posterior_predictive,
    posterior_mean_cpt,
    posterior_predictive,
    prior_sensitivity,
)
from twinbayes.model import Cpt, cpts_from_tables, uniform_priors

from conftest import FIG1_TABLES, fig1_graph
from oracles import dirichlet_moment, positive_tables, random_dag

ROWS4 = [(0, 0, 1), (0, 1, 1), (1, 1, 0), (1, 1, 1)]


@pytest.fixture
def data4():
    return Dataset(("Z", "T", "Y"), np.array(ROWS4))


@pytest.fixture
def fig1_model(fig1, fig1_cpts):
    return GroundTruthModel(fig1, fig1_cpts)


class TestCounts:
    def test_empty_data_gives_prior(self, fig1):
        pc = fit_counts(fig1, Dataset(("Z", "T", "Y"), np.zeros((0, 3))), None)
        for v in fig1.nodes:
            np.testing.assert_array_equal(pc.counts[v], np.ones_like(pc.counts[v]))

    def test_hand_counts(self, fig1, data4):
        pc = fit_counts(fig1, data4)
        # Z column is 0,0,1,1
        np.testing.assert_array_equal(pc.counts["Z"], [1 + 2, 1 + 2])
        np.testing.assert_array_equal(pc.counts["Y"][1, 1], [1 + 1, 1 + 1])
        np.testing.assert_array_equal(pc.counts["Y"][0, 1], [1 + 0, 1 + 1])
        np.testing.assert_array_equal(pc.counts["T"][0], [1 + 1, 1 + 1])

    def test_column_order_irrelevant(self, fig1, data4):
        shuffled = Dataset(("Y", "Z", "T"), data4.values[:, [2, 0, 1]])
        a, b = fit_counts(fig1, data4), fit_counts(fig1, shuffled)
        for v in fig1.nodes:
            np.testing.assert_array_equal(a.counts[v], b.counts[v])

    def test_errors(self, fig1, data4):
        with pytest.raises(MissingColumn):
            fit_counts(fig1, Dataset(("Z", "T"), data4.values[:, :2]))
        vals = data4.values.copy()
        vals[0, 1] = MISSING
        with pytest.raises(MissingValueInObservedColumn):
            fit_counts(fig1, Dataset(("Z", "T", "Y"), vals))
        bad = uniform_priors(fig1)
        bad["Z"] = Cpt("Z", (), prior=np.array([1.0, 0.0]))
        with pytest.raises(NonPositivePrior):
            fit_counts(fig1, data4, bad)

    def test_latent_family_keeps_prior(self, data4):
        g = fig1_graph(latent={"Z"})
        pc = fit_counts(g, hide_columns(data4, ["Z"]))
        assert pc.unobserved == {"Z", "T", "Y"}


class TestPosteriorMean:
    def test_symmetric_prior(self, fig1):
        pc = fit_counts(fig1, Dataset(("Z", "T", "Y"), np.zeros((0, 3))))
        for c in posterior_mean_cpt(pc).values():
            np.testing.assert_allclose(c.table, 0.5)

    def test_four_two(self):
        g = CausalGraph.from_edges("Z")
        data = Dataset(("Z",), np.array([[0], [0], [0], [1]]))
        cpt = posterior_mean_cpt(fit_counts(g, data))["Z"]
        np.testing.assert_allclose(cpt.table, [4 / 6, 2 / 6])

    def test_symmetric_counts(self, fig1, data4):
        cpt = posterior_mean_cpt(fit_counts(fig1, data4))["Y"]
        np.testing.assert_allclose(cpt.table[1, 1], [0.5, 0.5])


class TestPosteriorPredictive:
    def test_prior_predictive(self, fig1, do_t1):
        d = posterior_predictive(fig1, Dataset(("Z", "T", "Y"), np.zeros((0, 3))), None, do_t1, "Y")
        assert d[1] == pytest.approx(0.5, abs=1e-15)

    def test_m4_closed_form(self, fig1, data4, do_t1):
        # alphas counted by hand from ROWS4 under the flat prior
        ez = [dirichlet_moment([3, 3], k) for k in (0, 1)]
        ey1 = {0: dirichlet_moment([1, 2], 1), 1: dirichlet_moment([2, 2], 1)}
        want = ez[0] * ey1[0] + ez[1] * ey1[1]
        assert want == pytest.approx(0.5 * 2 / 3 + 0.5 * 0.5, abs=1e-12)
        assert posterior_predictive(fig1, data4, None, do_t1, "Y")[1] == pytest.approx(want, abs=1e-12)

    def test_converges_to_truncated_product(self, fig1_model, fig1, do_t1):
        gaps = []
        for M in (100, 2000, 50_000):
            d = forward_sample(fig1_model, M, seed=M)
            gaps.append(abs(posterior_predictive(fig1, d, None, do_t1, "Y")[1] - 0.41))
        assert gaps[-1] < 0.01

    def test_latent_rejected(self, data4, do_t1):
        with pytest.raises(LatentNodePresent):
            posterior_predictive(fig1_graph(latent={"Z"}), data4, None, do_t1, "Y")

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_plugin_equals_parameter_integral(self, seed):
        rng = np.random.default_rng(seed)
        g = random_dag(rng, 2, 4)
        tabs = positive_tables(g, rng)
        M = int(rng.integers(0, 30))
        data = forward_sample(GroundTruthModel(g, cpts_from_tables(g, tabs)), M, seed)
        priors = {
            v: Cpt(v, g.parents(v), prior=rng.uniform(0.3, 3.0, size=tabs[v].shape)) for v in g.nodes
        }
        t = g.nodes[int(rng.integers(len(g.nodes)))]
        y = next(v for v in g.nodes if v != t)
        iv = Intervention(t, 0)
        # oracle: count by loops, E[theta] as Dirichlet normaliser ratios, sum every post-world config
        alpha = {v: priors[v].prior.copy() for v in g.nodes}
        for row in data.values:
            val = dict(zip(data.columns, row))
            for v in g.nodes:
                alpha[v][tuple(val[p] for p in g.parents(v)) + (val[v],)] += 1
        moment = {}
        for v in g.nodes:
            for idx in np.ndindex(alpha[v].shape):
                moment[v, idx] = dirichlet_moment(alpha[v][idx[:-1]], idx[-1])
        want = np.zeros(g.card(y))
        for cfg in product(*(range(k) for k in g.cards)):
            val = dict(zip(g.nodes, cfg))
            if val[t] != 0:
                continue
            p = 1.0
            for v in g.nodes:
                if v != t:
                    p *= moment[v, tuple(val[u] for u in g.parents(v)) + (val[v],)]
            want[val[y]] += p
        got = posterior_predictive(g, data, priors, iv, y)
        np.testing.assert_allclose(got.table, want, atol=1e-9)
        assert abs(got.table.sum() - 1) < 1e-9


class TestMonteCarlo:
    def test_deterministic(self, fig1, data4, do_t1):
        a = mc_posterior_predictive(fig1, data4, None, do_t1, "Y", 2000, seed=7)
        b = mc_posterior_predictive(fig1, data4, None, do_t1, "Y", 2000, seed=7)
        np.testing.assert_array_equal(a[0].table, b[0].table)
        np.testing.assert_array_equal(a[1], b[1])

    def test_prior_mean(self, fig1, do_t1):
        d, se = mc_posterior_predictive(fig1, Dataset(("Z", "T", "Y"), np.zeros((0, 3))), None, do_t1, "Y", 20_000, 1)
        assert abs(d[1] - 0.5) < 3 * se[1]

    def test_matches_exact(self, fig1, data4, do_t1):
        d, se = mc_posterior_predictive(fig1, data4, None, do_t1, "Y", 20_000, 3)
        exact = posterior_predictive(fig1, data4, None, do_t1, "Y")
        assert np.all(np.abs(d.table - exact.table) < 3 * se)

    def test_errors(self, fig1, data4, do_t1):
        with pytest.raises(BadSampleCount):
            mc_posterior_predictive(fig1, data4, None, do_t1, "Y", 0, 1)
        with pytest.raises(LatentNodePresent):
            mc_posterior_predictive(fig1_graph(latent={"Z"}), data4, None, do_t1, "Y", 10, 1)


class TestGibbs:
    def test_requires_latent(self, fig1, data4, do_t1):
        with pytest.raises(NoLatentNodes):
            latent_posterior_predictive(fig1, data4, None, do_t1, "Y")

    def test_nonpositive_prior(self, data4, do_t1):
        g = fig1_graph(latent={"Z"})
        bad = uniform_priors(g)
        bad["T"] = Cpt("T", ("Z",), prior=np.array([[1.0, -1.0], [1.0, 1.0]]))
        with pytest.raises(NonPositivePrior):
            latent_posterior_predictive(g, hide_columns(data4, ["Z"]), bad, do_t1, "Y", 10, 10)

    def test_deterministic(self, fig1_model, do_t1):
        g = fig1_graph(latent={"Z"})
        data = hide_columns(forward_sample(fig1_model, 300, 1), ["Z"])
        a = latent_posterior_predictive(g, data, None, do_t1, "Y", 50, 100, seed=3)
        b = latent_posterior_predictive(g, data, None, do_t1, "Y", 50, 100, seed=3)
        np.testing.assert_array_equal(a[0].table, b[0].table)

    def test_disconnected_latent_is_irrelevant(self, fig1_model, fig1, do_t1):
        g = CausalGraph.from_edges("ZTYL", [("Z", "T"), ("Z", "Y"), ("T", "Y")], latent={"L"})
        obs = forward_sample(fig1_model, 2000, 11)
        data = Dataset(("Z", "T", "Y"), obs.values)
        d, sd = latent_posterior_predictive(g, data, None, do_t1, "Y", 200, 2000, seed=5)
        exact = posterior_predictive(fig1, obs, None, do_t1, "Y")
        # posterior draws are exact here (no coupling), so the mean has MC error sd/sqrt(n)
        assert np.all(np.abs(d.table - exact.table) < 4 * sd / np.sqrt(2000) + 1e-12)

    def test_fully_present_latent_column_reduces_to_conjugate(self, fig1_model, fig1, do_t1):
        obs = forward_sample(fig1_model, 2000, 12)
        d, sd = latent_posterior_predictive(fig1_graph(latent={"Z"}), obs, None, do_t1, "Y", 100, 3000, seed=6)
        exact = posterior_predictive(fig1, obs, None, do_t1, "Y")
        assert np.all(np.abs(d.table - exact.table) < 4 * sd / np.sqrt(3000))

    def test_unconfounded_truth_stays_near_observational(self, fig1, do_t1):
        tabs = dict(FIG1_TABLES, T=np.array([[0.6, 0.4], [0.6, 0.4]]))
        m = GroundTruthModel(fig1, cpts_from_tables(fig1, tabs))
        data = hide_columns(forward_sample(m, 10_000, 5), ["Z"])
        obs = data.column("Y")[data.column("T") == 1].mean()
        d, sd = latent_posterior_predictive(fig1_graph(latent={"Z"}), data, None, do_t1, "Y", 500, 2000, seed=2)
        # the query is not identified: agreement holds only up to posterior spread
        assert abs(d[1] - obs) < 2 * sd[1]


class TestSensitivity:
    def test_identical_priors_identical_outputs(self, fig1_model, do_t1):
        g = fig1_graph(latent={"Z"})
        data = hide_columns(forward_sample(fig1_model, 200, 1), ["Z"])
        pri = uniform_priors(g, 2.0)
        res = prior_sensitivity(g, data, [("a", pri), ("b", pri)], do_t1, "Y", 50, 200, seed=4)
        np.testing.assert_array_equal(res["a"].table, res["b"].table)

    def test_needs_two(self, fig1, data4, do_t1):
        with pytest.raises(ValueError):
            prior_sensitivity(fig1, data4, [("a", None)], do_t1, "Y")

    def test_gap_shrinks_without_latents(self, fig1_model, fig1, do_t1):
        strong = uniform_priors(fig1, 1.0)
        strong["Y"] = Cpt("Y", ("Z", "T"), prior=np.array([[[1, 1], [30, 1]], [[1, 1], [30, 1]]], float))
        gaps = []
        for M in (100, 1000, 10_000):
            data = forward_sample(fig1_model, M, seed=M + 1)
            gaps.append(max_gap(prior_sensitivity(fig1, data, [("flat", None), ("strong", strong)], do_t1, "Y")))
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.01
