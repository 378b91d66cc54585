"""Causal effects by exact Bayesian inference on twin pre/post-intervention graphs."""

from .data import Dataset, GroundTruthModel, forward_sample, hide_columns, interventional_sample
from .docalc import (
    RuleQuery,
    identify,
    interventional_marginal,
    rule1_applies,
    rule2_applies,
    rule3_applies,
    truncated_product,
)
from .graph import (
    CausalGraph,
    Intervention,
    build_graph,
    d_separated,
    descendants,
    mutilate_incoming,
    mutilate_outgoing,
    topological_order,
)
from .inference import (
    fit_counts,
    latent_posterior_predictive,
    mc_posterior_predictive,
    posterior_mean_cpt,
    posterior_predictive,
    prior_sensitivity,
)
from .model import Cpt, Distribution
from .twin import TwinPgm, causal_bayes_construct, export_dot, factorization, validate_twin

__version__ = "0.1.0"
