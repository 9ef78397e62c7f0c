"""Shrinkage weights, their a-priori bounds and shrinkage estimates in the
normal-normal hierarchical model."""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    bounds_report,
    coincidence_weights,
    discrepancy_sweep,
    fe_weights,
    prior_scale_sweep,
    verify_stochastic_ordering,
)
from .ingest import parse_dataset, parse_prior  # noqa: E402
from .posterior import (  # noqa: E402
    TauPosterior,
    analyze,
    expected_weights,
    fit_tau_posterior,
    marginal_mu,
    marginal_theta,
)
from .priors import HeterogeneityPrior  # noqa: E402
from .schemas import Dataset, Study  # noqa: E402

__all__ = [
    "Dataset",
    "HeterogeneityPrior",
    "Study",
    "TauPosterior",
    "analyze",
    "bounds_report",
    "coincidence_weights",
    "discrepancy_sweep",
    "expected_weights",
    "fe_weights",
    "fit_tau_posterior",
    "marginal_mu",
    "marginal_theta",
    "parse_dataset",
    "parse_prior",
    "prior_scale_sweep",
    "verify_stochastic_ordering",
]
