"""Hard model-based clustering with an evolutionary algorithm.

The fitness of a hard labeling is the Gaussian mixture log-likelihood at the
labeling's maximum likelihood parameters. :func:`evolve` searches labelings
with swap crossover and greedy mutation; EM, k-means, PAM and spherical CEM
are provided for comparison.
"""
from .baselines import cem_spherical, kmeans, kmedoids, lloyd
from .data import DataSpec, SyntheticSpec, load_csv, load_fixture, sample_mixture, write_csv, x2_like_spec
from .dataset import Dataset
from .errors import (DataError, DegeneracyError, EAClustError, FactorizationError, InfeasibleLabelingError,
                     InvalidArgumentError, NumericalError)
from .evolution import EAConfig, EAResult, evolve
from .kernels import BACKEND
from .metrics import ari, confusion, misclassification_count, rand_index
from .mixture import (ComponentParams, MixtureParams, ModelScore, bic, e_step, em_fit, estimate_from_labels,
                      fitness, free_params, log_density, m_step, map_harden, mixture_log_likelihood)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ComponentParams", "DataError", "DataSpec", "Dataset", "DegeneracyError", "EAClustError",
    "EAConfig", "EAResult", "FactorizationError", "InfeasibleLabelingError", "InvalidArgumentError",
    "MixtureParams", "ModelScore", "NumericalError", "SyntheticSpec", "ari", "bic", "cem_spherical", "confusion",
    "e_step", "em_fit", "estimate_from_labels", "evolve", "fitness", "free_params", "kmeans", "kmedoids",
    "load_csv", "load_fixture", "lloyd", "log_density", "m_step", "map_harden", "misclassification_count",
    "mixture_log_likelihood", "rand_index", "sample_mixture", "write_csv", "x2_like_spec",
]
