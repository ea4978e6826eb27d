"""Statistical structure of multi-domain wireless channels.

Synthesis of path-based channels, conditional moments given the path
parameters, multilevel Toeplitz projections, d-separation on Bayesian
networks, structured Gaussian mixture clustering and LMMSE estimation.
"""

from .bayesnet import (BayesNet, Classification, GraphError, SideInfoClass, SideInfoRoles,
                       classify_side_info, d_separated, d_separated_bruteforce, enumerate_trails)
from .channel import (ChannelConfig, Marginal, PathArrays, PathParams, PathPrior, PowerPrior,
                      PriorError, VelocityScenario, sample_path_arrays, sample_paths,
                      sample_velocity_dataset, steering_vector, synthesize_batch,
                      synthesize_channel)
from .clustering import (ClusterOptions, DegenerateComponentError, GmmModel, entropy, fit_gmm,
                         gmm_assign, kmeans, mutual_information, run_velocity_experiment)
from .estimation import EstimationReport, lmmse_estimate, run_estimation_experiment
from .io import DatasetError, read_dataset, write_dataset
from .moments import (MomentReport, TheoremCheck, closed_form_moments, mc_conditional_moments,
                      verify_theorem1)
from .rng import Streams
from .structure import multilevel_toeplitz_project, structure_nmse, zero_mean_mse

__all__ = [
    "BayesNet", "ChannelConfig", "Classification", "ClusterOptions", "DatasetError",
    "DegenerateComponentError", "EstimationReport", "GmmModel", "GraphError", "Marginal",
    "MomentReport", "PathArrays", "PathParams", "PathPrior", "PowerPrior", "PriorError",
    "SideInfoClass", "SideInfoRoles", "Streams", "TheoremCheck", "VelocityScenario",
    "classify_side_info", "closed_form_moments", "d_separated", "d_separated_bruteforce",
    "entropy", "enumerate_trails", "fit_gmm", "gmm_assign", "kmeans", "lmmse_estimate",
    "mc_conditional_moments", "multilevel_toeplitz_project", "mutual_information", "read_dataset",
    "run_estimation_experiment", "run_velocity_experiment", "sample_path_arrays", "sample_paths",
    "sample_velocity_dataset", "steering_vector", "structure_nmse", "synthesize_batch",
    "synthesize_channel", "verify_theorem1", "write_dataset", "zero_mean_mse",
]

__version__ = "0.1.0"
