"""Supervised feature selection by orthogonal regression with feature weighting."""
from .dataset import (DataError, Dataset, SynthSpec, centering_matrix, load_csv,
                      one_hot, save_csv, synthesize)
from .gpi import GpiConfig, GpiSolution, QpsmProblem, choose_alpha, gpi_solve
from .simplex_qp import (AlmConfig, AlmState, SimplexQp, alm_solve, alm_theta_step,
                         alm_v_step, hadamard_quadratic)
from .model import FsorConfig, FsorResult, compute_bias, fit, objective, rank_features
from .baselines import FeatureScores, correlation_score, fisher_score
from .evalkit import (EvalReport, SplitSpec, evaluate_ranking, knn_classify,
                      sensitivity_specificity)

__version__ = "0.1.0"
