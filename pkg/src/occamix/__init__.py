"""Simplicity-weighted and Bayesian mixtures of grid-transformation hypotheses."""

from .dsl import Hypothesis, Program, apply_program, parse_program, token_length
from .grid import (AccuracyPolicy, Connectivity, Grid, aggregate_accuracy, cell_accuracy,
                   extract_objects, grid_from_rows, serialize_objects)
from .mixture import (Method, WeightedMatrix, argmax_prediction, brier_score,
                      build_weighted_matrix, confidence_map, entropy_map)
from .provider import fetch_remote_pool, load_pool, scripted_pool
from .scoring import (NoiseModel, ScoreBreakdown, bma_log_likelihood, bma_weights,
                      normalize_weights, score_pool, simplicity_scores, solomonoff_scores)
from .tasks import EvalConfig, TaskBundle, evaluate_task, leave_one_out_splits, load_task

__version__ = "0.1.0"
