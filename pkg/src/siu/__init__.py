"""Resilient distributed parameter estimation with saturated innovations."""
from .attack import AttackPlan, Measurement, attack_set, measure
from .estimator import EstimatorState, StepDiagnostics, diagnostics, gain, siu_step
from .graph import Graph, SpectralSummary, is_connected, laplacian, random_geometric, spectral_bounds
from .harness import ExperimentConfig, load_config, run, sample_theta, sweep_resilience
from .schedule import GammaState, ScheduleConfig, alpha, beta, gamma_advance, gamma_total, validate

__version__ = "0.1.0"
