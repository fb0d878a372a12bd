"""encforge: differentiable sequence-VAE toolkit for two-vehicle encounters.

Train an encounter generator on pairs of trajectories, explore its latent
codes, and evaluate it with a latent-variance scan and traffic-rationality
profiles. Everything numeric runs on a small reverse-mode tape over numpy
float64 arrays; no deep-learning framework involved.
"""

from .autodiff import (DimensionError, DomainError, NumericError, ParamStore,
                       Tape, Tensor, gaussian_kl, mse)
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .data import (Encounter, SynthSpec, denormalize, export, ingest,
                   normalize, resample, resample_encounter, synth_generate)
from .metrics import (PAPER_SIGMA_GRID, DisentanglementProfile,
                      RationalityReport, direction_profile,
                      disentanglement_scan, distance_profile,
                      prior_metric_profile, rationality_report, speed_profile,
                      variance_ratio)
from .model import (MTG, Baseline1, LatentCode, TrainConfig, latent_sweep,
                    loss, reconstruction_error, reparameterize, train)
from .optim import Adam, grad_check
from .recurrent import GruParams, gru_cell, run_bigru, run_gru

__version__ = "0.1.0"

__all__ = [
    "Adam", "Baseline1", "CheckpointError", "DimensionError",
    "DisentanglementProfile", "DomainError", "Encounter", "GruParams",
    "LatentCode", "MTG", "NumericError", "PAPER_SIGMA_GRID", "ParamStore",
    "RationalityReport", "SynthSpec", "Tape", "Tensor", "TrainConfig",
    "denormalize", "direction_profile", "disentanglement_scan",
    "distance_profile", "export", "gaussian_kl", "grad_check", "gru_cell",
    "ingest", "latent_sweep", "load_checkpoint", "loss", "mse", "normalize",
    "prior_metric_profile", "rationality_report", "reconstruction_error",
    "reparameterize", "resample", "resample_encounter", "run_bigru",
    "run_gru", "save_checkpoint", "speed_profile", "synth_generate", "train",
    "variance_ratio",
]
