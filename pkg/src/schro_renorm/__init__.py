"""Desk-scale numerics for the renormalised mean of the 1D Schrodinger equation
with mollified space-time white noise."""
from .constants import RenormConstants, compute_z1, compute_z2, cross_section, limit_profile
from .dyson import dyson_truncated_mean
from .fk import (CovMatrixA, MCEstimate, compute_X_eps, compute_Y0, estimate_A, estimate_mean_X,
                 exp_moment_estimate, fk_wave_estimator)
from .mollifier import (MollifierSpec, TemporalCovariance, build_R_eta, eval_q_rotated, eval_R_tilde,
                        make_bump_eta)
from .brownian import BrownianPath, increment, sample_path

__version__ = "0.1.0"
