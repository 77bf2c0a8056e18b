"""Centralized numerical tolerances.

NORM_TOL   -- squared-norm / unitarity checks
PROB_TOL   -- equality of probabilities
RANK_TOL   -- witness-search rank / residual threshold
"""

NORM_TOL = 1e-12
PROB_TOL = 1e-10
RANK_TOL = 1e-9
