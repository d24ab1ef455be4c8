"""Analytic companions, Monte Carlo harnesses and the brute-force oracle."""
from .closed_form import snr_lvt_bound, snr_sdfc_closed_form, variance_bounds
from .crossterm import (CrosstermMargin, LocusCheck, check_locus, crossterm_locus,
                        crossterm_margin, crossterm_matrices, measured_crossterm_locus)
from .montecarlo import (RmsePoint, above_threshold, associate, monotone_violations,
                         monte_carlo_rmse, trial_seed)
from .oracle import OracleResult, initial_range, oracle_estimate, oracle_grid_search, refine_range
from .snr import (Moment, SnrCurvePoint, measure_snr_sdfc, product_samples, sdfc_moments,
                  snr_curve)
