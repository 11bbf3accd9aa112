"""Quadratic envelopes of sparsity penalties and forward-backward solvers.

Penalties are passed as descriptor dicts: {"type": "card", "mu": 1.0},
{"type": "topk", "k": 3}, {"type": "l1", "lambda": 0.1}, {"type": "zero"}.
"""

from ._core import (
    InputError,
    ParameterError,
    brute_force_global_min,
    card_prox,
    classify_regime,
    default_fig4_config,
    fbs_solve,
    grid_convex_envelope,
    grid_quad_envelope,
    ista_solve,
    l1_prox,
    lasry_lions,
    oracle_solution,
    penalty_eval,
    penalty_prox,
    power_iteration,
    q_card_eval,
    q_card_prox,
    q_spectral_eval,
    q_topk_eval,
    quad_envelope,
    run_fig4,
    s_transform,
    singular_values,
    spectral_prox,
    topk_prox,
    verify,
)

__version__ = "0.1.0"
