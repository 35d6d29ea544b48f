"""Active estimation of causal quantities.

Thin package wrapper around the compiled ``_activecq`` extension: synthetic
generators, GP fitting, causal-quantity posteriors, batch selection and the
active-learning loop.
"""

from _activecq import (  # noqa: F401
    CqPosterior,
    Dataset,
    GpPosterior,
    InterestSet,
    RoundRecord,
    TrialResult,
    amse,
    cq_posterior,
    fit_gp,
    gen_shift_target,
    gen_simulation,
    gen_visualization,
    predict,
    read_dataset_csv,
    rng_version,
    run_active_loop,
    select_batch,
    true_cq_oracle,
    write_dataset_csv,
)

__all__ = [
    "CqPosterior",
    "Dataset",
    "GpPosterior",
    "InterestSet",
    "RoundRecord",
    "TrialResult",
    "amse",
    "cq_posterior",
    "fit_gp",
    "gen_shift_target",
    "gen_simulation",
    "gen_visualization",
    "predict",
    "read_dataset_csv",
    "rng_version",
    "run_active_loop",
    "select_batch",
    "true_cq_oracle",
    "write_dataset_csv",
]
