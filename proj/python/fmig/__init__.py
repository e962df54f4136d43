"""f-mutual information gain: estimators, co-training and peer prediction checks."""

from ._fmig import (
    anchor_signals,
    builtin_names,
    check_stable,
    check_well_defined,
    empirical_mig,
    expected_mig,
    f_divergence,
    f_mutual_information,
    generate_prior,
    induce_joint,
    lsr_truth_value,
    optimize_mig,
    optimize_ps_gain,
    posterior_predictor,
    sample_tasks,
    verify_ci_identity,
    verify_focal,
    verify_truthful,
    version,
)

__version__ = version()
