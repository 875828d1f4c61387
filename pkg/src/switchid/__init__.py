"""Identification of linear switched systems from a single trajectory.

The package simulates switched state-space systems with observed
i.i.d. mode signals, estimates Markov parameters by correlating the
output with lagged inputs on matching mode words, realizes a state
space model from a selected square Hankel sub-basis, and evaluates
finite-sample error certificates for the whole pipeline.
"""

from .bounds import (
    BoundCertificate,
    CertificateError,
    StabilityCertificate,
    compute_KM,
    compute_certificate,
    find_P,
    gamma_from_P,
    min_gamma_certificate,
    min_valid_N,
    schur_radius,
)
from .core import (
    EPSILON,
    LssModel,
    SignalSpec,
    SwitchingDistribution,
    Word,
    a_word,
    load_model_file,
    model_from_dict,
    model_to_dict,
    p_word,
    save_model_file,
    str_to_word,
    two_mode_benchmark,
    word_concat,
    word_to_str,
)
from .experiment import (
    ExperimentConfig,
    ExperimentRow,
    load_results_csv,
    run_experiment,
    write_figures,
    write_results_csv,
)
from .hokalman import (
    HankelSet,
    RealizationResult,
    Selection,
    SelectionRankError,
    SingularHankelError,
    build_hankels,
    est_err,
    find_selection,
    markov_roundtrip,
    observability_row,
    reachability_col,
    realize,
    required_words,
)
from .markov import (
    MarkovMap,
    empirical_markov,
    empirical_markov_batch,
    indicator_chi,
    true_markov,
    true_markov_map,
    z_lagged,
)
from .simulate import (
    DivergenceError,
    SampleSet,
    SimConfig,
    load_trajectory,
    sample_bounded_uniform,
    save_trajectory,
    simulate,
    simulate_driven,
)

__version__ = "0.1.0"

__all__ = [
    "BoundCertificate",
    "CertificateError",
    "DivergenceError",
    "EPSILON",
    "ExperimentConfig",
    "ExperimentRow",
    "HankelSet",
    "LssModel",
    "MarkovMap",
    "RealizationResult",
    "SampleSet",
    "Selection",
    "SelectionRankError",
    "SignalSpec",
    "SimConfig",
    "SingularHankelError",
    "StabilityCertificate",
    "SwitchingDistribution",
    "Word",
    "a_word",
    "build_hankels",
    "compute_KM",
    "compute_certificate",
    "empirical_markov",
    "empirical_markov_batch",
    "est_err",
    "find_P",
    "find_selection",
    "gamma_from_P",
    "indicator_chi",
    "load_model_file",
    "load_results_csv",
    "load_trajectory",
    "markov_roundtrip",
    "min_gamma_certificate",
    "min_valid_N",
    "model_from_dict",
    "model_to_dict",
    "observability_row",
    "p_word",
    "reachability_col",
    "realize",
    "required_words",
    "run_experiment",
    "sample_bounded_uniform",
    "save_model_file",
    "save_trajectory",
    "schur_radius",
    "simulate",
    "simulate_driven",
    "str_to_word",
    "true_markov",
    "true_markov_map",
    "two_mode_benchmark",
    "word_concat",
    "word_to_str",
    "write_figures",
    "write_results_csv",
    "z_lagged",
]
