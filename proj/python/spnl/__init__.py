"""Fock-basis linear-optics simulator and Monte Carlo CHSH harness."""

from ._core import (  # noqa: F401
    BeamSplitterParams,
    BinnedEstimate,
    BinnedEstimates,
    BinVariable,
    CircuitResult,
    ExperimentConfig,
    PairStat,
    RatioConvention,
    ReadoutMode,
    ReferenceSpec,
    ShotRecord,
    StateVector,
    __version__,
    analytic,
    apply_beam_splitter,
    apply_phase,
    bin_and_estimate,
    make_coherent,
    make_fock,
    make_vacuum,
    mean_occupation,
    outcome_probability,
    phase_average_estimate,
    postselect,
    records_hash,
    run_chsh_experiment,
    run_scheme1_exact,
    run_scheme2_exact,
    run_scheme3_exact,
    sample_outcome,
    tensor,
)
