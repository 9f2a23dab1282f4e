"""Joint CFO and sparse mmWave MIMO channel estimation from one-bit measurements.

Pipeline: simulate a clustered mmWave channel and a one-bit receiver
(:mod:`~onebit_jce.channel`, :mod:`~onebit_jce.frontend`), lift the
bilinear CFO-channel unknowns into a structured linear model
(:mod:`~onebit_jce.lifting`), solve the quantized compressed-sensing
problem with EM-GAMP (:mod:`~onebit_jce.gamp`), split the estimate back
into CFO and channel factors (:mod:`~onebit_jce.recovery`), and score the
result (:mod:`~onebit_jce.metrics`). :mod:`~onebit_jce.experiment` wires
it all into a reproducible Monte Carlo sweep with a CLI.
"""

from .channel import (
    ChannelModelConfig,
    RaySet,
    array_response,
    assemble_channel,
    dft_matrix,
    from_beamspace,
    laplacian_angle_offsets,
    sample_rays,
    to_beamspace,
)
from .frontend import CfoParams, gen_training, quantize_onebit, simulate_rx, snr_to_radius
from .gamp import (
    BernoulliGaussianPrior,
    GampConfig,
    GampDiagnostics,
    GampDivergenceError,
    em_update,
    gamp_solve,
    initial_prior,
    input_denoiser,
    output_denoiser,
)
from .lifting import (
    DenseMatrixOperator,
    LiftedOperator,
    MemoryBudgetError,
    build_operator,
    cfo_spectrum,
    lift,
    lifted_to_matrix,
)
from .metrics import (
    TrialMetrics,
    cfo_squared_error,
    channel_nmse,
    compute_trial_metrics,
    nmse_db,
    rate_lower_bound,
)
from .recovery import (
    DegenerateEstimateError,
    JointEstimate,
    coarse_cfo,
    estimate_joint,
    fine_cfo,
    rank1_decompose,
    reconstruct_channel,
)
from .experiment import (
    CellSummary,
    ConfigError,
    ExperimentConfig,
    TrialRecord,
    bits_per_trial,
    emit_csv,
    format_summary,
    half_bin_offset_hz,
    load_config,
    paper_preset,
    parse_config_text,
    run_experiment,
    run_trial,
    trial_seed,
)

__version__ = "0.1.0"
