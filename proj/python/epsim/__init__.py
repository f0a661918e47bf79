"""Python interface to the epsim simulator core."""

from ._epsim import (
    BellState,
    ConfigError,
    Error,
    InvalidArgument,
    __version__,
    bell_state,
    concurrence,
    device_probabilities,
    fidelity,
    load_config,
    pauli_correlation,
    polarization_state,
    purity,
    run_shg,
    run_sweep,
    run_tomography,
    shg_spectrum,
    spectral_overlap,
    tomography_mle,
    trace_distance,
    witness,
)

__all__ = [
    "BellState",
    "ConfigError",
    "Error",
    "InvalidArgument",
    "__version__",
    "bell_state",
    "concurrence",
    "device_probabilities",
    "fidelity",
    "load_config",
    "pauli_correlation",
    "polarization_state",
    "purity",
    "run_shg",
    "run_sweep",
    "run_tomography",
    "shg_spectrum",
    "spectral_overlap",
    "tomography_mle",
    "trace_distance",
    "witness",
]
