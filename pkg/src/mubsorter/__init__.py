"""Coupled-mode simulator for multiplexed thick-hologram MUB state sorters."""

__version__ = "0.1.0"

from mubsorter.errors import (
    ConfigError,
    DegenerateGeometryError,
    DimensionMismatchError,
    EvanescentModeError,
    InvalidDimensionError,
    InvalidSpecError,
    NumericalError,
    SorterError,
    UndefinedProbabilityError,
    UnsupportedDimensionError,
)
from mubsorter.hilbert import (
    MubTable,
    Projector,
    StateVector,
    apply_projector,
    build_mub_table,
    inner,
    omega,
    projector,
)
from mubsorter.optics import (
    Material,
    OpticalConfig,
    PlaneWaveMode,
    beta,
    four_momentum,
    make_modes,
)
from mubsorter.hologram import (
    CouplingMatrix,
    HologramSpec,
    RecordedGrating,
    build_coupling_matrix,
    index_profile,
    intensity_modulation,
    kappa2,
)
from mubsorter.propagate import (
    Trajectory,
    flux,
    initial_amplitudes,
    probabilities,
    propagate_expm,
    propagate_rk4,
    transfer_matrix,
)
from mubsorter.sorter import (
    CrosstalkTable,
    SorterConfig,
    ZmaxResult,
    build_sorter,
    crosstalk_table,
    figure2_dataset,
    find_zmax,
    reconstruct_field,
)
from mubsorter.qkd import QkdMetrics, qkd_metrics, simulate_exchange

__all__ = [name for name in dir() if not name.startswith("_")]
