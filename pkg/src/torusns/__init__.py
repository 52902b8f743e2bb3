"""Pseudo-spectral 3D incompressible Navier-Stokes on the unit torus, with
sharp spectral-band decompositions, mixed space-time regularity norms, and
empirical verification of the embedding inequalities behind them."""

__version__ = "0.1.0"

from .fields import (
    GridSpec,
    PhysicalField,
    SpectralField,
    SpectralTensor,
    field_from_modes,
    forward_transform,
    inner_product,
    inverse_transform,
    physical_zeros,
    spectral_zeros,
)
from .operators import (
    gradient,
    leray_project,
    nonlinear_term,
    random_divfree_field,
    stokes_power,
    trilinear_form,
)
from .decomposition import (
    ModePartition,
    anisotropic_partition,
    genuine3d_cut,
    low_cut,
    partition_piece,
)
from .norms import (
    SerrinAccumulator,
    lq_norm,
    scaling_class,
    serrin_accumulate,
    sobolev_norm,
)
from .spectra import (
    ShellSpectrum,
    decay_exponent,
    energy_spectrum,
    sup_weighted_spectrum,
    synthetic_power_spectrum,
)
from .solver import (
    BlowupError,
    ForcingSpec,
    RunReport,
    SolverState,
    TimeConfig,
    coupled_step,
    init_taylor_green,
    kinetic_energy,
    run,
    step,
)
from .monitor import (
    CriterionReport,
    EnergyMonitor,
    SerrinMonitor,
    SpectrumReport,
    SpectrumWeightMonitor,
)
from .verify import (
    EMBEDDING,
    INTERPOLATION_BOUND,
    SLAB_BOUND,
    InequalityReport,
    verify_fractional_embedding,
    verify_low_band_bounds,
    verify_low_band_suite,
)
from .snapshots import read_snapshot, write_snapshot

__all__ = [name for name in dir() if not name.startswith("_")]
