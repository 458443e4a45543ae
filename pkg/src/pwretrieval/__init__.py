"""Recovery of time-limited signals from intensities of modulated Fourier transforms."""
from .frames import (
    FrameFamily,
    GramMatrix,
    canonical_frame_k2,
    outer_product,
    rank_one_recover,
    verify_tight,
    verify_two_uniform,
)
from .grids import (
    InterpolationGrid,
    block_points,
    dual_basis_ft,
    generating_function,
    overlap_points,
    sampling_rate,
    shannon_grid,
    shift_imaginary,
    validate_overlap_condition,
)
from .measurement import (
    MeasurementSet,
    ModulatorBank,
    add_noise,
    certify_imaginary_shift,
    measure,
    measure_augmented,
    measure_via_modulation_oracle,
)
from .recovery import (
    PhaseLinkBreak,
    ReconstructionResult,
    RecoveryOptions,
    phase_aligned_error,
    propagate_phases,
    reconstruct_signal,
    recover,
    recover_augmented,
)
from .signal_model import (
    L1BoundedSignal,
    TimeLimitedSignal,
    fourier_transform,
    fourier_transform_quadrature,
    l1_norm,
    random_signal,
    with_transform_zeros,
)

__version__ = "0.1.0"
