"""Finite-model Gabor frame analysis with a twisted-algebra layer.

The library discretizes functions on the line to one period of a uniform
grid, realizes time-frequency shifts exactly on it, and builds three
layers on top: the Gabor frame engine (frame operator, bounds, dual and
tight windows), the twisted coefficient algebra those shifts generate,
and the constant-curvature connection diagnostics that witness the
localization obstruction at critical density.
"""

from .algebra import (
    AlgebraElement,
    DecayProfile,
    act,
    decay_profile,
    delta_element,
    derivation,
    involution,
    module_ip,
    outer_shell_l1,
    projection_from_tight,
    represent_dense,
    trace,
    twisted_product,
    unit_phase,
    zero_element,
)
from .connection import (
    DiagnosticsRow,
    DiagnosticsTable,
    battle_identity_check,
    battle_refinement,
    blt_sweep,
    curvature_constant,
    curvature_residual,
    grid_divergence_study,
    hermitian_residual,
    leibniz_residual,
)
from .errors import (
    ConvergenceError,
    GabtorError,
    GridMismatchError,
    NotAFrameError,
    NotBiorthogonalError,
    NotTightError,
    ParameterError,
    PreconditionError,
    SizeError,
)
from .frame import (
    CoefficientArray,
    FrameBounds,
    FrameOperator,
    analysis,
    dual_window,
    frame_bounds,
    frame_operator_apply,
    gabor_matrix,
    synthesis,
    tight_window,
    wexler_raz_check,
)
from .signal import (
    GridSpec,
    LatticeSpec,
    Signal,
    inner,
    l2_norm,
    l2_norm_sq,
    make_grid,
    make_window,
    nabla1,
    nabla2,
    phase_space_shift,
    tf_shift,
    uncertainty_product,
)

__version__ = "0.1.0"
