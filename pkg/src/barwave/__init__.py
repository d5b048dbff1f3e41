"""Spectral solver for a bar with viscous boundary dampers and one internal damper."""

__version__ = "0.1.0"

from .errors import (BarwaveError, ConfigError, ConvergenceFailure, CriticalCoefficientError,
                     DomainError, ExpansionInvalidError, MeshError, MultiplicityError,
                     NumericalFailure, PoleProximityError, SuperInstabilityError,
                     UnsupportedDoublePoleError, UnsupportedRegimeError)
from .params import Classification, Params, RationalPosition, classify, make_params, rationalize_position
from .modes import ModeBasis
from .spectrum import (CharPolynomial, EigenvalueLadder, RootSet, Spectrum, build_char_poly,
                       compute_spectrum, eigenvalues_no_internal, find_roots, ladder, midpoint_roots)
from .green import (GreenExpansion, build_expansion, gamma_time, green_laplace, principal_part,
                    residue_coefficient)
from .response import (Forcing, Grid, InitialData, ModalKernel, ResponseField, make_grid,
                       respond_kernel, respond_modal)
from .critical import (gamma_both_transparent, gamma_right_transparent, respond_both_transparent,
                       respond_critical, respond_right_transparent)
from .fem import assemble, fem_eigenvalues, fem_time_response, spurious_report
