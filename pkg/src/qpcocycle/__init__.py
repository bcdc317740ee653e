"""Lyapunov exponents, accelerations and strip-zero statistics of analytic
one-frequency quasi-periodic Schrödinger cocycles."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CocycleError,
    ContractError,
    DegenerateInputError,
    DomainError,
    IllConditionedError,
    MarginError,
    NumericError,
    PrecisionError,
    ResolutionError,
    WorkingHeightError,
)
from .potential import FourierPotential, PotentialStats, preset  # noqa: F401
from .potential import admissible_energy_interval, evaluate, stats, sup_norm  # noqa: F401,E402
from .zeros import ZeroSet, beta, hat_quantities, laurent_roots, zero_free_part  # noqa: F401,E402
from .jensen import acceleration_functional, jensen_integral, verify_acceleration_routes  # noqa: F401,E402
from .cocycle import (  # noqa: F401,E402
    GOLDEN,
    CocycleSpec,
    LyapunovEstimate,
    acceleration,
    cocycle_product_lognorm,
    complexified_profile,
    dominated_splitting_check,
    lyapunov_exponent,
    transfer_matrix,
)
from .constants import K1, K2, K3, rederive_k_constants  # noqa: F401,E402
from .asymptotics import (  # noqa: F401,E402
    acceleration_bound_check,
    duarte_klein_bound,
    find_working_height,
    stratum_quantities,
    theorem_constants,
    verify_asymptotics,
    verify_stratified,
    zero_set_geometry,
)
