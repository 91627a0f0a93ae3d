"""Dynamical Green's functions, heights and discriminant bounds on P^1."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DuplicatePointError,
    DyngreenError,
    PropertyViolation,
    ResourceLimitError,
    ValidationError,
    ZeroResultantError,
)
from .forms import BinaryForm, Lift, MapPair, cofactors, compose, iterate, resultant  # noqa: E402
from .places import INF, Place, bad_primes, good_reduction  # noqa: E402
from .dynheight import escape_radius_bound, filled_julia_member, green, hhat, normalize_lift, r_of  # noqa: E402
from .basis import SigmaIndex, basis_check, sigma_decompose  # noqa: E402
from .bounds import bound_report, dsum, effective_C, hadamard_check, mahler_inequality_check  # noqa: E402
from .tfd import d0n_estimate, tfd_bound, verify_tfd_inequality  # noqa: E402
from .canonical import (  # noqa: E402
    RationalPoint,
    canonical_height,
    canonical_height_orbit_oracle,
    green_sum_identity_check,
    lattes_from_curve,
    preperiodic_detect,
    small_point_census,
)
