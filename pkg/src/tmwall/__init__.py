"""Number walls over prime fields, the Thue-Morse tiling and escape of mass."""
from .errors import (
    AllZero, InsufficientPrecision, OutOfRange, OverlapMismatch, SizeLimit, TmwallError, ZeroInverse,
)
from .field import GF2, FieldElem, PrimeField, field_inv
from .series import CFExpansion, LaurentPrefix, Poly, cf_expand, shift, thue_morse_prefix
from .wall import (
    DiagWall, FrameAuditReport, Wall, check_frame_relations, diagonal_align, generate_wall,
    hankel_det, oracle_wall, toeplitz_det,
)
from .tmtiles import GElem, TileMat, orbits, sigma, sigma_iter, stabilizer, verify_equivariance
from .coding import BitGrid, assemble, compare_main, kappa, kappa1
from .escape import (
    E_lj, E_lj_recursive, escape_mass, full_escape_trace, heights, j_l, shift_limit, theta_escape,
)

__version__ = "0.1.0"
