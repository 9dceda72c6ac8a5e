"""Tolerance table shared by the library, the acceptance harness and the CLI.

Every threshold used to gate a result lives here.  The comment next to each
entry states where the number comes from.
"""

# -- linear algebra -------------------------------------------------------
# relative Hermiticity check: ||M - M^H||_max <= HERMITIAN_RTOL * ||M||_max
HERMITIAN_RTOL = 1e-12
# spectral gap below GAP_RTOL * ||M|| is treated as degenerate
GAP_RTOL = 1e-9
UNITARY_TOL = 1e-12

# -- frames ---------------------------------------------------------------
MIN_FRAME_GRID = 16
FRAME_ORTHONORMAL_TOL = 1e-10
CYCLIC_TOL = 1e-12
# largest admissible jump between neighbouring tracked eigenvectors
MAX_NEIGHBOUR_JUMP = 0.5 * 3.141592653589793
# normalisation makes <n|dn> imaginary; real part is pure discretisation noise
CONNECTION_REAL_TOL = 1e-8

# -- propagation ----------------------------------------------------------
DEFAULT_OSC_RESOLUTION = 20.0
NORM_TOL = 1e-8

# -- phases ---------------------------------------------------------------
# finite-T states are only approximately cyclic; overlap gate 1 - EPS_CYC
EPS_CYC = 0.05
MIN_PATCH_GRID = 64
GAUSS_ORDER = 5
# closest approach of a path to a singular line or point
MIN_SINGULAR_DIST = 1e-6
MONOPOLE_FLUX_RTOL = 1e-6
QUANTIZATION_TOL = 1e-9

# -- verification gates ---------------------------------------------------
# a frame "satisfies" the restriction (vanishing off-diagonal couplings) or
# the projected-derivative condition when the residual is below this; the
# central-difference/closed-form derivatives are accurate far below it
RESIDUAL_GATE = 1e-8
# implication check: residual_A1 small => MS gap small.  The gap is an
# integrated quantity, so it carries quadrature error on top of RESIDUAL_GATE
MS_IMPLIED_GAP = 1e-6
# lower bound on derivative_gap relative to the max off-diagonal coupling.
# For a two-level frame the limit state has |C_m| = 1 and K_T couples it
# with unit-modulus phase, so the gap tends to the coupling itself; 0.4
# leaves room for the O(1/T) leakage of the finite-T state
DICHOTOMY_FACTOR = 0.4
# frame is considered "rotating" (restriction badly violated) above this
DICHOTOMY_ACTIVE = 0.1
DICHOTOMY_INACTIVE_GAP = 1e-6
# non-increasing envelope allowance across a doubling of T
ENVELOPE_SLACK = 0.10
