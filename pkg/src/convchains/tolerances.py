"""Suite-wide numerical tolerances.

Every float comparison in the package and its tests reads its threshold
from here, so tightening or relaxing a check happens in one place.
"""

#: relative tolerance for float scalars of magnitude >= 1
FLOAT_RTOL = 1e-12
#: absolute tolerance for float scalars below 1
FLOAT_ATOL = 1e-12
#: stopping threshold |a q^k| for infinite q-Pochhammer products
QPROD_STOP = 1e-18
#: default stationary-measure tail tolerance on semi-infinite lattices
TAIL_TOL = 1e-14
#: hard cap on semi-infinite truncation points
TRUNCATION_CAP = 4096
#: allowed column deficiency of truncated transition matrices
COLUMN_TOL = 1e-12
#: eigen-relation residual on truncated lattices
RESIDUAL_TOL = 1e-10
#: numeric eigenvalues against closed forms
EIGEN_TOL = 1e-10
#: eigenvalues closer than this are matched by value instead of sign changes
EIGEN_CLUSTER = 1e-9
#: q-Meixner two-family orthogonality
QM_ORTHO_TOL = 1e-10


def close(a, b, rtol=FLOAT_RTOL, atol=FLOAT_ATOL):
    """Relative comparison for values >= 1, absolute below."""
    a, b = float(a), float(b)
    scale = max(abs(a), abs(b))
    if scale >= 1.0:
        return abs(a - b) <= rtol * scale
    return abs(a - b) <= atol
