"""Dense linear-algebra primitives shared by the whole package.

Thin, contract-enforcing wrappers around LAPACK (via numpy/scipy): pivoted
LU solves, thin QR with a fixed sign convention, dense nonsymmetric
eigenvalues, singular values, and the Kronecker matrix of the Sylvester
operator X -> M@X - X@N.  All functions are pure and accept/return plain
ndarrays; float32 inputs are honored for the single-precision mode.
"""

import numpy as np
import scipy.linalg

from .errors import DimensionCap, DimensionCap as _DimensionCap  # noqa: F401
from .errors import InvalidProblem, NoConvergence, RankDeficient, SingularMatrix

#: dense eigensolver dimension cap
EIG_DIM_CAP = 1024
#: cap on rows*cols of an explicitly assembled Sylvester operator
SYLVESTER_ASSEMBLY_CAP = 4096


def as_matrix(a, dtype=None, name="matrix"):
    """Validate and return a 2-d float array with finite entries."""
    m = np.asarray(a, dtype=dtype)
    if m.dtype not in (np.float32, np.float64):
        m = m.astype(np.float64)
    if m.ndim != 2:
        raise InvalidProblem(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidProblem(f"{name} contains NaN or Inf entries")
    return m


def frobenius_norm(m):
    return float(np.linalg.norm(m, "fro"))


def spectral_norm(m):
    return float(np.linalg.norm(m, 2))


def norms(m):
    """Return (Frobenius norm, spectral norm) of a matrix."""
    return frobenius_norm(m), spectral_norm(m)


def _eps(dtype):
    return float(np.finfo(np.dtype(dtype)).eps)


def lu_solve(m, rhs):
    """Solve m @ x = rhs by LU with partial pivoting.

    Raises SingularMatrix when a pivot falls below
    eps * ||m||_F * dim, i.e. the factorization is numerically singular.
    """
    m = np.asarray(m)
    rhs = np.asarray(rhs)
    n = m.shape[0]
    if m.shape[0] != m.shape[1]:
        raise InvalidProblem("lu_solve needs a square matrix")
    if rhs.shape[0] != n:
        raise InvalidProblem("rhs row count does not match matrix dimension")
    lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    thresh = _eps(m.dtype) * frobenius_norm(m) * n
    small = np.abs(np.diag(lu)).min() if n else np.inf
    if small < thresh or small == 0.0:
        raise SingularMatrix(
            f"pivot {small:.3e} below singularity threshold {thresh:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def lu_factor_checked(m):
    """LU factorization with the same singularity guard as lu_solve.

    Returns an opaque factor object to pass to apply_lu; lets callers
    amortize one factorization over many solves.
    """
    m = np.asarray(m)
    n = m.shape[0]
    lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    thresh = _eps(m.dtype) * frobenius_norm(m) * n
    small = np.abs(np.diag(lu)).min() if n else np.inf
    if small < thresh or small == 0.0:
        raise SingularMatrix("matrix is numerically singular")
    return lu, piv


def apply_lu(factor, rhs):
    return scipy.linalg.lu_solve(factor, rhs, check_finite=False)


def thin_qr(m):
    """Thin QR with nonnegative diagonal of R (deterministic sign convention).

    Raises RankDeficient when some |R_ii| < eps * ||m||_F * rows.
    """
    m = np.asarray(m)
    rows, cols = m.shape
    if rows < cols:
        raise InvalidProblem("thin_qr needs rows >= cols")
    q, r = np.linalg.qr(m)
    sign = np.sign(np.diag(r))
    sign[sign == 0] = 1.0
    q = q * sign
    r = sign[:, None] * r
    thresh = _eps(m.dtype) * frobenius_norm(m) * rows
    if cols and np.abs(np.diag(r)).min() < thresh:
        raise RankDeficient("matrix is numerically rank deficient")
    return q, r


def eigenvalues(m, dim_cap=EIG_DIM_CAP):
    """All eigenvalues of a square dense matrix, as a complex 1-d array."""
    m = np.asarray(m)
    n = m.shape[0]
    if m.shape[0] != m.shape[1]:
        raise InvalidProblem("eigenvalues needs a square matrix")
    if n > dim_cap:
        raise DimensionCap(f"dimension {n} exceeds the eigensolver cap {dim_cap}")
    try:
        return np.linalg.eigvals(m.astype(np.float64, copy=False))
    except np.linalg.LinAlgError as exc:  # QR iteration failed to converge
        raise NoConvergence(str(exc)) from exc


def singular_values(m):
    m = np.asarray(m)
    return np.linalg.svd(m, compute_uv=False)


def smallest_singular_value(m):
    """sigma_min(m); 0.0 is a valid return for singular input."""
    sv = singular_values(m)
    return float(sv[-1]) if sv.size else 0.0


def kron_sylvester_operator(m, n, assembly_cap=SYLVESTER_ASSEMBLY_CAP):
    """Matrix of X -> m@X - X@n under column-stacking: I (x) m - n^T (x) I."""
    m = np.asarray(m)
    n = np.asarray(n)
    if m.shape[0] != m.shape[1] or n.shape[0] != n.shape[1]:
        raise InvalidProblem("kron_sylvester_operator needs square matrices")
    p, q = m.shape[0], n.shape[0]
    if p * q > assembly_cap:
        raise DimensionCap(
            f"operator dimension {p * q} exceeds the assembly cap {assembly_cap}"
        )
    return np.kron(np.eye(q, dtype=m.dtype), m) - np.kron(n.T, np.eye(p, dtype=n.dtype))


def conjugation_closed(values, scale, tol=1e-10):
    """True when every non-real value has its conjugate present (within tol*scale)."""
    vals = np.asarray(values, dtype=complex)
    nonreal = vals[np.abs(vals.imag) > tol * scale]
    for v in nonreal:
        if np.min(np.abs(nonreal - np.conj(v))) > tol * scale:
            return False
    return True


# --- Matrix Market array-format IO ------------------------------------------

def write_matrix_market(path, m, comment=""):
    """Write a dense matrix in Matrix Market array format."""
    import scipy.io

    scipy.io.mmwrite(str(path), np.asarray(m, dtype=np.float64), comment=comment)


def read_matrix_market(path):
    """Read a dense real matrix from a Matrix Market file."""
    import scipy.io

    m = scipy.io.mmread(str(path))
    if hasattr(m, "toarray"):
        m = m.toarray()
    return as_matrix(np.asarray(m, dtype=np.float64), name=str(path))
