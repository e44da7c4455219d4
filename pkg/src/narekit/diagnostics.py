"""Criticality and conditioning metrics of the linearizing matrix.

gap       |lambda_n - lambda_{n+1}|, the distance between the two
          eigenvalues straddling the imaginary axis.
cayley    max antistable / min stable modulus after the Cayley transform;
          this is the quadratic convergence factor of the doubling solver.
sep       smallest singular value of the Sylvester operator
          X -> M X - X N; always a lower bound of the minimal
          eigenvalue-pair distance, and equal to it for normal matrices.
relsep    sep of the (A11, A22) blocks of a unitary reduction of H along
          an invariant subspace, divided by ||H||_F.
delta     minimum distance from the central eigenvalues to the rest of
          the spectrum; large delta with small gap is the regime where
          the subspace shift pays off.
cond_uv   spectral condition of the coupling matrix U^T V of the left and
          right central bases.
"""

from dataclasses import dataclass
import json

import numpy as np
import scipy.linalg

from .core import LinearizingMatrix, cayley, ordered_eigenvalues
from .errors import InvalidProblem, MatchFailure, NotInvariant, UVSingular
from .kernel import (
    eigenvalues,
    frobenius_norm,
    kron_sylvester_operator,
    smallest_singular_value,
    spectral_norm,
)


def gap_of(h: LinearizingMatrix) -> float:
    """|lambda_n - lambda_{n+1}| under the descending-real-part ordering."""
    lam = ordered_eigenvalues(h)
    return float(abs(lam[h.n - 1] - lam[h.n]))


def cayley_gap(h: LinearizingMatrix, gamma: float) -> float:
    """max_i |C_gamma(lambda_i)| / min_j |C_gamma(lambda_{n+j})|.

    The general form: valid for shifted matrices, where the extremal
    eigenvalues need not be the two central ones.
    """
    lam = ordered_eigenvalues(h)
    anti, stab = lam[: h.n], lam[h.n:]
    num = max(abs(cayley(z, gamma)) for z in anti)
    den = min(abs(cayley(z, gamma)) for z in stab)
    return float(num / den)


def sep_f(m, n) -> float:
    """sigma_min(I (x) M - N^T (x) I), the separation of M and N."""
    return smallest_singular_value(kron_sylvester_operator(m, n))


def subspace_distance(b1, b2) -> float:
    """Spectral-norm distance between the orthogonal projectors of two bases."""
    b1 = np.asarray(b1)
    b2 = np.asarray(b2)
    if b1.shape[0] != b2.shape[0]:
        raise InvalidProblem("bases live in different ambient dimensions")
    return float(spectral_norm(b1 @ b1.T - b2 @ b2.T))


def schur_basis(m, select):
    """Orthonormal basis of the invariant subspace of the eigenvalues picked
    by select(re, im) -> bool, from a sorted real Schur decomposition."""
    t, z, sdim = scipy.linalg.schur(np.asarray(m), output="real", sort=select)
    if sdim == 0:
        raise InvalidProblem("no eigenvalue satisfies the selection predicate")
    return z[:, :sdim]


def stable_basis(m):
    """Orthonormal basis of the invariant subspace of the left-half-plane
    eigenvalues."""
    return schur_basis(m, lambda re, im: re < 0)


def _complete_basis(basis):
    """Unitary [basis | complement]; the complement from a full QR."""
    k = basis.shape[1]
    q, _ = np.linalg.qr(basis, mode="complete")
    return np.hstack([basis, q[:, k:]])


def relsep_of_subspace(h, basis, defect_tol=1e-8) -> float:
    """sep(A11, A22) / ||H||_F for the unitary reduction of h along basis.

    basis must have orthonormal columns spanning an invariant subspace of
    h; the invariance defect ||h V - V (V^T h V)||_F / ||h||_F is checked
    against defect_tol.
    """
    h = np.asarray(h)
    basis = np.asarray(basis)
    k = basis.shape[1]
    scale = frobenius_norm(h)
    compressed = basis.T @ h @ basis
    defect = frobenius_norm(h @ basis - basis @ compressed) / scale
    if defect > defect_tol:
        raise NotInvariant(defect, defect_tol)
    q = _complete_basis(basis)
    t = q.T @ h @ q
    a11, a22 = t[:k, :k], t[k:, k:]
    return sep_f(a11, a22) / scale


def solution_distance_bound(x, xt, dist) -> float:
    """sqrt(n + ||X||_F^2) * sqrt(n + ||X~||_F^2) * dist.

    Frobenius form of the bound relating the solution difference to the
    distance between the invariant subspaces spanned by [I; X] and [I; X~].
    """
    x = np.asarray(x)
    xt = np.asarray(xt)
    if x.shape != xt.shape:
        raise InvalidProblem("shapes of the two solutions differ")
    n = x.shape[1]
    return float(
        np.sqrt(n + frobenius_norm(x) ** 2)
        * np.sqrt(n + frobenius_norm(xt) ** 2)
        * dist
    )


def delta_central(h: LinearizingMatrix, central_eigs, match_tol=1e-6) -> float:
    """Minimum distance from the central eigenvalues to the rest of sigma(H).

    Each claimed central eigenvalue is matched greedily to its nearest
    spectrum point; a match farther than match_tol (relative to ||H||_F)
    raises MatchFailure.
    """
    lam = eigenvalues(h.H)
    scale = frobenius_norm(h.H)
    central = np.atleast_1d(np.asarray(central_eigs, dtype=complex))
    remaining = list(range(lam.size))
    matched = []
    for c in central:
        dists = np.abs(lam[remaining] - c)
        j = int(np.argmin(dists))
        if dists[j] > match_tol * max(scale, 1.0):
            raise MatchFailure(
                f"central eigenvalue {c} is {dists[j]:.3e} from the spectrum"
            )
        matched.append(remaining.pop(j))
    others = lam[remaining]
    if others.size == 0:
        raise InvalidProblem("no non-central eigenvalues to measure against")
    return float(min(np.min(np.abs(others - lam[i])) for i in matched))


def cond_uv(u, v) -> float:
    """Spectral norm of (U^T V)^-1, i.e. 1 / sigma_min(U^T V)."""
    u = np.asarray(u)
    v = np.asarray(v)
    uv = u.T @ v
    if uv.shape[0] != uv.shape[1]:
        raise InvalidProblem("U^T V must be square")
    smin = smallest_singular_value(uv)
    if smin <= np.finfo(np.float64).eps * max(uv.shape[0], 1):
        raise UVSingular("U^T V is numerically singular")
    return 1.0 / smin


@dataclass(frozen=True)
class DiagnosticsReport:
    """Per-problem criticality metrics, serializable to JSON or a text table."""

    gap: float
    cayley_gap: float
    sep_f_stable: float = None
    relsep_stable: float = None
    relsep_central: float = None
    delta_central: float = None
    cond_uv: float = None
    lambda_n: float = None
    lambda_n1: float = None

    _COLUMNS = (
        ("gap", "gap"),
        ("cayley_gap", "gap_C"),
        ("sep_f_stable", "sep(W)"),
        ("relsep_stable", "rsep(W)"),
        ("relsep_central", "rsep(U)"),
        ("delta_central", "delta"),
        ("cond_uv", "cond(UV)"),
        ("lambda_n", "lam_n"),
        ("lambda_n1", "lam_n+1"),
    )

    def to_json(self):
        return json.dumps({name: getattr(self, name) for name, _ in self._COLUMNS})

    def to_table(self):
        """Two aligned rows, header and values, skipping absent metrics."""
        cells = [
            (label, f"{getattr(self, name):.2e}")
            for name, label in self._COLUMNS
            if getattr(self, name) is not None
        ]
        widths = [max(len(a), len(b)) for a, b in cells]
        head = "  ".join(label.rjust(w) for (label, _), w in zip(cells, widths))
        vals = "  ".join(value.rjust(w) for (_, value), w in zip(cells, widths))
        return head + "\n" + vals


def report_for(h: LinearizingMatrix, gamma, stable_basis=None,
               central_pair=None) -> DiagnosticsReport:
    """Assemble a DiagnosticsReport from whatever pieces the caller has.

    stable_basis: orthonormal basis of the stable invariant subspace, used
    for sep/relsep.  central_pair: a CentralSubspaces instance, used for
    relsep of the central subspace, delta, and cond(U^T V).
    """
    lam = ordered_eigenvalues(h)
    kwargs = {
        "gap": gap_of(h),
        "cayley_gap": cayley_gap(h, gamma),
        "lambda_n": float(lam[h.n - 1].real),
        "lambda_n1": float(lam[h.n].real),
    }
    if stable_basis is not None:
        rs = relsep_of_subspace(h.H, stable_basis)
        kwargs["relsep_stable"] = rs
        kwargs["sep_f_stable"] = rs * frobenius_norm(h.H)
    if central_pair is not None:
        kwargs["relsep_central"] = relsep_of_subspace(h.H, central_pair.V)
        kwargs["delta_central"] = delta_central(h, central_pair.central_eigs)
        kwargs["cond_uv"] = cond_uv(central_pair.U, central_pair.V)
    return DiagnosticsReport(**kwargs)
