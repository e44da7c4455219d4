"""Problem model for the Riccati equation X C X - A X - X D + B = 0.

A problem is defined by the four coefficient blocks (A: m x m, B: m x n,
C: n x m, D: n x n).  The linearizing matrix

    H = [[D, -C], [B, -A]]

carries the equation's spectral structure: solutions X correspond to
invariant subspaces spanned by the columns of [I; X].  For problems whose
sign-flipped block matrix M = [[D, -C], [-B, A]] is an M-matrix, the
eigenvalues of H split n right / m left of the imaginary axis and the
minimal entrywise-nonnegative solution exists.
"""

from dataclasses import dataclass, field
import json

import numpy as np

from .errors import (
    ClassificationAmbiguous,
    DegenerateDenominator,
    InvalidProblem,
    PoleHit,
    ZeroReference,
)
from .kernel import as_matrix, eigenvalues, frobenius_norm


@dataclass(frozen=True)
class NareProblem:
    """Coefficient blocks of X C X - A X - X D + B = 0."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        a = as_matrix(self.A, name="A")
        b = as_matrix(self.B, name="B")
        c = as_matrix(self.C, name="C")
        d = as_matrix(self.D, name="D")
        m, n = b.shape
        if m < 1 or n < 1:
            raise InvalidProblem("block sizes m, n must be at least 1")
        if a.shape != (m, m):
            raise InvalidProblem(f"A must be {m}x{m}, got {a.shape}")
        if c.shape != (n, m):
            raise InvalidProblem(f"C must be {n}x{m}, got {c.shape}")
        if d.shape != (n, n):
            raise InvalidProblem(f"D must be {n}x{n}, got {d.shape}")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "D", d)

    @property
    def m(self):
        return self.B.shape[0]

    @property
    def n(self):
        return self.B.shape[1]

    @property
    def dtype(self):
        return self.A.dtype

    def astype(self, dtype):
        """Same problem with coefficient blocks cast to dtype (float32/float64)."""
        return NareProblem(
            self.A.astype(dtype), self.B.astype(dtype),
            self.C.astype(dtype), self.D.astype(dtype),
            metadata=dict(self.metadata),
        )

    def dual(self):
        """The dual equation Y B Y - Y A - D Y + C = 0 as a NareProblem."""
        return NareProblem(self.D, self.C, self.B, self.A)

    # --- serialization -------------------------------------------------------

    def to_json(self):
        payload = {
            "m": self.m,
            "n": self.n,
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
        }
        if self.metadata:
            payload["metadata"] = self.metadata
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text):
        payload = json.loads(text)
        prob = cls(
            np.array(payload["A"], dtype=float),
            np.array(payload["B"], dtype=float),
            np.array(payload["C"], dtype=float),
            np.array(payload["D"], dtype=float),
            metadata=payload.get("metadata", {}),
        )
        if prob.m != payload["m"] or prob.n != payload["n"]:
            raise InvalidProblem("declared m, n disagree with block shapes")
        return prob

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())

    def save_matrix_market(self, stem):
        """Write the four blocks as <stem>_A.mtx ... <stem>_D.mtx."""
        from .kernel import write_matrix_market

        for name in "ABCD":
            write_matrix_market(f"{stem}_{name}.mtx", getattr(self, name))

    @classmethod
    def load_matrix_market(cls, stem):
        from .kernel import read_matrix_market

        blocks = {name: read_matrix_market(f"{stem}_{name}.mtx") for name in "ABCD"}
        return cls(blocks["A"], blocks["B"], blocks["C"], blocks["D"])


@dataclass(frozen=True)
class LinearizingMatrix:
    """The matrix [[D, -C], [B, -A]] with its block partition sizes."""

    H: np.ndarray
    n: int
    m: int

    def __post_init__(self):
        h = as_matrix(self.H, name="H")
        if h.shape != (self.n + self.m, self.n + self.m):
            raise InvalidProblem("H shape disagrees with n + m")
        object.__setattr__(self, "H", h)

    @property
    def dim(self):
        return self.n + self.m

    def block_d(self):
        return self.H[: self.n, : self.n]

    def block_c(self):
        return -self.H[: self.n, self.n:]

    def block_b(self):
        return self.H[self.n:, : self.n]

    def block_a(self):
        return -self.H[self.n:, self.n:]

    def to_problem(self):
        """Coefficient blocks read back from H (sign conventions included)."""
        return NareProblem(self.block_a(), self.block_b(), self.block_c(), self.block_d())


@dataclass(frozen=True)
class MMatrixClass:
    tag: str  # "NonsingularM" | "SingularM" | "NotM"
    spectral_abscissa_evidence: float

    def is_mmatrix(self):
        return self.tag in ("NonsingularM", "SingularM")


@dataclass(frozen=True)
class Solution:
    X: np.ndarray
    residual: float
    iterations: int


def build_h(p: NareProblem) -> LinearizingMatrix:
    """Assemble the linearizing matrix [[D, -C], [B, -A]]."""
    h = np.block([[p.D, -p.C], [p.B, -p.A]])
    return LinearizingMatrix(h, p.n, p.m)


def build_m(p: NareProblem) -> np.ndarray:
    """Assemble [[D, -C], [-B, A]], the block matrix tested for M-structure."""
    return np.block([[p.D, -p.C], [-p.B, p.A]])


def classify_mmatrix(m, zero_tol=1e-10) -> MMatrixClass:
    """Classify a square matrix as nonsingular M-matrix, singular M-matrix, or neither.

    Sign test first (off-diagonal entries must be <= 0 up to roundoff), then
    write m = s*I - N with s = max diagonal and compare s with the spectral
    radius of N.
    """
    m = as_matrix(m, name="M")
    if m.shape[0] != m.shape[1]:
        raise InvalidProblem("classify_mmatrix needs a square matrix")
    scale = frobenius_norm(m)
    off = m - np.diag(np.diag(m))
    if off.size and off.max(initial=0.0) > 1e-14 * scale:
        return MMatrixClass("NotM", float("nan"))
    s = float(np.max(np.diag(m)))
    n_part = s * np.eye(m.shape[0]) - m
    rho = float(np.max(np.abs(eigenvalues(n_part)))) if m.shape[0] else 0.0
    evidence = s - rho
    if abs(evidence) <= zero_tol * max(abs(s), 1.0):
        return MMatrixClass("SingularM", evidence)
    if s > rho:
        return MMatrixClass("NonsingularM", evidence)
    return MMatrixClass("NotM", evidence)


def residual(p: NareProblem, x) -> np.ndarray:
    """The equation residual X C X - A X - X D + B."""
    x = np.asarray(x)
    return x @ p.C @ x - p.A @ x - x @ p.D + p.B


def relative_residual(p: NareProblem, x) -> float:
    """||R(X)||_F / (||X C X + B||_F + ||A X + X D||_F)."""
    x = np.asarray(x)
    den = frobenius_norm(x @ p.C @ x + p.B) + frobenius_norm(p.A @ x + x @ p.D)
    if den < np.finfo(np.float64).eps:
        raise DegenerateDenominator("relative residual denominator is zero")
    return frobenius_norm(residual(p, x)) / den


def relative_error(x_approx, x_ref) -> float:
    """||X~ - X*||_F / ||X*||_F."""
    x_approx = np.asarray(x_approx)
    x_ref = np.asarray(x_ref)
    if x_approx.shape != x_ref.shape:
        raise InvalidProblem("shapes of the two solutions differ")
    ref = frobenius_norm(x_ref)
    if ref == 0.0:
        raise ZeroReference("reference solution has zero norm")
    return frobenius_norm(x_approx - x_ref) / ref


def gamma_star(p: NareProblem) -> float:
    """Optimal doubling parameter: max over the diagonals of A and D."""
    return float(max(np.max(np.diag(p.A)), np.max(np.diag(p.D))))


def cayley(z, gamma):
    """(z - gamma) / (z + gamma)."""
    z = complex(z)
    if gamma == 0.0:
        raise InvalidProblem("Cayley parameter must be nonzero")
    if abs(z + gamma) < np.finfo(np.float64).eps * (abs(z) + abs(gamma)):
        raise PoleHit(f"Cayley transform evaluated at its pole, z={z}")
    w = (z - gamma) / (z + gamma)
    return w if z.imag != 0 else complex(w.real, 0.0)


def verify_invariant_pair(h: LinearizingMatrix, x) -> float:
    """Invariant-subspace defect ||H [I; X] - [I; X](D - C X)||_F / ||H||_F."""
    x = np.asarray(x)
    if x.shape != (h.m, h.n):
        raise InvalidProblem(f"X must be {h.m}x{h.n}")
    stacked = np.vstack([np.eye(h.n, dtype=x.dtype), x])
    dcx = h.block_d() - h.block_c() @ x
    defect = h.H @ stacked - stacked @ dcx
    return frobenius_norm(defect) / frobenius_norm(h.H)


def ordered_eigenvalues(h: LinearizingMatrix):
    """Eigenvalues of H sorted by descending real part (ties: descending imag).

    Position n-1 and n of the returned array are the two eigenvalues that
    straddle the imaginary axis for an M-matrix-structured problem.
    """
    ev = eigenvalues(h.H)
    order = np.lexsort((-ev.imag, -ev.real))
    return ev[order]


def central_real_pair(h: LinearizingMatrix, tol=1e-10):
    """(lambda_n, lambda_{n+1}) as reals; they are real for M-NARE problems."""
    lam = ordered_eigenvalues(h)
    scale = frobenius_norm(h.H)
    pair = lam[h.n - 1], lam[h.n]
    for v in pair:
        if abs(v.imag) > tol * scale:
            raise ClassificationAmbiguous(
                f"boundary eigenvalue {v} is not real within tolerance"
            )
    return float(pair[0].real), float(pair[1].real)
