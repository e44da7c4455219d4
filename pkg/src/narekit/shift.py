"""Subspace shift: move the troublesome central eigenvalues of H outward.

Close-to-critical problems have a cluster of k small-modulus eigenvalues
of the linearizing matrix H responsible for slow doubling convergence and
ill conditioning.  Given orthonormal bases V and U of the right and left
invariant subspaces of that cluster, the rank-k update

    H_shifted = H (I + s V (U^T V)^-1 U^T)

multiplies the k central eigenvalues by (1 + s) while leaving every right
invariant subspace of H (and hence the minimal solution) unchanged.  The
bases are computed by inverse orthogonal iteration, which also yields a
convergence-rate estimate t ~ |xi_k| / |xi_{k+1}| used to pick s.

`sushi_solve` chains the whole pipeline: detect k, compute the central
pair, choose s, build the shifted equation, run the doubling solver on it
with the original problem's gamma, and polish the result with a Newton
defect-correction step on the original equation (forming the shifted
coefficients in floating point perturbs the solution at level
eps * (1 + s), which the correction removes).
"""

from dataclasses import dataclass, field
import time

import numpy as np
import scipy.linalg

from .core import (
    LinearizingMatrix,
    NareProblem,
    Solution,
    build_h,
    build_m,
    classify_mmatrix,
    gamma_star,
    relative_residual,
    residual,
)
from .errors import (
    CentralPairIllConditioned,
    DegenerateSpectrum,
    InvalidProblem,
    KMaxReached,
    NoConvergence,
    OrthogonalPair,
    SingularH,
    UVSingular,
)
from .kernel import eigenvalues, frobenius_norm, smallest_singular_value
from .sda import SdaConfig, SdaOutcome, sda_solve

#: seed of the deterministic starting basis, fixed so step counts reproduce
DEFAULT_SEED = 20120601


@dataclass(frozen=True)
class CentralSubspaces:
    V: np.ndarray  # right basis, orthonormal columns
    U: np.ndarray  # left basis, orthonormal columns
    k: int
    central_eigs: np.ndarray  # eigenvalues of V^T H V
    inv_iter_steps: int
    rate_estimate_t: float
    cond_uv: float


@dataclass(frozen=True)
class ShiftPlan:
    s: float
    k: int
    rationale: dict = field(default_factory=dict)


def _factor(h):
    """LU factors of h; inverse iteration tolerates near-singularity, so
    only an exactly singular (zero-pivot) or non-finite matrix is rejected."""
    if not np.all(np.isfinite(h)):
        raise SingularH("matrix has non-finite entries")
    lu, piv = scipy.linalg.lu_factor(h, check_finite=False)
    if h.shape[0] and np.abs(np.diag(lu)).min() == 0.0:
        raise SingularH("matrix is exactly singular")
    return lu, piv


def _qr(m):
    """Thin QR with the nonnegative-R-diagonal convention but without the
    rank guard: the iterates here are deliberately close to singular."""
    q, r = np.linalg.qr(m)
    sign = np.sign(np.diag(r))
    sign[sign == 0] = 1.0
    return q * sign, sign[:, None] * r


def inverse_orthogonal_iteration(h, k, tol=1e-12, max_iters=100, seed=DEFAULT_SEED):
    """Orthonormal basis of the invariant subspace of the k smallest-modulus
    eigenvalues of h, by repeated solve + thin QR.

    Stops when the projector distance between successive bases drops below
    tol, or when it stagnates at its roundoff floor (once past the initial
    transient, a step that recovers less than a factor 0.9 means the basis
    only jitters).  Returns (Q, steps, t_estimate) where t_estimate is the
    geometric-mean contraction per step over the genuinely converging
    window, an estimate of |xi_k| / |xi_{k+1}|.
    """
    h = np.asarray(h)
    dim = h.shape[0]
    if k < 1 or k > dim:
        raise InvalidProblem(f"subspace dimension k={k} out of range")
    factor = _factor(h)
    rng = np.random.default_rng(seed)
    q, _ = _qr(rng.standard_normal((dim, k)).astype(h.dtype))
    dists = []
    converged = False
    armed = False
    for _ in range(max_iters):
        z = scipy.linalg.lu_solve(factor, q, check_finite=False)
        q_new, _ = _qr(z)
        d = float(np.linalg.norm(q_new @ q_new.T - q @ q.T, 2))
        q = q_new
        prev = dists[-1] if dists else None
        dists.append(d)
        if d <= tol:
            converged = True
            break
        if armed and d >= 0.9 * prev:
            converged = True
            break
        if d < 1e-2:
            armed = True
    t = _contraction_estimate(dists)
    if not converged:
        raise NoConvergence(
            f"inverse iteration did not settle in {max_iters} steps "
            f"(rate estimate {t:.3g})",
            diagnostics={"basis": q, "steps": len(dists), "t_estimate": t},
        )
    return q, len(dists), t


def _contraction_estimate(dists):
    """Geometric-mean step ratio over the genuinely converging window.

    The window starts at the first distance below 0.5 (end of the initial
    transient) and ends at the first stagnating step (less than a factor
    0.9 of progress, i.e. the roundoff floor).  Returns 0.0 when no such
    window exists, meaning convergence was too fast to measure.
    """
    a = np.asarray(dists)
    j0 = next((i for i, v in enumerate(a) if v < 0.5), None)
    if j0 is None:
        return 0.0
    j1 = next((i for i in range(j0, a.size - 1) if a[i + 1] >= 0.9 * a[i]),
              a.size - 1)
    if j1 <= j0:
        return 0.0
    return float((a[j1] / a[j0]) ** (1.0 / (j1 - j0)))


def compute_central_pair(h, k, tol=1e-12, max_iters=100, seed=DEFAULT_SEED,
                         cond_cap=1e8) -> CentralSubspaces:
    """Left and right central bases plus the central eigenvalues.

    The right basis comes from inverse iteration on h, the left one from
    the same iteration on h^T.  Refuses to return a pair whose coupling
    matrix U^T V has condition number above cond_cap.
    """
    h = np.asarray(h)
    v, steps_v, t = inverse_orthogonal_iteration(h, k, tol, max_iters, seed)
    u, _, _ = inverse_orthogonal_iteration(h.T, k, tol, max_iters, seed)
    sv = np.linalg.svd(u.T @ v, compute_uv=False)
    cond_uv = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if cond_uv > cond_cap:
        raise CentralPairIllConditioned(cond_uv)
    central = eigenvalues(v.T @ h @ v)
    return CentralSubspaces(
        V=v, U=u, k=k, central_eigs=central,
        inv_iter_steps=steps_v, rate_estimate_t=t, cond_uv=cond_uv,
    )


def detect_k(h, k0=2, k_max=8, slow_threshold=0.5, probe_iters=12,
             seed=DEFAULT_SEED, tol=1e-12):
    """Smallest k >= k0 whose inverse iteration contracts fast enough.

    Runs a few probe iterations per candidate k and accepts the first one
    with rate estimate <= slow_threshold (a zero estimate means convergence
    was immediate and counts as fast).  Raises KMaxReached when no k up to
    k_max separates the central cluster from the rest of the spectrum.
    """
    if k0 < 2:
        raise InvalidProblem("k0 must be at least 2")
    last_t = 1.0
    for k in range(k0, k_max + 1):
        try:
            _, _, t = inverse_orthogonal_iteration(h, k, tol, probe_iters, seed)
        except NoConvergence as exc:
            t = exc.diagnostics["t_estimate"]
            if t == 0.0:
                # the probe neither converged nor yielded a measurable
                # contraction window: treat as too slow
                t = 1.0
        last_t = t
        if t <= slow_threshold:
            return k
    raise KMaxReached(k_max, last_t)


def estimate_next_modulus(h, k, steps=8, seed=DEFAULT_SEED):
    """Estimate of |xi_{k+1}| from a (k + 1)-column probe iteration.

    Once the leading k columns have settled, the last diagonal entry of R
    in the iteration's thin QR converges to 1 / |xi_{k+1}|; a handful of
    steps gives the one correct digit the shift selection needs, even when
    |xi_{k+1}| is not separated from the eigenvalues above it.
    """
    h = np.asarray(h)
    factor = _factor(h)
    rng = np.random.default_rng(seed)
    q, r = _qr(rng.standard_normal((h.shape[0], k + 1)).astype(h.dtype))
    for _ in range(steps):
        q, r = _qr(scipy.linalg.lu_solve(factor, q, check_finite=False))
    entry = abs(float(r[k, k]))
    if entry == 0.0:
        raise DegenerateSpectrum("probe iteration collapsed to a singular R")
    return 1.0 / entry


def choose_shift_s(cs: CentralSubspaces, h_norm=None, s_min=0.1, s_max=1e6,
                   xi_next=None) -> ShiftPlan:
    """Shift magnitude s = |xi_{k+1}| / |xi_1| - 1, clamped to [s_min, s_max].

    |xi_{k+1}| is taken from xi_next when the caller has an estimate (or
    the exact value); without one, the fallback is |xi_k| / t from the
    iteration's contraction rate, which is cruder since it can be diluted
    by the roundoff floor of the subspace distances.
    """
    mods = np.sort(np.abs(cs.central_eigs))
    xi1, xik = float(mods[0]), float(mods[-1])
    if xi1 == 0.0 or (h_norm is not None
                      and xi1 < np.finfo(np.float64).eps * h_norm):
        raise DegenerateSpectrum(
            f"smallest central eigenvalue {xi1:.3e} is numerically zero"
        )
    if xi_next is not None:
        target = float(xi_next)
    elif cs.rate_estimate_t > 0.0:
        target = xik / cs.rate_estimate_t
    else:
        target = 10.0 * xik  # no usable estimate: modest default
    s = target / xi1 - 1.0
    clamped = not (s_min <= s <= s_max)
    s = float(min(max(s, s_min), s_max))
    return ShiftPlan(s=s, k=cs.k, rationale={
        "xi_1": xi1, "xi_k": xik, "xi_next_estimate": target,
        "t_estimate": cs.rate_estimate_t, "clamped": clamped,
    })


def build_shifted_h(h: LinearizingMatrix, cs: CentralSubspaces,
                    s: float) -> LinearizingMatrix:
    """The rank-k update H (I + s V (U^T V)^-1 U^T) as a LinearizingMatrix."""
    uv = cs.U.T @ cs.V
    if smallest_singular_value(uv) <= np.finfo(np.float64).eps * cs.k:
        raise UVSingular("U^T V is numerically singular")
    correction = cs.V @ np.linalg.solve(uv, cs.U.T)
    shifted = h.H @ (np.eye(h.dim, dtype=h.H.dtype) + s * correction)
    return LinearizingMatrix(shifted, h.n, h.m)


def classical_shift(h, v, u, s):
    """Rank-one update h + s * v u^T / (u^T v), moving one eigenvalue by s.

    v must be an eigenvector of h; u any vector not orthogonal to v.  All
    other eigenvalues are unchanged.
    """
    h = np.asarray(h)
    v = np.asarray(v, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    uv = float(u @ v)
    if abs(uv) < 1e-12 * np.linalg.norm(u) * np.linalg.norm(v):
        raise OrthogonalPair("u and v are numerically orthogonal")
    return h + (s / uv) * np.outer(v, u)


def newton_polish(p: NareProblem, x, max_steps=2, floor=1e-13):
    """Newton defect correction on the original equation.

    Solves (X C - A) D + D (C X - D_coef) = -R(X) for the correction D and
    keeps the update while the relative residual improves.  A no-op when
    the residual is already at the floor.
    """
    x = np.asarray(x)
    res = relative_residual(p, x)
    for _ in range(max_steps):
        if res <= floor:
            break
        try:
            delta = scipy.linalg.solve_sylvester(
                x @ p.C - p.A, p.C @ x - p.D, -residual(p, x))
        except (np.linalg.LinAlgError, ValueError):
            break
        candidate = x + delta
        new_res = relative_residual(p, candidate)
        if not new_res < res:
            break
        x, res = candidate, new_res
    return x, float(res)


@dataclass(frozen=True)
class SushiOptions:
    k: int = None          # fixed central dimension; None: detect dynamically
    s: float = None        # fixed shift magnitude; None: automatic
    tol: float = 1e-15
    max_steps: int = 60
    iter_tol: float = 1e-12
    max_iters: int = 100
    seed: int = DEFAULT_SEED
    k_max: int = 8
    polish: bool = True    # Newton defect correction on the original equation
    force: bool = False    # skip the M-matrix classification guard
    trace: object = None


def sushi_solve(p: NareProblem, opts: SushiOptions = SushiOptions()):
    """Shifted solve of a close-to-critical problem.

    Pipeline: classify, (detect k), compute central pair, choose s, build
    the shifted equation, run the doubling solver on it with the original
    problem's gamma, and polish/report residuals against the original
    equation.

    Returns (Solution, CentralSubspaces, ShiftPlan, SdaOutcome).
    """
    t0 = time.perf_counter()
    if not opts.force:
        cls = classify_mmatrix(build_m(p))
        if not cls.is_mmatrix():
            raise InvalidProblem(
                "problem is not M-matrix-structured; pass force=True to override"
            )
    h = build_h(p)
    work = h.H
    iter_tol = max(opts.iter_tol, 100.0 * float(np.finfo(p.dtype).eps))
    k = opts.k if opts.k is not None else detect_k(
        work, k_max=opts.k_max, seed=opts.seed, tol=iter_tol)
    cs = compute_central_pair(work, k, iter_tol, opts.max_iters, opts.seed)
    if opts.s is not None:
        plan = ShiftPlan(s=float(opts.s), k=k, rationale={"fixed": True})
    else:
        xi_next = estimate_next_modulus(work, k, seed=opts.seed)
        plan = choose_shift_s(cs, h_norm=frobenius_norm(work), xi_next=xi_next)
    shifted = build_shifted_h(LinearizingMatrix(work, h.n, h.m), cs, plan.s)
    shifted_problem = NareProblem(
        shifted.block_a(), shifted.block_b(),
        shifted.block_c(), shifted.block_d(),
    )
    cfg = SdaConfig(gamma=gamma_star(p), tol=opts.tol,
                    max_steps=opts.max_steps, trace=opts.trace)
    outcome = sda_solve(shifted_problem, cfg, residual_problem=p)
    x = outcome.X
    res = relative_residual(p, x)
    if opts.polish:
        floor = 100.0 * float(np.finfo(p.dtype).eps)
        x, res = newton_polish(p, x, floor=floor)
    solution = Solution(X=x, residual=float(res), iterations=outcome.steps)
    elapsed = time.perf_counter() - t0
    object.__setattr__(plan, "rationale", dict(plan.rationale, elapsed_s=elapsed))
    return solution, cs, plan, outcome


def sushi_report(solution: Solution, cs: CentralSubspaces, plan: ShiftPlan,
                 outcome: SdaOutcome):
    """Structured summary of a shifted solve, JSON-serializable."""
    return {
        "k": cs.k,
        "s": plan.s,
        "central_eigs": [[z.real, z.imag] for z in np.atleast_1d(cs.central_eigs)],
        "inv_iter_steps": cs.inv_iter_steps,
        "cond_uv": cs.cond_uv,
        "sda_steps": outcome.steps,
        "residual": solution.residual,
        "dual_residual": outcome.dual_residual,
        "timings": {"total_s": plan.rationale.get("elapsed_s")},
    }
