"""Structured doubling iteration with Cayley initialization.

One doubling step maps (E, F, G, H) to

    E <- E (I - G H)^-1 E
    F <- F (I - H G)^-1 F
    G <- G + E (I - G H)^-1 G F
    H <- H + F (I - H G)^-1 H E

started from the Cayley-transformed coefficients.  The m x n iterate H_k
converges to the minimal nonnegative solution X of the primal equation and
the n x m iterate G_k to the solution Y of the dual equation.  Convergence
is quadratic with rate equal to the Cayley-transformed spectral gap of the
linearizing matrix; close-to-critical problems push that rate toward 1,
which is what the subspace shift in :mod:`narekit.shift` repairs.
"""

from dataclasses import dataclass, field
import json

import numpy as np
import scipy.linalg

from .core import (
    LinearizingMatrix,
    NareProblem,
    cayley,
    gamma_star,
    ordered_eigenvalues,
    relative_residual,
)
from .errors import (
    Breakdown,
    ClassificationAmbiguous,
    InitSingular,
    NoConvergence,
    SingularMatrix,
)
from .kernel import frobenius_norm, lu_solve


@dataclass(frozen=True)
class SdaConfig:
    gamma: float = None  # default: gamma_star of the problem being initialized
    tol: float = 1e-15
    max_steps: int = 60
    breakdown_threshold: float = 1e13
    trace: object = None  # callable(dict) invoked once per step


@dataclass
class SdaState:
    E: np.ndarray  # n x n
    F: np.ndarray  # m x m
    G: np.ndarray  # n x m, converges to the dual solution
    Hm: np.ndarray  # m x n, converges to the primal solution
    step: int = 0


@dataclass(frozen=True)
class SdaOutcome:
    X: np.ndarray  # m x n minimal nonnegative solution (limit of Hm)
    Y: np.ndarray  # n x m dual solution (limit of G)
    steps: int
    residual_history: list = field(repr=False)
    converged: bool = True
    residual: float = 0.0
    dual_residual: float = 0.0
    gamma: float = 0.0

    def report(self):
        return {
            "steps": self.steps,
            "converged": self.converged,
            "residual": self.residual,
            "dual_residual": self.dual_residual,
            "gamma": self.gamma,
        }


def sda_init(p: NareProblem, gamma: float) -> SdaState:
    """Cayley-transformed starting matrices.

    E0 = I - 2 gamma V^-1,   V = (D + gamma I) - C (A + gamma I)^-1 B
    F0 = I - 2 gamma W^-1,   W = (A + gamma I) - B (D + gamma I)^-1 C
    G0 = 2 gamma (D + gamma I)^-1 C W^-1
    H0 = 2 gamma W^-1 B (D + gamma I)^-1
    """
    dt = p.dtype
    m, n = p.m, p.n
    g = dt.type(gamma)
    a_g = p.A + g * np.eye(m, dtype=dt)
    d_g = p.D + g * np.eye(n, dtype=dt)

    def solve(mat, rhs, which):
        try:
            return lu_solve(mat, rhs)
        except SingularMatrix as exc:
            raise InitSingular(which, f"{which} is singular: {exc}") from exc

    dg_inv_c = solve(d_g, p.C, "D+gamma*I")
    ag_inv_b = solve(a_g, p.B, "A+gamma*I")
    w = a_g - p.B @ dg_inv_c
    v = d_g - p.C @ ag_inv_b
    e0 = np.eye(n, dtype=dt) - 2 * g * solve(v, np.eye(n, dtype=dt), "V_gamma")
    w_inv = solve(w, np.eye(m, dtype=dt), "W_gamma")
    f0 = np.eye(m, dtype=dt) - 2 * g * w_inv
    g0 = 2 * g * dg_inv_c @ w_inv
    h0 = 2 * g * w_inv @ p.B @ solve(d_g, np.eye(n, dtype=dt), "D+gamma*I")
    return SdaState(E=e0, F=f0, G=g0, Hm=h0, step=0)


def _step_factors(s: SdaState, breakdown_threshold: float):
    """LU factors of I - G@H and I - H@G, with a 1-norm condition guard."""
    n, m = s.G.shape[0], s.Hm.shape[0]
    igh = np.eye(n, dtype=s.G.dtype) - s.G @ s.Hm
    ihg = np.eye(m, dtype=s.G.dtype) - s.Hm @ s.G
    worst = 0.0
    factors = []
    for mat in (igh, ihg):
        lu, piv = scipy.linalg.lu_factor(mat, check_finite=False)
        gecon = scipy.linalg.get_lapack_funcs("gecon", (mat,))
        rcond, _ = gecon(lu, np.linalg.norm(mat, 1))
        cond = 1.0 / rcond if rcond > 0 else np.inf
        worst = max(worst, cond)
        if cond > breakdown_threshold:
            raise Breakdown(s.step, cond)
        factors.append((lu, piv))
    return factors[0], factors[1], worst


def sda_step(s: SdaState, cfg: SdaConfig = SdaConfig()) -> SdaState:
    """One doubling step; raises Breakdown when I - G@H is numerically singular."""
    f_igh, f_ihg, _ = _step_factors(s, cfg.breakdown_threshold)
    sol_igh = lambda rhs: scipy.linalg.lu_solve(f_igh, rhs, check_finite=False)
    sol_ihg = lambda rhs: scipy.linalg.lu_solve(f_ihg, rhs, check_finite=False)
    g_new = s.G + s.E @ sol_igh(s.G) @ s.F
    h_new = s.Hm + s.F @ sol_ihg(s.Hm) @ s.E
    e_new = s.E @ sol_igh(s.E)
    f_new = s.F @ sol_ihg(s.F)
    return SdaState(E=e_new, F=f_new, G=g_new, Hm=h_new, step=s.step + 1)


def sda_solve(p: NareProblem, cfg: SdaConfig = SdaConfig(),
              residual_problem: NareProblem = None) -> SdaOutcome:
    """Run the doubling iteration to convergence.

    residual_problem, when given, is the equation residuals are measured
    against; a shifted solve passes the original problem here, since both
    share the minimal solution.

    Stops when the relative change of the primal iterate drops below
    cfg.tol, or earlier when the relative residual stagnates at its
    attainable floor (stagnation detection only arms once the residual is
    already below max(100*tol, 1e-10), so slow linear phases are not cut
    short).
    """
    gamma = cfg.gamma if cfg.gamma is not None else gamma_star(p)
    target = residual_problem if residual_problem is not None else p
    state = sda_init(p, gamma)
    history = []
    prev_res = np.inf
    stagnation_floor = max(100.0 * cfg.tol, 1e-10)
    converged = False
    while state.step < cfg.max_steps:
        new = sda_step(state, cfg)
        dx = frobenius_norm(new.Hm - state.Hm) / max(frobenius_norm(new.Hm),
                                                     np.finfo(np.float64).tiny)
        state = new
        res = relative_residual(target, state.Hm)
        history.append(res)
        if cfg.trace is not None:
            cfg.trace({"step": state.step, "delta_rel": float(dx),
                       "residual": float(res)})
        if dx <= cfg.tol:
            converged = True
            break
        if prev_res <= stagnation_floor and res > 0.9 * prev_res:
            converged = True
            break
        prev_res = res
    final_res = history[-1] if history else np.inf
    if not converged and final_res > cfg.tol * 100:
        raise NoConvergence(
            f"doubling did not converge in {cfg.max_steps} steps "
            f"(relative residual {final_res:.3e})",
            diagnostics={"residual_history": history},
        )
    dual_res = relative_residual(target.dual(), state.G)
    return SdaOutcome(
        X=state.Hm, Y=state.G, steps=state.step, residual_history=history,
        converged=converged, residual=float(final_res),
        dual_residual=float(dual_res), gamma=float(gamma),
    )


def predicted_rate(h: LinearizingMatrix, gamma: float) -> float:
    """Quadratic convergence rate of the doubling iteration on H.

    max over the n antistable eigenvalues of |cayley| divided by the min
    over the m stable ones; for M-matrix-structured problems this reduces
    to the ratio at the two boundary eigenvalues.
    """
    lam = ordered_eigenvalues(h)
    anti, stab = lam[: h.n], lam[h.n:]
    scale = frobenius_norm(h.H)
    if anti.size and stab.size:
        if anti[-1].real < -1e-8 * scale or stab[0].real > 1e-8 * scale:
            raise ClassificationAmbiguous(
                "eigenvalues do not split n antistable / m stable"
            )
    num = max(abs(cayley(z, gamma)) for z in anti)
    if num == 0.0:
        # an exact Cayley zero on the antistable side; skip the stable
        # minimum, which may sit at the transform's pole
        return 0.0
    den = min(abs(cayley(z, gamma)) for z in stab)
    return float(num / den)


def trace_writer(stream):
    """A cfg.trace callable that emits one JSON line per step."""
    def emit(record):
        stream.write(json.dumps(record) + "\n")
    return emit
