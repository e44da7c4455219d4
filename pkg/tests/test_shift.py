import numpy as np
import numpy.testing as npt
import pytest
import scipy.linalg

import narekit as nk
from narekit.errors import (
    DegenerateSpectrum,
    InvalidProblem,
    KMaxReached,
    NoConvergence,
    OrthogonalPair,
    SingularH,
)
from narekit.kernel import frobenius_norm
from narekit.shift import (
    CentralSubspaces,
    estimate_next_modulus,
    newton_polish,
)
from conftest import planted_matrix


class TestInverseIteration:
    def test_diagonal_well_separated(self):
        h = np.diag([0.1, 0.2, 5.0, 7.0])
        q, steps, t = nk.inverse_orthogonal_iteration(h, 2)
        target = np.zeros((4, 2))
        target[0, 0] = target[1, 1] = 1.0
        assert nk.subspace_distance(q, target) <= 1e-12
        assert steps >= 1

    def test_rate_estimate_tracks_eigenvalue_ratio(self):
        rng = np.random.default_rng(20)
        eigs = np.concatenate([[0.01, 0.02], rng.uniform(1.0, 2.0, 10)])
        h, _ = planted_matrix(rng, eigs)
        _, _, t = nk.inverse_orthogonal_iteration(h, 2)
        true_ratio = 0.02 / np.min(np.abs(eigs[2:]))
        assert true_ratio / 3.0 <= t <= true_ratio * 3.0

    def test_no_convergence_carries_best_iterate(self):
        rng = np.random.default_rng(21)
        eigs = np.concatenate([[0.5, 0.55], rng.uniform(0.6, 0.9, 8)])
        h, _ = planted_matrix(rng, eigs)
        with pytest.raises(NoConvergence) as err:
            nk.inverse_orthogonal_iteration(h, 2, max_iters=4)
        assert err.value.diagnostics["basis"].shape == (10, 2)
        assert err.value.diagnostics["steps"] == 4

    def test_singular_h_rejected(self):
        with pytest.raises(SingularH):
            nk.inverse_orthogonal_iteration(np.zeros((3, 3)), 1)

    def test_bad_k_rejected(self):
        with pytest.raises(InvalidProblem):
            nk.inverse_orthogonal_iteration(np.eye(3), 5)


class TestComputeCentralPair:
    def test_symmetric_left_equals_right(self):
        rng = np.random.default_rng(22)
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        h = q @ np.diag([0.1, -0.2, 2.0, 3.0, -4.0, 5.0]) @ q.T
        cs = nk.compute_central_pair(h, 2)
        assert nk.subspace_distance(cs.U, cs.V) <= 1e-10
        assert cs.cond_uv == pytest.approx(1.0, abs=1e-10)

    def test_diagonal_central_eigenvalues(self):
        h = np.diag([0.01, -0.02, 1.0, -1.0])
        cs = nk.compute_central_pair(h, 2)
        got = np.sort(cs.central_eigs.real)
        npt.assert_allclose(got, [-0.02, 0.01], atol=1e-12)

    def test_bases_are_orthonormal(self):
        p = nk.transport_problem(nk.TransportSpec.near_critical(16, 1e-6))
        cs = nk.compute_central_pair(nk.build_h(p).H, 2)
        npt.assert_allclose(cs.V.T @ cs.V, np.eye(2), atol=1e-12)
        npt.assert_allclose(cs.U.T @ cs.U, np.eye(2), atol=1e-12)

    def test_left_basis_orthogonal_to_complementary_right(self):
        # left and right invariant subspaces of different eigenvalues are
        # orthogonal; check U against the complementary right subspace from
        # an exact eigendecomposition oracle
        rng = np.random.default_rng(23)
        eigs = np.concatenate([[0.05, -0.06], rng.uniform(1.0, 2.0, 8)])
        h, t = planted_matrix(rng, eigs)
        cs = nk.compute_central_pair(h, 2)
        w, _ = np.linalg.qr(t[:, 2:])
        assert frobenius_norm(cs.U.T @ w) <= 1e-8


class TestDetectK:
    def test_planted_cluster_of_four(self):
        rng = np.random.default_rng(24)
        eigs = np.concatenate([[0.010, 0.011, 0.012, 0.013],
                               rng.uniform(1.0, 2.0, 8)])
        h, _ = planted_matrix(rng, eigs)
        assert nk.detect_k(h) == 4

    def test_transport_uses_two(self):
        p = nk.transport_problem(nk.TransportSpec.near_critical(32, 1e-6))
        assert nk.detect_k(nk.build_h(p).H) == 2

    def test_no_separation_raises(self):
        # all eigenvalues on the unit circle: no modulus gap anywhere
        angles = np.linspace(0.3, 2.8, 5)
        blocks = [np.array([[np.cos(a), np.sin(a)], [-np.sin(a), np.cos(a)]])
                  for a in angles]
        h = scipy.linalg.block_diag(*blocks)
        with pytest.raises(KMaxReached):
            nk.detect_k(h, k_max=4)


class TestShiftSelection:
    def _pair(self, central_eigs, t=0.0):
        central_eigs = np.asarray(central_eigs, dtype=complex)
        k = central_eigs.size
        v = np.eye(4)[:, :k]
        return CentralSubspaces(V=v, U=v, k=k, central_eigs=central_eigs,
                                inv_iter_steps=1, rate_estimate_t=t, cond_uv=1.0)

    def test_rule_arithmetic(self):
        plan = nk.choose_shift_s(self._pair([0.5, 0.6]), xi_next=2.5)
        assert plan.s == pytest.approx(4.0)
        assert plan.k == 2

    def test_fallback_uses_rate_estimate(self):
        plan = nk.choose_shift_s(self._pair([0.5, 0.6], t=0.1))
        assert plan.s == pytest.approx(0.6 / 0.1 / 0.5 - 1.0)

    def test_clamp_when_no_separation(self):
        plan = nk.choose_shift_s(self._pair([1.0, 1.0]), xi_next=1.0)
        assert plan.s == 0.1
        assert plan.rationale["clamped"]

    def test_degenerate_spectrum(self):
        with pytest.raises(DegenerateSpectrum):
            nk.choose_shift_s(self._pair([0.0, 1.0]))

    def test_next_modulus_estimate_diagonal(self):
        h = np.diag([0.1, 0.2, 5.0, 7.0, 9.0])
        # the default step count only buys the leading digit; it must land
        # between |xi_3| and the largest modulus
        est = estimate_next_modulus(h, 2)
        assert 5.0 <= est <= 9.0
        # with enough steps the probe converges to |xi_3| exactly
        assert estimate_next_modulus(h, 2, steps=40) == pytest.approx(5.0, rel=1e-6)


class TestBuildShiftedH:
    def test_zero_shift_is_identity(self):
        p = nk.transport_problem(nk.TransportSpec.near_critical(8, 1e-3))
        h = nk.build_h(p)
        cs = nk.compute_central_pair(h.H, 2)
        shifted = nk.build_shifted_h(h, cs, 0.0)
        npt.assert_allclose(shifted.H, h.H, atol=1e-14)

    def test_diagonal_instance(self):
        h = nk.LinearizingMatrix(np.diag([0.01, -0.02, 1.0, -1.0]), 2, 2)
        v = np.eye(4)[:, :2]
        cs = CentralSubspaces(V=v, U=v, k=2,
                              central_eigs=np.array([0.01, -0.02]),
                              inv_iter_steps=0, rate_estimate_t=0.0, cond_uv=1.0)
        shifted = nk.build_shifted_h(h, cs, 9.0)
        got = np.sort(np.linalg.eigvals(shifted.H).real)
        npt.assert_allclose(got, [-1.0, -0.2, 0.1, 1.0], atol=1e-12)

    def test_spectrum_split_random(self):
        rng = np.random.default_rng(25)
        for s in (1.0, 3.0, 10.0):
            eigs = np.concatenate([[0.05, -0.07], rng.uniform(1.0, 2.0, 8)])
            h, t = planted_matrix(rng, eigs)
            v, _ = np.linalg.qr(t[:, :2])
            u, _ = np.linalg.qr(np.linalg.inv(t).T[:, :2])
            cs = CentralSubspaces(V=v, U=u, k=2, central_eigs=eigs[:2],
                                  inv_iter_steps=0, rate_estimate_t=0.0,
                                  cond_uv=1.0)
            shifted = nk.build_shifted_h(nk.LinearizingMatrix(h, 5, 5), cs, s)
            got = np.sort(np.linalg.eigvals(shifted.H).real)
            want = np.sort(np.concatenate([(1 + s) * eigs[:2], eigs[2:]]))
            npt.assert_allclose(got, want, rtol=1e-8, atol=1e-8)

    def test_right_invariant_subspace_preserved(self):
        rng = np.random.default_rng(26)
        eigs = np.concatenate([[0.05, -0.07], rng.uniform(1.0, 2.0, 8)])
        h, t = planted_matrix(rng, eigs)
        cs = nk.compute_central_pair(h, 2)
        shifted = nk.build_shifted_h(nk.LinearizingMatrix(h, 5, 5), cs, 4.0)
        # the antistable subspace of h (an invariant subspace disjoint from
        # the center) must still be invariant for the shifted matrix
        w, _ = np.linalg.qr(t[:, 2:])
        compressed = w.T @ shifted.H @ w
        defect = frobenius_norm(shifted.H @ w - w @ compressed)
        assert defect <= 1e-8 * frobenius_norm(shifted.H)


class TestClassicalShift:
    def test_triangular_example(self):
        t = np.array([[0.0, 1.0], [0.0, 2.0]])
        shifted = nk.classical_shift(t, [1.0, 0.0], [1.0, 0.0], 3.0)
        npt.assert_allclose(shifted, [[3.0, 1.0], [0.0, 2.0]])
        got = np.sort(np.linalg.eigvals(shifted).real)
        npt.assert_allclose(got, [2.0, 3.0], atol=1e-12)

    def test_zero_shift_unchanged(self):
        rng = np.random.default_rng(27)
        h = rng.standard_normal((4, 4))
        v = rng.standard_normal(4)
        npt.assert_allclose(nk.classical_shift(h, v, v, 0.0), h, atol=1e-14)

    def test_orthogonal_pair_rejected(self):
        with pytest.raises(OrthogonalPair):
            nk.classical_shift(np.eye(2), [1.0, 0.0], [0.0, 1.0], 1.0)

    def test_critical_transport_kernel_shift(self):
        # at the critical point lambda_n = lambda_{n+1} = 0 form a 2x2
        # Jordan block whose single eigenvector comes from ker(M); the
        # rank-one shift sends that eigenvector's eigenvalue to s and
        # leaves its Jordan chain partner (and all other eigenvalues) alone
        p = nk.transport_problem(nk.TransportSpec(n=4, alpha=0.0, c=1.0))
        h = nk.build_h(p)
        m = nk.build_m(p)
        _, _, vt = np.linalg.svd(m)
        v = vt[-1]  # H = diag(I, -I) M, so ker(M) is a null vector of H too
        u = v.copy()
        before = np.sort(np.abs(np.linalg.eigvals(h.H)))
        scale = frobenius_norm(h.H)
        assert before[1] <= 1e-8 * scale  # double zero eigenvalue
        shifted = nk.classical_shift(h.H, v, u, 1.0)
        after = np.sort(np.abs(np.linalg.eigvals(shifted)))
        assert after[0] <= 1e-8 * scale  # the Jordan partner stays at zero
        assert after[1] == pytest.approx(1.0, abs=1e-7)  # the moved one
        npt.assert_allclose(after[2:], before[2:], rtol=1e-8)


class TestSushiSolve:
    def test_classification_guard(self):
        p = nk.NareProblem(A=[[1.0]], B=[[2.0]], C=[[3.0]], D=[[1.0]])
        assert not nk.classify_mmatrix(nk.build_m(p)).is_mmatrix()
        with pytest.raises(InvalidProblem):
            nk.sushi_solve(p)

    def test_matches_plain_sda_far_from_critical(self):
        p = nk.random_mnare(nk.RandomMnareSpec(n=12, alpha=0.5, seed=5))
        plain = nk.sda_solve(p, nk.SdaConfig())
        solution, cs, plan, outcome = nk.sushi_solve(p)
        assert nk.relative_error(solution.X, plain.X) <= 1e-8
        assert solution.residual <= 1e-13
        assert outcome.steps <= plain.steps

    def test_fixed_k_and_s_respected(self):
        p = nk.transport_problem(nk.TransportSpec.near_critical(16, 1e-6))
        solution, cs, plan, _ = nk.sushi_solve(
            p, nk.SushiOptions(k=2, s=100.0))
        assert cs.k == 2
        assert plan.s == 100.0
        assert solution.residual <= 1e-12

    def test_report_schema(self):
        p = nk.transport_problem(nk.TransportSpec.near_critical(16, 1e-6))
        report = nk.sushi_report(*nk.sushi_solve(p))
        assert {"k", "s", "central_eigs", "inv_iter_steps", "cond_uv",
                "sda_steps", "residual", "dual_residual", "timings"} <= set(report)
        assert report["k"] == 2
        assert report["residual"] <= 1e-12

    def test_residual_not_degraded_vs_plain(self, transport_bench):
        runs, _ = transport_bench
        for cell in runs.values():
            assert cell["solution"].residual <= 10.0 * cell["plain"].residual


def test_newton_polish_improves_residual():
    p = nk.transport_problem(nk.TransportSpec.near_critical(16, 1e-6))
    out = nk.sda_solve(p, nk.SdaConfig())
    rough = out.X + 1e-8 * np.ones_like(out.X)
    polished, res = newton_polish(p, rough, max_steps=2)
    assert res < nk.relative_residual(p, rough)
    assert res <= 1e-12
