import numpy as np
import pytest

from spinbath.errors import FitError
from spinbath.hamiltonian import build_chain_model, build_ring_model
from spinbath.observe import (
    ReducedDensityMatrix,
    delta,
    fit_b,
    gibbs_weights,
    measure_state,
    reduce_to_system,
    sigma,
    time_average,
    trace_time_series,
)
from spinbath.propagate import ThermalStateRequest, canonical_thermal_state, random_state
from spinbath.spectrum import SpectrumSummary, diagonalize


def _basis(energies, vectors=None):
    e = np.asarray(energies, dtype=float)
    v = np.eye(len(e)) if vectors is None else vectors
    return SpectrumSummary(e, v, 1e-8)


class TestReduce:
    def test_product_state_is_rank_one(self):
        m = build_ring_model(2, 3, -1.0, 1, 2, 1.0)
        hs = diagonalize(m, "S")
        sys = random_state(m.dim_system, 0)
        env = random_state(m.dim_env, 1)
        rdm = reduce_to_system(np.kron(env, sys), 2, hs)
        evals = np.linalg.eigvalsh(rdm.matrix)
        assert abs(evals[-1] - 1.0) < 1e-12 and np.abs(evals[:-1]).max() < 1e-12

    def test_maximally_mixed_average(self):
        m = build_ring_model(2, 2, -1.0, 1, 2, 1.0)
        hs = diagonalize(m, "S")
        acc = np.zeros((4, 4), dtype=complex)
        for n in range(m.dim):
            e = np.zeros(m.dim, dtype=complex)
            e[n] = 1.0
            acc += reduce_to_system(e, 2, hs).matrix
        acc /= m.dim
        assert np.abs(acc - np.eye(4) / 4).max() < 1e-12

    def test_invariants(self):
        m = build_ring_model(2, 4, -1.0, 3, 4, 1.0)
        hs = diagonalize(m, "S")
        st, _ = canonical_thermal_state(m, ThermalStateRequest(1.2, 5))
        rdm = reduce_to_system(st, 2, hs)
        assert abs(np.trace(rdm.matrix).real - 1.0) < 1e-12
        assert np.abs(rdm.matrix - rdm.matrix.conj().T).max() < 1e-12
        assert np.linalg.eigvalsh(rdm.matrix).min() > -1e-10

    def test_gibbs_diagonal_at_lambda_zero(self):
        # ensemble mean of the diagonal approaches the system Gibbs weights
        m = build_ring_model(2, 8, -1.0, 3, 4, 0.0)
        beta = 1.0
        hs = diagonalize(m, "S")
        spec = diagonalize(m)
        acc = np.zeros(4)
        n = 500
        for r in range(n):
            st, _ = canonical_thermal_state(
                m, ThermalStateRequest(beta, ("gibbs", r)), spectrum=spec)
            acc += reduce_to_system(st, 2, hs).diagonal / n
        ref = gibbs_weights(hs.eigenvalues, beta)
        # spread of a single diagonal entry is O(1/sqrt(D_E)); 3 stderr band
        assert np.abs(acc - ref).max() < 3 * 0.5 / np.sqrt(m.dim_env * n)


class TestSigma:
    def test_diagonal_matrix_is_zero(self):
        rdm = ReducedDensityMatrix(np.diag([0.4, 0.6]).astype(complex), _basis([0.0, 1.0]))
        assert sigma(rdm) == 0.0

    def test_single_offdiagonal(self):
        rdm = ReducedDensityMatrix(np.array([[0.5, 0.3], [0.3, 0.5]], dtype=complex),
                                   _basis([0.0, 1.0]))
        assert abs(sigma(rdm) - 0.3) < 1e-15

    def test_zero_for_eigenvector_product(self):
        m = build_ring_model(2, 3, -1.0, 1, 2, 1.0)
        hs = diagonalize(m, "S")
        sys_vec = hs.eigenvectors[:, 2].astype(complex)
        env = random_state(m.dim_env, 4)
        rdm = reduce_to_system(np.kron(env, sys_vec), 2, hs)
        assert sigma(rdm) < 1e-12

    def test_gauge_permutation_invariance(self):
        # permuting eigenvectors within a degenerate block leaves sigma alone
        m = build_chain_model(2, 4, 1.0, 1.0, 1.0, 1.0)
        hs = diagonalize(m, "S")   # triplet ground block
        st, _ = canonical_thermal_state(m, ThermalStateRequest(0.7, 9))
        s_ref = sigma(reduce_to_system(st, 2, hs))
        v = hs.eigenvectors.copy()
        v[:, [0, 1, 2]] = v[:, [2, 0, 1]]   # shuffle the degenerate triplet
        hs_shuffled = SpectrumSummary(hs.eigenvalues, v, hs.degeneracy_tolerance)
        s_new = sigma(reduce_to_system(st, 2, hs_shuffled))
        assert abs(s_new - s_ref) < 1e-12

    def test_upper_bound_invariant(self):
        m = build_ring_model(2, 3, -1.0, 1, 2, 1.0)
        hs = diagonalize(m, "S")
        st, _ = canonical_thermal_state(m, ThermalStateRequest(0.5, 12))
        rdm = reduce_to_system(st, 2, hs)
        d = rdm.dim
        bound = np.sqrt(d * (d - 1) / 2) * np.abs(
            rdm.matrix[np.triu_indices(d, 1)]).max()
        assert sigma(rdm) <= bound + 1e-15


class TestFitB:
    def test_exact_gibbs_recovers_beta(self):
        energies = np.array([-1.0, -0.2, 0.4, 1.3])
        beta = 0.85
        rdm = ReducedDensityMatrix(np.diag(gibbs_weights(energies, beta)).astype(complex),
                                   _basis(energies))
        assert abs(fit_b(rdm, _basis(energies)) - beta) < 1e-12

    def test_uniform_diagonal_gives_zero(self):
        energies = np.array([-1.0, 0.0, 2.0])
        rdm = ReducedDensityMatrix((np.eye(3) / 3).astype(complex), _basis(energies))
        assert abs(fit_b(rdm, _basis(energies))) < 1e-14

    def test_all_energies_equal_is_undefined(self):
        rdm = ReducedDensityMatrix((np.eye(3) / 3).astype(complex), _basis([1.0, 1.0, 1.0]))
        with pytest.raises(FitError):
            fit_b(rdm, _basis([1.0, 1.0, 1.0]))

    def test_floored_diagonal_warns(self):
        energies = np.array([0.0, 1.0])
        mat = np.diag([1.0, 0.0]).astype(complex)
        with pytest.warns(UserWarning):
            fit_b(ReducedDensityMatrix(mat, _basis(energies)), _basis(energies))


class TestDelta:
    def test_exact_gibbs_is_zero(self):
        energies = np.array([-1.0, 0.0, 0.7])
        p = gibbs_weights(energies, 1.1)
        rdm = ReducedDensityMatrix(np.diag(p).astype(complex), _basis(energies))
        assert delta(rdm, _basis(energies), 1.1) < 1e-15

    def test_direct_formula_oracle(self):
        # cross-check against an independent evaluation of the definition
        m = build_ring_model(2, 3, -1.0, 5, 6, 1.0)
        hs = diagonalize(m, "S")
        st, _ = canonical_thermal_state(m, ThermalStateRequest(2.0, 3))
        rdm = reduce_to_system(st, 2, hs)
        b = fit_b(rdm, hs)
        e = hs.eigenvalues
        w = np.exp(-b * (e - e.min()))
        w /= w.sum()
        direct = np.sqrt(sum((rdm.diagonal[i] - w[i]) ** 2 for i in range(4)))
        assert abs(delta(rdm, hs, b) - direct) < 1e-14

    def test_range_invariant(self):
        m = build_ring_model(2, 3, -1.0, 5, 6, 1.0)
        hs = diagonalize(m, "S")
        for r in range(5):
            st = random_state(m.dim, r)
            rep = measure_state(st, 2, hs, beta_ref=0.0)
            assert 0.0 <= rep.delta <= np.sqrt(2.0)
            assert rep.sigma >= 0.0


class TestMeasureReport:
    def test_reference_vs_fitted_delta(self):
        m = build_ring_model(2, 4, -1.0, 2, 3, 0.0)
        hs = diagonalize(m, "S")
        st, _ = canonical_thermal_state(m, ThermalStateRequest(0.9, 21))
        rep = measure_state(st, 2, hs, beta_ref=0.9)
        assert rep.beta_ref == 0.9
        assert rep.delta == delta(reduce_to_system(st, 2, hs), hs, 0.9)
        assert rep.delta_fit == delta(reduce_to_system(st, 2, hs), hs, rep.b)
        rep2 = measure_state(st, 2, hs)
        assert rep2.delta == rep2.delta_fit


class TestTraceTimeSeries:
    def test_t_max_zero_single_entry(self):
        m = build_ring_model(2, 3, -1.0, 5, 6, 1.0)
        hs = diagonalize(m, "S")
        st, _ = canonical_thermal_state(m, ThermalStateRequest(0.5, 2))
        rows = trace_time_series(m, st, 0.0, 0.5, hs, beta_ref=0.5)
        rep = measure_state(st, 2, hs, beta_ref=0.5)
        assert len(rows) == 1
        assert rows[0] == (0.0, rep.sigma, rep.delta, rep.b)

    def test_x_state_stationary_small(self):
        m = build_ring_model(2, 4, -1.0, 5, 6, 1.0)
        hs = diagonalize(m, "S")
        st, _ = canonical_thermal_state(m, ThermalStateRequest(0.9, 31))
        rows = trace_time_series(m, st, 40.0, 0.5, hs, beta_ref=0.9)
        sig = np.array([r[1] for r in rows])
        assert np.abs(sig - sig.mean()).max() < 5 * sig.std(ddof=1)

    def test_time_average_helper(self):
        rows = [(0.0, 1.0, 0, 0), (1.0, 2.0, 0, 0), (2.0, 4.0, 0, 0)]
        mean, std = time_average(rows, 0.5)
        assert mean == 3.0 and abs(std - np.sqrt(2.0)) < 1e-12
        with pytest.raises(ValueError):
            time_average(rows, 10.0)

    def test_ududy_relaxes_toward_stationary_value(self):
        # a product initial state decays toward a stationary sigma whose
        # late-time mean differs from the same-beta canonical (X) value
        import warnings

        from spinbath.propagate import alternating_product_state

        m = build_ring_model(4, 6, -1.0, 23, 29, 1.0)
        hs = diagonalize(m, "S")
        beta = 0.9
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")   # early diagonals touch the log floor
            ud_rows = trace_time_series(m, alternating_product_state(m, beta, 7),
                                        200.0, 1.0, hs, beta_ref=beta)
        t = np.array([r[0] for r in ud_rows])
        sig = np.array([r[1] for r in ud_rows])
        late = sig[t > 120].mean()
        window = 20
        smooth = np.convolve(np.abs(sig - late), np.ones(window) / window, mode="valid")
        assert smooth[0] > 3 * smooth[-1]       # smoothed approach to the mean
        x0, _ = canonical_thermal_state(m, ThermalStateRequest(beta, 9, "exact"))
        x_rows = trace_time_series(m, x0, 200.0, 1.0, hs, beta_ref=beta)
        x_late = np.array([r[1] for r in x_rows])[t > 120]
        # distinct long-time averages (well beyond the correlated-sample error)
        assert abs(late - x_late.mean()) > 0.005
