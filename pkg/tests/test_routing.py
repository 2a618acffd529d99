import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwrouter import (
    DensityMatrix,
    FidelityCurve,
    FullGraphLayout,
    PureState,
    RouterParams,
    SuperpositionGrid,
    SuperpositionParams,
    average_fidelity,
    build_full_hamiltonian,
    evolve,
    fidelity_grid,
    input_state,
    min_fidelity,
    mixed_state_fidelity,
    per_wrong_output_probability,
    routing_fidelity,
    target_state,
    transition_probability,
)
from qwrouter.routing import _uhlmann_fidelity_general

TWO_PI = 2.0 * np.pi
RNG = np.random.default_rng(20240814)


def random_density(dim=6, rank=None):
    rank = rank or dim
    a = RNG.standard_normal((dim, rank)) + 1j * RNG.standard_normal((dim, rank))
    rho = a @ a.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def random_pure_density(dim=6):
    v = RNG.standard_normal(dim) + 1j * RNG.standard_normal(dim)
    v /= np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj())), v


class TestStates:
    def test_localized_limit(self):
        sp = SuperpositionParams(1.0, 0.3)
        np.testing.assert_array_equal(
            input_state(sp).amplitudes, np.eye(6, dtype=complex)[0]
        )
        np.testing.assert_array_equal(
            target_state(sp).amplitudes, np.eye(6, dtype=complex)[3]
        )

    def test_balanced_with_quarter_phase(self):
        sp = SuperpositionParams(0.7, 3 * np.pi / 2)
        amps = input_state(sp).amplitudes
        assert amps[0] == pytest.approx(0.7, abs=1e-12)
        assert amps[1] == pytest.approx(-1j * np.sqrt(0.51), abs=1e-12)
        t = target_state(sp).amplitudes
        assert t[3] == pytest.approx(0.7, abs=1e-12)
        assert t[2] == pytest.approx(-1j * np.sqrt(0.51), abs=1e-12)

    def test_alpha_zero_unit_norm(self):
        amps = input_state(SuperpositionParams(0.0, 1.1)).amplitudes
        assert abs(np.linalg.norm(amps) - 1.0) < 1e-12
        assert amps[1] == pytest.approx(np.exp(1.1j), abs=1e-12)

    def test_alpha_out_of_range(self):
        with pytest.raises(ValueError):
            SuperpositionParams(1.5, 0.0)

    def test_chi_irrelevant_at_endpoints(self):
        params = RouterParams(12, 1.0, 2.0)
        for alpha in (0.0, 1.0):
            vals = [
                routing_fidelity(params, 9.3, SuperpositionParams(alpha, chi))
                for chi in np.linspace(0, TWO_PI, 17, endpoint=False)
            ]
            assert max(vals) - min(vals) < 1e-12


class TestTransitionProbability:
    def test_orthogonal_at_zero_time(self):
        # spectral route leaves only rounding residue (~1e-34) at t = 0
        p = RouterParams(5, 1.0, 1.0)
        assert transition_probability(p, 0.0, 1, 4) == pytest.approx(0.0, abs=1e-12)

    def test_identity_at_zero_time(self):
        p = RouterParams(5, 1.0, 1.0)
        assert transition_probability(p, 0.0, 1, 1) == pytest.approx(1.0, abs=1e-14)

    def test_invalid_labels(self):
        p = RouterParams(5, 1.0, 1.0)
        with pytest.raises(ValueError):
            transition_probability(p, 1.0, 0, 4)
        with pytest.raises(ValueError):
            transition_probability(p, 1.0, 1, 7)

    def test_forty_output_pi_phase_window(self):
        p = RouterParams(40, 1.0, np.pi)
        p14 = transition_probability(p, 17.0, 1, 4)
        p16 = transition_probability(p, 17.0, 1, 6)
        assert p14 > 0.8
        assert p16 < 0.03  # leakage to wrong outputs stays small here

    def test_bounded(self):
        p = RouterParams(7, 2.0, 0.4)
        for t in np.linspace(0, 20, 41):
            v = transition_probability(p, float(t), 1, 4)
            assert 0.0 <= v <= 1.0


class TestWrongOutputProbability:
    def test_n2_equals_aggregate(self):
        p = RouterParams(2, 1.0, 0.7)
        assert per_wrong_output_probability(p, 3.3) == pytest.approx(
            transition_probability(p, 3.3, 1, 6), abs=1e-15
        )

    def test_no_chirality_output_symmetry(self):
        # With beta=1, phi=0 every output is equivalent.
        for n, t in ((4, 2.1), (9, 7.7), (25, 13.0)):
            p = RouterParams(n, 1.0, 0.0)
            assert per_wrong_output_probability(p, t) == pytest.approx(
                transition_probability(p, t, 1, 4), abs=1e-9
            )

    def test_full_graph_per_vertex_equality(self):
        # Oracle: full-graph evolution at n=4; each wrong external vertex
        # must carry the same probability as the target external.
        n = 4
        params = RouterParams(n, 1.0, 0.0)
        lay = FullGraphLayout(n)
        psi0 = np.zeros(2 * (n + 1), dtype=complex)
        psi0[lay.external_for(lay.input_internal)] = 1.0
        out = evolve(build_full_hamiltonian(params, lay), 5.3, PureState(psi0))
        probs = np.abs(out.amplitudes) ** 2
        target = probs[lay.external_for(lay.output_internal)]
        wrong = [
            probs[lay.external_for(m)]
            for m in lay.internal_indices
            if m not in (lay.input_internal, lay.output_internal)
        ]
        np.testing.assert_allclose(wrong, target, atol=1e-9)
        # and the reduced model's per-output figure agrees
        assert per_wrong_output_probability(params, 5.3) == pytest.approx(
            target, abs=1e-9
        )

    def test_weight_ray_regime_low_leakage(self):
        p = RouterParams(50, 0.69 * 30.0, 0.0)
        assert per_wrong_output_probability(p, 30.0) <= 0.05 / 49.0


class TestRoutingFidelity:
    def test_localized_consistency(self):
        p = RouterParams(20, 1.0, 4.712)
        sp = SuperpositionParams(1.0, 0.0)
        assert routing_fidelity(p, 18.55, sp) == pytest.approx(
            transition_probability(p, 18.55, 1, 4), abs=1e-12
        )

    def test_matches_direct_evolution(self):
        # Oracle: evolve the input state explicitly and take the overlap.
        p = RouterParams(9, 1.3, 2.4)
        sp = SuperpositionParams(0.55, 1.9)
        from qwrouter import build_reduced_hamiltonian

        evolved = evolve(build_reduced_hamiltonian(p), 6.6, input_state(sp))
        expected = abs(np.vdot(target_state(sp).amplitudes, evolved.amplitudes)) ** 2
        assert routing_fidelity(p, 6.6, sp) == pytest.approx(expected, abs=1e-12)

    def test_high_fidelity_configuration(self):
        p = RouterParams(20, 1.0, 4.712)
        assert average_fidelity(p, 18.550) == pytest.approx(0.993, abs=0.01)


class TestGridStatistics:
    def test_zero_time_orthogonal(self):
        p = RouterParams(6, 1.0, 1.0)
        assert average_fidelity(p, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert min_fidelity(p, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_min_below_average(self):
        p = RouterParams(20, 1.0, 4.712)
        grid = SuperpositionGrid(21, 32)
        assert min_fidelity(p, 18.55, grid) <= average_fidelity(p, 18.55, grid)

    def test_refinement_never_increases_grid_minimum(self):
        p = RouterParams(20, 1.0, 4.708)
        grid = SuperpositionGrid(21, 32)
        assert min_fidelity(p, 18.523, grid, refine=True) <= min_fidelity(
            p, 18.523, grid, refine=False
        ) + 1e-15

    def test_grid_shape(self):
        f = fidelity_grid(RouterParams(5, 1.0, 1.0), 3.0, SuperpositionGrid(11, 16))
        assert f.shape == (11, 16)
        assert np.all((f >= 0.0) & (f <= 1.0))

    def test_grid_matches_pointwise(self):
        # Oracle: the vectorized grid agrees with scalar evaluation.
        p = RouterParams(7, 1.0, 2.7)
        grid = SuperpositionGrid(5, 8)
        f = fidelity_grid(p, 4.2, grid)
        for i, a in enumerate(grid.alphas()):
            for j, c in enumerate(grid.chis()):
                assert f[i, j] == pytest.approx(
                    routing_fidelity(p, 4.2, SuperpositionParams(float(a), float(c))),
                    abs=1e-12,
                )

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            SuperpositionGrid(0, 8)

    def test_haar_measure_against_monte_carlo(self):
        # Oracle: direct sampling from the single-qubit uniform measure.
        p = RouterParams(20, 1.0, 4.712)
        t = 18.55
        grid_val = average_fidelity(p, t, SuperpositionGrid(201, 64, measure="haar"))
        rng = np.random.default_rng(99)
        u = rng.uniform(-1.0, 1.0, 4000)
        alphas = np.sqrt((1.0 + u) / 2.0)
        chis = rng.uniform(0.0, TWO_PI, 4000)
        mc = np.mean(
            [
                routing_fidelity(p, t, SuperpositionParams(float(a), float(c)))
                for a, c in zip(alphas, chis)
            ]
        )
        assert grid_val == pytest.approx(mc, abs=5e-3)


class TestDensityMatrix:
    def test_valid_construction(self):
        rho = random_density()
        assert rho.dim == 6

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(4, dtype=complex))

    def test_rejects_non_hermitian(self):
        m = np.eye(3, dtype=complex) / 3.0
        m[0, 1] = 0.1
        with pytest.raises(ValueError):
            DensityMatrix(m)

    def test_rejects_negative_eigenvalue(self):
        m = np.diag([1.1, -0.1, 0.0, 0.0]).astype(complex)
        with pytest.raises(ValueError):
            DensityMatrix(m)

    def test_from_pure(self):
        rho = DensityMatrix.from_pure(PureState(np.array([0.6, 0.8j])))
        assert np.trace(rho.entries) == pytest.approx(1.0, abs=1e-14)


class TestMixedStateFidelity:
    def test_self_fidelity_is_one(self):
        rho = random_density()
        assert mixed_state_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)
        pure, _ = random_pure_density()
        assert mixed_state_fidelity(pure, pure) == pytest.approx(1.0, abs=1e-10)

    def test_pure_against_maximally_mixed(self):
        pure, _ = random_pure_density()
        mixed = DensityMatrix(np.eye(6, dtype=complex) / 6.0)
        assert mixed_state_fidelity(pure, mixed) == pytest.approx(1 / 6, abs=1e-12)

    def test_general_formula_matches_expectation_on_pure_input(self):
        # Oracle: for pure rho the Uhlmann expression must collapse to
        # <w|sigma|w>.  The general route takes square roots of near-zero
        # eigenvalues, which turns 1e-16 rounding noise into ~1e-7 error --
        # exactly why the purity fast path exists and stays at 1e-10.
        for _ in range(10):
            pure, vec = random_pure_density()
            sigma = random_density()
            general = _uhlmann_fidelity_general(pure.entries, sigma.entries)
            direct = float(np.real(vec.conj() @ sigma.entries @ vec))
            assert general == pytest.approx(direct, abs=1e-6)
            assert mixed_state_fidelity(pure, sigma) == pytest.approx(direct, abs=1e-10)

    def test_symmetric(self):
        # rank-deficient inputs bound the achievable symmetry to ~sqrt(eps)
        for _ in range(5):
            a = random_density(rank=3)
            b = random_density(rank=4)
            assert mixed_state_fidelity(a, b) == pytest.approx(
                mixed_state_fidelity(b, a), abs=1e-6
            )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mixed_state_fidelity(
                DensityMatrix(np.eye(2, dtype=complex) / 2),
                DensityMatrix(np.eye(3, dtype=complex) / 3),
            )


class TestFidelityCurve:
    def test_accepts_valid(self):
        c = FidelityCurve(
            times=np.array([0.0, 1.0, 2.0]),
            values=np.array([0.0, 0.5, 1.0]),
            params=RouterParams(4, 1.0, 0.0),
        )
        assert c.times.size == 3

    def test_rejects_out_of_range_values(self):
        with pytest.raises(ValueError):
            FidelityCurve(
                times=np.array([0.0, 1.0]),
                values=np.array([0.0, 1.5]),
                params=RouterParams(4, 1.0, 0.0),
            )

    def test_rejects_unsorted_times(self):
        with pytest.raises(ValueError):
            FidelityCurve(
                times=np.array([1.0, 0.0]),
                values=np.array([0.0, 0.5]),
                params=RouterParams(4, 1.0, 0.0),
            )


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=60),
    phi=st.floats(min_value=0.0, max_value=TWO_PI - 1e-9),
    t=st.floats(min_value=0.0, max_value=40.0),
)
def test_direction_phase_symmetry(n, phi, t):
    """Forward transfer at phi equals backward transfer at -phi."""
    forward = transition_probability(RouterParams(n, 1.0, phi), t, 1, 4)
    backward = transition_probability(RouterParams(n, 1.0, -phi), t, 4, 1)
    assert forward == pytest.approx(backward, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=60),
    beta=st.floats(min_value=-2.0, max_value=2.0),
    phi=st.floats(min_value=0.0, max_value=TWO_PI - 1e-9),
    t=st.floats(min_value=0.0, max_value=40.0),
)
def test_probability_bound(n, beta, phi, t):
    p = RouterParams(n, beta, phi)
    p14 = transition_probability(p, t, 1, 4)
    p16 = transition_probability(p, t, 1, 6)
    assert p14 + p16 <= 1.0 + 1e-10


def test_reduced_model_saturates_in_n():
    t, phi = 40.068, 4.716
    a = min_fidelity(RouterParams(10**3, 1.0, phi), t)
    b = min_fidelity(RouterParams(10**4, 1.0, phi), t)
    assert abs(a - b) < 0.01
