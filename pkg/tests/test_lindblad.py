"""Master-equation presets, integrator, closed forms, stationary states."""

import math

import numpy as np
import pytest

from qmix.lindblad import (
    TETRA_DIRECTIONS,
    Fluorescence,
    LindbladModel,
    NonUniqueStationaryError,
    SigmaXConjugation,
    Tetrahedron,
    Zeno,
    _positivity_guard,
    analytic_evolve,
    bloch_generator,
    build_model,
    default_timestep,
    evolve,
    generator_apply,
    stationary_state,
)
from qmix.states import (
    IDENTITY2,
    SIGMA1,
    SIGMA3,
    from_bloch,
    pure_state,
    random_density,
    relative_entropy,
    to_bloch,
    trace_norm,
)

ALL_PRESETS = [
    Tetrahedron(kappa=1.0, alpha=0.8, omega=1.0),
    Zeno(kappa=2.0, omega=1.0),
    Fluorescence(rabi=1.5, gamma=1.0),
    SigmaXConjugation(),
]


class TestTetrahedronGeometry:
    def test_printed_directions(self):
        np.testing.assert_allclose(TETRA_DIRECTIONS[0], [1.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(
            TETRA_DIRECTIONS[1], [-1.0 / 3.0, 0.0, 2.0 * math.sqrt(2.0) / 3.0], atol=1e-15)

    def test_directions_sum_to_zero_and_are_unit(self):
        np.testing.assert_allclose(TETRA_DIRECTIONS.sum(axis=0), np.zeros(3), atol=1e-15)
        np.testing.assert_allclose(np.linalg.norm(TETRA_DIRECTIONS, axis=1),
                                   np.ones(4), atol=1e-15)

    def test_sharp_couplings_are_projectors(self):
        model = build_model(Tetrahedron(kappa=1.0, alpha=1.0))
        for op, rate in model.jump_terms:
            assert rate == 1.0
            np.testing.assert_allclose(op @ op, op, atol=1e-14)

    def test_soft_couplings_not_projectors(self):
        model = build_model(Tetrahedron(kappa=1.0, alpha=0.5))
        op, _ = model.jump_terms[0]
        assert np.max(np.abs(op @ op - op)) > 0.1


class TestModelBuilding:
    def test_zeno_components(self):
        model = build_model(Zeno(kappa=3.0, omega=2.0))
        np.testing.assert_allclose(model.hamiltonian, SIGMA3, atol=1e-15)
        op, rate = model.jump_terms[0]
        np.testing.assert_allclose(op, 0.5 * (IDENTITY2 + SIGMA1), atol=1e-15)
        np.testing.assert_allclose(op @ op, op, atol=1e-15)
        assert rate == 3.0

    def test_fluorescence_components(self):
        model = build_model(Fluorescence(rabi=2.0, gamma=0.5))
        np.testing.assert_allclose(model.hamiltonian, -SIGMA1, atol=1e-15)
        op, rate = model.jump_terms[0]
        np.testing.assert_allclose(op, [[0, 0], [1, 0]], atol=1e-15)
        assert rate == 0.5

    def test_parameter_ranges(self):
        with pytest.raises(ValueError):
            build_model(Tetrahedron(kappa=1.0, alpha=1.5))
        with pytest.raises(ValueError):
            build_model(Tetrahedron(kappa=-1.0, alpha=0.5))
        with pytest.raises(ValueError):
            build_model(Fluorescence(rabi=1.0, gamma=-0.1))
        with pytest.raises(ValueError):
            LindbladModel(SIGMA1, [(SIGMA1, -1.0)])


class TestGenerator:
    def test_tetrahedron_fixes_center(self):
        model = build_model(Tetrahedron(kappa=2.0, alpha=0.7, omega=1.3))
        out = generator_apply(model, 0.5 * IDENTITY2)
        assert np.max(np.abs(out)) < 1e-14

    def test_sigma_x_conjugation_fixes_x_axis(self):
        model = build_model(SigmaXConjugation())
        rho = from_bloch([0.6, 0.0, 0.0])
        assert np.max(np.abs(generator_apply(model, rho))) < 1e-14

    def test_closed_system_limit_is_commutator(self):
        model = build_model(Zeno(kappa=0.0, omega=2.0))
        rho = from_bloch([0.3, 0.2, -0.4])
        h = model.hamiltonian
        np.testing.assert_allclose(generator_apply(model, rho),
                                   -1j * (h @ rho - rho @ h), atol=1e-14)

    def test_output_traceless_hermitian(self):
        rng = np.random.default_rng(23)
        for preset in ALL_PRESETS:
            model = build_model(preset)
            for _ in range(20):
                out = generator_apply(model, random_density(rng))
                assert abs(np.trace(out)) < 1e-12
                assert np.max(np.abs(out - out.conj().T)) < 1e-12

    def test_bloch_generator_reproduces_generator(self):
        rng = np.random.default_rng(29)
        for preset in ALL_PRESETS:
            model = build_model(preset)
            m, b = bloch_generator(model)
            for _ in range(10):
                x = rng.normal(size=3)
                x = x / np.linalg.norm(x) * rng.random()
                lhs = to_bloch(generator_apply(model, from_bloch(x)))
                np.testing.assert_allclose(lhs, m @ x + b, atol=1e-12)


class TestEvolve:
    def test_decay_law_at_unit_time(self):
        model = build_model(Tetrahedron(kappa=1.0, alpha=1.0, omega=0.0))
        traj = evolve(model, pure_state([0.0, 0.0, 1.0]), 1.0)
        dist = trace_norm(traj.final() - 0.5 * IDENTITY2)
        assert dist == pytest.approx(math.exp(-4.0 / 3.0), abs=1e-8)

    def test_zero_horizon_returns_initial_state(self):
        model = build_model(Fluorescence(rabi=1.0, gamma=1.0))
        rho0 = from_bloch([0.1, 0.2, 0.3])
        traj = evolve(model, rho0, 0.0)
        assert len(traj.times) == 1
        np.testing.assert_allclose(traj.final(), rho0, atol=1e-15)

    def test_trace_and_hermiticity_preserved(self):
        rng = np.random.default_rng(31)
        for preset in ALL_PRESETS:
            model = build_model(preset)
            traj = evolve(model, random_density(rng), 2.0, dt=2e-3)
            for rho in traj.states[:: len(traj.states) // 10]:
                assert abs(np.trace(rho).real - 1.0) <= 1e-10
                assert np.max(np.abs(rho - rho.conj().T)) <= 1e-10

    def test_matches_closed_form_zeno(self):
        preset = Zeno(kappa=2.0, omega=1.0)
        model = build_model(preset)
        rho0 = pure_state([0.0, 1.0, 0.0])
        traj = evolve(model, rho0, 5.0)
        err = trace_norm(traj.final() - analytic_evolve(preset, rho0, 5.0))
        assert err <= 1e-8

    def test_matches_closed_form_all_presets(self):
        rng = np.random.default_rng(37)
        for preset in ALL_PRESETS:
            model = build_model(preset)
            rho0 = random_density(rng)
            traj = evolve(model, rho0, 1.5)
            for idx in range(0, len(traj.times), len(traj.times) // 8):
                ref = analytic_evolve(preset, rho0, traj.times[idx])
                assert trace_norm(traj.states[idx] - ref) <= 1e-8

    def test_invalid_inputs(self):
        model = build_model(SigmaXConjugation())
        with pytest.raises(ValueError):
            evolve(model, from_bloch([0, 0, 0]), -1.0)
        with pytest.raises(ValueError):
            evolve(model, from_bloch([0, 0, 0]), 1.0, dt=0.0)

    def test_default_timestep_scales_with_rates(self):
        fast = build_model(Zeno(kappa=500.0, omega=1.0))
        assert default_timestep(fast) == pytest.approx(0.01 / 500.0)
        slow = build_model(Zeno(kappa=0.1, omega=0.05))
        assert default_timestep(slow) == pytest.approx(1e-3)

    def test_positivity_guard_clamps_small_drift(self):
        drifted = np.diag([1.0 + 5e-10, -5e-10]).astype(complex)
        fixed = _positivity_guard(drifted, 0.0)
        lo = np.linalg.eigvalsh(fixed)[0]
        assert lo >= -1e-15
        assert np.trace(fixed).real == pytest.approx(1.0, abs=1e-12)

    def test_positivity_guard_aborts_large_drift(self):
        from qmix.lindblad import PositivityError
        with pytest.raises(PositivityError):
            _positivity_guard(np.diag([1.01, -0.01]).astype(complex), 0.0)


class TestAnalyticEvolve:
    def test_tetrahedron_z_decay(self):
        preset = Tetrahedron(kappa=1.0, alpha=1.0, omega=0.7)
        for t in (0.0, 0.5, 2.0):
            x = to_bloch(analytic_evolve(preset, pure_state([0, 0, 1]), t))
            np.testing.assert_allclose(x, [0, 0, math.exp(-4.0 * t / 3.0)], atol=1e-12)

    def test_sigma_x_conjugation_limit(self):
        preset = SigmaXConjugation()
        e1 = np.diag([1.0, 0.0]).astype(complex)
        rho = analytic_evolve(preset, e1, 40.0)
        assert trace_norm(rho - 0.5 * IDENTITY2) <= 1e-12

    def test_fluorescence_converges_to_stationary(self):
        preset = Fluorescence(rabi=1.0, gamma=1.0)
        rho_inf = analytic_evolve(preset, np.diag([0.0, 1.0]).astype(complex), 60.0)
        rho_stat = stationary_state(build_model(preset))
        assert trace_norm(rho_inf - rho_stat) <= 1e-8

    def test_unsupported_model_rejected(self):
        with pytest.raises(TypeError):
            analytic_evolve("nonsense", from_bloch([0, 0, 0]), 1.0)


class TestStationaryState:
    def test_tetrahedron_and_zeno_center(self):
        for preset in (Tetrahedron(kappa=2.0, alpha=0.6, omega=0.5),
                       Zeno(kappa=1.0, omega=2.0)):
            rho = stationary_state(build_model(preset))
            assert trace_norm(rho - 0.5 * IDENTITY2) <= 1e-12

    def test_fluorescence_kernel_matches_closed_form(self):
        # oracle: the numeric kernel solve; the closed form below reproduces it
        for rabi, gamma in ((1.0, 1.0), (2.0, 1.0), (0.5, 3.0)):
            model = build_model(Fluorescence(rabi=rabi, gamma=gamma))
            x = to_bloch(stationary_state(model))
            denom = 2.0 * rabi ** 2 + gamma ** 2
            np.testing.assert_allclose(
                x, [0.0, 2.0 * rabi * gamma / denom, gamma ** 2 / denom], atol=1e-12)
            assert trace_norm(generator_apply(model, stationary_state(model))) <= 1e-12

    def test_degenerate_kernel_reports_fixed_axis(self):
        with pytest.raises(NonUniqueStationaryError) as err:
            stationary_state(build_model(SigmaXConjugation()))
        flat = err.value.fixed_directions
        assert flat.shape == (1, 3)
        np.testing.assert_allclose(np.abs(flat[0]), [1.0, 0.0, 0.0], atol=1e-9)


class TestEntropyMonotonicity:
    def test_relative_entropy_never_increases(self):
        rng = np.random.default_rng(41)
        times = np.linspace(0.0, 4.0, 9)
        for preset in ALL_PRESETS:
            for _ in range(5):
                rho, sigma = random_density(rng), random_density(rng)
                values = [
                    relative_entropy(analytic_evolve(preset, rho, t),
                                     analytic_evolve(preset, sigma, t))
                    for t in times
                ]
                for early, late in zip(values, values[1:]):
                    assert late <= early + 1e-9

    def test_counterexample_entropy_limit(self):
        preset = SigmaXConjugation()
        for phi in (math.pi / 16, math.pi / 8, 3 * math.pi / 16):
            e1 = np.diag([1.0, 0.0]).astype(complex)
            e2 = np.array([
                [math.cos(phi) ** 2, math.sin(phi) * math.cos(phi)],
                [math.sin(phi) * math.cos(phi), math.sin(phi) ** 2]])
            h = relative_entropy(analytic_evolve(preset, e1, 20.0),
                                 analytic_evolve(preset, e2, 20.0))
            assert h == pytest.approx(-math.log(math.cos(2 * phi)), abs=1e-6)
