"""Characteristic-exponent estimation and mixing classification."""

import math

import numpy as np
import pytest

from qmix.exponent import (
    classify_mixing,
    default_horizon,
    default_probe_set,
    lambda_q_analytic,
    lambda_q_numeric,
)
from qmix.lindblad import (
    Fluorescence,
    LindbladModel,
    SigmaXConjugation,
    Tetrahedron,
    Zeno,
    build_model,
    stationary_state,
)
from qmix.states import from_bloch, random_density, to_bloch


class TestAnalyticValues:
    def test_tetrahedron(self):
        assert lambda_q_analytic(Tetrahedron(kappa=1.0, alpha=0.5)) == pytest.approx(1.0 / 3.0)
        assert lambda_q_analytic(Tetrahedron(kappa=2.0, alpha=0.8)) == pytest.approx(
            (4.0 / 3.0) * 2.0 * 0.64)

    def test_zeno_branches(self):
        assert lambda_q_analytic(Zeno(kappa=4.0, omega=1.0)) == pytest.approx(1.0)
        assert lambda_q_analytic(Zeno(kappa=8.0, omega=1.0)) == pytest.approx(
            1.0 / (2.0 + math.sqrt(3.0)))
        # continuity at the branch point
        below = lambda_q_analytic(Zeno(kappa=4.0 - 1e-9, omega=1.0))
        above = lambda_q_analytic(Zeno(kappa=4.0 + 1e-9, omega=1.0))
        assert below == pytest.approx(above, abs=1e-4)

    def test_fluorescence(self):
        assert lambda_q_analytic(Fluorescence(rabi=3.0, gamma=0.5)) == pytest.approx(0.25)

    def test_sigma_x_rejected(self):
        with pytest.raises(ValueError, match="not completely mixing"):
            lambda_q_analytic(SigmaXConjugation())


class TestProbeSet:
    def test_contains_axis_states_and_is_seeded(self):
        ref = from_bloch([0, 0, 0])
        probes = default_probe_set(ref)
        assert len(probes) == 18
        blochs = np.array([to_bloch(p) for p in probes])
        for axis in np.vstack([np.eye(3), -np.eye(3)]):
            assert np.min(np.linalg.norm(blochs - axis, axis=1)) < 1e-12
        again = default_probe_set(ref)
        np.testing.assert_array_equal(blochs, [to_bloch(p) for p in again])

    def test_reference_coincidence_dropped(self):
        ref = from_bloch([1, 0, 0])
        probes = default_probe_set(ref)
        assert len(probes) == 17
        for p in probes:
            assert np.linalg.norm(to_bloch(p) - [1, 0, 0]) >= 1e-6


class TestNumericEstimates:
    def test_tetrahedron_within_one_percent(self):
        preset = Tetrahedron(kappa=1.0, alpha=1.0, omega=0.0)
        model = build_model(preset)
        ref = stationary_state(model)
        est = lambda_q_numeric(model, ref, default_probe_set(ref),
                               t_max=default_horizon(model))
        assert est.completely_mixing
        assert est.exponent == pytest.approx(4.0 / 3.0, rel=0.01)

    def test_tetrahedron_slopes_agree_across_probes(self):
        preset = Tetrahedron(kappa=1.0, alpha=0.7, omega=1.0)
        model = build_model(preset)
        ref = stationary_state(model)
        est = lambda_q_numeric(model, ref, default_probe_set(ref),
                               t_max=default_horizon(model))
        slopes = np.array(est.per_probe_slopes)
        assert np.nanmax(slopes) / np.nanmin(slopes) <= 1.01

    def test_fluorescence_within_one_percent(self):
        preset = Fluorescence(rabi=2.0, gamma=1.0)
        model = build_model(preset)
        ref = stationary_state(model)
        est = lambda_q_numeric(model, ref, default_probe_set(ref), t_max=40.0)
        assert est.exponent == pytest.approx(0.5, rel=0.01)

    def test_sigma_x_reports_not_mixing(self):
        model = build_model(SigmaXConjugation())
        ref = from_bloch([0.0, 0.0, 0.0])
        est = lambda_q_numeric(model, ref, default_probe_set(ref), t_max=20.0)
        assert not est.completely_mixing
        assert math.isnan(est.exponent)
        assert any("not completely mixing at this horizon" in n for n in est.notes)

    def test_reference_state_does_not_matter_when_stationary_exists(self):
        preset = Zeno(kappa=2.0, omega=1.0)
        model = build_model(preset)
        horizon = default_horizon(model)
        ref0 = stationary_state(model)
        est0 = lambda_q_numeric(model, ref0, default_probe_set(ref0), horizon)
        rng = np.random.default_rng(43)
        ref1 = random_density(rng)
        est1 = lambda_q_numeric(model, ref1, default_probe_set(ref1), horizon)
        assert est0.exponent == pytest.approx(est1.exponent, rel=0.02)

    def test_integrator_route_without_preset(self):
        source = build_model(Tetrahedron(kappa=1.0, alpha=1.0, omega=0.0))
        bare = LindbladModel(source.hamiltonian, source.jump_terms)  # no preset attached
        ref = from_bloch([0.0, 0.0, 0.0])
        probes = [from_bloch(v) for v in ([1, 0, 0], [0, 1, 0], [0, 0, 1], [0.4, -0.3, 0.2])]
        est = lambda_q_numeric(bare, ref, probes, t_max=15.0, n_samples=61)
        assert est.exponent == pytest.approx(4.0 / 3.0, rel=0.01)

    def test_probe_equal_to_reference_rejected(self):
        model = build_model(Zeno(kappa=1.0, omega=1.0))
        ref = from_bloch([0.2, 0.0, 0.0])
        with pytest.raises(ValueError, match="coincides"):
            lambda_q_numeric(model, ref, [from_bloch([0.2, 0.0, 0.0])], t_max=20.0)


class TestZenoCurve:
    def test_exponent_peaks_at_critical_coupling(self):
        omega = 1.0
        values = {}
        for kappa in (1.0, 2.0, 4.0, 8.0, 16.0):
            preset = Zeno(kappa=kappa, omega=omega)
            model = build_model(preset)
            expected = lambda_q_analytic(preset)
            ref = stationary_state(model)
            est = lambda_q_numeric(model, ref, default_probe_set(ref),
                                   t_max=120.0 / expected)
            assert est.exponent == pytest.approx(expected, rel=0.02)
            values[kappa] = est.exponent
        assert values[1.0] < values[2.0] < values[4.0]
        assert values[4.0] > values[8.0] > values[16.0]
        assert values[4.0] == pytest.approx(omega, rel=0.02)


class TestClassification:
    def test_tetrahedron_mixing_and_exact(self):
        model = build_model(Tetrahedron(kappa=1.0, alpha=0.8, omega=0.3))
        report = classify_mixing(model, default_probe_set(from_bloch([0, 0, 0])),
                                 t_max=default_horizon(model))
        assert report.completely_mixing and report.exact

    def test_sigma_x_not_mixing(self):
        model = build_model(SigmaXConjugation())
        report = classify_mixing(model, default_probe_set(from_bloch([0, 0, 0])), t_max=20.0)
        assert not report.completely_mixing and not report.exact

    def test_fluorescence_mixing_not_exact(self):
        model = build_model(Fluorescence(rabi=1.0, gamma=1.0))
        report = classify_mixing(model, default_probe_set(from_bloch([0, 0, 0])), t_max=40.0)
        assert report.completely_mixing and not report.exact
