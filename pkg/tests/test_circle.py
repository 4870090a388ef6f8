"""Circle densities and the r-adic transfer operator."""

import math

import numpy as np
import pytest

from qmix.circle import (
    TWO_PI,
    CircleDensity,
    density_from_csv,
    density_from_json,
    density_to_csv,
    density_to_json,
    entropy,
    fourier_check,
    fourier_coefficient,
    l1_distance,
    lambda_classical,
    linear_ramp_density,
    pf_apply,
    relative_entropy,
    sawtooth_density,
    trig_density,
)


def random_affine_density(rng, pieces=6, grid_size=1024):
    """Strictly positive piecewise-affine density with unit mass."""
    breaks = np.sort(rng.uniform(0.3, TWO_PI - 0.3, size=pieces - 1))
    edges = np.concatenate([[0.0], breaks, [TWO_PI]])
    spec = []
    mass = 0.0
    for u, v in zip(edges[:-1], edges[1:]):
        lo, hi = rng.uniform(0.2, 2.0, size=2)
        s = (hi - lo) / (v - u)
        c = lo - s * u
        spec.append((u, v, c, s))
        mass += (c * (v - u) + 0.5 * s * (v * v - u * u)) / TWO_PI
    rescaled = [(u, v, c / mass, s / mass) for (u, v, c, s) in spec]
    return CircleDensity.from_pieces(rescaled, grid_size)


class TestRepresentation:
    def test_uniform_density(self):
        one = CircleDensity.uniform()
        assert one.mass() == pytest.approx(1.0, abs=1e-15)
        np.testing.assert_allclose(one.grid, 1.0, atol=1e-15)

    def test_pieces_must_tile_the_circle(self):
        with pytest.raises(ValueError, match="tile"):
            CircleDensity.from_pieces([(0.0, 3.0, 1.0, 0.0)])

    def test_negative_density_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            CircleDensity.from_grid(np.full(64, -1.0))

    def test_unnormalized_density_rejected(self):
        with pytest.raises(ValueError, match="mass"):
            CircleDensity.from_grid(np.full(64, 2.0))

    def test_evaluate_matches_grid_sampling(self):
        f = sawtooth_density(2)
        xs = np.array([0.1, 1.0, 4.0, 6.0])
        np.testing.assert_allclose(f.evaluate(xs), 0.5 + xs / (2 * math.pi), atol=1e-12)


class TestTransferOperator:
    def test_uniform_is_fixed_in_both_modes(self):
        one = CircleDensity.uniform()
        out = pf_apply(one, 2)
        np.testing.assert_allclose(out.grid, 1.0, atol=1e-12)
        grid_one = CircleDensity.from_grid(np.ones(512))
        np.testing.assert_allclose(pf_apply(grid_one, 2).grid, 1.0, atol=1e-12)

    def test_ramp_iterates_have_the_known_closed_form(self):
        # P^n ramp = x / (pi r^n) + (r^n - 1) / r^n, exactly
        f = linear_ramp_density()
        for n in (1, 2, 3):
            f = pf_apply(f, 2)
        assert len(f.coefs) == 1
        c, s = f.coefs[0]
        assert c == pytest.approx(7.0 / 8.0, rel=1e-14)
        assert s == pytest.approx(1.0 / (8.0 * math.pi), rel=1e-14)

    def test_ramp_distance_to_uniform_halves_each_step(self):
        f = linear_ramp_density()
        one = CircleDensity.uniform()
        for n in range(1, 6):
            f = pf_apply(f, 2)
            assert l1_distance(f, one) == pytest.approx(1.0 / (2.0 * 2.0 ** n), rel=1e-13)

    def test_half_indicator_mixes_in_one_step(self):
        f = CircleDensity.from_pieces([(0.0, math.pi, 2.0, 0.0),
                                       (math.pi, TWO_PI, 0.0, 0.0)])
        out = pf_apply(f, 2)
        assert l1_distance(out, CircleDensity.uniform()) <= 1e-14

    def test_mass_conserved_for_random_densities(self):
        rng = np.random.default_rng(19)
        for _ in range(10):
            f = random_affine_density(rng)
            assert pf_apply(f, 2).mass() == pytest.approx(1.0, abs=1e-12)
            assert pf_apply(f, 3).mass() == pytest.approx(1.0, abs=1e-12)
        g = trig_density([0.3, -0.2], [0.1])
        assert pf_apply(g, 2).mass() == pytest.approx(1.0, abs=1e-12)

    def test_grid_mode_requires_divisible_size(self):
        g = CircleDensity.from_grid(np.ones(1000))
        with pytest.raises(ValueError, match="divisible"):
            pf_apply(g, 3)

    def test_r_validation(self):
        with pytest.raises(ValueError):
            pf_apply(CircleDensity.uniform(), 1)

    def test_contraction_at_least_geometric_on_probes(self):
        one = CircleDensity.uniform()
        for r in (2, 3):
            for probe in (sawtooth_density(1), sawtooth_density(3)):
                prev = l1_distance(probe, one)
                f = probe
                for _ in range(6):
                    f = pf_apply(f, r)
                    curr = l1_distance(f, one)
                    assert curr <= prev / r + 1e-12
                    prev = curr


class TestDistancesAndEntropy:
    def test_distance_to_self_is_zero(self):
        f = sawtooth_density(2)
        assert l1_distance(f, f) == 0.0

    def test_ramp_distance_to_uniform(self):
        assert l1_distance(linear_ramp_density(),
                           CircleDensity.uniform()) == pytest.approx(0.5, rel=1e-14)

    def test_sawtooth_family_approaches_uniform(self):
        one = CircleDensity.uniform()
        distances = [l1_distance(sawtooth_density(k), one) for k in range(1, 6)]
        assert all(a > b for a, b in zip(distances, distances[1:]))
        # exact value ||f_k - 1||_1 = 1 / (2 k)
        np.testing.assert_allclose(distances, [0.5 / k for k in range(1, 6)], rtol=1e-13)

    def test_entropy_values(self):
        assert entropy(CircleDensity.uniform()) == pytest.approx(0.0, abs=1e-15)
        half = CircleDensity.from_pieces([(0.0, math.pi, 2.0, 0.0),
                                          (math.pi, TWO_PI, 0.0, 0.0)])
        assert entropy(half) == pytest.approx(-math.log(2.0), rel=1e-13)

    def test_entropy_of_ramp_iterates_rises_to_zero(self):
        f = linear_ramp_density()
        values = [entropy(f)]
        for _ in range(8):
            f = pf_apply(f, 2)
            values.append(entropy(f))
        assert all(b >= a - 1e-13 for a, b in zip(values, values[1:]))
        assert values[0] < -0.1
        assert abs(values[-1]) < 1e-4

    def test_relative_entropy_against_uniform_is_minus_entropy(self):
        rng = np.random.default_rng(23)
        one = CircleDensity.uniform()
        for _ in range(5):
            f = random_affine_density(rng)
            assert relative_entropy(f, one) == pytest.approx(-entropy(f), abs=1e-10)

    def test_relative_entropy_monotone_under_push_forward(self):
        rng = np.random.default_rng(29)
        for _ in range(5):
            f = random_affine_density(rng)
            g = random_affine_density(rng)
            h_before = relative_entropy(f, g)
            h_after = relative_entropy(pf_apply(f, 2), pf_apply(g, 2))
            assert h_after <= h_before + 1e-9

    def test_entropy_convergence_forces_distance_convergence(self):
        # along the push-forward iterates, ||f - g||_1 <= sqrt(2 H(f|g)),
        # so vanishing relative entropy drags the L1 distance to zero
        rng = np.random.default_rng(57)
        for _ in range(3):
            f = random_affine_density(rng)
            g = random_affine_density(rng)
            for n in range(8):
                h = relative_entropy(f, g)
                d = l1_distance(f, g)
                assert d <= math.sqrt(2.0 * h) + 1e-9
                f, g = pf_apply(f, 2), pf_apply(g, 2)
            assert relative_entropy(f, g) < 1e-3
            assert l1_distance(f, g) < 0.05

    def test_support_violation_flags_infinity(self):
        f = CircleDensity.from_pieces([(0.0, math.pi, 2.0, 0.0),
                                       (math.pi, TWO_PI, 0.0, 0.0)])
        g = CircleDensity.from_pieces([(0.0, math.pi, 0.0, 0.0),
                                       (math.pi, TWO_PI, 2.0, 0.0)])
        assert math.isinf(relative_entropy(f, g))
        assert relative_entropy(f, f) == pytest.approx(0.0, abs=1e-12)


class TestClassicalExponent:
    def test_doubling_map_exponent_is_log_two(self):
        probes = [sawtooth_density(k) for k in range(1, 6)]
        est = lambda_classical(CircleDensity.uniform(), probes, 2)
        assert est.exponent == pytest.approx(math.log(2.0), rel=0.02)

    def test_tripling_map_exponent_is_log_three(self):
        probes = [sawtooth_density(k) for k in range(1, 6)]
        est = lambda_classical(CircleDensity.uniform(), probes, 3, n_max=10)
        assert est.exponent == pytest.approx(math.log(3.0), rel=0.02)

    def test_probe_equal_to_reference_rejected(self):
        with pytest.raises(ValueError, match="equals the reference"):
            lambda_classical(CircleDensity.uniform(), [CircleDensity.uniform()], 2)

    def test_probe_collapsing_to_uniform_is_excluded_with_note(self):
        half = CircleDensity.from_pieces([(0.0, math.pi, 2.0, 0.0),
                                          (math.pi, TWO_PI, 0.0, 0.0)])
        probes = [half, sawtooth_density(1)]
        est = lambda_classical(CircleDensity.uniform(), probes, 2)
        assert math.isnan(est.per_probe_slopes[0])
        assert any("excluded" in n for n in est.notes)
        assert est.exponent == pytest.approx(math.log(2.0), rel=0.02)


class TestDensityInterchange:
    def test_csv_round_trip(self):
        f = trig_density([0.3], [0.2])
        again = density_from_csv(density_to_csv(f))
        np.testing.assert_allclose(again.grid, f.grid, atol=0)

    def test_csv_rejects_nonuniform_grid(self):
        with pytest.raises(ValueError, match="uniform grid"):
            density_from_csv("0.0,1.0\n0.5,1.0\n0.7,1.0\n" + "1.0,1.0\n" * 5)

    def test_json_round_trip_keeps_pieces_exact(self):
        f = sawtooth_density(3)
        again = density_from_json(density_to_json(f))
        assert again.has_pieces
        np.testing.assert_array_equal(again.coefs, f.coefs)
        g = trig_density([0.1])
        g2 = density_from_json(density_to_json(g))
        assert not g2.has_pieces
        np.testing.assert_array_equal(g2.grid, g.grid)

    def test_json_payload_validated(self):
        with pytest.raises(ValueError, match="pieces"):
            density_from_json({"nonsense": 1})


class TestFourier:
    def test_uniform_coefficients_vanish(self):
        one = CircleDensity.uniform()
        for k in (1, 2, 5):
            assert abs(fourier_coefficient(one, k)) <= 1e-14
        lhs, rhs = fourier_check(one, 2, 1, 2)
        assert abs(lhs) <= 1e-13 and abs(rhs) <= 1e-13

    def test_plain_cosine_checks_out(self):
        f = trig_density([1.0])  # 1 + cos x
        lhs, rhs = fourier_check(f, 2, 1, 1)
        assert lhs == pytest.approx(rhs, abs=1e-13)
        assert abs(rhs - fourier_coefficient(f, 2)) == 0.0

    def test_second_harmonic_payload(self):
        f = trig_density([0.0, 0.5])  # 1 + 0.5 cos 2x, so f^(2) = 0.25
        lhs, rhs = fourier_check(f, 2, 1, 1)
        assert rhs == pytest.approx(0.25, abs=1e-13)
        assert lhs == pytest.approx(0.25, abs=1e-12)

    def test_random_trig_probes_to_ten_decimals(self):
        rng = np.random.default_rng(31)
        for _ in range(5):
            probe = trig_density((0.08 * rng.normal(size=5)).tolist(),
                                 (0.08 * rng.normal(size=3)).tolist())
            for (k, n) in ((1, 1), (1, 2), (2, 2), (3, 1)):
                lhs, rhs = fourier_check(probe, 2, k, n)
                assert abs(lhs - rhs) <= 1e-10

    def test_alias_limit_enforced(self):
        f = trig_density([0.5], grid_size=64)
        with pytest.raises(ValueError, match="alias"):
            fourier_check(f, 2, 1, 6)
        with pytest.raises(ValueError, match="alias"):
            fourier_coefficient(f, 40)

    def test_l2_bound_on_the_l1_decay(self):
        # || P^n f - 1 ||_1 <= sqrt(2 sum_k |f^(k r^n)|^2) for smooth probes
        one = CircleDensity.uniform()
        probe = trig_density([0.4, 0.2, 0.1], [0.15, 0.05], grid_size=4096)
        r = 2
        f = probe
        for n in (1, 2, 3):
            f = pf_apply(f, r)
            lhs = l1_distance(f, one)
            tail = 0.0
            k = 1
            while k * r ** n < 2048:
                tail += abs(fourier_coefficient(probe, k * r ** n)) ** 2
                k += 1
            assert lhs <= math.sqrt(2.0 * tail) + 1e-12
