"""Characteristic exponent of dissipative qubit models.

The exponent of a completely mixing semigroup T_t is

    lambda_q(rho) = inf over sigma != rho of lim_t -(1/t) log || T_t rho - T_t sigma ||_1

Closed forms exist for the three mixing presets; the numeric estimator
fits trace-distance decay over a late time window for a finite probe
family and takes the minimum slope.  The probe family stands in for the
infimum domain and is a declared protocol, not a theorem: six Bloch-axis
pure states, ten seeded-random pure states and two seeded-random mixed
states.  Axis states expose anisotropic decay that random probes can
miss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fitting import ExponentEstimate, decay_slope
from .lindblad import (
    Fluorescence,
    LindbladModel,
    Preset,
    SigmaXConjugation,
    Tetrahedron,
    Zeno,
    analytic_bloch_paths,
    evolve,
)
from .states import (
    MAX_ENTROPY,
    check_density_matrix,
    from_bloch,
    relative_entropy,
    to_bloch,
    von_neumann_entropy,
)

DEFAULT_PROBE_SEED = 7
# Trace distances at or below the floor cannot enter a fit.  The closed-form
# routes compute state differences as products of exact exponentials, so they
# stay relatively accurate down to the denormal range; the RK4 route carries
# absolute integration error and gets the conservative floor.
FLOOR_ANALYTIC = 1e-290
FLOOR_INTEGRATOR = 1e-13

_AXES = np.array([
    [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0], [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0], [0.0, 0.0, -1.0],
])


def default_probe_set(rho_ref: np.ndarray, seed: int = DEFAULT_PROBE_SEED,
                      n_pure: int = 10, n_mixed: int = 2,
                      min_distance: float = 1e-6) -> list[np.ndarray]:
    """Probe states: Bloch axes plus seeded random pure and mixed states.

    Probes closer than ``min_distance`` (trace distance) to the reference
    are dropped so no probe coincides with it.
    """
    ref = to_bloch(check_density_matrix(rho_ref))
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    blochs = [a for a in _AXES]
    for _ in range(n_pure):
        v = rng.normal(size=3)
        blochs.append(v / np.linalg.norm(v))
    for _ in range(n_mixed):
        v = rng.normal(size=3)
        blochs.append(v / np.linalg.norm(v) * rng.random())
    return [from_bloch(b) for b in blochs if np.linalg.norm(b - ref) >= min_distance]


def lambda_q_analytic(preset: Preset) -> float:
    """Closed-form exponent for the three completely mixing presets.

    Tetrahedron: (4/3) kappa alpha^2.  Zeno with a = kappa/(4 omega):
    omega a on a <= 1, omega / (a + sqrt(a^2 - 1)) beyond.  Fluorescence:
    gamma / 2.  SigmaXConjugation is rejected: the x axis never decays, so
    the exponent is undefined.
    """
    if isinstance(preset, Tetrahedron):
        return (4.0 / 3.0) * preset.kappa * preset.alpha ** 2
    if isinstance(preset, Zeno):
        if preset.omega <= 0:
            raise ValueError("Zeno exponent requires omega > 0")
        a = preset.kappa / (4.0 * preset.omega)
        if a <= 1.0:
            return preset.omega * a
        return preset.omega / (a + math.sqrt(a * a - 1.0))
    if isinstance(preset, Fluorescence):
        return 0.5 * preset.gamma
    if isinstance(preset, SigmaXConjugation):
        raise ValueError("sigma1 conjugation is not completely mixing; exponent undefined")
    raise TypeError(f"unknown preset {preset!r}")


def default_horizon(model: LindbladModel, scale: float = 20.0) -> float:
    """Horizon ``scale`` / (slowest known rate), else over the largest jump rate.

    20 decay times suffice for the mixing classification.  Slope fits
    deserve more: a degenerate slow eigenvalue drags a polynomial-in-t
    prefactor into the distance, whose log biases the fitted slope by
    roughly 1/t, so :func:`default_fit_horizon` stretches to 120 decay
    times (about one percent bias in the worst case).
    """
    preset = model.preset
    if preset is not None and not isinstance(preset, SigmaXConjugation):
        try:
            rate = lambda_q_analytic(preset)
        except ValueError:
            rate = 0.0
        if rate > 0:
            return scale / rate
    top = max(model.rates(), default=0.0)
    return scale / top if top > 0 else scale


def default_fit_horizon(model: LindbladModel) -> float:
    return default_horizon(model, scale=120.0)


def _bloch_trajectories(model: LindbladModel, blochs: np.ndarray,
                        times: np.ndarray) -> tuple[np.ndarray, float]:
    """Trajectories for every probe plus the applicable distance floor."""
    if model.preset is not None:
        return analytic_bloch_paths(model.preset, blochs, times), FLOOR_ANALYTIC
    t_end = float(times[-1])
    out = np.empty((len(blochs), len(times), 3))
    # integrate on a grid that contains the sample times exactly
    n_sub = max(1, math.ceil((t_end / (len(times) - 1)) / 1e-3)) if len(times) > 1 else 1
    dt = t_end / ((len(times) - 1) * n_sub) if len(times) > 1 else None
    for i, b in enumerate(blochs):
        traj = evolve(model, from_bloch(b), t_end, dt=dt)
        idx = np.round(np.linspace(0, len(traj.times) - 1, len(times))).astype(int)
        out[i] = np.array([to_bloch(traj.states[j]) for j in idx])
    return out, FLOOR_INTEGRATOR


def lambda_q_numeric(model: LindbladModel, rho_ref: np.ndarray,
                     probes: list[np.ndarray], t_max: float,
                     n_samples: int = 161) -> ExponentEstimate:
    """Estimate the exponent from trace-distance decay against ``rho_ref``.

    For each probe the trace distance ||T_t rho_ref - T_t sigma||_1 (equal
    to the Euclidean norm of the Bloch difference) is sampled on a uniform
    grid, and -log distance is fitted against t over [t_max/2, t_max].
    The estimate is the minimum per-probe slope: a lower-bound protocol
    for the infimum over all states.

    A probe whose distance has not contracted below 1e-2 by the horizon
    marks the system "not completely mixing at this horizon"; the overall
    exponent is then nan.  Distances that underflow the route-dependent
    floor shrink their probe's window, with a note.
    """
    ref_b = to_bloch(check_density_matrix(rho_ref))
    if not probes:
        raise ValueError("need at least one probe")
    probe_b = np.array([to_bloch(check_density_matrix(p)) for p in probes])
    for i, b in enumerate(probe_b):
        if np.linalg.norm(b - ref_b) < 1e-6:
            raise ValueError(f"probe {i} coincides with the reference state")
    times = np.linspace(0.0, t_max, n_samples)
    all_states = np.concatenate([ref_b[None, :], probe_b], axis=0)
    paths, floor = _bloch_trajectories(model, all_states, times)
    ref_path = paths[0]
    slopes: list[float] = []
    notes: list[str] = []
    residuals: list[float] = []
    non_mixing = []
    for i in range(len(probes)):
        dists = np.linalg.norm(paths[i + 1] - ref_path, axis=1)
        if dists[-1] > 1e-2:
            non_mixing.append(i)
            slopes.append(float("nan"))
            continue
        slope, rms, note = decay_slope(times, dists, 0.5 * t_max, t_max, floor)
        slopes.append(slope)
        residuals.append(rms)
        if note:
            notes.append(f"probe {i}: {note}")
    mixing = not non_mixing
    if not mixing:
        notes.append(
            "not completely mixing at this horizon: probe(s) "
            f"{non_mixing} kept trace distance above 1e-2 at t={t_max:g}")
    finite = [s for s in slopes if not math.isnan(s)]
    return ExponentEstimate(
        exponent=min(finite) if (mixing and finite) else float("nan"),
        fit_window=(0.5 * t_max, t_max),
        per_probe_slopes=slopes,
        max_residual=max(residuals) if residuals else float("nan"),
        completely_mixing=mixing,
        notes=notes,
    )


@dataclass
class MixingReport:
    completely_mixing: bool
    exact: bool


def classify_mixing(model: LindbladModel, probes: list[np.ndarray],
                    t_max: float, tol: float = 1e-4) -> MixingReport:
    """Empirical mixing/exactness classification at horizon ``t_max``.

    Completely mixing: every ordered pair of evolved probes has relative
    entropy below ``tol`` at the horizon.  Exact: additionally every
    evolved probe has von Neumann entropy within ``tol`` of log 2.
    """
    blochs = np.array([to_bloch(check_density_matrix(p)) for p in probes])
    paths, _ = _bloch_trajectories(model, blochs, np.array([0.0, t_max]))
    finals = [from_bloch(paths[i, -1]) for i in range(len(probes))]
    worst = 0.0
    for i, rho in enumerate(finals):
        for j, sig in enumerate(finals):
            if i == j:
                continue
            worst = max(worst, relative_entropy(rho, sig))
            if worst >= tol:
                return MixingReport(False, False)
    exact = all(abs(von_neumann_entropy(r) - MAX_ENTROPY) < tol for r in finals)
    return MixingReport(True, exact)
