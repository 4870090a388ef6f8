"""Master-equation engine for dissipative qubit models.

A model is a Hamiltonian plus weighted jump operators generating

    d rho / dt = -i [H, rho] + sum_k  r_k (A_k rho A_k^+ - {A_k^+ A_k, rho} / 2)

Four named presets cover the measurement setups analysed by the rest of
the package:

* ``Tetrahedron`` -- four spin polarizers along the vertices of a regular
  tetrahedron, coupling operators (I + alpha n_i . sigma)/2 at rate kappa
  each, Hamiltonian (omega/2) sigma3.
* ``Zeno`` -- a single yes/no polarizer e = (I + sigma1)/2 at rate kappa,
  Hamiltonian (omega/2) sigma3.
* ``Fluorescence`` -- driven two-level emitter: H = -(rabi/2) sigma1 and
  lowering operator [[0, 0], [1, 0]] at rate gamma.
* ``SigmaXConjugation`` -- d rho/dt = sigma1 rho sigma1 - rho, the stock
  example of a dissipative semigroup that is not completely mixing.

Everything is expressed against the Pauli constants in :mod:`qmix.states`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.linalg import expm

from .states import (
    ATOL_STRUCT,
    IDENTITY2,
    PAULIS,
    SIGMA1,
    SIGMA3,
    check_density_matrix,
    from_bloch,
    hermitian_eigenvalues,
    to_bloch,
    trace_norm,
)

logger = logging.getLogger(__name__)

# Unit vectors to the vertices of a regular tetrahedron, first one along +x.
TETRA_DIRECTIONS = np.array([
    [1.0, 0.0, 0.0],
    [-1.0 / 3.0, 0.0, 2.0 * math.sqrt(2.0) / 3.0],
    [-1.0 / 3.0, math.sqrt(2.0 / 3.0), -math.sqrt(2.0) / 3.0],
    [-1.0 / 3.0, -math.sqrt(2.0 / 3.0), -math.sqrt(2.0) / 3.0],
])


@dataclass(frozen=True)
class Tetrahedron:
    """Simultaneous four-direction spin measurement."""
    kappa: float
    alpha: float
    omega: float = 0.0


@dataclass(frozen=True)
class Zeno:
    """Repeated yes/no check of one spin component under precession."""
    kappa: float
    omega: float


@dataclass(frozen=True)
class Fluorescence:
    """Two-level emitter driven at Rabi frequency ``rabi``, decay ``gamma``."""
    rabi: float
    gamma: float


@dataclass(frozen=True)
class SigmaXConjugation:
    """Pure sigma1-conjugation dephasing; the x axis is frozen."""


Preset = Union[Tetrahedron, Zeno, Fluorescence, SigmaXConjugation]


class PositivityError(RuntimeError):
    """Integrator produced a state with an eigenvalue below -1e-6."""


class NonUniqueStationaryError(ValueError):
    """The generator kernel is degenerate; carries the fixed subspace."""

    def __init__(self, message: str, fixed_directions: np.ndarray):
        super().__init__(message)
        self.fixed_directions = fixed_directions


class LindbladModel:
    """Immutable Hamiltonian + jump-term bundle.

    ``jump_terms`` is an ordered tuple of (operator, rate) pairs with
    rate >= 0.  Instances built from a preset remember it so closed-form
    solutions stay available downstream.
    """

    def __init__(self, hamiltonian: np.ndarray, jump_terms, preset: Optional[Preset] = None):
        h = np.array(hamiltonian, dtype=complex)
        if h.shape != (2, 2):
            raise ValueError("hamiltonian must be 2x2")
        if np.max(np.abs(h - h.conj().T)) > 1e-10:
            raise ValueError("hamiltonian must be hermitian")
        terms = []
        grams = []
        for op, rate in jump_terms:
            op = np.array(op, dtype=complex)
            if op.shape != (2, 2):
                raise ValueError("jump operators must be 2x2")
            if rate < 0:
                raise ValueError("jump rates must be nonnegative")
            op.setflags(write=False)
            terms.append((op, float(rate)))
            grams.append(op.conj().T @ op)
        h.setflags(write=False)
        self._h = h
        self._terms = tuple(terms)
        self._grams = tuple(grams)  # op^+ op, reused every generator call
        self.preset = preset

    @property
    def hamiltonian(self) -> np.ndarray:
        return self._h

    @property
    def jump_terms(self):
        return self._terms

    def rates(self):
        return tuple(rate for _, rate in self._terms)


def build_model(preset: Preset) -> LindbladModel:
    """Construct the LindbladModel for a named preset."""
    if isinstance(preset, Tetrahedron):
        if preset.kappa < 0 or preset.omega < 0:
            raise ValueError("kappa and omega must be nonnegative")
        if not 0.0 <= preset.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        h = 0.5 * preset.omega * SIGMA3
        ops = []
        for n in TETRA_DIRECTIONS:
            a_i = 0.5 * (IDENTITY2 + preset.alpha * (n[0] * PAULIS[0] + n[1] * PAULIS[1] + n[2] * PAULIS[2]))
            ops.append((a_i, preset.kappa))
        return LindbladModel(h, ops, preset)
    if isinstance(preset, Zeno):
        if preset.kappa < 0 or preset.omega < 0:
            raise ValueError("kappa and omega must be nonnegative")
        h = 0.5 * preset.omega * SIGMA3
        e = 0.5 * (IDENTITY2 + SIGMA1)
        return LindbladModel(h, [(e, preset.kappa)], preset)
    if isinstance(preset, Fluorescence):
        if preset.gamma < 0 or preset.rabi < 0:
            raise ValueError("gamma and rabi must be nonnegative")
        h = -0.5 * preset.rabi * SIGMA1
        lower = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
        return LindbladModel(h, [(lower, preset.gamma)], preset)
    if isinstance(preset, SigmaXConjugation):
        return LindbladModel(np.zeros((2, 2)), [(SIGMA1, 1.0)], preset)
    raise TypeError(f"unknown preset {preset!r}")


def generator_apply(model: LindbladModel, rho: np.ndarray) -> np.ndarray:
    """Right-hand side of the master equation at ``rho``.

    Output is traceless and hermitian for hermitian input.
    """
    h = model.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for (op, rate), gram in zip(model.jump_terms, model._grams):
        if rate == 0.0:
            continue
        out = out + rate * (op @ rho @ op.conj().T - 0.5 * (gram @ rho + rho @ gram))
    return out


def bloch_generator(model: LindbladModel) -> tuple[np.ndarray, np.ndarray]:
    """Affine form of the generator in Bloch coordinates.

    Returns (M, b) with d x / dt = M x + b, obtained by applying the
    generator to the identity and the Pauli basis.  Exact up to rounding.
    """
    b = to_bloch(generator_apply(model, 0.5 * IDENTITY2))
    m = np.empty((3, 3))
    for j in range(3):
        m[:, j] = to_bloch(generator_apply(model, 0.5 * PAULIS[j]))
    return m, b


def default_timestep(model: LindbladModel) -> float:
    """Fixed RK4 step: min(1e-3, 0.01 / fastest rate or frequency)."""
    scale = max(model.rates(), default=0.0)
    lo, hi = hermitian_eigenvalues(model.hamiltonian)
    scale = max(scale, abs(lo), abs(hi))
    if scale <= 0.0:
        return 1e-3
    return min(1e-3, 0.01 / scale)


@dataclass
class StateTrajectory:
    """Uniformly sampled integrator output."""
    times: np.ndarray
    states: np.ndarray  # shape (n, 2, 2)
    dt: float
    method: str = "rk4"

    def final(self) -> np.ndarray:
        return self.states[-1]


def _positivity_guard(rho: np.ndarray, t: float) -> np.ndarray:
    lo, _ = hermitian_eigenvalues(rho)
    if lo >= 0.0:
        return rho
    if lo < -1e-6:
        raise PositivityError(
            f"state eigenvalue {lo:.3e} at t={t:.6g} exceeds the -1e-6 abort threshold")
    logger.warning("clamping positivity drift %.3e at t=%.6g", lo, t)
    vals, vecs = np.linalg.eigh(rho)
    vals = np.clip(vals.real, 0.0, None)
    vals /= vals.sum()
    return (vecs * vals) @ vecs.conj().T


def evolve(model: LindbladModel, rho0: np.ndarray, t_end: float,
           dt: Optional[float] = None) -> StateTrajectory:
    """Integrate the master equation with classical fixed-step RK4.

    The step is shrunk so the grid lands on ``t_end`` exactly.  Trace is
    preserved to rounding by construction; positivity drift beyond 1e-6
    aborts, smaller drift is clamped with a logged warning.
    """
    rho = check_density_matrix(rho0)
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    if dt is None:
        dt = default_timestep(model)
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end == 0.0:
        return StateTrajectory(np.array([0.0]), np.array([rho]), dt)
    n_steps = max(1, math.ceil(t_end / dt - 1e-12))
    dt = t_end / n_steps
    times = np.linspace(0.0, t_end, n_steps + 1)
    states = np.empty((n_steps + 1, 2, 2), dtype=complex)
    states[0] = rho
    for i in range(n_steps):
        k1 = generator_apply(model, rho)
        k2 = generator_apply(model, rho + 0.5 * dt * k1)
        k3 = generator_apply(model, rho + 0.5 * dt * k2)
        k4 = generator_apply(model, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        rho = _positivity_guard(rho, times[i + 1])
        states[i + 1] = rho
    return StateTrajectory(times, states, dt)


def _affine_propagator(m: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """4x4 matrix propagating (x, 1) under d x/dt = M x + b."""
    a = np.zeros((4, 4))
    a[:3, :3] = m
    a[:3, 3] = b
    return expm(a * t)


def analytic_bloch_paths(preset: Preset, blochs: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Closed-form Bloch trajectories for a preset.

    ``blochs`` has shape (n, 3); the result has shape (n, len(times), 3).
    Tetrahedron and SigmaXConjugation use explicit formulas, Zeno and
    Fluorescence the matrix exponential of the 3x3 Bloch system.
    """
    blochs = np.atleast_2d(np.asarray(blochs, dtype=float))
    times = np.asarray(times, dtype=float)
    n, m = blochs.shape[0], times.shape[0]
    out = np.empty((n, m, 3))
    if isinstance(preset, Tetrahedron):
        lam = (4.0 / 3.0) * preset.kappa * preset.alpha ** 2
        decay = np.exp(-lam * times)
        c, s = np.cos(preset.omega * times), np.sin(preset.omega * times)
        out[:, :, 0] = (blochs[:, None, 0] * c - blochs[:, None, 1] * s) * decay
        out[:, :, 1] = (blochs[:, None, 0] * s + blochs[:, None, 1] * c) * decay
        out[:, :, 2] = blochs[:, None, 2] * decay
        return out
    if isinstance(preset, SigmaXConjugation):
        decay = np.exp(-2.0 * times)
        out[:, :, 0] = blochs[:, None, 0]
        out[:, :, 1] = blochs[:, None, 1] * decay
        out[:, :, 2] = blochs[:, None, 2] * decay
        return out
    if isinstance(preset, (Zeno, Fluorescence)):
        mmat, b = bloch_generator(build_model(preset))
        aug = np.concatenate([blochs, np.ones((n, 1))], axis=1)
        for i, t in enumerate(times):
            prop = _affine_propagator(mmat, b, t)
            out[:, i, :] = (aug @ prop.T)[:, :3]
        return out
    raise TypeError(f"no closed-form solution for preset {preset!r}")


def analytic_evolve(preset: Preset, rho0: np.ndarray, t: float) -> np.ndarray:
    """Closed-form solution at a single time."""
    x0 = to_bloch(check_density_matrix(rho0))
    x_t = analytic_bloch_paths(preset, x0[None, :], np.array([t]))[0, 0]
    return from_bloch(x_t)


def stationary_state(model: LindbladModel) -> np.ndarray:
    """Unique solution of L(rho) = 0 with unit trace.

    Solves the 3x3 Bloch system M x = -b; a (numerically) singular M means
    the fixed set is a whole affine subspace and NonUniqueStationaryError
    is raised with the flat directions attached.
    """
    m, b = bloch_generator(model)
    u, sing, vt = np.linalg.svd(m)
    if sing[-1] <= 1e-10 * max(1.0, sing[0]):
        null_dirs = vt[sing <= 1e-10 * max(1.0, sing[0])]
        raise NonUniqueStationaryError(
            "generator kernel is degenerate; stationary states form an affine "
            f"subspace with flat Bloch direction(s) {np.round(null_dirs, 12).tolist()}",
            null_dirs)
    x = np.linalg.solve(m, -b)
    rho = from_bloch(x)
    residual = trace_norm(generator_apply(model, rho))
    if residual > ATOL_STRUCT:
        raise RuntimeError(f"stationary solve left residual {residual:.3e}")
    return rho
