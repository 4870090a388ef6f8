"""Piecewise deterministic jump process on the spin sphere.

A pure state is a unit vector r on S^2.  Between detection events it
precesses about the z axis at angular speed omega; events arrive as a
homogeneous Poisson stream, and an event at detector i (one of the four
tetrahedron directions n_i) moves the state to

    r_i = [ (1 - a^2) r + 2 a (1 + a r.n_i) n_i ] / (1 + a^2 + 2 a r.n_i)

with probability

    p_i(r) = (1 + a^2 + 2 a r.n_i) / (4 (1 + a^2))

where a is the detector sharpness in [0, 1].  At a = 1 every jump lands
exactly on a vertex; at a = 0 the maps degenerate to the identity.

Rate convention.  The Poisson rate is kappa by default ("literal").  The
alternative "eeqt" convention scales it by (1 + a^2), the trace of the
summed squared coupling operators, which is what reproduces the ensemble
master equation of :mod:`qmix.lindblad` exactly; the ensemble-consistency
test in the suite records that resolution.  Both conventions drive the
same jump chain, so all attractor geometry is identical; only the clock
differs.

Randomness comes from the counter-based Philox4x64-10 generator keyed as
(seed, stream), so every path is reproducible bit for bit from its
parameters and seed; the draw order is pinned in ``sample_path``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lindblad import TETRA_DIRECTIONS

logger = logging.getLogger(__name__)

RATE_CONVENTIONS = ("literal", "eeqt")
DEFAULT_START = (0.0, 0.0, 1.0)
DEFAULT_BURN_IN = 100  # attractor convergence is geometric; 100 jumps suffice


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox4x64-10 generator keyed by (seed, stream)."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def total_rate(kappa: float, alpha: float, rate_convention: str = "literal") -> float:
    if rate_convention == "literal":
        return kappa
    if rate_convention == "eeqt":
        return kappa * (1.0 + alpha * alpha)
    raise ValueError(f"rate_convention must be one of {RATE_CONVENTIONS}")


def jump_probs(r, alpha: float) -> np.ndarray:
    """Detector probabilities p_i(r); nonnegative and summing to one."""
    r = np.asarray(r, dtype=float)
    dots = TETRA_DIRECTIONS @ r
    return (1.0 + alpha * alpha + 2.0 * alpha * dots) / (4.0 * (1.0 + alpha * alpha))


def jump_map(r, detector: int, alpha: float) -> np.ndarray:
    """Post-jump state for detector index (1..4).

    The map preserves the sphere; the output is renormalized and the
    rounding drift logged at debug level.  The denominator vanishes only
    for alpha = 1 with r at the detector antipode, a point of zero jump
    probability; it is rejected rather than regularized.
    """
    r = np.asarray(r, dtype=float)
    if not 1 <= detector <= 4:
        raise ValueError("detector index must be in 1..4")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    n = TETRA_DIRECTIONS[detector - 1]
    a2 = alpha * alpha
    dot = float(r @ n)
    den = 1.0 + a2 + 2.0 * alpha * dot
    if den < 1e-12:
        raise ValueError("jump map undefined at the detector antipode for alpha = 1")
    out = ((1.0 - a2) * r + 2.0 * alpha * (1.0 + alpha * dot) * n) / den
    norm = float(np.linalg.norm(out))
    if abs(norm - 1.0) > 1e-13:
        logger.debug("jump renormalization drift %.3e", norm - 1.0)
    return out / norm


@dataclass(frozen=True)
class JumpRecord:
    """One detection event: arrival time, detector (1..4), post-jump state."""
    time: float
    detector: int
    state: tuple[float, float, float]


@dataclass
class SamplePath:
    """Jump history of one realization, reproducible from (params, seed)."""
    r0: tuple[float, float, float]
    omega: float
    kappa: float
    alpha: float
    seed: int
    rate_convention: str
    records: list[JumpRecord]

    def times(self) -> np.ndarray:
        return np.array([rec.time for rec in self.records])

    def detectors(self) -> np.ndarray:
        return np.array([rec.detector for rec in self.records], dtype=int)

    def states(self) -> np.ndarray:
        return np.array([rec.state for rec in self.records])


def _unit(v) -> tuple[float, float, float]:
    x, y, z = (float(c) for c in v)
    n = math.sqrt(x * x + y * y + z * z)
    if n == 0:
        raise ValueError("state must be a nonzero 3-vector")
    return x / n, y / n, z / n


def sample_path(omega: float, kappa: float, alpha: float, r0=DEFAULT_START,
                n_jumps: int = 1000, seed: int = 0,
                rate_convention: str = "literal") -> SamplePath:
    """Simulate one path of the jump process.

    Draw order is fixed: first a block of ``n_jumps`` exponential waiting
    times, then a block of ``n_jumps`` uniforms for the detector choices
    (inverse CDF in detector order 1..4).
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if n_jumps < 1:
        raise ValueError("n_jumps must be at least 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    rate = total_rate(kappa, alpha, rate_convention)
    rng = make_rng(seed)
    waits = (rng.standard_exponential(n_jumps) / rate).tolist()
    us = rng.random(n_jumps).tolist()

    n1x, n1y, n1z = TETRA_DIRECTIONS[0]
    n2x, n2y, n2z = TETRA_DIRECTIONS[1]
    n3x, n3y, n3z = TETRA_DIRECTIONS[2]
    n4x, n4y, n4z = TETRA_DIRECTIONS[3]
    dirs = ((n1x, n1y, n1z), (n2x, n2y, n2z), (n3x, n3y, n3z), (n4x, n4y, n4z))
    a = alpha
    a2 = a * a
    one_a2 = 1.0 + a2
    x, y, z = _unit(r0)
    t = 0.0
    records: list[JumpRecord] = []
    for i in range(n_jumps):
        dt = waits[i]
        t += dt
        if omega != 0.0:
            ang = omega * dt
            c, s = math.cos(ang), math.sin(ang)
            x, y = c * x - s * y, s * x + c * y
        u = us[i] * 4.0 * one_a2
        acc = 0.0
        pick = 3
        for j in range(4):
            nx, ny, nz = dirs[j]
            acc += one_a2 + 2.0 * a * (x * nx + y * ny + z * nz)
            if u < acc:
                pick = j
                break
        nx, ny, nz = dirs[pick]
        dot = x * nx + y * ny + z * nz
        den = one_a2 + 2.0 * a * dot
        c1 = (1.0 - a2) / den
        c2 = 2.0 * a * (1.0 + a * dot) / den
        x, y, z = c1 * x + c2 * nx, c1 * y + c2 * ny, c1 * z + c2 * nz
        norm = math.sqrt(x * x + y * y + z * z)
        x, y, z = x / norm, y / norm, z / norm
        records.append(JumpRecord(t, pick + 1, (x, y, z)))
    return SamplePath(_unit(r0), omega, kappa, alpha, seed, rate_convention, records)


def _chaos_core(alpha: float, n_total: int, seed: int, r0) -> tuple[np.ndarray, np.ndarray]:
    """Jump chain only (omega = 0, kappa = 1): points and detector labels."""
    rng = make_rng(seed)
    rng.standard_exponential(n_total)  # keep the sample_path draw layout
    us = rng.random(n_total).tolist()
    dirs = tuple(tuple(float(c) for c in row) for row in TETRA_DIRECTIONS)
    a = alpha
    a2 = a * a
    one_a2 = 1.0 + a2
    x, y, z = _unit(r0)
    xs: list[float] = []
    ys: list[float] = []
    zs: list[float] = []
    det: list[int] = []
    for i in range(n_total):
        u = us[i] * 4.0 * one_a2
        acc = 0.0
        pick = 3
        for j in range(4):
            nx, ny, nz = dirs[j]
            acc += one_a2 + 2.0 * a * (x * nx + y * ny + z * nz)
            if u < acc:
                pick = j
                break
        nx, ny, nz = dirs[pick]
        dot = x * nx + y * ny + z * nz
        den = one_a2 + 2.0 * a * dot
        c1 = (1.0 - a2) / den
        c2 = 2.0 * a * (1.0 + a * dot) / den
        x, y, z = c1 * x + c2 * nx, c1 * y + c2 * ny, c1 * z + c2 * nz
        norm = math.sqrt(x * x + y * y + z * z)
        x, y, z = x / norm, y / norm, z / norm
        xs.append(x)
        ys.append(y)
        zs.append(z)
        det.append(pick + 1)
    return np.column_stack([xs, ys, zs]), np.array(det, dtype=np.uint8)


def chaos_game(alpha: float, n_points: int, seed: int = 0,
               burn_in: int = DEFAULT_BURN_IN, r0=DEFAULT_START) -> np.ndarray:
    """Post-jump states of the frozen-precession process (omega=0, kappa=1).

    The first ``burn_in`` jumps are discarded; the remaining ``n_points``
    post-jump states sample the attractor of the four detector maps.
    """
    points, _ = chaos_game_labeled(alpha, n_points, seed, burn_in, r0)
    return points


def chaos_game_labeled(alpha: float, n_points: int, seed: int = 0,
                       burn_in: int = DEFAULT_BURN_IN,
                       r0=DEFAULT_START) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`chaos_game` but also returns the detector of each point."""
    if n_points < 1:
        raise ValueError("n_points must be at least 1")
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    points, det = _chaos_core(alpha, n_points + burn_in, seed, r0)
    return points[burn_in:], det[burn_in:]


def _ensemble_chunk(args) -> np.ndarray:
    """Sum of final Bloch vectors for one seeded chunk of paths."""
    (omega, kappa, alpha, r0, n_paths, t_end, seed, stream, rate) = args
    rng = make_rng(seed, stream)
    r = np.tile(np.asarray(r0, dtype=float), (n_paths, 1))
    t = np.zeros(n_paths)
    active = np.ones(n_paths, dtype=bool)
    a = alpha
    a2 = a * a
    while active.any():
        idx = np.nonzero(active)[0]
        dt = rng.standard_exponential(len(idx)) / rate
        t_next = t[idx] + dt
        over = t_next > t_end
        advanced = np.where(over, t_end - t[idx], dt)
        if omega != 0.0:
            ang = omega * advanced
            c, s = np.cos(ang), np.sin(ang)
            x = r[idx, 0].copy()
            y = r[idx, 1].copy()
            r[idx, 0] = c * x - s * y
            r[idx, 1] = s * x + c * y
        t[idx] = np.where(over, t_end, t_next)
        active[idx[over]] = False
        jidx = idx[~over]
        u = rng.random(len(idx))[~over]  # fixed draw count per round
        if len(jidx) == 0:
            continue
        rj = r[jidx]
        dots = rj @ TETRA_DIRECTIONS.T
        w = (1.0 + a2) + 2.0 * a * dots
        cw = np.cumsum(w, axis=1)
        pick = (u[:, None] * cw[:, -1:] >= cw).sum(axis=1)
        nd = TETRA_DIRECTIONS[pick]
        dsel = np.take_along_axis(dots, pick[:, None], axis=1)[:, 0]
        den = (1.0 + a2) + 2.0 * a * dsel
        c1 = (1.0 - a2) / den
        c2 = 2.0 * a * (1.0 + a * dsel) / den
        rn = c1[:, None] * rj + c2[:, None] * nd
        rn /= np.linalg.norm(rn, axis=1)[:, None]
        r[jidx] = rn
    return r.sum(axis=0)


def ensemble_bloch_mean(omega: float, kappa: float, alpha: float, r0,
                        n_paths: int, t_end: float, seed: int = 0,
                        rate_convention: str = "literal",
                        threads: Optional[int] = None,
                        chunk_size: int = 20_000) -> np.ndarray:
    """Mean Bloch vector over independent paths at time ``t_end``.

    Paths are simulated in vectorized chunks; chunk c draws from the
    Philox stream (seed, c), and partial sums are combined in chunk order,
    so the result does not depend on the thread count.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    rate = total_rate(kappa, alpha, rate_convention)
    r0u = _unit(r0)
    jobs = []
    remaining = n_paths
    stream = 0
    while remaining > 0:
        m = min(chunk_size, remaining)
        jobs.append((omega, kappa, alpha, r0u, m, t_end, seed, stream, rate))
        remaining -= m
        stream += 1
    if threads is None:
        from .io import qmix_threads
        threads = qmix_threads()
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(_ensemble_chunk, jobs))
    else:
        partials = [_ensemble_chunk(j) for j in jobs]
    total = np.zeros(3)
    for part in partials:  # fixed chunk order keeps the sum deterministic
        total += part
    return total / n_paths
