"""Densities on the circle and the transfer operator of the r-adic map.

Densities live on [0, 2pi) with the normalized measure dx / 2pi and come
in two representations:

* exact piecewise-affine (breakpoints plus c + s*x per piece), closed
  under the transfer operator of S(x) = r x (mod 2pi), used for showcase
  densities whose iterates have known closed forms;
* uniform grids of M samples, pushed forward spectrally (the operator
  maps the Fourier coefficient at k r to the one at k), which is exact on
  trigonometric polynomials below the alias limit and spectrally accurate
  on smooth densities.

The transfer operator itself is

    (P f)(x) = (1/r) * sum_{j=0..r-1} f(x / r + 2 pi j / r)

Grid mode requires M divisible by r.  Integrals are exact on affine
pieces and use the periodic trapezoid rule (the grid mean) otherwise.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence

import numpy as np

from .fitting import ExponentEstimate, FitWindowError, decay_slope

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
_BREAK_TOL = 1e-12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _dedupe_breaks(points: np.ndarray) -> np.ndarray:
    """Sorted breakpoints on [0, 2pi] with sub-1e-12 gaps collapsed."""
    pts = np.sort(np.mod(points, TWO_PI))
    pts = pts[(pts > _BREAK_TOL) & (pts < TWO_PI - _BREAK_TOL)]
    keep = [0.0]
    for p in pts:
        if p - keep[-1] > _BREAK_TOL:
            keep.append(float(p))
    keep.append(TWO_PI)
    return np.array(keep)


class CircleDensity:
    """Nonnegative unit-mass density on the circle.

    ``grid`` always holds M samples at x_m = 2 pi m / M.  When the density
    is piecewise affine, ``breaks``/``coefs`` hold the exact pieces and
    every integral below is computed from them in closed form.
    """

    def __init__(self, grid: np.ndarray, breaks: Optional[np.ndarray] = None,
                 coefs: Optional[np.ndarray] = None):
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 1 or len(grid) < 8:
            raise ValueError("grid must hold at least 8 samples")
        if grid.min() < -1e-12:
            raise ValueError(f"density has negative values (min {grid.min():.3e})")
        self.grid = np.clip(grid, 0.0, None)
        self.breaks = breaks
        self.coefs = coefs
        mass = self.mass()
        if abs(mass - 1.0) > 1e-9:
            raise ValueError(f"density mass is {mass:.12g}, expected 1")

    # -- constructors -------------------------------------------------

    @classmethod
    def from_grid(cls, values: Sequence[float]) -> "CircleDensity":
        return cls(np.asarray(values, dtype=float))

    @classmethod
    def from_pieces(cls, pieces: Sequence[tuple[float, float, float, float]],
                    grid_size: int = 1024) -> "CircleDensity":
        """Build from (x0, x1, c, s) pieces tiling [0, 2pi), f(x) = c + s x."""
        pieces = sorted(pieces)
        breaks = [p[0] for p in pieces] + [pieces[-1][1]]
        if abs(breaks[0]) > _BREAK_TOL or abs(breaks[-1] - TWO_PI) > _BREAK_TOL:
            raise ValueError("pieces must tile [0, 2pi)")
        for (a, b, _, _), nxt in zip(pieces, breaks[1:]):
            if abs(b - nxt) > _BREAK_TOL and b != nxt:
                raise ValueError("pieces must be contiguous")
        br = np.array(breaks)
        br[0] = 0.0
        br[-1] = TWO_PI
        co = np.array([[c, s] for (_, _, c, s) in pieces])
        xs = np.arange(grid_size) * (TWO_PI / grid_size)
        idx = np.clip(np.searchsorted(br, xs, side="right") - 1, 0, len(co) - 1)
        grid = co[idx, 0] + co[idx, 1] * xs
        return cls(grid, br, co)

    @classmethod
    def uniform(cls, grid_size: int = 1024) -> "CircleDensity":
        return cls.from_pieces([(0.0, TWO_PI, 1.0, 0.0)], grid_size)

    @property
    def has_pieces(self) -> bool:
        return self.breaks is not None

    @property
    def grid_size(self) -> int:
        return len(self.grid)

    def evaluate(self, x) -> np.ndarray:
        """Pointwise values (affine representation when available)."""
        x = np.mod(np.asarray(x, dtype=float), TWO_PI)
        if not self.has_pieces:
            step = TWO_PI / self.grid_size
            return self.grid[(x / step).astype(int) % self.grid_size]
        idx = np.clip(np.searchsorted(self.breaks, x, side="right") - 1,
                      0, len(self.coefs) - 1)
        return self.coefs[idx, 0] + self.coefs[idx, 1] * x

    def mass(self) -> float:
        if self.has_pieces:
            total = 0.0
            for (u, v), (c, s) in zip(zip(self.breaks[:-1], self.breaks[1:]), self.coefs):
                total += c * (v - u) + 0.5 * s * (v * v - u * u)
            return total / TWO_PI
        return float(np.mean(self.grid))


def sawtooth_density(k: int, grid_size: int = 1024) -> CircleDensity:
    """f(x) = 1 + (x - pi) / (k pi): a tilted density converging to uniform."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    return CircleDensity.from_pieces(
        [(0.0, TWO_PI, 1.0 - 1.0 / k, 1.0 / (k * math.pi))], grid_size)


def linear_ramp_density(grid_size: int = 1024) -> CircleDensity:
    """f(x) = x / pi: the unit-interval density 2x rescaled to the circle."""
    return CircleDensity.from_pieces([(0.0, TWO_PI, 0.0, 1.0 / math.pi)], grid_size)


def trig_density(cos_coeffs: Sequence[float], sin_coeffs: Sequence[float] = (),
                 grid_size: int = 1024) -> CircleDensity:
    """1 + sum_j a_j cos(j x) + b_j sin(j x); must be nonnegative."""
    xs = np.arange(grid_size) * (TWO_PI / grid_size)
    vals = np.ones(grid_size)
    for j, a in enumerate(cos_coeffs, start=1):
        vals += a * np.cos(j * xs)
    for j, b in enumerate(sin_coeffs, start=1):
        vals += b * np.sin(j * xs)
    if vals.min() < -1e-12:
        raise ValueError("coefficients produce a negative density")
    return CircleDensity.from_grid(vals)


# -- transfer operator ----------------------------------------------------

def _pf_affine(f: CircleDensity, r: int) -> CircleDensity:
    new_breaks = _dedupe_breaks(np.concatenate([
        np.mod(r * f.breaks[:-1], TWO_PI), [0.0]]))
    coefs = np.empty((len(new_breaks) - 1, 2))
    for p in range(len(new_breaks) - 1):
        xm = 0.5 * (new_breaks[p] + new_breaks[p + 1])
        c_new = 0.0
        s_new = 0.0
        for j in range(r):
            y = (xm + TWO_PI * j) / r
            piece = min(np.searchsorted(f.breaks, y, side="right") - 1,
                        len(f.coefs) - 1)
            c, s = f.coefs[piece]
            c_new += (c + s * TWO_PI * j / r) / r
            s_new += s / (r * r)
        coefs[p] = (c_new, s_new)
    pieces = [(new_breaks[i], new_breaks[i + 1], coefs[i, 0], coefs[i, 1])
              for i in range(len(coefs))]
    return CircleDensity.from_pieces(pieces, f.grid_size)


def _pf_spectral(f: CircleDensity, r: int) -> CircleDensity:
    m = f.grid_size
    if m % r != 0:
        raise ValueError(f"grid size {m} must be divisible by r = {r}")
    c = np.fft.fft(f.grid)
    half = m // 2
    kp = np.arange(m)
    signed = ((kp + half) % m) - half     # frequency of each FFT bin
    src = r * signed
    out = np.zeros_like(c)
    ok = np.abs(src) < half
    out[kp[ok]] = c[np.mod(src[ok], m)]
    vals = np.fft.ifft(out).real
    if vals.min() < -1e-9:
        raise ValueError(
            "spectral push-forward produced significantly negative values; "
            "grid mode expects a smooth density")
    return CircleDensity(vals)


def pf_apply(f: CircleDensity, r: int) -> CircleDensity:
    """Push a density forward under x -> r x (mod 2pi).

    Affine densities transform exactly (pieces map to pieces); grid-only
    densities use the spectral rule (P f)^(k) = f^(k r).
    """
    if r < 2 or int(r) != r:
        raise ValueError("r must be an integer >= 2")
    r = int(r)
    if f.has_pieces:
        return _pf_affine(f, r)
    return _pf_spectral(f, r)


# -- integrals ------------------------------------------------------------

def _merged_pieces(f: CircleDensity, g: CircleDensity):
    breaks = _dedupe_breaks(np.concatenate([f.breaks[:-1], g.breaks[:-1], [0.0]]))
    for u, v in zip(breaks[:-1], breaks[1:]):
        xm = 0.5 * (u + v)
        fi = min(np.searchsorted(f.breaks, xm, side="right") - 1, len(f.coefs) - 1)
        gi = min(np.searchsorted(g.breaks, xm, side="right") - 1, len(g.coefs) - 1)
        yield u, v, f.coefs[fi], g.coefs[gi]


def _grid_pair(f: CircleDensity, g: CircleDensity) -> tuple[np.ndarray, np.ndarray]:
    """Sample values on a shared grid; an affine side adopts the other's grid."""
    if f.grid_size == g.grid_size:
        return f.grid, g.grid
    if f.has_pieces:
        xs = np.arange(g.grid_size) * (TWO_PI / g.grid_size)
        return f.evaluate(xs), g.grid
    if g.has_pieces:
        xs = np.arange(f.grid_size) * (TWO_PI / f.grid_size)
        return f.grid, g.evaluate(xs)
    raise ValueError("grid densities must share a grid size")


def l1_distance(f: CircleDensity, g: CircleDensity) -> float:
    """Integral of |f - g| d mu; exact when both densities are affine."""
    if f.has_pieces and g.has_pieces:
        total = 0.0
        for u, v, (cf, sf), (cg, sg) in _merged_pieces(f, g):
            dc, ds = cf - cg, sf - sg

            def seg(a, b):
                return dc * (b - a) + 0.5 * ds * (b * b - a * a)

            if ds != 0.0:
                root = -dc / ds
                if u < root < v:
                    total += abs(seg(u, root)) + abs(seg(root, v))
                    continue
            total += abs(seg(u, v))
        return total / TWO_PI
    fv, gv = _grid_pair(f, g)
    return float(np.mean(np.abs(fv - gv)))


def _eta_antiderivative(w: float) -> float:
    # antiderivative of -w log w (zero at w = 0)
    if w <= 0.0:
        return 0.0
    return 0.25 * w * w - 0.5 * w * w * math.log(w)


def entropy(f: CircleDensity) -> float:
    """Integral of eta(f) d mu with eta(x) = -x log x; maximal (0) at uniform."""
    if f.has_pieces:
        total = 0.0
        for (u, v), (c, s) in zip(zip(f.breaks[:-1], f.breaks[1:]), f.coefs):
            if s == 0.0:
                total += (v - u) * (-c * math.log(c) if c > 0 else 0.0)
            else:
                total += (_eta_antiderivative(c + s * v) - _eta_antiderivative(c + s * u)) / s
        return total / TWO_PI
    vals = f.grid
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.where(vals > 0, -vals * np.log(np.where(vals > 0, vals, 1.0)), 0.0)
    return float(np.mean(eta))


def relative_entropy(f: CircleDensity, g: CircleDensity,
                     support_tol: float = 1e-14) -> float:
    """Integral of f log(f/g) d mu, or inf when f has mass where g vanishes.

    Affine pairs are integrated per merged piece with 32-node Gauss
    quadrature (the integrand is smooth inside each piece); grid pairs use
    the periodic trapezoid rule.
    """
    if f.has_pieces and g.has_pieces:
        total = 0.0
        for u, v, (cf, sf), (cg, sg) in _merged_pieces(f, g):
            g_hi = max(cg + sg * u, cg + sg * v)
            f_mass = cf * (v - u) + 0.5 * sf * (v * v - u * u)
            if g_hi < support_tol:
                if f_mass > support_tol:
                    return math.inf
                continue
            x = 0.5 * (v - u) * _GL_NODES + 0.5 * (u + v)
            fx = np.clip(cf + sf * x, 0.0, None)
            gx = np.clip(cg + sg * x, support_tol, None)
            integrand = np.where(fx > 0, fx * np.log(np.where(fx > 0, fx, 1.0) / gx), 0.0)
            total += 0.5 * (v - u) * float(_GL_WEIGHTS @ integrand)
        return max(total / TWO_PI, 0.0)
    fv, gv = _grid_pair(f, g)
    if np.any((gv < support_tol) & (fv > support_tol)):
        return math.inf
    ok = fv > 0
    vals = np.zeros_like(fv)
    vals[ok] = fv[ok] * np.log(fv[ok] / np.clip(gv[ok], support_tol, None))
    return max(float(np.mean(vals)), 0.0)


# -- exponent and Fourier diagnostics --------------------------------------

def lambda_classical(f0: CircleDensity, probes: Sequence[CircleDensity], r: int,
                     n_max: int = 12) -> ExponentEstimate:
    """Decay exponent of ||P^n f - P^n f0||_1, minimum over probes.

    Slopes are fitted over iteration counts n in [n_max/2, n_max].  Probes
    whose distance hits the 1e-13 floor (affine iterates can reach the
    uniform density exactly in finitely many steps) are excluded with a
    note rather than fitted.
    """
    if not probes:
        raise ValueError("need at least one probe density")
    for i, p in enumerate(probes):
        if l1_distance(p, f0) < 1e-12:
            raise ValueError(f"probe {i} equals the reference density")
    steps = np.arange(n_max + 1, dtype=float)
    current = [f0] + list(probes)
    dists = np.empty((len(probes), n_max + 1))
    for n in range(n_max + 1):
        for j in range(len(probes)):
            dists[j, n] = l1_distance(current[j + 1], current[0])
        if n < n_max:
            current = [pf_apply(h, r) for h in current]
    slopes: list[float] = []
    notes: list[str] = []
    residuals: list[float] = []
    for j in range(len(probes)):
        try:
            slope, rms, note = decay_slope(steps, dists[j], 0.5 * n_max, n_max, 1e-13)
        except FitWindowError:
            notes.append(f"probe {j} reached the reference density exactly; excluded")
            slopes.append(float("nan"))
            continue
        slopes.append(slope)
        residuals.append(rms)
        if note:
            notes.append(f"probe {j}: {note}")
    finite = [s for s in slopes if not math.isnan(s)]
    if not finite:
        raise FitWindowError("every probe collapsed onto the reference density")
    return ExponentEstimate(
        exponent=min(finite),
        fit_window=(0.5 * n_max, float(n_max)),
        per_probe_slopes=slopes,
        max_residual=max(residuals) if residuals else float("nan"),
        notes=notes,
    )


def density_to_csv(f: CircleDensity) -> str:
    """Density as '# columns: x,f' plus x,f(x) rows at full precision."""
    xs = np.arange(f.grid_size) * (TWO_PI / f.grid_size)
    lines = ["# columns: x,f"]
    lines.extend("%.17g,%.17g" % (x, v) for x, v in zip(xs, f.grid))
    return "\n".join(lines) + "\n"


def density_from_csv(text: str) -> CircleDensity:
    """Rebuild a grid density from x,f(x) rows on a uniform grid.

    Sampling a density with jumps loses O(1/M) of its mass to the
    discontinuities; imports off by at most 1e-3 are renormalized, exact
    ones are kept bit for bit.
    """
    xs, vals = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        x, v = line.split(",")
        xs.append(float(x))
        vals.append(float(v))
    xs = np.asarray(xs)
    step = TWO_PI / len(xs)
    if np.max(np.abs(xs - np.arange(len(xs)) * step)) > 1e-9:
        raise ValueError("density CSV must sample a uniform grid over [0, 2pi)")
    vals = np.asarray(vals, dtype=float)
    mass = float(np.mean(vals))
    if abs(mass - 1.0) > 1e-3:
        raise ValueError(f"sampled density has mass {mass:.6g}; not a unit density")
    if abs(mass - 1.0) > 1e-12:
        vals = vals / mass
    return CircleDensity.from_grid(vals)


def density_to_json(f: CircleDensity) -> dict:
    """JSON-ready payload: affine pieces when exact, grid samples otherwise."""
    if f.has_pieces:
        return {"pieces": [[u, v, c, s] for (u, v), (c, s) in
                           zip(zip(f.breaks[:-1].tolist(), f.breaks[1:].tolist()),
                               f.coefs.tolist())],
                "grid_size": f.grid_size}
    return {"grid": f.grid.tolist()}


def density_from_json(payload: dict) -> CircleDensity:
    if "pieces" in payload:
        pieces = [tuple(p) for p in payload["pieces"]]
        return CircleDensity.from_pieces(pieces, payload.get("grid_size", 1024))
    if "grid" in payload:
        return CircleDensity.from_grid(payload["grid"])
    raise ValueError("density payload needs either 'pieces' or 'grid'")


def fourier_coefficient(f: CircleDensity, k: int) -> complex:
    """f^(k) = (1/2pi) integral e^{-ikx} f(x) dx via the grid DFT."""
    m = f.grid_size
    if not 0 <= k < m // 2:
        raise ValueError(f"coefficient index {k} is beyond the alias limit {m // 2}")
    return complex(np.fft.fft(f.grid)[k] / m)


def fourier_check(f: CircleDensity, r: int, k: int, n: int) -> tuple[complex, complex]:
    """Return ((P^n f)^(k), f^(k r^n)); the two agree for the r-adic map."""
    target = k * r ** n
    if target >= f.grid_size // 2:
        raise ValueError(
            f"index k r^n = {target} exceeds the alias limit {f.grid_size // 2}")
    g = f
    for _ in range(n):
        g = pf_apply(g, r)
    return fourier_coefficient(g, k), fourier_coefficient(f, target)
