"""Shared decay-rate fitting for the quantum and classical exponent
estimators.

Both estimators measure how fast a distance d(t) between evolving states
(or densities) shrinks, via the least-squares slope of -log d against t
over the late half of the horizon.  The late window discards transients;
the returned value is the minimum over a finite probe family and is a
lower-bound protocol for the infimum it stands in for.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class FitWindowError(RuntimeError):
    """Too few usable samples to fit a decay slope."""


@dataclass
class ExponentEstimate:
    """Fitted decay rate with diagnostics.

    ``exponent`` is the minimum of ``per_probe_slopes`` (nan when the
    dynamics failed to contract at the probed horizon).  Residuals are
    RMS residuals of the per-probe linear fits; the largest is reported.
    """

    exponent: float
    fit_window: tuple[float, float]
    per_probe_slopes: list[float]
    max_residual: float
    completely_mixing: bool = True
    notes: list[str] = field(default_factory=list)


def decay_slope(ts: np.ndarray, dists: np.ndarray, t_lo: float, t_hi: float,
                floor: float) -> tuple[float, float, str | None]:
    """Least-squares slope of -log(dists) vs ts restricted to [t_lo, t_hi].

    Samples at or below ``floor`` are unusable.  If fewer than three usable
    samples remain, the window is shrunk to [t_u/2, t_u] where t_u is the
    last time the distance sat above the floor; a diagnostic note reports
    the shrink.  Raises FitWindowError when no window works.
    """
    ts = np.asarray(ts, dtype=float)
    dists = np.asarray(dists, dtype=float)
    note = None
    usable = dists > floor
    mask = usable & (ts >= t_lo) & (ts <= t_hi)
    if mask.sum() < 3:
        idx = np.nonzero(usable)[0]
        if len(idx) == 0:
            raise FitWindowError(f"all distances at or below the floor {floor:g}")
        t_u = ts[idx[-1]]
        mask = usable & (ts >= 0.5 * t_u) & (ts <= t_u)
        note = (f"distance fell below {floor:g} before the nominal window; "
                f"fit shrunk to [{0.5 * t_u:.6g}, {t_u:.6g}]")
        if mask.sum() < 3:
            raise FitWindowError(
                "fewer than three usable samples even after shrinking the window; "
                "increase sampling density or shorten the horizon")
    x = ts[mask]
    y = -np.log(dists[mask])
    design = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return float(coef[0]), rms, note
