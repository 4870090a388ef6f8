"""Raster rendering of sphere point clouds to binary PGM/PPM.

Deliberately dependency-free: both formats are written byte-exactly, so a
cloud plus a render spec always reproduces the identical file.  Intensity
is log-scaled hit count per pixel; PPM mode colors each pixel by the
detector that last produced its dominant hits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

AXIS_PROJECTIONS = {
    "+x": (0, 1, 2), "-x": (0, 1, 2),
    "+y": (1, 0, 2), "-y": (1, 0, 2),
    "+z": (2, 0, 1), "-z": (2, 0, 1),
}
PROJECTIONS = tuple(AXIS_PROJECTIONS) + ("net",)

# fixed detector palette (detectors 1..4)
DETECTOR_COLORS = np.array([
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
], dtype=np.uint8)

_OTHER_AXES = np.array([[1, 2], [0, 2], [0, 1]])
# cross layout: face id (2*axis + negative) -> (panel column, panel row)
_NET_LAYOUT = {0: (2, 1), 1: (0, 1), 2: (1, 0), 3: (1, 2), 4: (1, 1), 5: (3, 1)}


@dataclass(frozen=True)
class RenderSpec:
    """Projection plus raster parameters.

    ``zoom_center``/``zoom_radius`` switch to a tangent-plane view of the
    cap of the given angular radius around the center direction.
    """
    projection: str = "+z"
    size: int = 800
    mode: str = "pgm"
    zoom_center: Optional[tuple[float, float, float]] = None
    zoom_radius: Optional[float] = None

    def __post_init__(self):
        if self.projection not in PROJECTIONS:
            raise ValueError(f"projection must be one of {PROJECTIONS}")
        if not 64 <= self.size <= 8192:
            raise ValueError("image size must lie in [64, 8192]")
        if self.mode not in ("pgm", "ppm"):
            raise ValueError("mode must be 'pgm' or 'ppm'")
        if (self.zoom_center is None) != (self.zoom_radius is None):
            raise ValueError("zoom needs both a center and an angular radius")
        if self.zoom_radius is not None and not 0 < self.zoom_radius <= math.pi / 2:
            raise ValueError("zoom radius must lie in (0, pi/2]")


def _zoom_coords(points: np.ndarray, center, radius: float):
    c = np.asarray(center, dtype=float)
    c = c / np.linalg.norm(c)
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(c)))] = 1.0
    e1 = np.cross(c, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(c, e1)
    mask = points @ c >= math.cos(radius)
    scale = math.sin(radius)
    u = (points[mask] @ e1) / scale
    v = (points[mask] @ e2) / scale
    return u, v, mask


def _axis_coords(points: np.ndarray, projection: str):
    axis, ua, va = AXIS_PROJECTIONS[projection]
    sign = 1.0 if projection[0] == "+" else -1.0
    mask = sign * points[:, axis] >= 0.0
    u = points[mask, ua] * sign
    v = points[mask, va]
    return u, v, mask


def _net_pixels(points: np.ndarray, panel: int):
    idx = np.arange(len(points))
    axis = np.argmax(np.abs(points), axis=1)
    dom = points[idx, axis]
    face = 2 * axis + (dom < 0)
    u = points[idx, _OTHER_AXES[axis, 0]] / np.abs(dom)
    v = points[idx, _OTHER_AXES[axis, 1]] / np.abs(dom)
    iu = np.clip(((u + 1.0) * 0.5 * panel).astype(int), 0, panel - 1)
    iv = np.clip(((v + 1.0) * 0.5 * panel).astype(int), 0, panel - 1)
    cols = np.array([_NET_LAYOUT[f][0] for f in face])
    rows = np.array([_NET_LAYOUT[f][1] for f in face])
    px = cols * panel + iu
    py = rows * panel + iv
    return px, py, np.ones(len(points), dtype=bool)


def _pixel_coords(points: np.ndarray, spec: RenderSpec):
    """(px, py, mask, width, height) of every visible point."""
    if spec.projection == "net":
        panel = spec.size // 4
        px, py, mask = _net_pixels(points, panel)
        return px, py, mask, 4 * panel, 3 * panel
    if spec.zoom_center is not None:
        u, v, mask = _zoom_coords(points, spec.zoom_center, spec.zoom_radius)
    else:
        u, v, mask = _axis_coords(points, spec.projection)
    size = spec.size
    px = np.clip(((u + 1.0) * 0.5 * size).astype(int), 0, size - 1)
    py = np.clip(((v + 1.0) * 0.5 * size).astype(int), 0, size - 1)
    return px, py, mask, size, size


def _intensity(hits: np.ndarray) -> np.ndarray:
    top = hits.max()
    if top <= 0:
        return np.zeros(hits.shape, dtype=np.uint8)
    return np.rint(255.0 * np.log1p(hits) / math.log1p(top)).astype(np.uint8)


def render(points: np.ndarray, spec: RenderSpec,
           detectors: Optional[np.ndarray] = None,
           comments: tuple[str, ...] = ()) -> bytes:
    """Rasterize a cloud to PGM (grayscale) or PPM (detector-colored) bytes."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3 or len(points) == 0:
        raise ValueError("expected a nonempty (n, 3) point cloud")
    px, py, mask, width, height = _pixel_coords(points, spec)
    flat = py * width + px
    if spec.mode == "pgm":
        hits = np.bincount(flat, minlength=width * height).reshape(height, width)
        return _encode_pnm(b"P5", _intensity(hits), width, height, comments)
    if detectors is None:
        raise ValueError("ppm mode needs a detector label per point")
    det = np.asarray(detectors, dtype=int)[mask] - 1
    if det.size != flat.size:
        raise ValueError("detector labels must match the cloud length")
    per = np.stack([
        np.bincount(flat[det == d], minlength=width * height) for d in range(4)
    ])
    total = per.sum(axis=0)
    winner = per.argmax(axis=0)
    img = (DETECTOR_COLORS[winner].astype(np.uint16)
           * _intensity(total)[:, None].astype(np.uint16) // 255).astype(np.uint8)
    return _encode_pnm(b"P6", img.reshape(height, width, 3), width, height, comments)


def _encode_pnm(magic: bytes, img: np.ndarray, width: int, height: int,
                comments: tuple[str, ...]) -> bytes:
    head = [magic]
    head.extend(b"# " + c.encode() for c in comments)
    head.append(f"{width} {height}".encode())
    head.append(b"255")
    return b"\n".join(head) + b"\n" + img.tobytes()
