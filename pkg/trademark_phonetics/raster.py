"""
Rasterization of 2-gram coordinate paths into phonetic feature images.

Each consecutive pair of path points is joined by a straight stroke whose
intensity decays with the gram index; strokes are max-composed onto a
128x128 grid (x = column, y = row, origin top-left).
"""
import math
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import png

from trademark_phonetics.errors import IoError
from trademark_phonetics.phoneme_codec import VALUE_RANGE, GramPath, Point

logger = logging.getLogger(__name__)

RAW_DTYPE = np.dtype("<f4")


class IntensityMode(Enum):
    """How the intensity of the i-th stroke decays."""
    CUMULATIVE_PRODUCT = "cumulative-product"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class RasterConfig:
    """Intensity schedule, grid size and stroke thickness settings."""
    z: float = 255.0
    gamma: float = 0.9
    intensity_mode: IntensityMode = IntensityMode.CUMULATIVE_PRODUCT
    width: int = VALUE_RANGE
    height: int = VALUE_RANGE
    thickness_budget: float = 256.0
    max_thickness: int = 7

    def __post_init__(self):
        if not isinstance(self.intensity_mode, IntensityMode):
            object.__setattr__(self, "intensity_mode", IntensityMode(self.intensity_mode))
        if self.z <= 0:
            raise ValueError(f"Scale factor must be positive, got {self.z}")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"Discount factor must lie in (0, 1], got {self.gamma}")
        if self.width != VALUE_RANGE or self.height != VALUE_RANGE:
            raise ValueError(f"Feature grid must be {VALUE_RANGE}x{VALUE_RANGE}")
        if self.thickness_budget <= 0:
            raise ValueError(f"Thickness budget must be positive, got {self.thickness_budget}")
        if self.max_thickness < 1:
            raise ValueError(f"Maximum thickness must be at least 1, got {self.max_thickness}")


@dataclass
class PhoneticFeature:
    """A v x u intensity grid plus where it came from."""
    grid: np.ndarray
    source: str = ""
    path_length: float = 0.0
    z: float = 255.0
    thickness: int = 0

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape

    def nonzero_mask(self) -> np.ndarray:
        return self.grid > 0

    def to_uint8(self) -> np.ndarray:
        return quantize(self.grid, self.z)


def gram_intensity(i: int, cfg: RasterConfig) -> float:
    """
    Representative value of the i-th 2-gram (0-based).

    The cumulative product of gamma**k for k = 0..i collapses to
    gamma**(i*(i+1)/2); geometric mode uses gamma**i.
    """
    if i < 0:
        raise ValueError(f"Gram index must be non-negative, got {i}")
    if cfg.intensity_mode is IntensityMode.GEOMETRIC:
        return cfg.z * cfg.gamma ** i
    return cfg.z * cfg.gamma ** (i * (i + 1) // 2)


def total_path_length(path: GramPath) -> float:
    """Sum of Euclidean distances between consecutive points."""
    points = path.points
    return math.fsum(
        math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(points, points[1:])
    )


def line_thickness(path: GramPath, cfg: RasterConfig) -> int:
    """Stroke width normalized to the total path length: shorter paths get thicker strokes."""
    length = total_path_length(path)
    raw = math.floor(cfg.thickness_budget / max(length, 1.0) + 0.5)
    return int(min(max(raw, 1), cfg.max_thickness))


def segment_mask(
    xs: np.ndarray,
    ys: np.ndarray,
    a: Point,
    b: Point,
    thickness: int
) -> np.ndarray:
    """
    Pixels whose centre lies within thickness/2 of the closed segment a-b.

    Exact integer arithmetic: compares 4*d^2*|b-a|^2 against thickness^2*|b-a|^2.
    """
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    px, py = xs - ax, ys - ay
    limit = thickness * thickness
    near_a = 4 * (px * px + py * py) <= limit
    length2 = dx * dx + dy * dy
    if length2 == 0:
        return near_a

    qx, qy = xs - bx, ys - by
    near_b = 4 * (qx * qx + qy * qy) <= limit
    dot = px * dx + py * dy
    near_line = 4 * ((px * px + py * py) * length2 - dot * dot) <= limit * length2
    return np.where(dot < 0, near_a, np.where(dot > length2, near_b, near_line))


def draw_segment(grid: np.ndarray, a: Point, b: Point, thickness: int, intensity: float):
    """Max-compose one stroke onto `grid` in place, touching only its bounding box."""
    height, width = grid.shape
    pad = thickness
    x0, x1 = max(0, min(a[0], b[0]) - pad), min(width - 1, max(a[0], b[0]) + pad)
    y0, y1 = max(0, min(a[1], b[1]) - pad), min(height - 1, max(a[1], b[1]) + pad)
    ys, xs = np.mgrid[y0:y1 + 1, x0:x1 + 1].astype(np.int64)
    mask = segment_mask(xs, ys, a, b, thickness)
    region = grid[y0:y1 + 1, x0:x1 + 1]
    np.maximum(region, np.where(mask, intensity, 0.0), out=region)


def draw_path(grid: np.ndarray, path: GramPath, cfg: RasterConfig) -> np.ndarray:
    """Draw every stroke of `path` onto an existing grid (max-composition)."""
    points = path.points
    if len(points) < 2:
        return grid
    thickness = line_thickness(path, cfg)
    for j, (a, b) in enumerate(zip(points, points[1:])):
        draw_segment(grid, a, b, thickness, gram_intensity(j, cfg))
    return grid


def rasterize(path: GramPath, cfg: RasterConfig, source: str = "") -> PhoneticFeature:
    """
    Render a coordinate path as a phonetic feature.

    Args:
        path: 2-gram points in pronunciation order
        cfg: intensity and thickness settings
        source: word the path came from, kept as metadata

    Returns:
        PhoneticFeature; all-zero when the path has fewer than two points
    """
    grid = np.zeros((cfg.height, cfg.width), dtype=np.float64)
    draw_path(grid, path, cfg)
    return PhoneticFeature(
        grid=grid,
        source=source,
        path_length=total_path_length(path),
        z=cfg.z,
        thickness=line_thickness(path, cfg) if len(path) >= 2 else 0,
    )


def quantize(values: np.ndarray, z: float = 255.0) -> np.ndarray:
    """Floor-quantize intensities in [0, z] to 8 bits."""
    scaled = np.floor(np.asarray(values, dtype=np.float64) * (255.0 / z))
    return np.clip(scaled, 0, 255).astype(np.uint8)


def write_png(pixels: np.ndarray, path: Union[str, Path]):
    """Write an 8-bit grayscale (H, W) or RGB (H, W, 3) array."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    height, width = pixels.shape[:2]
    greyscale = pixels.ndim == 2
    rows = pixels.reshape(height, -1).tolist()
    writer = png.Writer(width, height, greyscale=greyscale, bitdepth=8)
    try:
        with open(path, "wb") as out:
            writer.write(out, rows)
    except OSError as e:
        raise IoError(f"Cannot write PNG {path}: {e}") from e
    logger.debug(f"Wrote {width}x{height} {'grayscale' if greyscale else 'RGB'} PNG to {path}")


def read_png(path: Union[str, Path]) -> np.ndarray:
    """Decode an 8-bit PNG into (H, W) or (H, W, planes)."""
    try:
        width, height, rows, info = png.Reader(filename=str(path)).asDirect()
        pixels = np.array([list(row) for row in rows], dtype=np.uint8)
    except (OSError, png.Error) as e:
        raise IoError(f"Cannot read PNG {path}: {e}") from e
    planes = info["planes"]
    return pixels.reshape(height, width) if planes == 1 else pixels.reshape(height, width, planes)


def export_feature_png(feature: PhoneticFeature, path: Union[str, Path]):
    """Single feature as an 8-bit grayscale PNG."""
    write_png(feature.to_uint8(), path)


def dump_raw(channels: np.ndarray, path: Union[str, Path]):
    """
    Raw dump for cross-language debugging.

    Header line `PF<c> <u> <v>`, then channel-major little-endian float32 data.
    """
    channels = np.asarray(channels)
    if channels.ndim == 2:
        channels = channels[np.newaxis]
    count, height, width = channels.shape
    header = f"PF{count} {width} {height}\n".encode("ascii")
    try:
        with open(path, "wb") as out:
            out.write(header)
            out.write(np.ascontiguousarray(channels, dtype=RAW_DTYPE).tobytes())
    except OSError as e:
        raise IoError(f"Cannot write raw dump {path}: {e}") from e


def load_raw(path: Union[str, Path]) -> np.ndarray:
    """Read a dump written by dump_raw as (c, v, u) float32."""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"Cannot read raw dump {path}: {e}") from e
    header, _, body = data.partition(b"\n")
    fields = header.decode("ascii", errors="replace").split()
    if len(fields) != 3 or not fields[0].startswith("PF"):
        raise IoError(f"{path} is not a raw feature dump")
    try:
        count, width, height = int(fields[0][2:]), int(fields[1]), int(fields[2])
        return np.frombuffer(body, dtype=RAW_DTYPE).reshape(count, height, width)
    except ValueError as e:
        raise IoError(f"Malformed raw dump {path}: {e}") from e
