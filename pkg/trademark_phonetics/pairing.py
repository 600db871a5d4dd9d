"""
Two-channel pair tensors and the red/green overlay views.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from trademark_phonetics.errors import DimensionMismatch
from trademark_phonetics.raster import PhoneticFeature, dump_raw, quantize, write_png

logger = logging.getLogger(__name__)

SIMILAR = 1
DISSIMILAR = 0
PAIR_DTYPE = np.float32


@dataclass
class PairTensor:
    """Channel 0 is the first mark, channel 1 the second; values scaled to [0, 1]."""
    channels: np.ndarray
    label: Optional[int] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.channels.shape

    def swapped(self) -> "PairTensor":
        return PairTensor(self.channels[::-1].copy(), self.label)


@dataclass
class PairSample:
    """A pair tensor with its similarity label and the record it came from."""
    pair: PairTensor
    label: int
    provenance: str = ""

    def __post_init__(self):
        if self.label not in (SIMILAR, DISSIMILAR):
            raise ValueError(f"Label must be 0 or 1, got {self.label!r}")


def compose_pair(a: PhoneticFeature, b: PhoneticFeature) -> PairTensor:
    """Stack two features as CNN input, each divided by its scale factor."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"Cannot pair features of shape {a.shape} and {b.shape}")
    channels = np.stack([a.grid / a.z, b.grid / b.z]).astype(PAIR_DTYPE)
    return PairTensor(channels)


def overlap_pixels(pair: PairTensor) -> int:
    """Pixels lit in both channels (the yellow part of the overlay)."""
    return int(np.count_nonzero((pair.channels[0] > 0) & (pair.channels[1] > 0)))


def _rgb(red: np.ndarray, green: np.ndarray) -> np.ndarray:
    height, width = red.shape
    rgb = np.zeros((height, width, 3), dtype=np.uint8)
    rgb[..., 0] = quantize(red, 1.0)
    rgb[..., 1] = quantize(green, 1.0)
    return rgb


def export_rgb_png(pair: PairTensor, path: Union[str, Path]):
    """
    Overlay PNG: R = first mark, G = second mark, B = 0.

    Pixels lit in both channels come out yellow.
    """
    write_png(_rgb(pair.channels[0], pair.channels[1]), path)
    logger.info(f"Wrote pair overlay to {path}")


def export_channel_views(
    pair: PairTensor,
    directory: Union[str, Path],
    stem: str = "pair"
) -> Tuple[Path, Path, Path]:
    """
    Write the red-only, green-only and combined views side by side.

    Returns:
        Paths of the red, green and overlay images
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    zeros = np.zeros_like(pair.channels[0])
    red_path = directory / f"{stem}_r.png"
    green_path = directory / f"{stem}_g.png"
    overlay_path = directory / f"{stem}_rgb.png"
    write_png(_rgb(pair.channels[0], zeros), red_path)
    write_png(_rgb(zeros, pair.channels[1]), green_path)
    write_png(_rgb(pair.channels[0], pair.channels[1]), overlay_path)
    logger.info(f"Wrote channel views for {stem} to {directory}")
    return red_path, green_path, overlay_path


def dump_pair_raw(pair: PairTensor, path: Union[str, Path]):
    """Raw `PF2` dump of both channels."""
    dump_raw(pair.channels, path)
