"""
Binary checkpoint format for CNN parameters and optimizer state.

    PFCNN1 | uint32 LE header length | canonical JSON header |
    parameter arrays (LE float32, declaration order) | Adam m | Adam v
"""
import json
import struct
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from trademark_phonetics.errors import FormatVersionMismatch, IoError
from trademark_phonetics.neuralnet import PARAM_NAMES, AdamState, CnnConfig, CnnParams

logger = logging.getLogger(__name__)

MAGIC = b"PFCNN1"
FORMAT_VERSION = 1
ARRAY_DTYPE = np.dtype("<f4")
_LENGTH = struct.Struct("<I")


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _pack_arrays(params: CnnParams) -> bytes:
    return b"".join(
        np.ascontiguousarray(array, dtype=ARRAY_DTYPE).tobytes() for _, array in params.arrays()
    )


def save_checkpoint(
    params: CnnParams,
    state: Optional[AdamState],
    config: CnnConfig,
    path: Union[str, Path]
):
    """Write parameters, and Adam moments when given, to `path`."""
    shapes = config.param_shapes()
    for name, array in params.arrays():
        if array.shape != shapes[name]:
            raise FormatVersionMismatch(f"{name} has shape {array.shape}, config says {shapes[name]}")

    header = _canonical_json({
        "format": FORMAT_VERSION,
        "config": config.to_dict(),
        "adam_t": state.t if state is not None else 0,
        "has_state": state is not None,
    })
    body = [MAGIC, _LENGTH.pack(len(header)), header, _pack_arrays(params)]
    if state is not None:
        body.extend([_pack_arrays(state.m), _pack_arrays(state.v)])

    try:
        Path(path).write_bytes(b"".join(body))
    except OSError as e:
        raise IoError(f"Cannot write checkpoint {path}: {e}") from e
    logger.info(f"Saved checkpoint to {path} (adam step {state.t if state else 0})")


def _unpack_arrays(data: bytes, offset: int, shapes: Dict[str, Tuple[int, ...]]) -> Tuple[CnnParams, int]:
    arrays = {}
    for name in PARAM_NAMES:
        count = int(np.prod(shapes[name]))
        array = np.frombuffer(data, dtype=ARRAY_DTYPE, count=count, offset=offset)
        arrays[name] = array.reshape(shapes[name]).astype(np.float32)
        offset += count * ARRAY_DTYPE.itemsize
    return CnnParams(**arrays), offset


def load_checkpoint(
    path: Union[str, Path],
    expected: Optional[CnnConfig] = None
) -> Tuple[CnnParams, Optional[AdamState], CnnConfig]:
    """
    Read a checkpoint written by save_checkpoint.

    Args:
        path: checkpoint file
        expected: when given, the stored architecture must match it

    Returns:
        Parameters, Adam state (None if not stored) and the stored config

    Raises:
        IoError: the file cannot be read
        FormatVersionMismatch: bad magic, header, length or architecture
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"Cannot read checkpoint {path}: {e}") from e

    prefix = len(MAGIC) + _LENGTH.size
    if len(data) < prefix or not data.startswith(MAGIC):
        raise FormatVersionMismatch(f"{path} is not a {MAGIC.decode()} checkpoint")
    (header_length,) = _LENGTH.unpack_from(data, len(MAGIC))
    if prefix + header_length > len(data):
        raise FormatVersionMismatch(f"{path}: header runs past end of file")

    try:
        header = json.loads(data[prefix:prefix + header_length].decode("utf-8"))
        if not isinstance(header, dict):
            raise FormatVersionMismatch(f"{path}: header is not a JSON object")
        if header.get("format") != FORMAT_VERSION:
            raise FormatVersionMismatch(f"{path}: unsupported format {header.get('format')!r}")
        config = CnnConfig.from_dict(header["config"])
        has_state = bool(header["has_state"])
        adam_t = int(header["adam_t"])
    except FormatVersionMismatch:
        raise
    except (ValueError, KeyError, TypeError) as e:
        raise FormatVersionMismatch(f"{path}: malformed header: {e}") from e

    if expected is not None and config.param_shapes() != expected.param_shapes():
        raise FormatVersionMismatch(
            f"{path}: stored architecture {config.param_shapes()} differs from {expected.param_shapes()}"
        )

    shapes = config.param_shapes()
    block = sum(int(np.prod(shape)) for shape in shapes.values()) * ARRAY_DTYPE.itemsize
    expected_length = prefix + header_length + block * (3 if has_state else 1)
    if len(data) != expected_length:
        raise FormatVersionMismatch(
            f"{path}: expected {expected_length} bytes, found {len(data)} (truncated or padded)"
        )

    offset = prefix + header_length
    params, offset = _unpack_arrays(data, offset, shapes)
    state = None
    if has_state:
        m, offset = _unpack_arrays(data, offset, shapes)
        v, offset = _unpack_arrays(data, offset, shapes)
        state = AdamState(m, v, adam_t)
    logger.debug(f"Loaded checkpoint {path} (has_state={has_state}, adam step {adam_t})")
    return params, state, config
