"""PGM (P2/P5) ingestion and persistence for frames and frame sequences."""

import logging
import re
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
from PIL import Image

from .constants import MAX_INTENSITY
from .errors import (
    BitDepthUnsupported,
    IoFailure,
    MalformedHeader,
    MissingFile,
    TruncatedData,
)
from .models import Frame, FrameSequence

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SUBFORMATS = (b"P2", b"P5")
PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_COMMENT = re.compile(rb"#[^\n\r]*")


def _read_token(data: bytes, pos: int) -> Tuple[bytes, int]:
    """Next whitespace-delimited header token, skipping '#' comments."""
    size = len(data)
    while pos < size:
        if data[pos : pos + 1].isspace():
            pos += 1
        elif data[pos : pos + 1] == b"#":
            while pos < size and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < size and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise MalformedHeader("unexpected end of PGM header")
    return data[start:pos], pos


def _header_int(data: bytes, pos: int, name: str) -> Tuple[int, int]:
    token, pos = _read_token(data, pos)
    try:
        return int(token), pos
    except ValueError:
        raise MalformedHeader(f"PGM {name} is not an integer: {token!r}")


def parse_pgm(data: bytes, source: str = "<bytes>") -> Frame:
    """Decode an in-memory P2 or P5 image."""
    subformat = data[:2]
    if subformat not in SUBFORMATS:
        raise MalformedHeader(f"{source}: unknown PGM subformat {subformat!r}")
    pos = 2
    width, pos = _header_int(data, pos, "width")
    height, pos = _header_int(data, pos, "height")
    maxval, pos = _header_int(data, pos, "maxval")
    if width < 1 or height < 1:
        raise MalformedHeader(f"{source}: invalid dimensions {width}x{height}")
    if maxval != MAX_INTENSITY:
        raise BitDepthUnsupported(f"{source}: maxval {maxval}, only 255 is supported")

    expected = width * height
    if subformat == b"P5":
        # a comment may follow maxval; then exactly one whitespace byte precedes the raster
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        payload = data[pos + 1 : pos + 1 + expected]
        if len(payload) < expected:
            raise TruncatedData(
                f"{source}: expected {expected} pixel bytes, found {len(payload)}"
            )
        pixels = np.frombuffer(payload, dtype=np.uint8)
    else:
        tokens = _COMMENT.sub(b" ", data[pos:]).split()
        if len(tokens) < expected:
            raise TruncatedData(
                f"{source}: expected {expected} samples, found {len(tokens)}"
            )
        try:
            pixels = np.array([int(token) for token in tokens[:expected]], dtype=np.int64)
        except ValueError:
            raise MalformedHeader(f"{source}: non-integer sample in P2 raster")
        if pixels.min() < 0 or pixels.max() > maxval:
            raise BitDepthUnsupported(f"{source}: sample outside [0, {maxval}]")
    return Frame(data=pixels.reshape(height, width))


def load_frame(path: PathLike, allow_png: bool = False) -> Frame:
    """
    Load one 8-bit grayscale frame.

    Args:
        path: PGM file (P2 or P5, maxval 255)
        allow_png: accept PNG input, converted to 8-bit grayscale

    Returns:
        Frame: pixels exactly as stored

    Raises:
        MissingFile, MalformedHeader, BitDepthUnsupported, TruncatedData
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such frame file: {path}")
    try:
        data = path.read_bytes()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}")

    if data.startswith(PNG_SIGNATURE):
        if not allow_png:
            raise MalformedHeader(f"{path}: PNG input requires the explicit PNG flag")
        logger.warning(f"Converting PNG {path} to 8-bit grayscale")
        with Image.open(path) as image:
            return Frame(data=np.asarray(image.convert("L"), dtype=np.uint8))

    frame = parse_pgm(data, source=str(path))
    logger.debug(f"Loaded {path} ({frame.width}x{frame.height})")
    return frame


def encode_pgm(frame: Frame) -> bytes:
    header = f"P5\n{frame.width} {frame.height}\n{MAX_INTENSITY}\n".encode("ascii")
    return header + frame.data.astype(np.uint8).tobytes()


def save_frame(frame: Frame, path: PathLike) -> None:
    """Write a frame as binary P5 PGM with maxval 255."""
    path = Path(path)
    try:
        path.write_bytes(encode_pgm(frame))
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}")
    logger.debug(f"Wrote {path}")


def load_sequence(paths: Sequence[PathLike], allow_png: bool = False) -> FrameSequence:
    """Load frames in the given order; all must share width and height."""
    frames: List[Frame] = [load_frame(path, allow_png=allow_png) for path in paths]
    sequence = FrameSequence.of(frames)
    logger.info(
        f"Loaded sequence of {sequence.count} frames "
        f"({sequence.width}x{sequence.height})"
    )
    return sequence
