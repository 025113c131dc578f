"""Shared fixtures: a deterministic synthetic test scene and PGM helpers."""

import numpy as np
import pytest

from src.frame_io import save_frame
from src.models import Frame, FrameSequence


def make_test_image(size: int = 256) -> Frame:
    """Smooth gradient scene with two discs, intensities within [20, 235]."""
    y, x = np.mgrid[0:size, 0:size] * (256.0 / size)
    scene = 60.0 + 0.25 * x + 0.35 * y + 10.0 * np.sin(x / 20.0)
    scene[(x - 90) ** 2 + (y - 100) ** 2 < 40**2] += 40.0
    scene[(x - 180) ** 2 + (y - 170) ** 2 < 30**2] -= 40.0
    return Frame(data=np.rint(np.clip(scene, 20, 235)).astype(np.uint8))


def random_sequence(rng: np.random.Generator, height: int, width: int, n_frames: int):
    return FrameSequence.of(
        [
            Frame(data=rng.integers(0, 256, size=(height, width)))
            for _ in range(n_frames)
        ]
    )


@pytest.fixture(scope="session")
def test_image() -> Frame:
    return make_test_image(256)


@pytest.fixture(scope="session")
def small_image() -> Frame:
    return make_test_image(32)


@pytest.fixture
def write_frames(tmp_path):
    """Save frames as numbered PGMs and return their paths as strings."""

    def write(frames, prefix="frame"):
        paths = []
        for index, frame in enumerate(frames):
            path = tmp_path / f"{prefix}{index:02d}.pgm"
            save_frame(frame, path)
            paths.append(str(path))
        return paths

    return write
