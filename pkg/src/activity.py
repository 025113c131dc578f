"""Histogram, region boundaries, granular count and activity index.

The histogram and the region partition are preset stages: the partition is
computed once from the shared histogram and every frame of the sequence is
classified against it. The granular stage then counts, per pixel position,
how often the region changes between successive frames.
"""

import bisect
import logging
from typing import Optional, Tuple

import numpy as np

from .constants import GRAY_LEVELS, MAX_INTENSITY, MAX_Z
from .errors import (
    DataError,
    InvalidPixelCount,
    InvalidWidth,
    InvalidZ,
    PartitionMismatch,
    TooManyRegions,
)
from .models import (
    ActivityReport,
    FrameSequence,
    GranuleCounters,
    HistScope,
    Histogram,
    RegionPartition,
)

logger = logging.getLogger(__name__)


def compute_histogram(
    seq: FrameSequence, scope: HistScope = HistScope.SEQUENCE
) -> Histogram:
    """Count pixels per gray level over the whole sequence (or its first frame)."""
    if scope == HistScope.FIRST_FRAME:
        pixels = seq.frames[0].data.ravel()
    else:
        pixels = seq.stack().ravel()
    bins = np.bincount(pixels, minlength=GRAY_LEVELS)
    histogram = Histogram(bins=bins.astype(np.int64).tolist())
    logger.info(f"Histogram built from {histogram.total} pixels (scope={scope.value})")
    return histogram


def closes_region(acc: int, following: int, total: int, n_regions: int) -> bool:
    """
    Greedy stop rule, evaluated exactly on integers scaled by 2Z-1.

    ``acc`` is the count accumulated up to bin i, ``following`` the count of
    bin i+1 and N_m = total / n_regions.
    """
    if acc == 0:
        return False
    if acc * n_regions >= total:
        return True
    if following == 0:
        return False
    return abs(acc * n_regions - total) <= abs((acc + following) * n_regions - total)


def compute_region_boundaries(hist: Histogram, z: int) -> RegionPartition:
    """
    Split [0, 255] into 2Z-1 contiguous ranges of roughly N_m pixels each.

    Bins are accumulated from the current start; a region closes at bin i
    once it holds pixels and either already reaches N_m or adding bin i+1
    would not bring the count closer to N_m (ties close at i). Bin i+1 opens
    the next region and the last region runs to 255.

    Raises:
        InvalidZ: z outside 1..MAX_Z
        InvalidPixelCount: empty histogram
        TooManyRegions: some region would receive no pixels or no gray level
    """
    if not 1 <= z <= MAX_Z:
        raise InvalidZ(f"Z must lie in 1..{MAX_Z}, got {z}")
    total = hist.total
    if total <= 0:
        raise InvalidPixelCount("cannot partition an empty histogram")

    bins = hist.bins
    n_regions = 2 * z - 1
    target = total / n_regions
    regions = []
    counts = []
    start = 0
    for k in range(n_regions - 1):
        # every later region keeps at least one gray level
        cap = MAX_INTENSITY - (n_regions - 1 - k)
        acc = 0
        stop = None
        for i in range(start, cap + 1):
            acc += bins[i]
            if closes_region(acc, bins[i + 1], total, n_regions):
                stop = i
                break
        if stop is None:
            raise TooManyRegions(
                f"cannot form {n_regions} non-empty regions for Z={z}: "
                f"region {k} exhausts the histogram"
            )
        regions.append((start, stop))
        counts.append(acc)
        start = stop + 1

    last = total - sum(counts)
    if last == 0:
        raise TooManyRegions(
            f"cannot form {n_regions} non-empty regions for Z={z}: "
            "no pixels remain for the last region"
        )
    regions.append((start, MAX_INTENSITY))
    counts.append(last)

    logger.debug(f"Region limits for Z={z}: {regions} (counts {counts})")
    return RegionPartition(z=z, regions=regions, target=target, counts=counts)


def assign_region(partition: RegionPartition, intensity: int) -> int:
    """Index of the region whose limits contain ``intensity``."""
    if not 0 <= intensity <= MAX_INTENSITY:
        raise DataError(f"intensity {intensity} outside [0, 255]")
    uppers = [hi for _, hi in partition.regions]
    return bisect.bisect_left(uppers, intensity)


def default_register_width(n_frames: int) -> int:
    """ceil(log2(N_F)) bits, at least one: counters never exceed N_F - 1."""
    return max(1, (n_frames - 1).bit_length())


def compute_granular(
    seq: FrameSequence,
    partition: RegionPartition,
    register_width: Optional[int] = None,
) -> Tuple[GranuleCounters, ActivityReport]:
    """
    Count region transitions of every pixel between successive frames.

    ``per_region_granules[k]`` counts the maximal runs of consecutive frames in
    which a pixel stays in region k, summed over pixels.
    """
    lut = partition.lookup_table()
    if lut.shape != (GRAY_LEVELS,) or partition.regions[-1][1] != MAX_INTENSITY:
        raise PartitionMismatch("partition does not cover the 8-bit intensity domain")
    width = register_width or default_register_width(seq.count)

    classes = lut[seq.stack()].reshape(seq.count, -1)
    changes = classes[1:] != classes[:-1]
    flags = changes.sum(axis=0, dtype=np.int64)

    if flags.size and int(flags.max()) >= 1 << width:
        raise InvalidWidth(
            f"a granule counter reached {int(flags.max())}, "
            f"which does not fit in {width} bits"
        )

    run_starts = np.ones_like(classes, dtype=bool)
    run_starts[1:] = changes
    per_region = np.bincount(classes[run_starts], minlength=len(partition.regions))

    report = ActivityReport(
        granular_count=int(flags.sum()),
        frames_used=seq.count,
        per_region_granules=per_region.astype(np.int64).tolist(),
    )
    logger.info(
        f"Granular count {report.granular_count} over {seq.count} frames, "
        f"activity index {report.activity_index:.6g}"
    )
    return GranuleCounters(flags=flags, register_width=width), report


def histogram_memory_bits(n_p: int) -> int:
    """H_mem = 256 x ceil(log2 N_p)."""
    if n_p < 1:
        raise InvalidPixelCount(f"pixel count must be at least 1, got {n_p}")
    return GRAY_LEVELS * (n_p - 1).bit_length()


def counter_memory_bits(n_p: int, l: int) -> int:  # noqa: E741
    """C_mem = N_p x L."""
    if n_p < 1:
        raise InvalidPixelCount(f"pixel count must be at least 1, got {n_p}")
    if l < 1:
        raise InvalidWidth(f"register width must be at least 1, got {l}")
    return n_p * l


def analyze(
    seq: FrameSequence,
    z: int,
    scope: HistScope = HistScope.SEQUENCE,
    register_width: Optional[int] = None,
) -> Tuple[RegionPartition, GranuleCounters, ActivityReport]:
    """Histogram, partition and granular stages in one call."""
    partition = compute_region_boundaries(compute_histogram(seq, scope), z)
    counters, report = compute_granular(seq, partition, register_width)
    return partition, counters, report
