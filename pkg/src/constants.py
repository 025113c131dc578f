"""Application constants and configuration."""

import os

# Application metadata
APP_VERSION = "0.1.0"
APP_NAME = "speckle-activity"

# Gray-level domain
GRAY_LEVELS = 256
MAX_INTENSITY = 255

# Activity analysis
DEFAULT_Z = int(os.getenv("SPECKLE_Z", "4"))
MAX_Z = int(os.getenv("SPECKLE_MAX_Z", "8"))
THRESHOLD_FRACTION = float(os.getenv("SPECKLE_THRESHOLD_FRACTION", "0.05"))

# Wavelet stage
DEFAULT_LEVELS = int(os.getenv("SPECKLE_LEVELS", "2"))
MAD_SCALE = 0.6745
HOMOMORPHIC_OFFSET = 1.0

# Noise synthesis and bench sweeps
DEFAULT_SEED = int(os.getenv("SPECKLE_SEED", "0"))
BENCH_VARIANCE_MIN = 0.001
BENCH_VARIANCE_MAX = 0.08
BENCH_POINTS = int(os.getenv("SPECKLE_BENCH_POINTS", "10"))
BENCH_SEEDS = int(os.getenv("SPECKLE_BENCH_SEEDS", "10"))
BENCH_FRAMES = int(os.getenv("SPECKLE_BENCH_FRAMES", "4"))

# Candidate thresholds for `detect --sweep-threshold`, as fractions of the
# activity-index maximum N_p * (N_F - 1) / N_F
SWEEP_FRACTIONS = (0.0, 0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)

# Output naming
DENOISED_SUFFIX = ".denoised.pgm"
REPORT_NAME = "report.json"
BENCH_MANIFEST_NAME = "bench_manifest.json"

# Logging
LOG_LEVEL = os.getenv("SPECKLE_LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
