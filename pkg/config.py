"""
config.py - Central Configuration

All settings in one place. No magic numbers scattered throughout the code.
Library functions take explicit arguments; values here are only defaults.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

# ============================================================
# PATHS
# ============================================================
BASE_DIR = Path(__file__).parent
LOGS_DIR = Path(os.getenv("HEXASHRINK_LOGS_DIR", str(BASE_DIR / "logs")))


def ensure_dirs():
    """Create output directories (called by the CLI, not at import)."""
    LOGS_DIR.mkdir(exist_ok=True)


# ============================================================
# QUANTIZATION (fixed-point working domain)
# ============================================================
GEOMETRY_SCALE = int(os.getenv("HEXASHRINK_GEOMETRY_SCALE", "1000"))
PROPERTY_SCALE = int(os.getenv("HEXASHRINK_PROPERTY_SCALE", "1000000"))

# Signed working range of every transform (62 bits leaves sign + guard bit)
WORKING_BITS = 62

# ============================================================
# GRDECL
# ============================================================
PROPERTY_KEYWORDS = ("PORO", "NTG", "SATNUM", "ROCKTYPE", "FIPNUM")
PROPERTY_PREFIXES = ("PERM",)           # PERMX, PERMY, PERMZ, ...
CATEGORICAL_KEYWORDS = ("SATNUM", "ROCKTYPE", "FIPNUM")

RLE_MIN_RUN = 4          # Constant runs this long are written as N*V
VALUES_PER_LINE = 8

# ============================================================
# CODECS
# ============================================================
DEFAULT_CODEC = os.getenv("HEXASHRINK_CODEC", "deflate")

# Codec per payload kind (approx | detail | activity | selection)
DEFAULT_CODECS = {
    "approx": os.getenv("HEXASHRINK_CODEC_APPROX", DEFAULT_CODEC),
    "detail": os.getenv("HEXASHRINK_CODEC_DETAIL", DEFAULT_CODEC),
    "activity": os.getenv("HEXASHRINK_CODEC_ACTIVITY", DEFAULT_CODEC),
    "selection": os.getenv("HEXASHRINK_CODEC_SELECTION", DEFAULT_CODEC),
}

CODEC_LEVELS = {
    "deflate": 9,
    "bwt-block": 9,
    "lz-markov": 6,
}

# ============================================================
# TRANSFORMS
# ============================================================
FAULT_EPSILON = int(os.getenv("HEXASHRINK_FAULT_EPSILON", "0"))
ALLOW_HORIZONTAL_FAULTS = os.getenv("HEXASHRINK_ALLOW_HORIZONTAL_FAULTS", "false").lower() == "true"

# Slab streaming: levels computed per slab before switching to whole-grid
STREAM_LEVELS = int(os.getenv("HEXASHRINK_STREAM_LEVELS", "2"))

# ============================================================
# CONCURRENCY
# ============================================================
THREADS = max(1, int(os.getenv("HEXASHRINK_THREADS", str(os.cpu_count() or 1))))

# ============================================================
# REPORTING
# ============================================================
REPORT_FORMAT = os.getenv("HEXASHRINK_REPORT_FORMAT", "text")   # text | csv

# ============================================================
# BENCHMARK FIXTURES (generator specs, not data files)
# ============================================================
BENCH_FIXTURES = {
    "smooth": {
        "ni": 64, "nj": 64, "nk": 64, "seed": 1,
        "anticline_amplitude": 40.0, "rock_types": 4,
        "rock_proportions": (0.4, 0.3, 0.2, 0.1),
    },
    "faulted": {
        "ni": 48, "nj": 40, "nk": 20, "seed": 2,
        "faults": (("i", 24, 50.0), ("j", 13, 30.0)),
        "rock_types": 3,
    },
    "carved": {
        "ni": 40, "nj": 40, "nk": 16, "seed": 3,
        "active_fraction": 0.20, "rock_types": 2,
    },
    "interpolated": {
        "ni": 40, "nj": 30, "nk": 24, "seed": 4,
        "integer_depths": True, "rock_types": 3,
    },
}

# ============================================================
# LOGGING
# ============================================================
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
LOG_TO_FILE = os.getenv("HEXASHRINK_LOG_TO_FILE", "true").lower() == "true"
