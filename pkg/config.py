import os
from dotenv import load_dotenv

load_dotenv()


def _int(name: str, default: int) -> int:
    return int(os.getenv(name, default))


def _float(name: str, default: float) -> float:
    return float(os.getenv(name, default))


class Config:
    # Quantifier elimination caps
    QE_MAX_CELLS = _int("DEFILAB_QE_MAX_CELLS", 20_000)
    QE_MAX_BITS = _int("DEFILAB_QE_MAX_BITS", 1_000_000)

    # Raster settings
    RASTER_MAX_BITS = _int("DEFILAB_RASTER_MAX_BITS", 2**31)
    THREADS = _int("DEFILAB_THREADS", 1)
    SEED = _int("DEFILAB_SEED", 0)

    # Recurrent complexity: radius doubling schedule
    STABILIZE_START_RADIUS = _int("DEFILAB_STABILIZE_START_RADIUS", 8)
    STABILIZE_MAX_RADIUS = _int("DEFILAB_STABILIZE_MAX_RADIUS", 512)
    STABILIZE_MAX_RADIUS_1D = _int("DEFILAB_STABILIZE_MAX_RADIUS_1D", 8192)
    STABILIZE_ROUNDS = _int("DEFILAB_STABILIZE_ROUNDS", 1)

    # Periodicity
    NEIGHBORHOOD = os.getenv("DEFILAB_NEIGHBORHOOD", "ball")  # "ball" or "cube"

    # Definability classifier
    CLASSIFY_N_MIN = _int("DEFILAB_CLASSIFY_N_MIN", 2)
    CLASSIFY_N_MAX = _int("DEFILAB_CLASSIFY_N_MAX", 6)
    CLASSIFY_N_MAX_1D = _int("DEFILAB_CLASSIFY_N_MAX_1D", 24)
    CLASSIFY_EXPONENT_MARGIN = _float("DEFILAB_CLASSIFY_EXPONENT_MARGIN", 0.5)
    CLASSIFY_MAX_RESIDUAL = _float("DEFILAB_CLASSIFY_MAX_RESIDUAL", 0.1)
    CLASSIFY_MIN_POINTS = _int("DEFILAB_CLASSIFY_MIN_POINTS", 5)
    CLASSIFY_MAX_SECONDS = _float("DEFILAB_CLASSIFY_MAX_SECONDS", 80.0)
    CLASSIFY_MAX_SECTIONS = _int("DEFILAB_CLASSIFY_MAX_SECTIONS", 40)
    ORACLE_SECTION_RANGE = _int("DEFILAB_ORACLE_SECTION_RANGE", 8)

    # Logging / metrics
    LOG_LEVEL = os.getenv("DEFILAB_LOG_LEVEL", "WARNING")
    METRICS_FILE = os.getenv("DEFILAB_METRICS_FILE", "")
    ENABLE_PERFORMANCE_TRACKING = os.getenv("DEFILAB_PERFORMANCE_TRACKING", "1") != "0"
