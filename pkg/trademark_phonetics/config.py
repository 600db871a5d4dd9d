"""
Environment configuration.
Values come from the process environment, optionally seeded from a .env file.
"""
import os
import logging
from pathlib import Path
from typing import Optional
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_DICTIONARY_PATH = DATA_DIR / "dictionary.tsv"
DEFAULT_LEXICON_PATH = DATA_DIR / "lexicon.tsv"

LOG_FORMAT = "%(asctime)s [%(levelname)8s] %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def dictionary_path(override: Optional[str] = None) -> Path:
    """Dictionary file: explicit override, then PF_DICT, then the bundled copy."""
    return Path(override or os.getenv("PF_DICT") or DEFAULT_DICTIONARY_PATH)


def lexicon_path(override: Optional[str] = None) -> Path:
    """Pronunciation lexicon: explicit override, then PF_LEXICON, then the bundled copy."""
    return Path(override or os.getenv("PF_LEXICON") or DEFAULT_LEXICON_PATH)


def log_level() -> int:
    name = os.getenv("PF_LOG_LEVEL", "INFO").upper()
    return getattr(logging, name, logging.INFO)


def worker_count() -> int:
    """Threads used to featurize dataset records."""
    return max(1, int(os.getenv("PF_WORKERS", "4")))


def benchmark_enabled() -> bool:
    return os.getenv("PF_RUN_BENCHMARK", "") == "1"


def configure_logging(level: Optional[int] = None):
    """Send human-readable logs to standard error."""
    logging.basicConfig(
        level=level if level is not None else log_level(),
        format=LOG_FORMAT,
        datefmt=LOG_DATE_FORMAT,
        force=True,
    )
