import os
import logging
from dataclasses import dataclass

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Load environment variables
load_dotenv()


@dataclass(frozen=True)
class Settings:
    """Process-wide settings read from the environment"""
    output_dir: str
    log_level: str
    max_workers: int
    check_trials: int


def _int_from_env(name, default, minimum=1):
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.error(f"{name}={raw!r} is not an integer")
        raise ValueError(f"{name} must be an integer")
    if value < minimum:
        logger.error(f"{name}={value} is below the minimum {minimum}")
        raise ValueError(f"{name} must be >= {minimum}")
    return value


def get_settings():
    """Get settings from environment variables (and .env if present)"""
    return Settings(
        output_dir=os.getenv("SPPA_OUTPUT_DIR", "results"),
        log_level=os.getenv("SPPA_LOG_LEVEL", "INFO").upper(),
        max_workers=_int_from_env("SPPA_MAX_WORKERS", 1),
        check_trials=_int_from_env("SPPA_CHECK_TRIALS", 10000),
    )


def configure_logging(level=None, log_file=None):
    """
    Configure root logging the same way for every entry point

    Args:
        level (str): Log level name, defaults to SPPA_LOG_LEVEL
        log_file (str): Optional file to mirror the stream output into
    """
    if level is None:
        level = get_settings().log_level
    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
