"""
CSV Output for Traces and Summaries

Every file starts with two comment lines echoing the config:

    # config_sha256=<hex>
    # config=<canonical json>

followed by a pandas CSV with a header row, floats printed with 17
significant digits and "NA" for missing values. Output is a pure function
of the frame and the config, so re-runs are byte-identical.
"""

import logging
import os

import pandas as pd

from src.utils.exceptions import OutputError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
NA_REP = "NA"


def config_header(config):
    return f"# config_sha256={config.config_hash()}\n# config={config.canonical_json()}\n"


def frame_to_text(frame, config):
    """Header lines plus CSV body"""
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep=NA_REP, lineterminator="\n")
    return config_header(config) + body


def ensure_directory(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        logger.error(f"Cannot create output directory {path}: {e}")
        raise OutputError(f"Cannot create output directory {path}: {e}") from e
    return path


def write_frame(frame, path, config):
    """
    Write a frame with the config echo

    Args:
        frame (pandas.DataFrame): Table to write
        path (str): Destination file
        config (ExperimentConfig): Config echoed in the header

    Returns:
        str: The path written
    """
    text = frame_to_text(frame, config)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        logger.error(f"Error writing {path}: {e}")
        raise OutputError(f"Error writing {path}: {e}") from e
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def read_header(path):
    """
    Read the config echo of an output file

    Returns:
        tuple: (config sha256, config json)
    """
    with open(path, encoding="utf-8") as f:
        first = f.readline().rstrip("\n")
        second = f.readline().rstrip("\n")
    if not first.startswith("# config_sha256=") or not second.startswith("# config="):
        raise OutputError(f"{path} has no config header")
    return first.split("=", 1)[1], second.split("=", 1)[1]


def read_frame(path):
    """Read an output file back into a DataFrame (header lines skipped)"""
    return pd.read_csv(path, comment="#", na_values=[NA_REP], keep_default_na=False)
