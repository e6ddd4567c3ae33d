"""
INI Config Loader

Reads a flat INI experiment file into an ExperimentConfig. List values use
two separators: ';' between items and ',' inside an item, e.g.

    [data]
    matrix = 2,0; 0,2
    rhs = 2, 4
    spider_points = 1:3; 2:1
"""

import configparser
import logging
import os

from pydantic import ValidationError

from src.data.schemas.experiment_config import ExperimentConfig
from src.utils.exceptions import ConfigError
from src.utils.settings import get_settings

logger = logging.getLogger(__name__)

SECTION_KEYS = {
    "experiment": {"problem", "iterations", "seeds", "mu", "start", "record_wall_time", "workers"},
    "space": {"dimension", "legs"},
    "data": {"points", "spider_points", "matrix", "rhs", "weights"},
    "generator": {"count", "seed", "low", "high", "noise"},
    "schedule": {"c", "p", "i0"},
    "output": {"directory"},
}


def _items(text, separator):
    return [item.strip() for item in text.split(separator) if item.strip()]


def parse_vector(text):
    """'1, 2.5, -3' -> [1.0, 2.5, -3.0]"""
    return [float(v) for v in _items(text, ",")]


def parse_rows(text):
    """'1,2; 3,4' -> [[1.0, 2.0], [3.0, 4.0]]"""
    return [parse_vector(row) for row in _items(text, ";")]


def parse_spider_points(text):
    """'1:3; 2:1' -> [(1, 3.0), (2, 1.0)]"""
    points = []
    for item in _items(text, ";"):
        leg, sep, radius = item.partition(":")
        if not sep:
            raise ValueError(f"spider point {item!r} is not of the form leg:radius")
        points.append((int(leg), float(radius)))
    return points


def parse_seeds(text):
    """'1, 2, 3' -> [1, 2, 3]"""
    return [int(v, 0) for v in _items(text, ",")]


def _check_sections(parser, path):
    for section in parser.sections():
        if section not in SECTION_KEYS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        unknown = set(parser[section]) - SECTION_KEYS[section]
        if unknown:
            raise ConfigError(f"{path}: unknown keys in [{section}]: {', '.join(sorted(unknown))}")


def config_payload(parser):
    """
    Turn a parsed INI file into the dictionary ExperimentConfig validates

    Args:
        parser (configparser.ConfigParser): Parsed file

    Returns:
        dict: Nested payload
    """
    payload = {}
    if parser.has_section("experiment"):
        section = parser["experiment"]
        for key in ("problem", "iterations", "start", "workers", "mu"):
            if key in section:
                payload[key] = section[key].strip()
        if "seeds" in section:
            payload["seeds"] = parse_seeds(section["seeds"])
        if "record_wall_time" in section:
            payload["record_wall_time"] = section.getboolean("record_wall_time")
    if parser.has_section("space"):
        for key in ("dimension", "legs"):
            if key in parser["space"]:
                payload[key] = parser["space"][key].strip()
    if parser.has_section("data"):
        section = parser["data"]
        data = {}
        if "points" in section:
            data["points"] = parse_rows(section["points"])
        if "spider_points" in section:
            data["spider_points"] = parse_spider_points(section["spider_points"])
        if "matrix" in section:
            data["matrix"] = parse_rows(section["matrix"])
        if "rhs" in section:
            data["rhs"] = parse_vector(section["rhs"])
        if "weights" in section:
            data["weights"] = parse_vector(section["weights"])
        payload["data"] = data
    if parser.has_section("generator"):
        payload["generator"] = {k: v.strip() for k, v in parser["generator"].items()}
    if parser.has_section("schedule"):
        payload["schedule"] = {k: v.strip() for k, v in parser["schedule"].items()}
    if parser.has_section("output") and "directory" in parser["output"]:
        payload["output_dir"] = parser["output"]["directory"].strip()
    return payload


def parse_config(text, source="<string>"):
    """
    Parse INI text into a validated config

    Raises:
        ConfigError: On unreadable syntax, unknown keys or invalid values
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
        _check_sections(parser, source)
        payload = config_payload(parser)
        payload.setdefault("output_dir", get_settings().output_dir)
        return ExperimentConfig.model_validate(payload)
    except ConfigError:
        raise
    except ValidationError as e:
        logger.error(f"Invalid config {source}: {e.error_count()} error(s)")
        raise ConfigError(f"{source}: invalid config\n{e}") from e
    except (configparser.Error, ValueError) as e:
        logger.error(f"Could not parse config {source}: {e}")
        raise ConfigError(f"{source}: {e}") from e


def load_config(path):
    """
    Read and validate an experiment config file

    Args:
        path (str): Path of the INI file

    Returns:
        ExperimentConfig: The validated config
    """
    if not os.path.exists(path):
        logger.error(f"Config file not found: {path}")
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        logger.error(f"Error reading config {path}: {e}")
        raise ConfigError(f"{path}: {e}") from e
    config = parse_config(text, source=path)
    logger.info(f"Loaded {config.problem.value} config from {path} (sha256 {config.config_hash()[:12]})")
    return config
