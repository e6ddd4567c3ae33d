import logging
import os
import sys
import textwrap

import numpy as np
import pytest

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from src.data.config_loader import load_config, parse_config

CONFIG_DIR = os.path.join(project_root, "configs")


@pytest.fixture(autouse=True)
def restore_root_logging():
    """Undo the handlers the command line installs on the root logger"""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write_config(tmp_path):
    """Write INI text to a file and return its path"""

    def _write(text, name="experiment.ini"):
        path = tmp_path / name
        path.write_text(textwrap.dedent(text), encoding="utf-8")
        return str(path)

    return _write


@pytest.fixture
def make_config(tmp_path):
    """Parse INI text with the output directory pointed into tmp_path"""

    def _make(text, out="out"):
        config = parse_config(textwrap.dedent(text))
        return config.with_overrides(output_dir=str(tmp_path / out))

    return _make


@pytest.fixture
def shipped_config(tmp_path):
    """Load one of the configs/ files with output redirected into tmp_path"""

    def _load(name, **overrides):
        config = load_config(os.path.join(CONFIG_DIR, name))
        overrides.setdefault("output_dir", str(tmp_path / name.replace(".ini", "")))
        return config.with_overrides(**overrides)

    return _load
