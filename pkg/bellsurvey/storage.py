"""
Read and write states, settings and reports on disk.
"""

import json
import logging
from pathlib import Path
from typing import Union

from bellsurvey.errors import ReportIOError, ValidationError
from bellsurvey.qcore import MeasurementSettings, PureState

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def write_text(path: PathLike, text: str) -> Path:
    """
    Write a text file, creating parent directories.

    Args:
        path: Destination file
        text: Content; written with "\\n" line endings on every platform

    Returns:
        The written path

    Raises:
        ReportIOError: the file could not be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    except OSError as e:
        logger.error(f"✗ Failed to write {path}: {str(e)}")
        raise ReportIOError(path, e.strerror or str(e)) from e
    logger.info(f"✓ Saved: {path}")
    return path


def read_text(path: PathLike) -> str:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            return f.read()
    except OSError as e:
        raise ReportIOError(path, e.strerror or str(e)) from e


def write_json(path: PathLike, data: dict) -> Path:
    return write_text(path, json.dumps(data, indent=2) + "\n")


def read_json(path: PathLike) -> dict:
    text = read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ReportIOError(path, f"invalid JSON: {str(e)}") from e


def parse_state(data: dict) -> PureState:
    """State document, optionally wrapped as {"state": {...}}"""
    if not isinstance(data, dict):
        raise ValidationError("state document must be a JSON object")
    return PureState.from_dict(data.get('state', data))


def save_state(path: PathLike, state: PureState) -> Path:
    return write_json(path, state.to_dict())


def load_state(path: PathLike) -> PureState:
    return parse_state(read_json(path))


def save_settings(path: PathLike, settings: MeasurementSettings) -> Path:
    return write_json(path, settings.to_dict())


def load_settings(path: PathLike) -> MeasurementSettings:
    data = read_json(path)
    if not isinstance(data, dict):
        raise ValidationError("settings document must be a JSON object")
    return MeasurementSettings.from_dict(data.get('settings', data))
