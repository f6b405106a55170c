import math
from pathlib import Path
from typing import Any

import numpy as np

from ._errors import ConfigError


def ensure_output_dir(path: Path) -> Path:
    """
    Create the output directory when missing.

    :param path: the directory
    :return: the directory
    :raises ConfigError: when the path exists and is not a directory
    """
    if path.exists():
        if not path.is_dir():
            raise ConfigError(f"output path {path} is not a directory", path=str(path))
    else:
        path.mkdir(parents=True)
    return path


def jsonable(value: Any) -> Any:
    """
    Convert a result to plain JSON types.

    ``nan`` becomes ``null`` and infinities become the strings ``"inf"`` / ``"-inf"``, keeping the output strict JSON.
    """
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return None
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return number
    if value is None or isinstance(value, str):
        return value
    return str(value)


__all__ = [
    "ensure_output_dir",
    "jsonable",
]
