import importlib.metadata
from pathlib import Path

import numpy as np
import tomli


def get_version():
    """
    Get the jjosc package version.

    Tries to get the version from:
    1. pyproject.toml file (preferred for development)
    2. Package metadata (when installed and no pyproject.toml)
    3. Hardcoded fallback if both methods fail

    Returns:
        str: The version string
    """
    try:
        current_dir = Path(__file__).resolve().parent
        # current dir + 4 levels up
        for _ in range(5):
            pyproject_path = current_dir / "pyproject.toml"
            if pyproject_path.exists():
                with open(pyproject_path, "rb") as f:
                    pyproject_data = tomli.load(f)
                if pyproject_data.get("tool", {}).get("poetry", {}).get("name") == "jjosc":
                    version = pyproject_data["tool"]["poetry"].get("version")
                    if version:
                        return version
            current_dir = current_dir.parent
    except (OSError, tomli.TOMLDecodeError):
        pass

    try:
        return importlib.metadata.version("jjosc")
    except importlib.metadata.PackageNotFoundError:
        pass

    return "0.3.0"


def get_numpy_version_info():
    """
    Get the numerical backend versions.

    Returns:
        tuple: (numpy_version, float_type)
    """
    return np.__version__, str(np.dtype(float))
