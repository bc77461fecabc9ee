import json
import os

import numpy as np
import toml

CSV_FORMAT = "%.12g"


def _plain(value):
    """JSON fallback for numpy scalars and arrays"""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(data):
    """Serialize with shortest round-trip floats (at most 17 significant digits)"""
    return json.dumps(data, default=_plain, sort_keys=True)


def save_json(data, filename):
    _ensure_parent(filename)
    with open(filename, "w", encoding="utf-8", newline="\n") as file:
        file.write(to_json(data))
        file.write("\n")


def save_csv(columns, header, filename):
    """Write equal-length columns with a header row naming each column and its unit"""
    _ensure_parent(filename)
    table = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(filename, "w", encoding="utf-8", newline="\n") as file:
        file.write(",".join(header) + "\n")
        np.savetxt(file, table, delimiter=",", fmt=CSV_FORMAT)


def load_csv(filename):
    return np.loadtxt(filename, delimiter=",", skiprows=1, ndmin=2)


def read_config(filename):
    """Read a JSON or TOML configuration; returns (settings or None, message)"""
    if not os.path.exists(filename):
        return None, f"Error: config file {filename} not found"
    try:
        with open(filename, "r", encoding="utf-8") as file:
            if filename.endswith(".toml"):
                settings = toml.load(file)
            else:
                settings = json.load(file)
    except (OSError, ValueError, toml.TomlDecodeError) as e:
        return None, f"Error reading {filename}: {e}"
    if not isinstance(settings, dict):
        return None, f"Error: {filename} does not hold a table of settings"
    return settings, f"Loaded {len(settings)} settings from {filename}"


def read_array(filename):
    """Load a .npy array; returns (array or None, message)"""
    if not os.path.exists(filename):
        return None, f"Error: data file {filename} not found"
    try:
        data = np.load(filename, allow_pickle=False)
    except (OSError, ValueError) as e:
        return None, f"Error reading {filename}: {e}"
    return data, f"Successfully loaded {filename} with shape {data.shape}"


def _ensure_parent(filename):
    parent = os.path.dirname(filename)
    if parent:
        os.makedirs(parent, exist_ok=True)
