"""Config-file support for the CLI: ``key = value`` lines, ``#`` comments.

Keys mirror flag names with dashes replaced by underscores; a value given on
the command line always overrides the file.
"""

from __future__ import annotations

from .errors import ParameterError


def parse_config(path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            if not key:
                raise ParameterError(f"{path}:{lineno}: empty key")
            values[key] = value.strip()
    return values


def coerce(value: str, like) -> object:
    """Convert a config string to the type of an existing default."""
    if isinstance(like, bool):
        lowered = value.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ParameterError(f"expected a boolean, got {value!r}")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value
