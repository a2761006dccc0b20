"""Parser for the flat key=value configuration dialect used by the CLI."""

from __future__ import annotations

from .errors import ConfigError


def parse_kv(text: str) -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment, blanks are skipped."""
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def as_float(entries: dict[str, str], key: str) -> float:
    try:
        return float(entries[key])
    except KeyError:
        raise ConfigError(f"missing key {key!r}") from None
    except ValueError:
        raise ConfigError(f"key {key!r} is not numeric: {entries[key]!r}") from None


def as_int(entries: dict[str, str], key: str) -> int:
    value = as_float(entries, key)
    if value != int(value):
        raise ConfigError(f"key {key!r} must be an integer, got {entries[key]!r}")
    return int(value)
