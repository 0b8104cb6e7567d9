"""Parsing of ``ISOTOWER_*`` environment values and comma-separated lists."""

import os
from typing import Any, List, Optional

ENV_PREFIX = "ISOTOWER_"

_TRUE_STRINGS = frozenset({"1", "true", "yes", "on"})
_FALSE_STRINGS = frozenset({"0", "false", "no", "off"})


def _clean(value: Any) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value).strip() or None


def env_name(key: str) -> str:
    """``"max_degree"`` -> ``"ISOTOWER_MAX_DEGREE"``; full names pass through."""
    return key if key.startswith(ENV_PREFIX) else ENV_PREFIX + key.upper()


def parse_bool(value: Any, default: Optional[bool] = None) -> Optional[bool]:
    if isinstance(value, bool):
        return value
    text = _clean(value)
    if text is None:
        return default
    lowered = text.lower()
    if lowered in _TRUE_STRINGS:
        return True
    if lowered in _FALSE_STRINGS:
        return False
    return default


def parse_int_list(value: Any) -> Optional[List[int]]:
    """
    Parse ``"1,3, 4"`` into ``[1, 3, 4]``.

    Blank input gives None; a non-integer item raises ValueError.
    """
    text = _clean(value)
    if text is None:
        return None
    return [int(part) for part in (item.strip() for item in text.split(",")) if part]


def get_env_int(
    var_name: str, default: Optional[int] = None, minimum: Optional[int] = None
) -> Optional[int]:
    """Integer from the environment; unset, malformed or below ``minimum`` gives ``default``."""
    text = _clean(os.getenv(env_name(var_name)))
    if text is None:
        return default
    try:
        value = int(text)
    except ValueError:
        return default
    if minimum is not None and value < minimum:
        return default
    return value


def get_env_bool(var_name: str, default: Optional[bool] = None) -> Optional[bool]:
    return parse_bool(os.getenv(env_name(var_name)), default=default)
