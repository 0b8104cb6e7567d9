"""Configuration helpers shared by the library and the CLI."""

from .common import (
    env_name,
    get_env_bool,
    get_env_int,
    parse_bool,
    parse_int_list,
)
from .parallel import run_ordered
from .settings import Settings, load_settings

__all__ = [
    "Settings",
    "env_name",
    "get_env_bool",
    "get_env_int",
    "load_settings",
    "parse_bool",
    "parse_int_list",
    "run_ordered",
]
