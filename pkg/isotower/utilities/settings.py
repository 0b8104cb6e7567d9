"""Runtime limits, read once from the environment."""

from dataclasses import dataclass, fields, replace
from typing import Any, Dict

from .common import get_env_bool, get_env_int


@dataclass(frozen=True)
class Settings:
    max_degree: int = 200
    vertex_budget: int = 20000
    trace_budget: int = 1_000_000
    torsion_budget: int = 10_000
    sample_retries: int = 20
    matcher_limit: int = 64
    jobs: int = 1
    seed: int = 0
    progress: bool = False

    def with_overrides(self, **changes: Any) -> "Settings":
        """Return a copy with every non-None keyword applied."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def load_settings() -> Settings:
    """
    Settings from ``ISOTOWER_<FIELD>`` variables.

    Budgets and ``jobs`` must be positive; anything else keeps the default.
    """
    defaults = Settings()
    values: Dict[str, Any] = {}
    for item in fields(Settings):
        default = getattr(defaults, item.name)
        if item.type in (bool, "bool"):
            values[item.name] = bool(get_env_bool(item.name, default))
        elif item.name == "seed":
            values[item.name] = get_env_int(item.name, default)
        else:
            values[item.name] = get_env_int(item.name, default, minimum=1)
    return Settings(**values)
