__version__ = "0.1.0"
__author__ = "Ayoub Abidi"
__email__ = "contact@ayoub3bidi.me"

from .core import (
    BudgetExceededError,
    FieldTooSmallError,
    InconsistentStructureError,
    IsotowerError,
    ValidationError,
    VerificationError,
)
from .graphs import (
    BuildParams,
    TectonicParams,
    build_graph,
    build_tower,
    build_voltage,
    cm_order_profile,
    generate,
    profile_craters,
    recognize,
)
from .utilities import Settings, load_settings

__all__ = [
    "BudgetExceededError",
    "BuildParams",
    "FieldTooSmallError",
    "InconsistentStructureError",
    "IsotowerError",
    "Settings",
    "TectonicParams",
    "ValidationError",
    "VerificationError",
    "__version__",
    "build_graph",
    "build_tower",
    "build_voltage",
    "cm_order_profile",
    "generate",
    "load_settings",
    "profile_craters",
    "recognize",
]
