"""Services module for subatomic-kernel."""

from subatomic_kernel.services.system_service import (
    SystemDef,
    builtin_names,
    lint_splittable,
    load_builtin,
    load_system,
    reset_builtin_cache,
    resolve_system,
)

__all__ = [
    "SystemDef",
    "builtin_names",
    "lint_splittable",
    "load_builtin",
    "load_system",
    "reset_builtin_cache",
    "resolve_system",
]
