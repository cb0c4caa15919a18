"""Adaptive backstepping with a global performance funnel.

Thin wrapper around the C++ core: run presets or INI configs, evaluate the
funnel transform, re-run the verification suites.
"""

from ._core import (  # noqa: F401
    DomainError,
    Error,
    FunnelViolation,
    InvalidArgument,
    preset_names,
    preset_text,
    psi_inverse,
    read_csv,
    run,
    transform,
    verify,
)

__all__ = [
    "DomainError",
    "Error",
    "FunnelViolation",
    "InvalidArgument",
    "preset_names",
    "preset_text",
    "psi_inverse",
    "read_csv",
    "run",
    "transform",
    "verify",
]
