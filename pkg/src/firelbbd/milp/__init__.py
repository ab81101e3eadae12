"""MILP models, backends, the direct formulation and solution checking."""

from .direct import big_m, build_direct_mip, naive_big_m, plan_from_values
from .external import ExternalBackend, ExternalConfig, ExternalSolverError, find_cbc, solve_external
from .highs import HighsBackend, solve_milp
from .model import (
    BINARY,
    CONTINUOUS,
    BackendFailure,
    BackendResult,
    Column,
    Limits,
    MilpModel,
    ModelError,
    NeedsExternalBackend,
    Row,
)
from .reference import ReferenceBackend, solve_reference
from .verify import VerificationReport, verify_solution


def get_backend(name: str = "highs", config: ExternalConfig | None = None):
    """Backend by name: ``reference``, ``highs`` or ``external``."""
    if name == "reference":
        return ReferenceBackend()
    if name == "highs":
        return HighsBackend()
    if name == "external":
        config = config or ExternalConfig.from_env()
        if config is None:
            raise ExternalSolverError("no external solver configured (set FIRELBBD_SOLVER)")
        return ExternalBackend(config)
    raise ValueError(f"unknown backend {name!r}")


__all__ = [
    "BINARY", "CONTINUOUS", "BackendFailure", "BackendResult", "Column", "Limits", "MilpModel",
    "ModelError", "NeedsExternalBackend", "Row", "ReferenceBackend", "HighsBackend", "ExternalBackend",
    "ExternalConfig", "ExternalSolverError", "solve_reference", "solve_milp", "solve_external",
    "build_direct_mip", "big_m", "naive_big_m", "plan_from_values", "verify_solution",
    "VerificationReport", "get_backend", "find_cbc",
]
