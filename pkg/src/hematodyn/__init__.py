"""Delay model of hematopoietic stem cell dynamics: stability analysis and simulation."""
from .errors import ConfigError, DomainError, IntegrationError, NoPositiveSteadyState
from .model import (
    ConstantHistory,
    GenericBeta,
    HillBeta,
    ModelParams,
    SteadyState,
    TableHistory,
    steady_positive,
)

__all__ = [
    "ConfigError",
    "ConstantHistory",
    "DomainError",
    "GenericBeta",
    "HillBeta",
    "IntegrationError",
    "ModelParams",
    "NoPositiveSteadyState",
    "SteadyState",
    "TableHistory",
    "steady_positive",
]
