# Copyright 2026 The cfwpt Authors
# SPDX-License-Identifier: Apache-2.0
"""Scheduler simulator for wirelessly powered cell-free IoT networks."""

from ._core import (
    ConfigError,
    ContractError,
    DomainError,
    SolverError,
    bar_gamma,
    config,
    fading_map,
    fixed_point,
    simulate,
    validate,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DomainError",
    "SolverError",
    "bar_gamma",
    "config",
    "fading_map",
    "fixed_point",
    "simulate",
    "validate",
]
