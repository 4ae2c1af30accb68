// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace cfwpt {

/// Bad or inconsistent configuration (unknown key, violated invariant).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of an operation (d <= 0, empty active set, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Iterative or linear-algebra solver failure.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A policy or state violates a precondition of the state update.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace cfwpt
