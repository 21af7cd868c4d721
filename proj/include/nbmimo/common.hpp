/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_COMMON_HPP
#define NBMIMO_COMMON_HPP

#include <stdexcept>
#include <string>

namespace nbmimo {

// Bad user-facing configuration (CLI/config file/preset lookup).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Construction that can fail for structural reasons the caller is expected to
// retry (e.g. a rank-deficient parity-check realization).
struct ConstructionError : std::runtime_error {
  explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nbmimo

#endif
