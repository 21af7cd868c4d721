/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_LINEAR_HPP
#define NBMIMO_LINEAR_HPP

#include <cstdint>
#include <vector>

#include "nbmimo/channel.hpp"
#include "nbmimo/constellation.hpp"
#include "nbmimo/nbbp.hpp"

namespace nbmimo {

enum class LinearKind { MF, ZF, MMSE };

LinearKind linear_kind_from_name(const std::string& name);

struct LinearResult {
  std::vector<double> estimate;  // unquantized per-rail estimates
  std::vector<int> decisions;    // sliced level indices
  PosteriorTable posterior;      // point masses on the decisions
  bool solver_ok = true;         // false when ZF meets a singular Gram matrix
  std::uint64_t op_count = 0;    // dense-algebra operation count
};

// MF:   x_j = h_j'y / |h_j|^2   (per-column rescaled matched filter)
// ZF:   x   = (H'H)^-1 H'y
// MMSE: x   = (H'H + (sigma^2/Es) I)^-1 H'y, Es the rail symbol energy
LinearResult linear_detect(LinearKind kind, const RealSystem& sys, const PamAlphabet& pam);

// Operation count of the dense MMSE detector including the factorization.
std::uint64_t mmse_op_count(int n_ant, int k_users);

}  // namespace nbmimo

#endif
