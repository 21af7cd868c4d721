/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "nbmimo/linear.hpp"

#include <Eigen/Dense>

#include "nbmimo/common.hpp"

namespace nbmimo {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

LinearKind linear_kind_from_name(const std::string& name) {
  if (name == "mf") return LinearKind::MF;
  if (name == "zf") return LinearKind::ZF;
  if (name == "mmse") return LinearKind::MMSE;
  throw ConfigError("unknown linear detector: " + name);
}

std::uint64_t mmse_op_count(int n_ant, int k_users) {
  const std::uint64_t n2 = 2ull * n_ant, k2 = 2ull * k_users;
  // Gram matrix, Cholesky factorization, two triangular solves, H'y.
  return k2 * k2 * n2 + k2 * k2 * k2 / 3 + 2 * k2 * k2 + n2 * k2;
}

LinearResult linear_detect(LinearKind kind, const RealSystem& sys, const PamAlphabet& pam) {
  const int n2 = sys.n2, k2 = sys.k2;
  Eigen::Map<const RowMat> h(sys.h.data(), n2, k2);
  Eigen::Map<const Eigen::VectorXd> y(sys.y.data(), n2);

  LinearResult res;
  res.estimate.assign(k2, 0.0);
  Eigen::VectorXd est = Eigen::VectorXd::Zero(k2);

  switch (kind) {
    case LinearKind::MF: {
      for (int j = 0; j < k2; ++j) {
        const double nrm = h.col(j).squaredNorm();
        est(j) = nrm > 0.0 ? h.col(j).dot(y) / nrm : 0.0;
      }
      res.op_count = (std::uint64_t)n2 * k2 * 4;
      break;
    }
    case LinearKind::ZF: {
      Eigen::MatrixXd g = h.transpose() * h;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
      if (!lu.isInvertible()) {
        res.solver_ok = false;
      } else {
        est = lu.solve(h.transpose() * y);
      }
      res.op_count = mmse_op_count(n2 / 2, k2 / 2);
      break;
    }
    case LinearKind::MMSE: {
      Eigen::MatrixXd g = h.transpose() * h;
      g.diagonal().array() += sys.noise_var / pam.rail_energy;
      est = g.ldlt().solve(h.transpose() * y);
      res.op_count = mmse_op_count(n2 / 2, k2 / 2);
      break;
    }
  }

  for (int j = 0; j < k2; ++j) res.estimate[j] = est(j);
  res.decisions.resize(k2);
  res.posterior.k2 = k2;
  res.posterior.side = (int)pam.side;
  res.posterior.p.assign((std::size_t)k2 * pam.side, 0.0);
  for (int j = 0; j < k2; ++j) {
    const int idx = (int)pam.slice(est(j));
    res.decisions[j] = idx;
    res.posterior.p[(std::size_t)j * pam.side + idx] = 1.0;
  }
  return res;
}

}  // namespace nbmimo
