#pragma once

#include <Eigen/Dense>
#include <vector>

namespace grasplearn {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  bool converged = false;
};

/// Lawson-Hanson active-set nonnegative least squares:
/// min ||A x - b|| subject to x >= 0. Sized for small dense systems
/// (a handful of contacts, a few dozen columns).
inline NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                       double tol = 1e-12, int max_iterations = 0) {
  const int n = static_cast<int>(a.cols());
  NnlsResult result;
  result.x = Eigen::VectorXd::Zero(n);
  if (n == 0) {
    result.residual_norm = b.norm();
    result.converged = true;
    return result;
  }
  if (max_iterations <= 0) max_iterations = 3 * n + 30;

  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
    }
    z.setZero(n);
    if (idx.empty()) return;
    Eigen::MatrixXd ap(a.rows(), static_cast<int>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      ap.col(static_cast<int>(k)) = a.col(idx[k]);
    }
    Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      z[idx[k]] = zp[static_cast<int>(k)];
    }
  };

  for (int outer = 0; outer < max_iterations; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    int best = -1;
    double best_w = tol;
    for (int i = 0; i < n; ++i) {
      if (!passive[static_cast<std::size_t>(i)] && w[i] > best_w) {
        best_w = w[i];
        best = i;
      }
    }
    if (best < 0) break;  // KKT satisfied
    passive[static_cast<std::size_t>(best)] = true;

    Eigen::VectorXd z;
    for (int inner = 0; inner < max_iterations; ++inner) {
      solve_passive(z);
      double alpha = 1.0;
      bool all_positive = true;
      for (int i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)] && z[i] <= 0.0) {
          all_positive = false;
          const double step = x[i] / (x[i] - z[i]);
          alpha = std::min(alpha, step);
        }
      }
      if (all_positive) {
        x = z;
        break;
      }
      x += alpha * (z - x);
      for (int i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)] && x[i] <= tol) {
          passive[static_cast<std::size_t>(i)] = false;
          x[i] = 0.0;
        }
      }
    }
  }

  result.x = x.cwiseMax(0.0);
  result.residual_norm = (a * result.x - b).norm();
  result.converged = true;
  return result;
}

}  // namespace grasplearn
