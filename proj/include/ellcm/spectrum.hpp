#pragma once

#include <Eigen/Core>
#include <complex>
#include <limits>
#include <vector>

namespace ellcm {

/// Distance between two spectra taken as multisets: each value of `a` is paired
/// greedily with the nearest unused value of `b`; returns the worst pair.
template <typename Scalar>
double spectrum_distance(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
                         const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < b.size(); ++j)
      if (!used[j] && std::abs(a[i] - b[j]) < best) {
        best = std::abs(a[i] - b[j]);
        pick = j;
      }
    used[pick] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace ellcm
