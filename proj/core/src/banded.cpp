#include "motionkit/banded.hpp"

#include <cmath>
#include <string>

#include "motionkit/error.hpp"

namespace motionkit {

PentadiagonalLdlt::PentadiagonalLdlt(const SymmetricPentadiagonal& a)
    : d_(a.size(), 0.0), l1_(a.size(), 0.0), l2_(a.size(), 0.0) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 2) l2_[i] = a.off2[i - 2] / d_[i - 2];
    if (i >= 1) {
      double v = a.off1[i - 1];
      if (i >= 2) v -= l2_[i] * l1_[i - 1] * d_[i - 2];
      l1_[i] = v / d_[i - 1];
    }
    double di = a.diag[i];
    if (i >= 1) di -= l1_[i] * l1_[i] * d_[i - 1];
    if (i >= 2) di -= l2_[i] * l2_[i] * d_[i - 2];
    if (!(di > 0.0) || !std::isfinite(di)) {
      throw NumericalError("pentadiagonal LDLt: non-positive pivot at row " + std::to_string(i));
    }
    d_[i] = di;
  }
}

std::vector<double> PentadiagonalLdlt::solve(std::span<const double> rhs) const {
  const std::size_t n = d_.size();
  if (rhs.size() != n) {
    throw ValidationError("pentadiagonal solve: rhs has " + std::to_string(rhs.size()) + " entries, expected " +
                          std::to_string(n));
  }
  std::vector<double> x(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 1) x[i] -= l1_[i] * x[i - 1];
    if (i >= 2) x[i] -= l2_[i] * x[i - 2];
  }
  for (std::size_t i = 0; i < n; ++i) x[i] /= d_[i];
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) x[i] -= l1_[i + 1] * x[i + 1];
    if (i + 2 < n) x[i] -= l2_[i + 2] * x[i + 2];
  }
  return x;
}

}  // namespace motionkit
