#pragma once

#include <span>
#include <vector>

namespace motionkit {

// Symmetric matrix with two sub/super-diagonals:
//   diag[i] = A(i, i), off1[i] = A(i, i+1), off2[i] = A(i, i+2).
struct SymmetricPentadiagonal {
  std::vector<double> diag;
  std::vector<double> off1;
  std::vector<double> off2;

  explicit SymmetricPentadiagonal(std::size_t n = 0)
      : diag(n, 0.0), off1(n > 0 ? n - 1 : 0, 0.0), off2(n > 1 ? n - 2 : 0, 0.0) {}
  std::size_t size() const { return diag.size(); }
};

// Banded LDL^T factorization; the matrix must be positive definite
// (throws NumericalError on a non-positive pivot).
class PentadiagonalLdlt {
 public:
  explicit PentadiagonalLdlt(const SymmetricPentadiagonal& a);
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  std::vector<double> d_;
  std::vector<double> l1_;  // L(i, i-1)
  std::vector<double> l2_;  // L(i, i-2)
};

}  // namespace motionkit
