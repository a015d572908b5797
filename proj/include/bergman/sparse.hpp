#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bergman {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Square matrix in compressed sparse row form.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Builds an n x n matrix, summing duplicate entries.
  static CsrMatrix from_triplets(std::size_t n, std::vector<Triplet> entries);

  std::size_t size() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t nonzeros() const { return values_.size(); }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }

  /// y = A x
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> diagonal() const;

 private:
  std::vector<std::size_t> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> values_;
};

class LinearSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CgOptions {
  double rel_tol = 1e-10;
  int max_iter = 0;  // 0 selects 50 * sqrt(unknowns)
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite
/// A; x holds the initial guess on entry. Does not throw on non-convergence.
CgResult conjugate_gradient(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                            const CgOptions& options = {});

}  // namespace bergman
