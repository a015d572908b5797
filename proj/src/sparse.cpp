#include <bergman/sparse.hpp>

#include <algorithm>
#include <cmath>

namespace bergman {

CsrMatrix CsrMatrix::from_triplets(std::size_t n, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  CsrMatrix m;
  m.row_ptr_.assign(n + 1, 0);
  m.cols_.reserve(entries.size());
  m.values_.reserve(entries.size());
  std::size_t i = 0;
  while (i < entries.size()) {
    const int r = entries[i].row, c = entries[i].col;
    if (r < 0 || c < 0 || static_cast<std::size_t>(r) >= n || static_cast<std::size_t>(c) >= n)
      throw std::out_of_range("sparse entry outside the matrix");
    double v = 0.0;
    for (; i < entries.size() && entries[i].row == r && entries[i].col == c; ++i) v += entries[i].value;
    m.cols_.push_back(c);
    m.values_.push_back(v);
    ++m.row_ptr_[r + 1];
  }
  for (std::size_t r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  const std::size_t n = size();
  y.assign(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[cols_[k]];
    y[r] = s;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(size(), 0.0);
  for (std::size_t r = 0; r < size(); ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      if (static_cast<std::size_t>(cols_[k]) == r) d[r] += values_[k];
  return d;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

CgResult conjugate_gradient(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                            const CgOptions& options) {
  const std::size_t n = A.size();
  if (b.size() != n) throw std::invalid_argument("conjugate_gradient: size mismatch");
  if (x.size() != n) x.assign(n, 0.0);
  CgResult result;
  if (n == 0) {
    result.converged = true;
    return result;
  }
  const int cap = options.max_iter > 0
                      ? options.max_iter
                      : std::max(10, static_cast<int>(std::ceil(50.0 * std::sqrt(static_cast<double>(n)))));

  std::vector<double> inv_diag = A.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw LinearSolveError("conjugate_gradient: matrix has a nonpositive diagonal entry");
    d = 1.0 / d;
  }

  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    result.converged = true;
    return result;
  }
  std::vector<double> r(n), z(n), p(n), ap(n);
  A.multiply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  double rnorm = std::sqrt(dot(r, r));
  if (rnorm <= options.rel_tol * bnorm) {
    result.relative_residual = rnorm / bnorm;
    result.converged = true;
    return result;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= cap; ++it) {
    A.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw LinearSolveError("conjugate_gradient: matrix is not positive definite");
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    rnorm = std::sqrt(dot(r, r));
    result.iterations = it;
    result.relative_residual = rnorm / bnorm;
    if (rnorm <= options.rel_tol * bnorm) {
      result.converged = true;
      return result;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return result;
}

}  // namespace bergman
