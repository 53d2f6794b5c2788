#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "swapcomb/action.hpp"

namespace swapcomb {

// Eigenvalues at or below rank_tol * lambda_max are treated as zero.
inline constexpr double kDefaultRankTol = 1e-10;

// Dense symmetric matrix with full row-major storage. Writes go through
// set()/add() which keep both triangles identical.
class SymMatrix {
 public:
  explicit SymMatrix(std::size_t dim);
  static SymMatrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }
  void set(std::size_t i, std::size_t j, double v);
  void add(std::size_t i, std::size_t j, double v);
  // this += weight * M M^T
  void add_outer(const Action& m, double weight);
  // this += weight * v v^T
  void add_outer(std::span<const double> v, double weight);

  Vector multiply(std::span<const double> x) const;
  SymMatrix product_sym(const SymMatrix& other) const;  // assumes the product is symmetric
  double max_abs() const;
  double frobenius() const;
  const std::vector<double>& data() const { return a_; }

 private:
  std::size_t dim_;
  std::vector<double> a_;
};

// General dense row-major product helper for tests and identities.
std::vector<double> matmul(const SymMatrix& a, const SymMatrix& b);

struct EigenDecomp {
  Vector values;               // descending
  std::vector<Vector> vectors;  // vectors[i] pairs with values[i], orthonormal
  int sweeps = 0;
};

// Cyclic Jacobi rotations; stops once the off-diagonal Frobenius norm is at
// most 1e-12 * ||A||_F or after 100 sweeps.
EigenDecomp eigen_sym(const SymMatrix& a);

// Sigma = sum_M p(M) M M^T over the sparse support.
SymMatrix co_occurrence(const Policy& policy);

SymMatrix pseudo_inverse(const SymMatrix& sigma, double rank_tol = kDefaultRankTol);
SymMatrix pseudo_inverse(const EigenDecomp& eig, double rank_tol = kDefaultRankTol);

double min_nonzero_eigenvalue(const SymMatrix& sigma, double rank_tol = kDefaultRankTol);
double min_nonzero_eigenvalue(const EigenDecomp& eig, double rank_tol = kDefaultRankTol);
std::size_t numerical_rank(const EigenDecomp& eig, double rank_tol = kDefaultRankTol);

// Sigma Sigma^+ x: orthogonal projection of x onto the range of Sigma.
Vector span_project(const SymMatrix& sigma, const SymMatrix& sigma_plus,
                    std::span<const double> x);

// Dense LU with partial pivoting on a column-major square matrix. Used for
// determinants and solves in the spanner construction.
class LuDecomp {
 public:
  // cols[j] is column j.
  explicit LuDecomp(const std::vector<Vector>& cols);
  double determinant() const;
  bool singular() const { return singular_; }
  // Solve A x = b.
  Vector solve(std::span<const double> b) const;
  // Solve A^T x = b.
  Vector solve_transpose(std::span<const double> b) const;

 private:
  std::size_t n_;
  std::vector<double> lu_;  // row-major
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

}  // namespace swapcomb
