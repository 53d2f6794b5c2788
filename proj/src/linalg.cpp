#include "swapcomb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "swapcomb/error.hpp"

namespace swapcomb {

SymMatrix::SymMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "SymMatrix dimension must be >= 1");
}

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.a_[i * dim + i] = 1.0;
  return m;
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
  a_[i * dim_ + j] = v;
  a_[j * dim_ + i] = v;
}

void SymMatrix::add(std::size_t i, std::size_t j, double v) {
  a_[i * dim_ + j] += v;
  if (i != j) a_[j * dim_ + i] += v;
}

void SymMatrix::add_outer(const Action& m, double weight) {
  const auto idx = m.ones();
  for (std::size_t x = 0; x < idx.size(); ++x) {
    const std::size_t i = idx[x];
    a_[i * dim_ + i] += weight;
    for (std::size_t y = x + 1; y < idx.size(); ++y) {
      const std::size_t j = idx[y];
      a_[i * dim_ + j] += weight;
      a_[j * dim_ + i] += weight;
    }
  }
}

void SymMatrix::add_outer(std::span<const double> v, double weight) {
  for (std::size_t i = 0; i < dim_; ++i) {
    const double wi = weight * v[i];
    if (wi == 0.0) continue;
    a_[i * dim_ + i] += wi * v[i];
    for (std::size_t j = i + 1; j < dim_; ++j) {
      const double x = wi * v[j];
      a_[i * dim_ + j] += x;
      a_[j * dim_ + i] += x;
    }
  }
}

Vector SymMatrix::multiply(std::span<const double> x) const {
  Vector y(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    const double* row = &a_[i * dim_];
    for (std::size_t j = 0; j < dim_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> matmul(const SymMatrix& a, const SymMatrix& b) {
  const std::size_t n = a.dim();
  std::vector<double> c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aik * b(k, j);
    }
  }
  return c;
}

SymMatrix SymMatrix::product_sym(const SymMatrix& other) const {
  const auto c = matmul(*this, other);
  SymMatrix out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i; j < dim_; ++j) {
      out.set(i, j, 0.5 * (c[i * dim_ + j] + c[j * dim_ + i]));
    }
  }
  return out;
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

double SymMatrix::frobenius() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

EigenDecomp eigen_sym(const SymMatrix& input) {
  const std::size_t n = input.dim();
  std::vector<double> a = input.data();
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double scale = input.frobenius();
  int sweeps = 0;
  if (scale > 0.0) {
    const double target = 1e-12 * scale;
    for (; sweeps < 100; ++sweeps) {
      double off = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i != j) off += a[i * n + j] * a[i * n + j];
        }
      }
      if (std::sqrt(off) <= target) break;

      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = a[p * n + q];
          if (apq == 0.0) continue;
          const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
          double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;

          for (std::size_t k = 0; k < n; ++k) {
            const double akp = a[k * n + p];
            const double akq = a[k * n + q];
            a[k * n + p] = c * akp - s * akq;
            a[k * n + q] = s * akp + c * akq;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const double apk = a[p * n + k];
            const double aqk = a[q * n + k];
            a[p * n + k] = c * apk - s * aqk;
            a[q * n + k] = s * apk + c * aqk;
          }
          a[p * n + q] = 0.0;
          a[q * n + p] = 0.0;
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = v[k * n + p];
            const double vkq = v[k * n + q];
            v[k * n + p] = c * vkp - s * vkq;
            v[k * n + q] = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a[x * n + x] > a[y * n + y];
  });

  EigenDecomp out;
  out.sweeps = sweeps;
  out.values.reserve(n);
  out.vectors.reserve(n);
  for (std::size_t idx : order) {
    out.values.push_back(a[idx * n + idx]);
    Vector col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k * n + idx];
    out.vectors.push_back(std::move(col));
  }
  return out;
}

SymMatrix co_occurrence(const Policy& policy) {
  if (policy.empty()) throw Error(ErrorCode::kEmptySupport, "co_occurrence of an empty policy");
  SymMatrix sigma(policy.dim());
  for (const auto& atom : policy.atoms()) sigma.add_outer(atom.action, atom.weight);
  return sigma;
}

namespace {

double lambda_max(const EigenDecomp& eig) {
  return eig.values.empty() ? 0.0 : std::max(0.0, eig.values.front());
}

void check_psd(const EigenDecomp& eig) {
  const double lmax = lambda_max(eig);
  const double lmin = eig.values.back();
  if (lmin < -1e-9 * std::max(lmax, 1e-300) && lmin < 0.0) {
    std::ostringstream os;
    os << "eigenvalue " << lmin << " below -1e-9 * lambda_max (" << lmax << ")";
    throw Error(ErrorCode::kNotPsd, os.str());
  }
}

}  // namespace

SymMatrix pseudo_inverse(const EigenDecomp& eig, double rank_tol) {
  if (!(rank_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rank_tol must be positive");
  check_psd(eig);
  const std::size_t n = eig.values.size();
  const double cutoff = rank_tol * lambda_max(eig);
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = eig.values[i];
    if (lam <= cutoff || lam <= 0.0) continue;
    out.add_outer(eig.vectors[i], 1.0 / lam);
  }
  return out;
}

SymMatrix pseudo_inverse(const SymMatrix& sigma, double rank_tol) {
  return pseudo_inverse(eigen_sym(sigma), rank_tol);
}

double min_nonzero_eigenvalue(const EigenDecomp& eig, double rank_tol) {
  const double cutoff = rank_tol * lambda_max(eig);
  double best = 0.0;
  for (double lam : eig.values) {
    if (lam > cutoff && lam > 0.0) best = lam;  // values are descending
  }
  return best;
}

double min_nonzero_eigenvalue(const SymMatrix& sigma, double rank_tol) {
  return min_nonzero_eigenvalue(eigen_sym(sigma), rank_tol);
}

std::size_t numerical_rank(const EigenDecomp& eig, double rank_tol) {
  const double cutoff = rank_tol * lambda_max(eig);
  std::size_t r = 0;
  for (double lam : eig.values) {
    if (lam > cutoff && lam > 0.0) ++r;
  }
  return r;
}

Vector span_project(const SymMatrix& sigma, const SymMatrix& sigma_plus,
                    std::span<const double> x) {
  if (sigma.dim() != sigma_plus.dim() || sigma.dim() != x.size()) {
    throw Error(ErrorCode::kInvalidArgument, "span_project dimension mismatch");
  }
  const Vector y = sigma_plus.multiply(x);
  return sigma.multiply(y);
}

LuDecomp::LuDecomp(const std::vector<Vector>& cols) : n_(cols.size()), lu_(n_ * n_), perm_(n_) {
  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t i = 0; i < n_; ++i) lu_[i * n_ + j] = cols[j][i];
  }
  std::iota(perm_.begin(), perm_.end(), 0);
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_[k * n_ + k]);
    for (std::size_t i = k + 1; i < n_; ++i) {
      const double v = std::abs(lu_[i * n_ + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) {
      singular_ = true;
      continue;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n_; ++j) std::swap(lu_[k * n_ + j], lu_[piv * n_ + j]);
      std::swap(perm_[k], perm_[piv]);
      sign_ = -sign_;
    }
    const double pivot = lu_[k * n_ + k];
    for (std::size_t i = k + 1; i < n_; ++i) {
      const double f = lu_[i * n_ + k] / pivot;
      lu_[i * n_ + k] = f;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n_; ++j) lu_[i * n_ + j] -= f * lu_[k * n_ + j];
    }
  }
}

double LuDecomp::determinant() const {
  if (singular_) return 0.0;
  double det = sign_;
  for (std::size_t k = 0; k < n_; ++k) det *= lu_[k * n_ + k];
  return det;
}

Vector LuDecomp::solve(std::span<const double> b) const {
  if (singular_) throw Error(ErrorCode::kInvalidArgument, "solve with a singular LU factor");
  Vector y(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = b[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu_[i * n_ + j] * y[j];
    y[i] = s;
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n_; ++j) s -= lu_[ii * n_ + j] * y[j];
    y[ii] = s / lu_[ii * n_ + ii];
  }
  return y;
}

Vector LuDecomp::solve_transpose(std::span<const double> b) const {
  if (singular_) throw Error(ErrorCode::kInvalidArgument, "solve with a singular LU factor");
  // P A = L U  =>  A^T = U^T L^T P, solve U^T z = b, L^T w = z, x = P^T w.
  Vector z(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < i; ++j) s -= lu_[j * n_ + i] * z[j];
    z[i] = s / lu_[i * n_ + i];
  }
  Vector w(n_);
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = z[ii];
    for (std::size_t j = ii + 1; j < n_; ++j) s -= lu_[j * n_ + ii] * w[j];
    w[ii] = s;
  }
  Vector x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = w[i];
  return x;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace swapcomb
