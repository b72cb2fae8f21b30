#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "mapsel/rng.hpp"

namespace mapsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

// numerical rank and spectral norm from one SVD pass
inline std::pair<int, double> rank_and_norm(const Matrix& m, double rel_tol) {
  if (m.rows() < 1 || m.cols() < 1)
    throw std::invalid_argument("rank: matrix must be non-empty");
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  if (!(top > 0.0)) return {0, 0.0};
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * top) ++r;
  return {r, top};
}

}  // namespace detail

// relative singular-value cutoff; same convention the pseudo-inverse uses
inline int compute_rank(const Matrix& m, double rel_tol) {
  return detail::rank_and_norm(m, rel_tol).first;
}

inline double default_rank_tol(const Matrix& m) {
  return double(std::max(m.rows(), m.cols())) *
         std::numeric_limits<double>::epsilon();
}

// An n x p design together with its numerical rank r = rank(X).  All model
// sizes are capped at r; the cap is what makes the saturated-size convention
// well defined.
struct DesignMatrix {
  Matrix X;
  double rank_tol;
  int rank;
  double spectral_norm;

  explicit DesignMatrix(Matrix m, double tol = -1.0)
      : X(std::move(m)),
        rank_tol(tol >= 0 ? tol : default_rank_tol(X)),
        rank(0),
        spectral_norm(0) {
    const auto [r, top] = detail::rank_and_norm(X, rank_tol);
    rank = r;
    spectral_norm = top;
  }

  int n() const { return int(X.rows()); }
  int p() const { return int(X.cols()); }
};

// identity-column design: columns are the first p standard basis vectors
inline DesignMatrix make_orthonormal_design(int n, int p) {
  if (n < 1 || p < 1 || p > n)
    throw std::invalid_argument("orthonormal design needs 1 <= p <= n");
  return DesignMatrix(Matrix::Identity(n, p));
}

// X'X equal to the equicorrelation matrix (1-rho) I + rho 11': the top p x p
// block is the symmetric square root a I + b 11', rows below are zero.
inline DesignMatrix make_equicorrelated_design(int n, int p, double rho) {
  if (n < 1 || p < 1 || p > n)
    throw std::invalid_argument("equicorrelated design needs 1 <= p <= n");
  if (!(rho >= 0.0 && rho < 1.0))
    throw std::invalid_argument("equicorrelated design needs rho in [0,1)");
  const double a = std::sqrt(1.0 - rho);
  const double b = (std::sqrt(1.0 + (p - 1) * rho) - a) / p;
  Matrix X = Matrix::Zero(n, p);
  X.topLeftCorner(p, p).setConstant(b);
  X.topLeftCorner(p, p).diagonal().array() += a;
  return DesignMatrix(std::move(X));
}

inline DesignMatrix make_iid_gaussian_design(int n, int p, std::uint64_t seed) {
  if (n < 1 || p < 1)
    throw std::invalid_argument("design needs n >= 1, p >= 1");
  const CounterRng rng(seed, stream_id(RngStream::design));
  Matrix X(n, p);
  std::uint64_t pos = 0;
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = rng.normal_at(pos++);
  return DesignMatrix(std::move(X));
}

}  // namespace mapsel
