#pragma once

#include <cmath>
#include <stdexcept>

#include "mapsel/design.hpp"
#include "mapsel/model.hpp"

namespace mapsel {

// Neumaier-compensated sum of squares; plain accumulation sheds digits on
// long residual vectors and the penalties we compare against are O(sigma^2).
inline double sum_of_squares(const Vector& v) {
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double term = v(i) * v(i);
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

inline double squared_distance(const Vector& a, const Vector& b) {
  return sum_of_squares(a - b);
}

struct FitResult {
  Vector beta;    // length p, zero outside the model
  Vector fitted;  // X * beta
  double rss = 0.0;
};

inline Matrix select_columns(const Matrix& X, const ModelIndicator& M) {
  Matrix sub(X.rows(), M.size());
  for (int c = 0; c < M.size(); ++c) sub.col(c) = X.col(M.indices()[c]);
  return sub;
}

// Least squares restricted to the model's columns.  Rank-deficient
// submatrices get the minimum-norm solution (pseudo-inverse of the masked
// normal equations), with the design's own rank tolerance.
inline FitResult least_squares_fit(const DesignMatrix& design, const Vector& y,
                                   const ModelIndicator& M) {
  const int n = design.n();
  const int p = design.p();
  if (int(y.size()) != n)
    throw std::invalid_argument("least_squares_fit: y length does not match n");
  if (!M.empty() && M.indices().back() >= p)
    throw std::invalid_argument("least_squares_fit: model index out of range");

  FitResult fit;
  fit.beta = Vector::Zero(p);
  if (M.empty()) {
    fit.fitted = Vector::Zero(n);
    fit.rss = sum_of_squares(y);
    return fit;
  }

  const Matrix sub = select_columns(design.X, M);
  Eigen::JacobiSVD<Matrix> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(design.rank_tol);
  const Vector coef = svd.solve(y);
  for (int c = 0; c < M.size(); ++c) fit.beta(M.indices()[c]) = coef(c);
  fit.fitted = sub * coef;
  fit.rss = sum_of_squares(y - fit.fitted);
  return fit;
}

// RSS(M \ {j}) - RSS(M); clamped at zero, the exact value is nonnegative
inline double rss_delta_drop(const DesignMatrix& design, const Vector& y,
                             const ModelIndicator& M, int j) {
  if (!M.contains(j))
    throw std::invalid_argument("rss_delta_drop: j is not in the model");
  const double with = least_squares_fit(design, y, M).rss;
  const double without = least_squares_fit(design, y, M.without(j)).rss;
  return std::max(0.0, without - with);
}

struct ProjectionResult {
  Vector projected;
  double bias_sq = 0.0;  // squared distance from mu to its projection
};

// project a mean vector onto span of the model's columns
inline ProjectionResult mean_projection(const DesignMatrix& design,
                                        const Vector& mu,
                                        const ModelIndicator& M) {
  const FitResult fit = least_squares_fit(design, mu, M);
  return {fit.fitted, fit.rss};
}

}  // namespace mapsel
