#pragma once

#include "nmlab/datasets.hpp"
#include "nmlab/tinynet.hpp"

#include <Eigen/Dense>

#include <functional>
#include <random>

namespace testing {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline VectorXd uniform_vector(std::mt19937_64& rng, Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline nmlab::Dataset random_classification(std::mt19937_64& rng, Index n) {
  MatrixXd x = uniform_vector(rng, 2 * n, -3, 3).reshaped(n, 2);
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) y[i] = static_cast<double>(rng() & 1u);
  return nmlab::make_dataset(nmlab::Task::Classification, x, y);
}

inline nmlab::Dataset random_regression(std::mt19937_64& rng, Index n, Index dim) {
  MatrixXd x = uniform_vector(rng, n * dim, -3, 3).reshaped(n, dim);
  return nmlab::make_dataset(nmlab::Task::Regression, x, uniform_vector(rng, n, -3, 3));
}

inline VectorXd central_difference(const std::function<double(const VectorXd&)>& f, const VectorXd& at,
                                   double step) {
  VectorXd g(at.size());
  VectorXd p = at;
  for (Index i = 0; i < at.size(); ++i) {
    p[i] = at[i] + step;
    const double up = f(p);
    p[i] = at[i] - step;
    const double down = f(p);
    p[i] = at[i];
    g[i] = (up - down) / (2 * step);
  }
  return g;
}

/// max_i |a_i - b_i| / max(1, |b|_inf)
inline double rel_error(const VectorXd& a, const VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

inline double max_abs_diff(const MatrixXd& a, const MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testing
