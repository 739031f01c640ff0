#pragma once

#include "nmlab/datasets.hpp"
#include "nmlab/errors.hpp"
#include "nmlab/tinynet.hpp"

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace nmlab {

template <typename Scalar>
struct SymmetricEigen {
  VectorX<Scalar> values;   // ascending
  MatrixX<Scalar> vectors;  // orthonormal columns, vectors.col(i) pairs with values[i]
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for a real symmetric matrix. Sweeps until the
/// off-diagonal Frobenius norm drops below `rel_tol * ||A||_F`.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> eig_sym(const Eigen::MatrixBase<Derived>& input,
                                                 typename Derived::Scalar rel_tol = 1e-12,
                                                 int max_sweeps = 100) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  if (input.rows() != input.cols()) throw InvalidInput("eig_sym needs a square matrix");
  const Eigen::Index n = input.rows();

  MatrixX<Scalar> a = input;
  const Scalar norm = a.norm();
  const Scalar asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (n > 0 && asym > Scalar(1e-9) * (Scalar(1) + norm))
    throw InvalidInput("eig_sym needs a symmetric matrix (symmetrize first)");
  a = (a + a.transpose()) / Scalar(2);

  SymmetricEigen<Scalar> out;
  out.vectors = MatrixX<Scalar>::Identity(n, n);

  auto off_norm = [&] {
    Scalar s(0);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return sqrt(s);
  };

  const Scalar target = rel_tol * norm;
  while (off_norm() > target && out.sweeps < max_sweeps) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        out.vectors.applyOnTheRight(p, q, rot);
        a(p, q) = a(q, p) = Scalar(0);
      }
    }
    ++out.sweeps;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  MatrixX<Scalar> sorted(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    sorted.col(k) = out.vectors.col(order[static_cast<std::size_t>(k)]);
  }
  out.vectors = std::move(sorted);
  return out;
}

enum class CriticalKind { NotCritical, LocalMinimum, Saddle, Degenerate };

const char* to_string(CriticalKind k);

struct Certificate {
  double grad_inf_norm = 0.0;
  Eigen::VectorXd eigenvalues;  // ascending, one per parameter
  CriticalKind classification = CriticalKind::NotCritical;
  double tol_grad = 1e-5;
  double tol_eig = 1e-8;  // relative; the band is tol_eig * max(1, largest eigenvalue)
  double loss_at_point = 0.0;
};

/// NotCritical if the gradient exceeds tol_grad; otherwise the sign of the
/// smallest Hessian eigenvalue against the band decides the verdict.
/// Throws NonSmoothPoint at ReLU kinks.
Certificate classify_critical(const AnyParams& p, const Dataset& d, LossKind kind, double tol_grad = 1e-5,
                              double tol_eig_rel = 1e-8);

/// The verdict rule on its own, for callers that already hold the spectrum.
CriticalKind classify_spectrum(double grad_inf_norm, const Eigen::VectorXd& ascending, double tol_grad,
                               double tol_eig_rel);

// ---------------------------------------------------------------------------
// Exact certificate for 1-D ReLU regression minima.
//
// Near p every (point, unit) pair keeps its activation state except pairs
// whose pre-activation is zero ("boundary" pairs). For each assignment of
// active/inactive to the boundary pairs the loss is exactly
//   || A z - y ||^2,   z = (v_1 w_1, .., v_m w_m, v_1 b_1, .., v_m b_m, c),
// with A fixed by the activation pattern. Expanding around z(p) gives
//   constant + linear . dz + dz^T Q dz,   Q = A^T A.
// A case is certified when the linear part vanishes and Q is PSD; the loss
// is then >= constant = loss(p) on the whole region of that pattern. All
// cases together cover a neighbourhood of p.

struct BoundaryPair {
  Eigen::Index point;
  Eigen::Index unit;
};

struct ReluCase {
  std::vector<bool> active;  // one flag per boundary pair
  Eigen::MatrixXd quadratic;
  Eigen::VectorXd linear;
  double constant = 0.0;
  double min_eigenvalue = 0.0;
  bool psd = false;
  bool linear_vanishes = false;
  bool certified() const { return psd && linear_vanishes; }
};

struct ReluProof {
  std::vector<BoundaryPair> boundary;
  std::vector<ReluCase> cases;
  double loss = 0.0;
  bool certified = false;
};

ReluProof certify_relu_min_exact(const ReluRegParams& p, const Dataset& d, double boundary_tol = 1e-9,
                                 double linear_tol = 1e-9, double psd_tol = 1e-10);

}  // namespace nmlab
