#include "nmlab/certify.hpp"

#include <cmath>
#include <map>

namespace nmlab {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::NotCritical: return "NotCritical";
    case CriticalKind::LocalMinimum: return "LocalMinimum";
    case CriticalKind::Saddle: return "Saddle";
    case CriticalKind::Degenerate: return "Degenerate";
  }
  return "?";
}

CriticalKind classify_spectrum(double grad_inf_norm, const VectorXd& ascending, double tol_grad,
                               double tol_eig_rel) {
  if (!(grad_inf_norm <= tol_grad)) return CriticalKind::NotCritical;
  if (ascending.size() == 0) return CriticalKind::Degenerate;
  const double band = tol_eig_rel * std::max(1.0, ascending[ascending.size() - 1]);
  if (ascending[0] >= band) return CriticalKind::LocalMinimum;
  if (ascending[0] <= -band) return CriticalKind::Saddle;
  return CriticalKind::Degenerate;
}

Certificate classify_critical(const AnyParams& p, const Dataset& d, LossKind kind, double tol_grad,
                              double tol_eig_rel) {
  check_compatible(p, d, kind);
  require_smooth(p, d);
  Certificate cert;
  cert.tol_grad = tol_grad;
  cert.tol_eig = tol_eig_rel;
  cert.loss_at_point = loss(p, d, kind);
  cert.grad_inf_norm = gradient(p, d, kind).cwiseAbs().maxCoeff();
  cert.eigenvalues = eig_sym(hessian(p, d, kind)).values;
  cert.classification = classify_spectrum(cert.grad_inf_norm, cert.eigenvalues, tol_grad, tol_eig_rel);
  return cert;
}

ReluProof certify_relu_min_exact(const ReluRegParams& p, const Dataset& d, double boundary_tol,
                                 double linear_tol, double psd_tol) {
  check_compatible(p, d, LossKind::Mse);
  const Index m = p.units();
  const Index n = d.size();

  ReluProof proof;
  proof.loss = relu_loss(p, d);

  // Activation state of every (point, unit) pair; boundary pairs recorded.
  MatrixXd pre(n, m);
  std::map<Index, int> per_unit;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      pre(i, j) = p.w[j] * d.x(i, 0) + p.b[j];
      if (std::abs(pre(i, j)) <= boundary_tol) {
        proof.boundary.push_back({i, j});
        if (++per_unit[j] > 2)
          throw UnsupportedConfiguration("unit " + std::to_string(j) +
                                         " has more than 2 datapoints on its activation boundary");
      }
    }
  }

  VectorXd z0(2 * m + 1);
  for (Index j = 0; j < m; ++j) {
    z0[j] = p.v[j] * p.w[j];
    z0[m + j] = p.v[j] * p.b[j];
  }
  z0[2 * m] = p.c;

  const std::size_t nb = proof.boundary.size();
  const std::size_t ncases = std::size_t{1} << nb;
  proof.certified = true;
  for (std::size_t mask = 0; mask < ncases; ++mask) {
    ReluCase rc;
    rc.active.resize(nb);
    for (std::size_t k = 0; k < nb; ++k) rc.active[k] = (mask >> k) & 1u;

    MatrixXd a = MatrixXd::Zero(n, 2 * m + 1);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < m; ++j) {
        bool on = pre(i, j) > boundary_tol;
        for (std::size_t k = 0; k < nb; ++k)
          if (proof.boundary[k].point == i && proof.boundary[k].unit == j) on = rc.active[k];
        if (on) {
          a(i, j) = d.x(i, 0);
          a(i, m + j) = 1.0;
        }
      }
      a(i, 2 * m) = 1.0;
    }

    const VectorXd residual = a * z0 - d.y;
    rc.quadratic = a.transpose() * a;
    rc.linear = 2.0 * a.transpose() * residual;
    rc.constant = residual.squaredNorm();
    rc.min_eigenvalue = eig_sym(rc.quadratic).values[0];
    rc.psd = rc.min_eigenvalue >= -psd_tol * std::max(1.0, rc.quadratic.norm());
    rc.linear_vanishes = rc.linear.cwiseAbs().maxCoeff() <= linear_tol * std::max(1.0, rc.constant);
    proof.certified = proof.certified && rc.certified();
    proof.cases.push_back(std::move(rc));
  }
  return proof;
}

}  // namespace nmlab
