#include "nmlab/forge.hpp"

#include "nmlab/rng.hpp"

#include <cmath>

namespace nmlab {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double grad_norm_objective(const AnyParams& p_fixed, const Dataset& d, LossKind kind) {
  require_smooth(p_fixed, d);
  return gradient(p_fixed, d, kind).squaredNorm();
}

MatrixXd objective_data_gradient(const AnyParams& p_fixed, const Dataset& d, LossKind kind, double fd_step) {
  MatrixXd g(d.size(), d.dim());
  Dataset probe = d;
  for (Index i = 0; i < d.size(); ++i) {
    for (Index j = 0; j < d.dim(); ++j) {
      const double x0 = d.x(i, j);
      probe.x(i, j) = x0 + fd_step;
      const double up = grad_norm_objective(p_fixed, probe, kind);
      probe.x(i, j) = x0 - fd_step;
      const double down = grad_norm_objective(p_fixed, probe, kind);
      probe.x(i, j) = x0;
      g(i, j) = (up - down) / (2.0 * fd_step);
    }
  }
  return g;
}

ForgeResult forge(const AnyParams& p_fixed, const Dataset& d0, LossKind kind, const ForgeConfig& cfg) {
  if (!(cfg.step_size > 0.0)) throw InvalidInput("forge step size must be positive");
  if (!(cfg.target_gradnorm > 0.0)) throw InvalidInput("forge target must be positive");
  if (!(cfg.fd_step > 0.0)) throw InvalidInput("forge finite-difference step must be positive");
  check_compatible(p_fixed, d0, kind);

  ForgeResult out;
  out.dataset = d0;
  const double target = cfg.target_gradnorm * cfg.target_gradnorm;
  double f = grad_norm_objective(p_fixed, out.dataset, kind);
  out.objective_trace.push_back(f);

  Dataset trial = out.dataset;
  while (f >= target && out.iterations < cfg.max_iters) {
    const MatrixXd g = objective_data_gradient(p_fixed, out.dataset, kind, cfg.fd_step);
    double step = cfg.step_size;
    bool accepted = false;
    for (int k = 0; k <= cfg.max_halvings; ++k, step *= 0.5) {
      trial.x = out.dataset.x - step * g;
      double ft;
      try {
        ft = grad_norm_objective(p_fixed, trial, kind);
      } catch (const NonSmoothPoint&) {
        continue;
      }
      if (ft < f) {
        f = ft;
        out.dataset.x = trial.x;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }
    ++out.iterations;
    out.objective_trace.push_back(f);
  }

  out.converged = f < target;
  out.final_gradnorm = std::sqrt(f);
  out.certificate = classify_critical(p_fixed, out.dataset, kind);
  return out;
}

EscapeProbe escape_probe(const AnyParams& p, const Dataset& d, LossKind kind, int directions, double radius,
                         std::uint64_t seed) {
  if (directions < 0) throw InvalidInput("direction count must be nonnegative");
  EscapeProbe out;
  out.radius = radius;
  out.directions = directions;
  out.base_loss = loss(p, d, kind);
  out.min_delta = 0.0;
  const VectorXd base = flatten(p);
  const Index n = base.size();
  bool first = true;

  auto probe = [&](const VectorXd& u) {
    const double delta = loss(with_flat(p, base + radius * u), d, kind) - out.base_loss;
    if (first || delta < out.min_delta) out.min_delta = delta;
    first = false;
    return delta < -1e-12;
  };

  SplitMix64 rng(seed);
  VectorXd u(n);
  for (int k = 0; k < directions; ++k) {
    // Box-Muller normals give a uniformly distributed direction.
    for (Index i = 0; i < n; ++i) {
      const double a = rng.uniform();
      const double b = rng.uniform();
      u[i] = std::sqrt(-2.0 * std::log1p(-a)) * std::cos(2.0 * M_PI * b);
    }
    const double norm = u.norm();
    if (norm == 0.0) continue;
    out.descending_directions += probe(u / norm);
  }
  for (Index i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      VectorXd e = VectorXd::Zero(n);
      e[i] = sign;
      ++out.coordinate_probes;
      out.descending_coordinates += probe(e);
    }
  }
  return out;
}

Dataset perturb_inputs(const Dataset& d, double amplitude, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Dataset out = d;
  for (Index i = 0; i < d.size(); ++i)
    for (Index j = 0; j < d.dim(); ++j) out.x(i, j) += rng.uniform(-amplitude, amplitude);
  return out;
}

}  // namespace nmlab
