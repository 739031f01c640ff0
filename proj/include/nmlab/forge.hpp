#pragma once

#include "nmlab/certify.hpp"
#include "nmlab/datasets.hpp"
#include "nmlab/tinynet.hpp"

#include <cstdint>
#include <vector>

namespace nmlab {

struct ForgeConfig {
  double step_size = 50.0;
  long max_iters = 100000;
  double target_gradnorm = 1e-8;
  double fd_step = 1e-6;
  bool freeze_labels = true;  // informational; labels are never moved
  int max_halvings = 60;
};

struct ForgeResult {
  Dataset dataset;
  std::vector<double> objective_trace;  // F before the first step, then after each accepted step
  double final_gradnorm = 0.0;
  long iterations = 0;
  bool converged = false;
  bool stalled = false;  // line search could not decrease F
  Certificate certificate;
};

/// Squared Euclidean norm of the weight-space gradient at fixed parameters.
double grad_norm_objective(const AnyParams& p_fixed, const Dataset& d, LossKind kind);

/// Central-difference gradient of grad_norm_objective over every input
/// coordinate (labels excluded). Entry (i, j) pairs with d.x(i, j).
Eigen::MatrixXd objective_data_gradient(const AnyParams& p_fixed, const Dataset& d, LossKind kind,
                                        double fd_step);

/// Moves the datapoints by gradient descent on grad_norm_objective until the
/// weight gradient at `p_fixed` vanishes, then certifies the point.
ForgeResult forge(const AnyParams& p_fixed, const Dataset& d0, LossKind kind, const ForgeConfig& cfg = {});

struct EscapeProbe {
  double radius = 0.0;
  double base_loss = 0.0;
  int directions = 0;
  int descending_directions = 0;
  int coordinate_probes = 0;  // +/- each coordinate
  int descending_coordinates = 0;
  double min_delta = 0.0;  // smallest loss(p + radius u) - loss(p) seen

  double descending_fraction() const {
    return directions > 0 ? static_cast<double>(descending_directions) / directions : 0.0;
  }
};

/// Counts probes with loss(p + radius * u) < loss(p) - 1e-12 over
/// `directions` random unit vectors and both signs of every coordinate axis.
EscapeProbe escape_probe(const AnyParams& p, const Dataset& d, LossKind kind, int directions, double radius,
                         std::uint64_t seed = 0);

/// Copy of `d` with every input coordinate shifted by U(-amplitude, amplitude).
Dataset perturb_inputs(const Dataset& d, double amplitude, std::uint64_t seed);

}  // namespace nmlab
