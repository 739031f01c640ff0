#pragma once

// Blind spots of deep ReLU regressors: layers whose units are all switched
// off on every datapoint. Such a layer freezes (no gradient reaches it), the
// model degenerates to a constant, and training can only move that constant
// to the label mean. On a decent dataset a better point exists; it is built
// explicitly by construct_better().

#include "nmlab/datasets.hpp"
#include "nmlab/optim.hpp"
#include "nmlab/tinynet.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nmlab {

/// Layers drawn i.i.d. U(-1, 1); `widths` lists every layer including the
/// scalar output.
DeepReluParams random_deep_relu(Eigen::Index input_dim, const std::vector<Eigen::Index>& widths, std::uint64_t seed);

/// Copy of `p` whose hidden layer `layer` (from 1) has every bias set to
/// -(2 max |W h| + 1) over the dataset, which switches the layer off.
DeepReluParams saturate_layer(const DeepReluParams& p, const Dataset& d, int layer);

/// Hidden layers (numbered from 1) whose every pre-activation is strictly
/// negative on every datapoint.
std::vector<int> detect_saturation(const DeepReluParams& p, const Dataset& d);

/// Derivative of the model output at `x` with respect to the flat parameters.
Eigen::VectorXd output_gradient(const DeepReluParams& p, const Eigen::Ref<const Eigen::VectorXd>& x);

/// GD with lr = 0.5 / (N (1 + |dM/dtheta|^2)) at the starting point.
OptimizerConfig probe_config(const DeepReluParams& p, const Dataset& d);

struct TrainingProbe {
  std::vector<int> saturated_layers;
  long steps = 0;
  bool frozen_bitwise = true;    // saturated layers' W, b never changed
  bool constant_output = false;  // identical output on every datapoint
  double output = 0.0;           // model output on the first datapoint after training
  double label_mean = 0.0;
  double mean_gap = 0.0;         // |output - label_mean|
  double final_loss = 0.0;
  DeepReluParams trained;
};

/// Trains a saturated model and records whether the saturated layers stay
/// frozen and where the constant output ends up. Throws InvalidInput when no
/// layer is saturated.
TrainingProbe saturated_training_probe(const DeepReluParams& p, const Dataset& d, long steps,
                                       std::optional<OptimizerConfig> cfg = std::nullopt);

/// Same measurement for a dataset whose inputs are all equal. Throws
/// InvalidInput otherwise.
TrainingProbe constant_input_probe(const DeepReluParams& p, const Dataset& d, long steps,
                                   std::optional<OptimizerConfig> cfg = std::nullopt);

struct SeparatingVector {
  Eigen::VectorXd v;
  double gamma = 0.0;   // v . x_r
  double margin = 0.0;  // min |v . (x_s - x_r)| over x_s != x_r; +inf if none
};

/// v with |v . (x_s - x_r)| > 2 for every x_s that differs from x_r.
SeparatingVector find_separating_vector(const Dataset& d, Eigen::Index r, std::uint64_t seed = 0);

/// Parameters that output the witness-group mean on the witness input and
/// the mean of all other labels elsewhere. `hidden_widths` lists the ReLU
/// layer widths (first >= 3); the output layer is added. Throws NotDecent or
/// ArchitectureError.
DeepReluParams construct_better(const Dataset& d, const std::vector<Eigen::Index>& hidden_widths,
                                std::uint64_t seed = 0);
DeepReluParams construct_better(const Dataset& d, const DeepReluParams& shape, std::uint64_t seed = 0);

struct BlindSpotReport {
  std::vector<int> saturated_layers;
  bool is_decent = false;
  std::optional<Eigen::Index> witness_r;
  double loss_at_theta = 0.0;
  std::optional<double> loss_at_constructed;
  std::optional<DeepReluParams> constructed;
  double mu = 0.0;  // mean label off the witness group
  double nu = 0.0;  // mean label on the witness group
};

BlindSpotReport analyze_blind_spot(const DeepReluParams& theta, const Dataset& d, std::uint64_t seed = 0);

}  // namespace nmlab
