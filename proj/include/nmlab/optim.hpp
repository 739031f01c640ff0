#pragma once

#include "nmlab/datasets.hpp"
#include "nmlab/tinynet.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace nmlab {

enum class OptimizerKind { GradientDescent, Adam, Sgd };

const char* to_string(OptimizerKind k);
const char* to_string(Activation a);

struct SuccessRule {
  enum class Kind { ZeroTrainError, LossBelow };
  Kind kind = Kind::ZeroTrainError;
  double threshold = 0.0;  // LossBelow only
};

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::GradientDescent;
  double learning_rate = 0.5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long max_steps = 50000;
  SuccessRule success;

  /// Throws InvalidInput on lr <= 0, betas outside [0, 1) or max_steps < 1.
  void check() const;
};

/// Full-batch defaults: GD lr 0.5 (sigmoid) / 0.05 (ReLU), 50000 steps;
/// Adam lr 1e-3, betas (0.9, 0.999), eps 1e-8, 5000 steps.
OptimizerConfig default_config(OptimizerKind kind, Activation act);

/// Stateful update rule over a flat parameter vector.
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& cfg, Eigen::Index size);

  /// GD: p -= lr * g. Adam: bias-corrected moment update.
  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad);

  long steps_taken() const { return t_; }

 private:
  OptimizerConfig cfg_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

struct TrialResult {
  std::uint64_t seed = 0;
  bool converged = false;
  bool diverged = false;  // NaN/Inf met in loss, gradient or parameters
  double final_loss = 0.0;
  double final_accuracy = 0.0;
  long steps_used = 0;
  double terminal_grad_norm = 0.0;

  bool operator==(const TrialResult&) const = default;
};

/// Every parameter i.i.d. U(-1, 1) from SplitMix64(seed), in flat order.
TwoH1Params init_params(Activation act, Eigen::Index h, std::uint64_t seed);

struct TrainOutcome {
  TrialResult result;
  TwoH1Params params;
};

/// Full-batch training (or per-point SGD epochs for OptimizerKind::Sgd,
/// shuffled by `seed`). The success rule is checked before every update and
/// training stops at the first success.
TrainOutcome train(const TwoH1Params& p0, const Dataset& d, const OptimizerConfig& cfg, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------

struct TableConfig {
  Eigen::Index h_min = 2;
  Eigen::Index h_max = 7;
  int trials = 100;
  std::uint64_t base_seed = 0;
  std::vector<BuiltinDataset> datasets{BuiltinDataset::Xor, BuiltinDataset::FXor};
  std::vector<Activation> activations{Activation::Relu, Activation::Sigmoid};
  std::vector<OptimizerKind> optimizers{OptimizerKind::Adam, OptimizerKind::GradientDescent};

  double gd_lr_sigmoid = 0.5;
  double gd_lr_relu = 0.05;
  long gd_max_steps = 50000;
  double adam_lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  long adam_max_steps = 5000;
  double sgd_lr = 0.5;
  long sgd_max_epochs = 50000;

  /// 0 = hardware concurrency, capped by NMLAB_THREADS when set.
  unsigned threads = 0;

  OptimizerConfig optimizer_config(OptimizerKind kind, Activation act) const;
};

struct TableCell {
  Eigen::Index h = 0;
  BuiltinDataset dataset = BuiltinDataset::Xor;
  Activation activation = Activation::Relu;
  OptimizerKind optimizer = OptimizerKind::Adam;
  int trials = 0;
  int successes = 0;
  int diverged = 0;
  double fraction() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

struct ConvergenceTable {
  TableConfig config;
  std::vector<TableCell> cells;  // h-major, then dataset, activation, optimizer

  const TableCell& at(Eigen::Index h, BuiltinDataset ds, Activation act, OptimizerKind opt) const;
};

/// Thread count actually used for `requested` (0 = auto), honouring NMLAB_THREADS.
unsigned resolve_threads(unsigned requested);

ConvergenceTable run_table(const TableConfig& cfg);

/// `h,dataset,activation,optimizer,trials,successes,fraction`
std::string table_to_csv(const ConvergenceTable& t);

// ---------------------------------------------------------------------------

struct GridBounds {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
};

struct Grid {
  GridBounds bounds;
  int resolution = 0;
  Eigen::MatrixXd values;  // values(r, c): y index r, x index c

  double x_at(int c) const;
  double y_at(int r) const;
};

/// Model outputs on a resolution x resolution lattice including the corners.
/// Accepts sigmoid221 or two_h1 parameters.
Grid sample_grid(const AnyParams& p, const GridBounds& bounds, int resolution);

/// Header `x,y,output`, then one row per sample, y-major.
std::string grid_to_csv(const Grid& g);

}  // namespace nmlab
