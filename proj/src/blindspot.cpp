#include "nmlab/blindspot.hpp"

#include "nmlab/errors.hpp"
#include "nmlab/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace nmlab {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<int> detect_saturation(const DeepReluParams& p, const Dataset& d) {
  std::vector<int> layers;
  const auto pre = pre_activations(p, d);
  for (std::size_t n = 0; n < pre.size(); ++n)
    if ((pre[n].array() < 0.0).all()) layers.push_back(static_cast<int>(n + 1));
  return layers;
}

DeepReluParams random_deep_relu(Index input_dim, const std::vector<Index>& widths, std::uint64_t seed) {
  if (input_dim < 1 || widths.empty()) throw ArchitectureError("deep_relu needs an input and an output layer");
  SplitMix64 rng(seed);
  DeepReluParams p;
  Index cols = input_dim;
  for (Index rows : widths) {
    if (rows < 1) throw ArchitectureError("layer widths must be positive");
    DenseLayer<double> l{MatrixXd(rows, cols), VectorXd(rows)};
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) l.w(i, j) = rng.uniform(-1.0, 1.0);
    for (Index i = 0; i < rows; ++i) l.b[i] = rng.uniform(-1.0, 1.0);
    p.layers.push_back(std::move(l));
    cols = rows;
  }
  p.check();
  return p;
}

DeepReluParams saturate_layer(const DeepReluParams& p, const Dataset& d, int layer) {
  if (layer < 1 || static_cast<std::size_t>(layer) >= p.layers.size())
    throw InvalidInput("saturate_layer: no hidden layer " + std::to_string(layer));
  DeepReluParams out = p;
  auto& l = out.layers[static_cast<std::size_t>(layer - 1)];
  l.b.setZero();
  const MatrixXd pre = pre_activations(out, d)[static_cast<std::size_t>(layer - 1)];
  l.b.setConstant(-(2.0 * pre.cwiseAbs().maxCoeff() + 1.0));
  return out;
}

VectorXd output_gradient(const DeepReluParams& p, const Eigen::Ref<const VectorXd>& x) {
  // d/dtheta of (M(x) - t)^2 is 2 (M(x) - t) dM/dtheta; pick t = M(x) - 1/2.
  Dataset one;
  one.task = Task::Regression;
  one.x = x.transpose();
  one.y.resize(1);
  one.y[0] = forward(p, x) - 0.5;
  return grad_deep_relu_loss(p, one);
}

OptimizerConfig probe_config(const DeepReluParams& p, const Dataset& d) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::GradientDescent;
  const double j2 = output_gradient(p, d.x.row(0).transpose()).squaredNorm();
  cfg.learning_rate = 0.5 / (static_cast<double>(d.size()) * (1.0 + j2));
  cfg.max_steps = 1;
  return cfg;
}

namespace {

// Index range of layer n (0-based) inside the flat vector.
std::pair<Index, Index> layer_block(const DeepReluParams& p, std::size_t n) {
  Index start = 0;
  for (std::size_t k = 0; k < n; ++k) start += p.layers[k].w.size() + p.layers[k].b.size();
  return {start, p.layers[n].w.size() + p.layers[n].b.size()};
}

TrainingProbe run_probe(const DeepReluParams& p, const Dataset& d, long steps, std::optional<OptimizerConfig> cfg) {
  TrainingProbe out;
  out.saturated_layers = detect_saturation(p, d);
  out.steps = steps;
  out.label_mean = mean_label(d);

  OptimizerConfig run = cfg ? *cfg : probe_config(p, d);
  run.max_steps = std::max<long>(1, steps);
  VectorXd theta = p.flatten();
  const VectorXd start = theta;
  Optimizer opt(run, theta.size());
  for (long s = 0; s < steps; ++s) opt.step(theta, grad_deep_relu_loss(p.with_flat(theta), d));

  out.trained = p.with_flat(theta);
  for (int layer : out.saturated_layers) {
    const auto [begin, len] = layer_block(p, static_cast<std::size_t>(layer - 1));
    for (Index i = begin; i < begin + len; ++i)
      out.frozen_bitwise = out.frozen_bitwise && std::bit_cast<std::uint64_t>(theta[i]) ==
                                                     std::bit_cast<std::uint64_t>(start[i]);
  }

  out.output = forward(out.trained, VectorXd(d.x.row(0).transpose()));
  out.constant_output = true;
  for (Index i = 1; i < d.size(); ++i)
    out.constant_output = out.constant_output && forward(out.trained, VectorXd(d.x.row(i).transpose())) == out.output;
  out.mean_gap = std::abs(out.output - out.label_mean);
  out.final_loss = deep_relu_loss(out.trained, d);
  return out;
}

}  // namespace

TrainingProbe saturated_training_probe(const DeepReluParams& p, const Dataset& d, long steps,
                                       std::optional<OptimizerConfig> cfg) {
  if (detect_saturation(p, d).empty()) throw InvalidInput("no layer is saturated on this dataset");
  return run_probe(p, d, steps, cfg);
}

TrainingProbe constant_input_probe(const DeepReluParams& p, const Dataset& d, long steps,
                                   std::optional<OptimizerConfig> cfg) {
  for (Index i = 1; i < d.size(); ++i)
    if (d.x.row(i) != d.x.row(0)) throw InvalidInput("dataset inputs are not all equal");
  return run_probe(p, d, steps, cfg);
}

SeparatingVector find_separating_vector(const Dataset& d, Index r, std::uint64_t seed) {
  if (r < 0 || r >= d.size()) throw InvalidInput("witness index out of range");
  const Index dim = d.dim();
  const auto group = input_group(d, r);
  std::vector<bool> same(static_cast<std::size_t>(d.size()), false);
  for (Index g : group) same[static_cast<std::size_t>(g)] = true;
  const VectorXd xr = d.x.row(r).transpose();

  SplitMix64 rng(seed);
  VectorXd u(dim);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    if (dim == 1) {
      u[0] = 1.0;
    } else {
      for (Index j = 0; j < dim; ++j) {
        const double a = rng.uniform();
        const double b = rng.uniform();
        u[j] = std::sqrt(-2.0 * std::log1p(-a)) * std::cos(2.0 * M_PI * b);
      }
      if (u.norm() == 0.0) continue;
      u.normalize();
    }

    double gap = std::numeric_limits<double>::infinity();
    for (Index s = 0; s < d.size(); ++s)
      if (!same[static_cast<std::size_t>(s)]) gap = std::min(gap, std::abs(u.dot(d.x.row(s).transpose() - xr)));

    if (gap == std::numeric_limits<double>::infinity()) {
      return {u, u.dot(xr), gap};
    }
    if (gap < 1e-9) continue;

    SeparatingVector out;
    out.v = (2.5 / gap) * u;
    out.gamma = out.v.dot(xr);
    out.margin = std::numeric_limits<double>::infinity();
    for (Index s = 0; s < d.size(); ++s)
      if (!same[static_cast<std::size_t>(s)])
        out.margin = std::min(out.margin, std::abs(out.v.dot(d.x.row(s).transpose() - xr)));
    if (out.margin > 2.0) return out;
  }
  throw UnsupportedConfiguration("no separating direction found; inputs nearly coincide");
}

DeepReluParams construct_better(const Dataset& d, const std::vector<Index>& hidden_widths, std::uint64_t seed) {
  if (hidden_widths.empty() || hidden_widths.front() < 3)
    throw ArchitectureError("construction needs a first hidden layer with at least 3 units");
  for (Index w : hidden_widths)
    if (w < 1) throw ArchitectureError("hidden layers need at least one unit");
  if (d.task != Task::Regression) throw InvalidInput("construction needs a regression dataset");

  const Decency dec = is_decent(d);
  if (!dec.decent) throw NotDecent();
  const Index r = *dec.witness;

  const auto group = input_group(d, r);
  std::vector<bool> same(static_cast<std::size_t>(d.size()), false);
  for (Index g : group) same[static_cast<std::size_t>(g)] = true;
  VectorXd on(static_cast<Index>(group.size())), off(d.size() - static_cast<Index>(group.size()));
  for (Index i = 0, a = 0, b = 0; i < d.size(); ++i) {
    if (same[static_cast<std::size_t>(i)])
      on[a++] = d.y[i];
    else
      off[b++] = d.y[i];
  }
  const double nu = compensated_sum(on) / static_cast<double>(on.size());
  // With every point in the witness group nothing is left to separate; the
  // group then is the whole dataset and decency fails, so `off` is nonempty.
  const double mu = compensated_sum(off) / static_cast<double>(off.size());

  const SeparatingVector sep = find_separating_vector(d, r, seed);
  const Index dim = d.dim();
  const Index m1 = hidden_widths.front();

  DeepReluParams p;
  DenseLayer<double> first{MatrixXd::Zero(m1, dim), VectorXd::Zero(m1)};
  first.w.row(0) = sep.v.transpose();
  first.w.row(1) = 2.0 * sep.v.transpose();
  first.w.row(2) = sep.v.transpose();
  first.b[0] = -sep.gamma + 1.0;
  first.b[1] = -2.0 * sep.gamma;
  first.b[2] = -sep.gamma - 1.0;
  p.layers.push_back(std::move(first));

  const double dv = nu - mu;
  if (hidden_widths.size() == 1) {
    DenseLayer<double> out{MatrixXd::Zero(1, m1), VectorXd::Constant(1, mu)};
    out.w(0, 0) = dv;
    out.w(0, 1) = -dv;
    out.w(0, 2) = dv;
    p.layers.push_back(std::move(out));
    return p;
  }

  // Deeper stacks carry the signal shifted by `offset` so the identity
  // ReLU layers never clip it; the output layer removes the shift.
  const double offset = 1.0 + std::abs(mu) + std::abs(nu);
  const Index m2 = hidden_widths[1];
  DenseLayer<double> second{MatrixXd::Zero(m2, m1), VectorXd::Zero(m2)};
  second.w(0, 0) = dv;
  second.w(0, 1) = -dv;
  second.w(0, 2) = dv;
  second.b[0] = mu + offset;
  p.layers.push_back(std::move(second));

  for (std::size_t n = 2; n < hidden_widths.size(); ++n) {
    const Index rows = hidden_widths[n], cols = hidden_widths[n - 1];
    p.layers.push_back({MatrixXd::Identity(rows, cols), VectorXd::Zero(rows)});
  }

  DenseLayer<double> out{MatrixXd::Zero(1, hidden_widths.back()), VectorXd::Constant(1, -offset)};
  out.w(0, 0) = 1.0;
  p.layers.push_back(std::move(out));
  return p;
}

DeepReluParams construct_better(const Dataset& d, const DeepReluParams& shape, std::uint64_t seed) {
  shape.check();
  if (shape.input_dim() != d.dim()) throw ArchitectureError("architecture input width does not match the dataset");
  std::vector<Index> widths;
  for (std::size_t n = 0; n + 1 < shape.layers.size(); ++n) widths.push_back(shape.layers[n].w.rows());
  return construct_better(d, widths, seed);
}

BlindSpotReport analyze_blind_spot(const DeepReluParams& theta, const Dataset& d, std::uint64_t seed) {
  BlindSpotReport rep;
  rep.saturated_layers = detect_saturation(theta, d);
  rep.loss_at_theta = deep_relu_loss(theta, d);
  const Decency dec = is_decent(d);
  rep.is_decent = dec.decent;
  rep.witness_r = dec.witness;
  if (!dec.decent || theta.layers.size() < 2 || theta.layers.front().w.rows() < 3) return rep;

  DeepReluParams better = construct_better(d, theta, seed);
  const double constructed_loss = deep_relu_loss(better, d);
  rep.nu = dec.group_mean;
  const auto group = input_group(d, *dec.witness);
  double off_sum = 0.0;
  Index off_count = 0;
  for (Index i = 0; i < d.size(); ++i) {
    if (std::find(group.begin(), group.end(), i) == group.end()) {
      off_sum += d.y[i];
      ++off_count;
    }
  }
  rep.mu = off_count ? off_sum / static_cast<double>(off_count) : 0.0;
  if (constructed_loss < rep.loss_at_theta) {
    rep.loss_at_constructed = constructed_loss;
    rep.constructed = std::move(better);
  }
  return rep;
}

}  // namespace nmlab
