#include "nmlab/optim.hpp"

#include "nmlab/errors.hpp"
#include "nmlab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

namespace nmlab {

using Eigen::Index;
using Eigen::VectorXd;

const char* to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::GradientDescent: return "GD";
    case OptimizerKind::Adam: return "Adam";
    case OptimizerKind::Sgd: return "SGD";
  }
  return "?";
}

const char* to_string(Activation a) { return a == Activation::Relu ? "ReLU" : "Sigmoid"; }

void OptimizerConfig::check() const {
  if (!(learning_rate > 0.0)) throw InvalidInput("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw InvalidInput("Adam betas must lie in [0, 1)");
  if (max_steps < 1) throw InvalidInput("max_steps must be at least 1");
}

OptimizerConfig default_config(OptimizerKind kind, Activation act) {
  OptimizerConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case OptimizerKind::GradientDescent:
      cfg.learning_rate = act == Activation::Sigmoid ? 0.5 : 0.05;
      cfg.max_steps = 50000;
      break;
    case OptimizerKind::Adam:
      cfg.learning_rate = 1e-3;
      cfg.max_steps = 5000;
      break;
    case OptimizerKind::Sgd:
      cfg.learning_rate = act == Activation::Sigmoid ? 0.5 : 0.05;
      cfg.max_steps = 50000;
      break;
  }
  return cfg;
}

Optimizer::Optimizer(const OptimizerConfig& cfg, Index size) : cfg_(cfg) {
  cfg_.check();
  if (cfg_.kind == OptimizerKind::Adam) {
    m_ = VectorXd::Zero(size);
    v_ = VectorXd::Zero(size);
  }
}

void Optimizer::step(Eigen::Ref<VectorXd> params, const Eigen::Ref<const VectorXd>& grad) {
  ++t_;
  if (cfg_.kind != OptimizerKind::Adam) {
    params -= cfg_.learning_rate * grad;
    return;
  }
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Index i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    params[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.eps);
  }
}

TwoH1Params init_params(Activation act, Index h, std::uint64_t seed) {
  if (h < 1) throw InvalidInput("hidden width must be at least 1");
  SplitMix64 rng(seed);
  VectorXd flat(4 * h + 1);
  for (Index i = 0; i < flat.size(); ++i) flat[i] = rng.uniform(-1.0, 1.0);
  return TwoH1Params::unflatten(act, flat);
}

namespace {

bool succeeded(const SuccessRule& rule, double loss, Index correct, Index n) {
  return rule.kind == SuccessRule::Kind::ZeroTrainError ? correct == n : loss < rule.threshold;
}

Dataset single_point(const Dataset& d, Index i) {
  Dataset one;
  one.task = d.task;
  one.x = d.x.row(i);
  one.y = d.y.segment(i, 1);
  return one;
}

}  // namespace

TrainOutcome train(const TwoH1Params& p0, const Dataset& d, const OptimizerConfig& cfg, std::uint64_t seed) {
  cfg.check();
  p0.check();
  if (d.task != Task::Classification) throw InvalidInput("training needs a classification dataset");

  const Activation act = p0.activation;
  VectorXd theta = p0.flatten();
  if (!theta.allFinite()) throw InvalidInput("initial parameters are not finite");
  VectorXd grad(theta.size()), point_grad(theta.size());
  Optimizer opt(cfg, theta.size());

  TrialResult r;
  r.seed = seed;
  const Index n = d.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  SplitMix64 shuffle_rng(seed);

  double loss_value = 0.0;
  Index correct = 0;
  long step = 0;
  for (;; ++step) {
    loss_value = two_h1_evaluate(act, theta, d, grad, &correct);
    if (!std::isfinite(loss_value) || !grad.allFinite() || !theta.allFinite()) {
      r.diverged = true;
      break;
    }
    if (succeeded(cfg.success, loss_value, correct, n)) {
      r.converged = true;
      break;
    }
    if (step == cfg.max_steps) break;

    if (cfg.kind == OptimizerKind::Sgd) {
      for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(shuffle_rng.next() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
      }
      for (Index i : order) {
        two_h1_evaluate(act, theta, single_point(d, i), point_grad);
        opt.step(theta, point_grad);
      }
    } else {
      opt.step(theta, grad);
    }
  }

  r.steps_used = step;
  r.final_loss = loss_value;
  r.final_accuracy = static_cast<double>(correct) / static_cast<double>(n);
  r.terminal_grad_norm = grad.norm();
  if (r.diverged) r.converged = false;
  return {r, TwoH1Params::unflatten(act, theta)};
}

// ---------------------------------------------------------------------------

OptimizerConfig TableConfig::optimizer_config(OptimizerKind kind, Activation act) const {
  OptimizerConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case OptimizerKind::GradientDescent:
      cfg.learning_rate = act == Activation::Sigmoid ? gd_lr_sigmoid : gd_lr_relu;
      cfg.max_steps = gd_max_steps;
      break;
    case OptimizerKind::Adam:
      cfg.learning_rate = adam_lr;
      cfg.beta1 = adam_beta1;
      cfg.beta2 = adam_beta2;
      cfg.eps = adam_eps;
      cfg.max_steps = adam_max_steps;
      break;
    case OptimizerKind::Sgd:
      cfg.learning_rate = sgd_lr;
      cfg.max_steps = sgd_max_epochs;
      break;
  }
  return cfg;
}

const TableCell& ConvergenceTable::at(Index h, BuiltinDataset ds, Activation act, OptimizerKind opt) const {
  for (const auto& c : cells)
    if (c.h == h && c.dataset == ds && c.activation == act && c.optimizer == opt) return c;
  throw InvalidInput("no such table cell");
}

unsigned resolve_threads(unsigned requested) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NMLAB_THREADS")) {
    unsigned cap = 0;
    const char* end = env + std::char_traits<char>::length(env);
    if (std::from_chars(env, end, cap).ec == std::errc{} && cap > 0) n = std::min(n, cap);
  }
  return std::max(1u, n);
}

ConvergenceTable run_table(const TableConfig& cfg) {
  if (cfg.trials < 1) throw InvalidInput("trials must be at least 1");
  if (cfg.h_min < 1 || cfg.h_max < cfg.h_min) throw InvalidInput("invalid hidden width range");

  ConvergenceTable table;
  table.config = cfg;
  for (Index h = cfg.h_min; h <= cfg.h_max; ++h)
    for (auto ds : cfg.datasets)
      for (auto act : cfg.activations)
        for (auto opt : cfg.optimizers) {
          TableCell cell;
          cell.h = h;
          cell.dataset = ds;
          cell.activation = act;
          cell.optimizer = opt;
          cell.trials = cfg.trials;
          table.cells.push_back(cell);
          // Validate every configuration before spawning workers.
          cfg.optimizer_config(opt, act).check();
        }

  std::vector<Dataset> data;
  for (auto ds : cfg.datasets) data.push_back(builtin(ds));
  auto dataset_of = [&](BuiltinDataset ds) -> const Dataset& {
    for (std::size_t i = 0; i < cfg.datasets.size(); ++i)
      if (cfg.datasets[i] == ds) return data[i];
    throw InvalidInput("dataset missing");
  };

  const std::size_t total = table.cells.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<unsigned char> success(total, 0), diverged(total, 0);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      const std::size_t cell_index = task / static_cast<std::size_t>(cfg.trials);
      const std::size_t trial = task % static_cast<std::size_t>(cfg.trials);
      const TableCell& cell = table.cells[cell_index];
      const std::uint64_t seed = derive_seed(cfg.base_seed, cell_index, trial);
      const TwoH1Params p0 = init_params(cell.activation, cell.h, seed);
      const auto out = train(p0, dataset_of(cell.dataset), cfg.optimizer_config(cell.optimizer, cell.activation), seed);
      success[task] = out.result.converged;
      diverged[task] = out.result.diverged;
    }
  };

  const unsigned nthreads = std::min<std::size_t>(resolve_threads(cfg.threads), total);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t c = 0; c < table.cells.size(); ++c) {
    for (int t = 0; t < cfg.trials; ++t) {
      const std::size_t task = c * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t);
      table.cells[c].successes += success[task];
      table.cells[c].diverged += diverged[task];
    }
  }
  return table;
}

std::string table_to_csv(const ConvergenceTable& t) {
  std::ostringstream out;
  out << "h,dataset,activation,optimizer,trials,successes,fraction\n";
  for (const auto& c : t.cells) {
    char frac[32];
    auto res = std::to_chars(frac, frac + sizeof frac, c.fraction());
    out << c.h << ',' << builtin_name(c.dataset) << ',' << to_string(c.activation) << ','
        << to_string(c.optimizer) << ',' << c.trials << ',' << c.successes << ','
        << std::string_view(frac, static_cast<std::size_t>(res.ptr - frac)) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

double Grid::x_at(int c) const {
  return bounds.x_min + (bounds.x_max - bounds.x_min) * static_cast<double>(c) / (resolution - 1);
}

double Grid::y_at(int r) const {
  return bounds.y_min + (bounds.y_max - bounds.y_min) * static_cast<double>(r) / (resolution - 1);
}

Grid sample_grid(const AnyParams& p, const GridBounds& bounds, int resolution) {
  if (resolution < 2) throw InvalidInput("grid resolution must be at least 2");
  if (!(bounds.x_min <= bounds.x_max) || !(bounds.y_min <= bounds.y_max))
    throw InvalidInput("grid bounds are inverted");
  Grid g;
  g.bounds = bounds;
  g.resolution = resolution;
  g.values.resize(resolution, resolution);
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      const Eigen::Vector2d x(g.x_at(c), g.y_at(r));
      if (const auto* s = std::get_if<Sigmoid221Params>(&p))
        g.values(r, c) = forward(*s, x);
      else if (const auto* t = std::get_if<TwoH1Params>(&p))
        g.values(r, c) = forward(*t, x);
      else
        throw InvalidInput(std::string("sample_grid needs a 2-D classifier, got ") + arch_name(p));
    }
  }
  return g;
}

std::string grid_to_csv(const Grid& g) {
  std::ostringstream out;
  out << "x,y,output\n";
  char buf[3][32];
  for (int r = 0; r < g.resolution; ++r) {
    for (int c = 0; c < g.resolution; ++c) {
      const double vals[3] = {g.x_at(c), g.y_at(r), g.values(r, c)};
      for (int k = 0; k < 3; ++k) {
        auto res = std::to_chars(buf[k], buf[k] + 32, vals[k]);
        out << std::string_view(buf[k], static_cast<std::size_t>(res.ptr - buf[k])) << (k < 2 ? ',' : '\n');
      }
    }
  }
  return out.str();
}

}  // namespace nmlab
