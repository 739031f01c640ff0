#include "nmlab/tinynet.hpp"

#include <cmath>
#include <type_traits>

namespace nmlab {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

using Point2 = Eigen::Vector2d;

Point2 point2(const Dataset& d, Index i) { return {d.x(i, 0), d.x(i, 1)}; }

void require_nonempty(const Dataset& d) {
  if (d.size() == 0) throw InvalidInput("dataset is empty");
}

void require_classification_2d(const Dataset& d) {
  require_nonempty(d);
  if (d.task != Task::Classification) throw InvalidInput("expected a classification dataset");
  if (d.dim() != 2) throw InvalidInput("expected 2-D inputs");
}

void require_regression(const Dataset& d, Index dim) {
  require_nonempty(d);
  if (d.task != Task::Regression) throw InvalidInput("expected a regression dataset");
  if (d.dim() != dim)
    throw InvalidInput("expected " + std::to_string(dim) + "-D inputs, dataset has " +
                       std::to_string(d.dim()));
}

// Per-point negative log-likelihood given the output logit.
double point_nll(double z, double y) { return -(y * log_sigmoid(z) + (1.0 - y) * log_sigmoid(-z)); }

}  // namespace

double nll_loss(const Sigmoid221Params& p, const Dataset& d) {
  require_classification_2d(d);
  double total = 0.0;
  for (Index i = 0; i < d.size(); ++i) {
    const Point2 x = point2(d, i);
    const double h0 = sigmoid(p.w00 * x[0] + p.w01 * x[1] + p.b0);
    const double h1 = sigmoid(p.w10 * x[0] + p.w11 * x[1] + p.b1);
    total += point_nll(p.v0 * h0 + p.v1 * h1 + p.c, d.y[i]);
  }
  return total / static_cast<double>(d.size());
}

double nll_loss(const TwoH1Params& p, const Dataset& d) {
  require_classification_2d(d);
  double total = 0.0;
  for (Index i = 0; i < d.size(); ++i) total += point_nll(logit(p, point2(d, i)), d.y[i]);
  return total / static_cast<double>(d.size());
}

double accuracy(const Sigmoid221Params& p, const Dataset& d) {
  require_classification_2d(d);
  Index hits = 0;
  for (Index i = 0; i < d.size(); ++i) hits += (forward(p, point2(d, i)) > 0.5) == (d.y[i] == 1.0);
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

double accuracy(const TwoH1Params& p, const Dataset& d) {
  require_classification_2d(d);
  Index hits = 0;
  for (Index i = 0; i < d.size(); ++i) hits += (forward(p, point2(d, i)) > 0.5) == (d.y[i] == 1.0);
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

Sigmoid221Params::Flat grad_nll(const Sigmoid221Params& p, const Dataset& d) {
  require_classification_2d(d);
  Sigmoid221Params::Flat g = Sigmoid221Params::Flat::Zero();
  const double inv_n = 1.0 / static_cast<double>(d.size());
  for (Index i = 0; i < d.size(); ++i) {
    const Point2 x = point2(d, i);
    const double h0 = sigmoid(p.w00 * x[0] + p.w01 * x[1] + p.b0);
    const double h1 = sigmoid(p.w10 * x[0] + p.w11 * x[1] + p.b1);
    const double out = sigmoid(p.v0 * h0 + p.v1 * h1 + p.c);
    const double r = (out - d.y[i]) * inv_n;
    const double d0 = r * p.v0 * h0 * (1.0 - h0);
    const double d1 = r * p.v1 * h1 * (1.0 - h1);
    g[0] += d0 * x[0];
    g[1] += d0 * x[1];
    g[2] += d0;
    g[3] += d1 * x[0];
    g[4] += d1 * x[1];
    g[5] += d1;
    g[6] += r * h0;
    g[7] += r * h1;
    g[8] += r;
  }
  return g;
}

double two_h1_evaluate(Activation act, const Eigen::Ref<const VectorXd>& flat, const Dataset& d,
                       Eigen::Ref<VectorXd> grad, Index* correct) {
  require_classification_2d(d);
  if (flat.size() < 5 || (flat.size() - 1) % 4 != 0) throw InvalidInput("two_h1 flat vector must have 4h+1 entries");
  if (grad.size() != flat.size()) throw InvalidInput("gradient buffer has wrong length");
  const Index h = (flat.size() - 1) / 4;
  const double* w1 = flat.data();
  const double* b1 = w1 + 2 * h;
  const double* v = b1 + h;
  const double c = flat[4 * h];

  grad.setZero();
  const double inv_n = 1.0 / static_cast<double>(d.size());
  constexpr Index kStack = 32;
  double act_buf[kStack], slope_buf[kStack];
  std::vector<double> act_heap, slope_heap;
  double* a_out = act_buf;
  double* s_out = slope_buf;
  if (h > kStack) {
    act_heap.resize(static_cast<std::size_t>(h));
    slope_heap.resize(static_cast<std::size_t>(h));
    a_out = act_heap.data();
    s_out = slope_heap.data();
  }

  double total = 0.0;
  Index hits = 0;
  for (Index i = 0; i < d.size(); ++i) {
    const double x0 = d.x(i, 0), x1 = d.x(i, 1);
    double z = 0.0;
    for (Index j = 0; j < h; ++j) {
      const double a = w1[2 * j] * x0 + w1[2 * j + 1] * x1 + b1[j];
      if (act == Activation::Relu) {
        a_out[j] = relu(a);
        s_out[j] = relu_slope(a);
      } else {
        a_out[j] = sigmoid(a);
        s_out[j] = a_out[j] * (1.0 - a_out[j]);
      }
      z += v[j] * a_out[j];
    }
    z += c;
    const double y = d.y[i];
    const double out = sigmoid(z);
    total += point_nll(z, y);
    hits += (out > 0.5) == (y == 1.0);
    const double r = (out - y) * inv_n;
    for (Index j = 0; j < h; ++j) {
      const double dj = r * v[j] * s_out[j];
      grad[2 * j] += dj * x0;
      grad[2 * j + 1] += dj * x1;
      grad[2 * h + j] += dj;
      grad[3 * h + j] += r * a_out[j];
    }
    grad[4 * h] += r;
  }
  if (correct) *correct = hits;
  return total / static_cast<double>(d.size());
}

VectorXd grad_nll(const TwoH1Params& p, const Dataset& d) {
  p.check();
  VectorXd g(p.flat_size());
  two_h1_evaluate(p.activation, p.flatten(), d, g);
  return g;
}

double relu_loss(const ReluRegParams& p, const Dataset& d) {
  require_regression(d, 1);
  p.check();
  double total = 0.0;
  for (Index i = 0; i < d.size(); ++i) {
    const double r = forward(p, d.x(i, 0)) - d.y[i];
    total += r * r;
  }
  return total;
}

VectorXd grad_relu_loss(const ReluRegParams& p, const Dataset& d) {
  require_regression(d, 1);
  p.check();
  const Index m = p.units();
  VectorXd g = VectorXd::Zero(p.flat_size());
  for (Index i = 0; i < d.size(); ++i) {
    const double x = d.x(i, 0);
    const double r2 = 2.0 * (forward(p, x) - d.y[i]);
    for (Index j = 0; j < m; ++j) {
      const double a = p.w[j] * x + p.b[j];
      const double s = relu_slope(a);
      g[j] += r2 * p.v[j] * s * x;
      g[m + j] += r2 * p.v[j] * s;
      g[2 * m + j] += r2 * relu(a);
    }
    g[3 * m] += r2;
  }
  return g;
}

std::vector<MatrixXd> pre_activations(const DeepReluParams& p, const Dataset& d) {
  p.check();
  if (d.dim() != p.input_dim()) throw InvalidInput("deep_relu input dimension does not match dataset");
  std::vector<MatrixXd> out;
  MatrixXd h = d.x.transpose();
  for (std::size_t n = 0; n + 1 < p.layers.size(); ++n) {
    MatrixXd a = (p.layers[n].w * h).colwise() + p.layers[n].b;
    h = a.cwiseMax(0.0);
    out.push_back(std::move(a));
  }
  return out;
}

double deep_relu_loss(const DeepReluParams& p, const Dataset& d) {
  require_regression(d, p.input_dim());
  p.check();
  double total = 0.0;
  for (Index i = 0; i < d.size(); ++i) {
    const double r = forward(p, VectorXd(d.x.row(i).transpose())) - d.y[i];
    total += r * r;
  }
  return total;
}

VectorXd grad_deep_relu_loss(const DeepReluParams& p, const Dataset& d) {
  require_regression(d, p.input_dim());
  p.check();
  const std::size_t k = p.layers.size();

  // Offsets of each layer's block inside the flat vector.
  std::vector<Index> offset(k);
  Index at = 0;
  for (std::size_t n = 0; n < k; ++n) {
    offset[n] = at;
    at += p.layers[n].w.size() + p.layers[n].b.size();
  }

  VectorXd g = VectorXd::Zero(at);
  std::vector<VectorXd> h(k), a(k);
  for (Index i = 0; i < d.size(); ++i) {
    h[0] = d.x.row(i).transpose();
    for (std::size_t n = 0; n + 1 < k; ++n) {
      a[n] = p.layers[n].w * h[n] + p.layers[n].b;
      h[n + 1] = a[n].cwiseMax(0.0);
    }
    const double out = (p.layers.back().w * h[k - 1])(0) + p.layers.back().b[0];
    VectorXd delta(1);
    delta[0] = 2.0 * (out - d.y[i]);

    for (std::size_t n = k; n-- > 0;) {
      const auto& layer = p.layers[n];
      Index pos = offset[n];
      for (Index r = 0; r < layer.w.rows(); ++r)
        for (Index c = 0; c < layer.w.cols(); ++c) g[pos++] += delta[r] * h[n][c];
      for (Index r = 0; r < layer.b.size(); ++r) g[pos++] += delta[r];
      if (n == 0) break;
      VectorXd back = layer.w.transpose() * delta;
      for (Index r = 0; r < back.size(); ++r) back[r] *= relu_slope(a[n - 1][r]);
      delta = std::move(back);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

const char* arch_name(const AnyParams& p) {
  return std::visit(
      [](const auto& q) -> const char* {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Sigmoid221Params>) return "sigmoid221";
        else if constexpr (std::is_same_v<T, ReluRegParams>) return "relu_reg";
        else if constexpr (std::is_same_v<T, TwoH1Params>) return "two_h1";
        else return "deep_relu";
      },
      p);
}

LossKind natural_loss(const AnyParams& p) {
  return std::holds_alternative<Sigmoid221Params>(p) || std::holds_alternative<TwoH1Params>(p)
             ? LossKind::Nll
             : LossKind::Mse;
}

VectorXd flatten(const AnyParams& p) {
  return std::visit([](const auto& q) -> VectorXd { return q.flatten(); }, p);
}

AnyParams with_flat(const AnyParams& shape, const Eigen::Ref<const VectorXd>& flat) {
  return std::visit(
      [&](const auto& q) -> AnyParams {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Sigmoid221Params>) {
          return Sigmoid221Params::unflatten(flat);
        } else if constexpr (std::is_same_v<T, ReluRegParams>) {
          if (flat.size() != q.flat_size()) throw InvalidInput("relu_reg flat vector has wrong length");
          return ReluRegParams::unflatten(flat);
        } else if constexpr (std::is_same_v<T, TwoH1Params>) {
          if (flat.size() != q.flat_size()) throw InvalidInput("two_h1 flat vector has wrong length");
          return TwoH1Params::unflatten(q.activation, flat);
        } else {
          return q.with_flat(flat);
        }
      },
      shape);
}

void check_compatible(const AnyParams& p, const Dataset& d, LossKind kind) {
  if (kind != natural_loss(p))
    throw InvalidInput(std::string("loss kind does not match architecture ") + arch_name(p));
  if (!flatten(p).allFinite()) throw InvalidInput("parameters contain non-finite values");
  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Sigmoid221Params>) {
          require_classification_2d(d);
        } else if constexpr (std::is_same_v<T, TwoH1Params>) {
          q.check();
          require_classification_2d(d);
        } else if constexpr (std::is_same_v<T, ReluRegParams>) {
          q.check();
          require_regression(d, 1);
        } else {
          q.check();
          require_regression(d, q.input_dim());
        }
      },
      p);
}

double loss(const AnyParams& p, const Dataset& d, LossKind kind) {
  check_compatible(p, d, kind);
  return std::visit(
      [&](const auto& q) -> double {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Sigmoid221Params> || std::is_same_v<T, TwoH1Params>)
          return nll_loss(q, d);
        else if constexpr (std::is_same_v<T, ReluRegParams>)
          return relu_loss(q, d);
        else
          return deep_relu_loss(q, d);
      },
      p);
}

VectorXd gradient(const AnyParams& p, const Dataset& d, LossKind kind) {
  check_compatible(p, d, kind);
  return std::visit(
      [&](const auto& q) -> VectorXd {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Sigmoid221Params> || std::is_same_v<T, TwoH1Params>)
          return grad_nll(q, d);
        else if constexpr (std::is_same_v<T, ReluRegParams>)
          return grad_relu_loss(q, d);
        else
          return grad_deep_relu_loss(q, d);
      },
      p);
}

void require_smooth(const AnyParams& p, const Dataset& d, double tol) {
  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, ReluRegParams>) {
          for (Index i = 0; i < d.size(); ++i)
            for (Index j = 0; j < q.units(); ++j)
              if (std::abs(q.w[j] * d.x(i, 0) + q.b[j]) <= tol)
                throw NonSmoothPoint(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        } else if constexpr (std::is_same_v<T, TwoH1Params>) {
          if (q.activation != Activation::Relu) return;
          for (Index i = 0; i < d.size(); ++i)
            for (Index j = 0; j < q.width(); ++j)
              if (std::abs(q.w1(j, 0) * d.x(i, 0) + q.w1(j, 1) * d.x(i, 1) + q.b1[j]) <= tol)
                throw NonSmoothPoint(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        } else if constexpr (std::is_same_v<T, DeepReluParams>) {
          const auto pre = pre_activations(q, d);
          for (std::size_t n = 0; n < pre.size(); ++n)
            for (Index i = 0; i < pre[n].cols(); ++i)
              for (Index j = 0; j < pre[n].rows(); ++j)
                if (std::abs(pre[n](j, i)) <= tol)
                  throw NonSmoothPoint(static_cast<std::size_t>(i), static_cast<std::size_t>(j), n + 1);
        }
      },
      p);
}

MatrixXd hessian_fd(const GradientFn& grad, const VectorXd& at, double step) {
  const Index n = at.size();
  MatrixXd h(n, n);
  VectorXd probe = at;
  for (Index i = 0; i < n; ++i) {
    probe[i] = at[i] + step;
    const VectorXd up = grad(probe);
    probe[i] = at[i] - step;
    const VectorXd down = grad(probe);
    probe[i] = at[i];
    h.col(i) = (up - down) / (2.0 * step);
  }
  return (h + h.transpose()) / 2.0;
}

MatrixXd hessian(const AnyParams& p, const Dataset& d, LossKind kind, double step) {
  check_compatible(p, d, kind);
  require_smooth(p, d);
  return hessian_fd([&](const VectorXd& f) { return gradient(with_flat(p, f), d, kind); }, flatten(p),
                    step);
}

}  // namespace nmlab
